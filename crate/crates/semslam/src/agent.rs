//! The intelligent edge agent: incentive-biased random-walk search,
//! simulated feature detection, target pursuit, drifting odometry, local
//! landmark-map construction and oracle correction.
//!
//! Each agent owns its state exclusively and draws every random number from
//! its own seeded stream, so a stepped agent is a pure function of
//! `(state, world, rng stream)` and replays bit-identically.
//!
//! The detector is a parametric stand-in for a vision pipeline: features
//! within range and field of view appear with probability `p_detect`,
//! carrying a sampled confidence and range/bearing perturbed by zero-mean
//! Gaussian noise. Odometry drift is an accumulating Gaussian bias on the
//! believed pose, the simplest model that compounds error over time.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Point, Pose};
use crate::landmark::{Landmark, LandmarkMap, MapFrame};
use crate::ontology::{Ontology, OntologyError};
use crate::scenario::ScenarioSpec;

/// Simulated second per step.
pub const DT_S: f64 = 1.0;

/// Detection sensor parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    pub range_km: f64,
    pub fov_rad: f64,
    pub p_detect: f64,
    pub sigma_range_km: f64,
    pub sigma_bearing_rad: f64,
    pub confidence_min: f64,
    pub confidence_max: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            range_km: 0.1,
            fov_rad: 2.0 * std::f64::consts::FRAC_PI_3,
            p_detect: 0.9,
            sigma_range_km: 0.002,
            sigma_bearing_rad: 0.01,
            confidence_min: 0.6,
            confidence_max: 1.0,
        }
    }
}

/// Oracle corrector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub enabled: bool,
    pub theta_km: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            theta_km: 0.05,
        }
    }
}

/// Full per-agent parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    /// Speed V, km per simulated second.
    pub speed_km_s: f64,
    /// Sweep width W for the coverage estimate, km.
    pub sweep_width_km: f64,
    pub sensor: SensorConfig,
    /// Per-step standard deviation of the drift bias increment, km.
    pub sigma_drift_km: f64,
    /// Maximum random-walk turn per step, rad.
    pub max_turn_rad: f64,
    /// Measured range at which a pursued target is acquired, km.
    pub acquisition_km: f64,
    /// Pursuit step budget before a target is abandoned.
    pub approach_budget: usize,
    pub oracle: OracleConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            speed_km_s: 0.005,
            sweep_width_km: 0.2,
            sensor: SensorConfig::default(),
            sigma_drift_km: 0.0005,
            max_turn_rad: 0.6,
            acquisition_km: 0.02,
            approach_budget: 500,
            oracle: OracleConfig::default(),
        }
    }
}

/// One sensed feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub feature_id: usize,
    pub class: String,
    pub confidence: f64,
    pub range_km: f64,
    /// Bearing relative to the agent heading, rad.
    pub bearing_rad: f64,
    pub is_static: bool,
}

/// First sighting of a dynamic feature, kept out of the landmark map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicObservation {
    pub feature_id: usize,
    pub class: String,
    pub confidence: f64,
    pub tick: u64,
}

/// Static/dynamic routing decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mobility {
    Static,
    Dynamic,
}

/// The ontology attribute for a detection's class.
pub fn classify_static_dynamic(
    ontology: &Ontology,
    detection: &Detection,
) -> Result<Mobility, OntologyError> {
    Ok(if ontology.is_static_class(&detection.class)? {
        Mobility::Static
    } else {
        Mobility::Dynamic
    })
}

#[derive(Debug, Clone, PartialEq)]
struct Pursuit {
    feature_id: usize,
    steps: usize,
}

/// What an agent did in one simulated second.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Walked,
    Pursued,
    Acquired(u64),
    Abandoned,
}

/// Outcome of running a pursuit to completion.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproachOutcome {
    Acquired(Landmark),
    Abandoned,
}

/// Mutable state of one edge agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub config: AgentConfig,
    /// Start pose in the world frame; the control agent knows it exactly.
    pub start_pose: Pose,
    pub true_pose: Pose,
    pub believed_pose: Pose,
    /// Accumulated drift bias (believed minus true), km.
    pub drift_bias: Point,
    /// Local landmark map, agent-local frame (origin at start pose).
    pub map: LandmarkMap,
    /// First sightings of dynamic features.
    pub dynamic_log: Vec<DynamicObservation>,
    /// Feature ids this agent has acquired as landmarks.
    pub acquired: BTreeSet<usize>,
    /// Dynamic feature ids this agent has observed.
    pub observed_dynamic: BTreeSet<usize>,
    pursuit: Option<Pursuit>,
    tick: u64,
}

impl AgentState {
    pub fn new(id: usize, start: Pose, config: AgentConfig) -> Self {
        Self {
            id,
            config,
            start_pose: start,
            true_pose: start,
            believed_pose: start,
            drift_bias: Point::new(0.0, 0.0),
            map: LandmarkMap::new(MapFrame::AgentLocal),
            dynamic_log: Vec::new(),
            acquired: BTreeSet::new(),
            observed_dynamic: BTreeSet::new(),
            pursuit: None,
            tick: 0,
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn is_pursuing(&self) -> bool {
        self.pursuit.is_some()
    }

    /// True range and world bearing from the agent's true pose to a point.
    fn range_bearing(&self, target: &Point) -> (f64, f64) {
        let dx = target.x - self.true_pose.x;
        let dy = target.y - self.true_pose.y;
        let range = (dx * dx + dy * dy).sqrt();
        let bearing = wrap_angle(dy.atan2(dx) - self.true_pose.heading);
        (range, bearing)
    }

    /// Advance the true pose by one step along `heading`, reflecting at the
    /// world bounds, then accumulate drift onto the believed pose.
    fn advance(&mut self, heading: f64, world: &ScenarioSpec, rng: &mut impl Rng) {
        let v = self.config.speed_km_s * DT_S;
        let mut vx = v * heading.cos();
        let mut vy = v * heading.sin();
        let (w, h) = (world.bounds.width_km, world.bounds.height_km);

        let mut nx = self.true_pose.x + vx;
        let mut ny = self.true_pose.y + vy;
        if nx < 0.0 {
            nx = -nx;
            vx = -vx;
        } else if nx > w {
            nx = 2.0 * w - nx;
            vx = -vx;
        }
        if ny < 0.0 {
            ny = -ny;
            vy = -vy;
        } else if ny > h {
            ny = 2.0 * h - ny;
            vy = -vy;
        }
        self.true_pose.x = nx.clamp(0.0, w);
        self.true_pose.y = ny.clamp(0.0, h);
        self.true_pose.heading = wrap_angle(vy.atan2(vx));
        self.apply_drift(rng);
    }

    /// Accumulate one Gaussian drift increment and refresh the believed pose
    /// as true pose plus accumulated bias. With zero drift the believed pose
    /// tracks the true pose exactly.
    pub fn apply_drift(&mut self, rng: &mut impl Rng) {
        let sigma = self.config.sigma_drift_km;
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("sigma >= 0");
            self.drift_bias.x += normal.sample(rng);
            self.drift_bias.y += normal.sample(rng);
        }
        self.believed_pose = Pose::new(
            self.true_pose.x + self.drift_bias.x,
            self.true_pose.y + self.drift_bias.y,
            self.true_pose.heading,
        );
    }

    /// Sense every feature within range and field of view; each appears with
    /// probability `p_detect`, with noisy range/bearing and a sampled
    /// confidence.
    pub fn sense(
        &self,
        world: &ScenarioSpec,
        ontology: &Ontology,
        rng: &mut impl Rng,
    ) -> Vec<Detection> {
        let s = &self.config.sensor;
        let mut detections = Vec::new();
        for (feature_id, feature) in world.features.iter().enumerate() {
            let (range, bearing) = self.range_bearing(&feature.position());
            if range > s.range_km || bearing.abs() > s.fov_rad * 0.5 {
                continue;
            }
            if s.p_detect < 1.0 && rng.gen::<f64>() >= s.p_detect {
                continue;
            }
            let (noisy_range, noisy_bearing) = if s.sigma_range_km > 0.0 || s.sigma_bearing_rad > 0.0
            {
                let nr = Normal::new(0.0, s.sigma_range_km.max(1e-300)).unwrap();
                let nb = Normal::new(0.0, s.sigma_bearing_rad.max(1e-300)).unwrap();
                (
                    (range + nr.sample(rng)).max(0.0),
                    wrap_angle(bearing + nb.sample(rng)),
                )
            } else {
                (range, bearing)
            };
            let confidence = if s.confidence_max > s.confidence_min {
                rng.gen_range(s.confidence_min..=s.confidence_max)
            } else {
                s.confidence_max
            };
            detections.push(Detection {
                feature_id,
                class: feature.class.clone(),
                confidence,
                range_km: noisy_range.min(s.range_km),
                bearing_rad: noisy_bearing,
                is_static: feature.resolve_static(ontology),
            });
        }
        detections
    }

    /// Pick the closest static detection; ties resolve by smaller absolute
    /// bearing, then lower feature id.
    pub fn select_target<'d>(&self, detections: &'d [Detection]) -> Option<&'d Detection> {
        detections
            .iter()
            .filter(|d| d.is_static && !self.acquired.contains(&d.feature_id))
            .min_by(|a, b| {
                a.range_km
                    .total_cmp(&b.range_km)
                    .then(a.bearing_rad.abs().total_cmp(&b.bearing_rad.abs()))
                    .then(a.feature_id.cmp(&b.feature_id))
            })
    }

    /// Begin pursuing a detection's feature.
    pub fn start_pursuit(&mut self, detection: &Detection) {
        self.pursuit = Some(Pursuit {
            feature_id: detection.feature_id,
            steps: 0,
        });
    }

    /// One pursuit step: measure the target, acquire it when close enough,
    /// otherwise steer toward the measured bearing and advance. Returns the
    /// step outcome; pursuit state is cleared on acquisition or abandonment.
    pub fn pursuit_step(
        &mut self,
        world: &ScenarioSpec,
        ontology: &Ontology,
        rng: &mut impl Rng,
    ) -> StepOutcome {
        let Some(pursuit) = self.pursuit.clone() else {
            return StepOutcome::Walked;
        };
        let feature = &world.features[pursuit.feature_id];
        let s = self.config.sensor;
        let (range, bearing) = self.range_bearing(&feature.position());
        let (m_range, m_bearing) = if s.sigma_range_km > 0.0 || s.sigma_bearing_rad > 0.0 {
            let nr = Normal::new(0.0, s.sigma_range_km.max(1e-300)).unwrap();
            let nb = Normal::new(0.0, s.sigma_bearing_rad.max(1e-300)).unwrap();
            (
                (range + nr.sample(rng)).max(0.0),
                wrap_angle(bearing + nb.sample(rng)),
            )
        } else {
            (range, bearing)
        };

        if m_range <= self.config.acquisition_km {
            let confidence = if s.confidence_max > s.confidence_min {
                rng.gen_range(s.confidence_min..=s.confidence_max)
            } else {
                s.confidence_max
            };
            let landmark = self.acquire(pursuit.feature_id, m_range, m_bearing, confidence, world, ontology);
            self.pursuit = None;
            if self.config.oracle.enabled {
                self.oracle_correct(self.config.oracle.theta_km);
            }
            return StepOutcome::Acquired(landmark);
        }
        if pursuit.steps >= self.config.approach_budget {
            self.pursuit = None;
            return StepOutcome::Abandoned;
        }

        // Proportional steering toward the measured bearing, clamped so the
        // target stays within the field of view while closing.
        let turn = m_bearing.clamp(-self.config.max_turn_rad * 2.0, self.config.max_turn_rad * 2.0);
        let heading = wrap_angle(self.true_pose.heading + turn);
        self.advance(heading, world, rng);
        if let Some(p) = self.pursuit.as_mut() {
            p.steps += 1;
        }
        StepOutcome::Pursued
    }

    /// Insert the pursued feature into the local map from a measurement taken
    /// at the current believed pose. Returns the new landmark id.
    fn acquire(
        &mut self,
        feature_id: usize,
        m_range: f64,
        m_bearing: f64,
        confidence: f64,
        world: &ScenarioSpec,
        ontology: &Ontology,
    ) -> u64 {
        let feature = &world.features[feature_id];
        let angle = self.believed_pose.heading + m_bearing;
        let believed_world = Point::new(
            self.believed_pose.x + m_range * angle.cos(),
            self.believed_pose.y + m_range * angle.sin(),
        );
        let landmark = Landmark {
            id: feature_id as u64,
            class: feature.class.clone(),
            confidence,
            position: self.start_pose.to_local(&believed_world),
            true_position: self.start_pose.to_local(&feature.position()),
            is_static: feature.resolve_static(ontology),
            source_agent: self.id,
            observations: 1,
        };
        self.map.insert(landmark).expect("acquired set prevents duplicates");
        self.acquired.insert(feature_id);
        feature_id as u64
    }

    /// Run a pursuit to completion (the per-tick loop uses `pursuit_step`
    /// directly; this drives the same logic to a terminal outcome).
    pub fn approach_and_acquire(
        &mut self,
        target: &Detection,
        world: &ScenarioSpec,
        ontology: &Ontology,
        rng: &mut impl Rng,
    ) -> ApproachOutcome {
        self.start_pursuit(target);
        loop {
            match self.pursuit_step(world, ontology, rng) {
                StepOutcome::Acquired(id) => {
                    let lm = self
                        .map
                        .iter()
                        .find(|l| l.id == id)
                        .expect("just inserted")
                        .clone();
                    return ApproachOutcome::Acquired(lm);
                }
                StepOutcome::Abandoned => return ApproachOutcome::Abandoned,
                _ => {}
            }
        }
    }

    /// One incentive-biased random-walk step. The new heading blends a
    /// random turn with the incentive direction, weighted by the incentive
    /// magnitude (clamped to 1).
    pub fn random_walk_step(
        &mut self,
        world: &ScenarioSpec,
        incentive: &Point,
        rng: &mut impl Rng,
    ) {
        let random_heading =
            self.true_pose.heading + rng.gen_range(-self.config.max_turn_rad..=self.config.max_turn_rad);
        let weight = incentive.norm().min(1.0);
        let heading = if weight > 0.0 {
            let random_dir = Point::new(random_heading.cos(), random_heading.sin());
            let blend = random_dir
                .scale(1.0 - weight)
                .add(&incentive.normalized().scale(weight));
            if blend.norm() > 1e-12 {
                blend.y.atan2(blend.x)
            } else {
                random_heading
            }
        } else {
            random_heading
        };
        self.advance(wrap_angle(heading), world, rng);
    }

    /// Snap every landmark whose believed position lies within `theta_km` of
    /// its true position onto the true position, and subtract the mean
    /// residual of the newly corrected landmarks from the accumulated drift
    /// bias. Residuals are vectors in the local frame; the bias correction is
    /// applied in the world frame.
    pub fn oracle_correct(&mut self, theta_km: f64) {
        let mut residual_sum = Point::new(0.0, 0.0);
        let mut corrected = 0usize;
        for lm in self.map.iter_mut() {
            let err = lm.position.distance(&lm.true_position);
            if err > 0.0 && err <= theta_km {
                residual_sum = residual_sum.add(&lm.position.sub(&lm.true_position));
                corrected += 1;
                lm.position = lm.true_position;
            }
        }
        if corrected > 0 {
            let mean_local = residual_sum.scale(1.0 / corrected as f64);
            let mean_world = mean_local.rotated(self.start_pose.heading);
            self.drift_bias = self.drift_bias.sub(&mean_world);
            self.believed_pose = Pose::new(
                self.true_pose.x + self.drift_bias.x,
                self.true_pose.y + self.drift_bias.y,
                self.true_pose.heading,
            );
        }
    }

    /// One full simulated second: sense, log dynamics, then pursue or walk.
    pub fn step(
        &mut self,
        world: &ScenarioSpec,
        ontology: &Ontology,
        incentive: &Point,
        rng: &mut impl Rng,
    ) -> StepOutcome {
        self.tick += 1;
        let detections = self.sense(world, ontology, rng);
        for d in &detections {
            if !d.is_static && self.observed_dynamic.insert(d.feature_id) {
                self.dynamic_log.push(DynamicObservation {
                    feature_id: d.feature_id,
                    class: d.class.clone(),
                    confidence: d.confidence,
                    tick: self.tick,
                });
            }
        }
        if self.pursuit.is_some() {
            return self.pursuit_step(world, ontology, rng);
        }
        match self.select_target(&detections) {
            Some(target) => {
                let target = target.clone();
                self.start_pursuit(&target);
                self.pursuit_step(world, ontology, rng)
            }
            None => {
                self.random_walk_step(world, incentive, rng);
                StepOutcome::Walked
            }
        }
    }
}
