//! Trial orchestration: steps agents in lockstep, routes map snapshots to
//! the control agent, applies the termination rule, then runs both
//! segmentation methods and computes the full metric suite.
//!
//! A trial is a pure function of its configuration. Every stochastic draw
//! comes from a per-agent substream of the master seed (stream = agent id),
//! so adding an agent never perturbs the draws of existing agents and
//! replaying a configuration is bit-identical.

use std::collections::BTreeSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, AgentState, StepOutcome};
use crate::control::{
    dispersion_incentives, rebase_map, CollectiveMap, ControlError, IncentiveConfig, MergeConfig,
};
use crate::geometry::{Point, Pose};
use crate::grid::LabelGrid;
use crate::metrics::{
    area_coverage, avg_center_offset_error, dispersion, macro_iou, precision_recall_ap,
    topology_match, MetricsError, TrialReport, VisitTracker,
};
use crate::ontology::{Ontology, OntologyError};
use crate::scenario::{load_scenario, ScenarioError, ScenarioSpec};
use crate::segmentation::{
    branch_segment, grid_segment, rasterize_fragments, rasterize_grid, BranchError, BranchParams,
    Fragment, GridParams, GridSegment,
};
use crate::semantics::SemanticsError;

#[derive(Debug, thiserror::Error)]
pub enum TrialError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Complete trial configuration, readable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialConfig {
    /// Scenario file path (ignored when the world is passed in memory).
    pub scenario: String,
    /// Ontology file path (ignored when passed in memory).
    pub ontology: String,
    pub agent_count: usize,
    pub agent: AgentConfig,
    pub merge: MergeConfig,
    pub incentive: IncentiveConfig,
    /// Blend weight of the semantics engine, in (0, 1).
    pub alpha: f64,
    pub grid_threshold: f64,
    pub sparsity_floor: usize,
    /// Branch clustering seed position; defaults to the world centre.
    pub nnn_seed_position: Option<[f64; 2]>,
    pub nnn_momentum: usize,
    /// Agents snapshot their maps to the control agent at this cadence.
    pub sync_interval_s: u64,
    /// Hard step bound guarding pathological configs.
    pub step_cap: u64,
    pub topology_radius_km: f64,
    pub seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            scenario: String::new(),
            ontology: String::new(),
            agent_count: 3,
            agent: AgentConfig::default(),
            merge: MergeConfig::default(),
            incentive: IncentiveConfig::default(),
            alpha: 0.5,
            grid_threshold: 0.6,
            sparsity_floor: 4,
            nnn_seed_position: None,
            nnn_momentum: 0,
            sync_interval_s: 10,
            step_cap: 1_000_000,
            topology_radius_km: 0.05,
            seed: 0,
        }
    }
}

impl TrialConfig {
    pub fn from_json(text: &str) -> Result<Self, TrialError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrialError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<(), TrialError> {
        if self.agent_count == 0 {
            return Err(TrialError::InvalidConfig("agent_count must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(TrialError::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.agent.sigma_drift_km < 0.0
            || self.agent.sensor.sigma_range_km < 0.0
            || self.agent.sensor.sigma_bearing_rad < 0.0
        {
            return Err(TrialError::InvalidConfig("sigmas must be >= 0".into()));
        }
        if self.agent.speed_km_s <= 0.0 || self.agent.sweep_width_km <= 0.0 {
            return Err(TrialError::InvalidConfig(
                "speed and sweep width must be positive".into(),
            ));
        }
        if self.sync_interval_s == 0 {
            return Err(TrialError::InvalidConfig("sync interval must be >= 1".into()));
        }
        self.merge.validate()?;
        Ok(())
    }
}

/// Everything a trial produces besides the report row.
pub struct TrialOutput {
    pub report: TrialReport,
    pub collective: CollectiveMap,
    pub grid_leaves: Vec<GridSegment>,
    pub fragments: Vec<Fragment>,
    pub truth_grid: LabelGrid,
    pub pred_grid_grid: LabelGrid,
    pub pred_grid_branch: LabelGrid,
}

fn start_poses(spec: &ScenarioSpec, agent_count: usize) -> Vec<Pose> {
    let mut poses = Vec::with_capacity(agent_count);
    for i in 0..agent_count {
        let heading = i as f64 * std::f64::consts::TAU / agent_count as f64;
        if let Some(s) = spec.agent_starts.get(i) {
            poses.push(Pose::new(s[0], s[1], heading));
        } else {
            // Deterministic fill along the diagonal for missing starts.
            let f = (i + 1) as f64 / (agent_count + 1) as f64;
            poses.push(Pose::new(
                spec.bounds.width_km * f,
                spec.bounds.height_km * f,
                heading,
            ));
        }
    }
    poses
}

/// Run one trial on an in-memory world.
pub fn run_trial(
    spec: &ScenarioSpec,
    ontology: &Ontology,
    cfg: &TrialConfig,
) -> Result<TrialOutput, TrialError> {
    cfg.validate()?;
    spec.validate(ontology)?;

    let mut agents: Vec<AgentState> = start_poses(spec, cfg.agent_count)
        .into_iter()
        .enumerate()
        .map(|(id, pose)| AgentState::new(id, pose, cfg.agent))
        .collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.agent_count)
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(id as u64 + 1);
            rng
        })
        .collect();

    let static_total = spec
        .features
        .iter()
        .filter(|f| f.resolve_static(ontology))
        .count();
    let dynamic_total = spec.features.len() - static_total;

    // Incentives disperse agents until they sit a quarter-diagonal away from
    // the centre of mass; past that they random-walk freely.
    let incentive_cfg = IncentiveConfig {
        gain: cfg.incentive.gain,
        distance_cap_km: cfg
            .incentive
            .distance_cap_km
            .or(Some(spec.bounds.diagonal_km() * 0.25)),
    };

    let mut collective = CollectiveMap::new(cfg.merge)?;
    let mut tracker = VisitTracker::new(&spec.bounds, cfg.agent.sweep_width_km);
    let mut dispersion_samples: Vec<Vec<Point>> = Vec::new();
    let mut er_series: Vec<f64> = Vec::new();
    let mut discovered_static: BTreeSet<usize> = BTreeSet::new();

    let mut elapsed: u64 = 0;
    let mut cap_reached = false;
    loop {
        if elapsed >= cfg.step_cap {
            cap_reached = true;
            break;
        }
        elapsed += 1;

        let believed: Vec<(usize, Point)> = agents
            .iter()
            .map(|a| (a.id, a.believed_pose.position()))
            .collect();
        let incentives = dispersion_incentives(&believed, &incentive_cfg);

        for (agent, rng) in agents.iter_mut().zip(rngs.iter_mut()) {
            let incentive = incentives
                .iter()
                .find(|(id, _)| *id == agent.id)
                .map(|(_, b)| *b)
                .unwrap_or(Point::new(0.0, 0.0));
            if let StepOutcome::Acquired(id) = agent.step(spec, ontology, &incentive, rng) {
                discovered_static.insert(id as usize);
            }
            tracker.mark(&agent.true_pose.position());
        }

        dispersion_samples.push(agents.iter().map(|a| a.true_pose.position()).collect());

        // Mean centre-offset error over the union of local maps.
        let (mut err_sum, mut count) = (0.0, 0usize);
        for agent in &agents {
            for lm in agent.map.iter() {
                err_sum += lm.offset_error_km();
                count += 1;
            }
        }
        er_series.push(if count > 0 { err_sum / count as f64 } else { 0.0 });

        if elapsed.is_multiple_of(cfg.sync_interval_s) {
            for agent in &agents {
                let rebased = rebase_map(&agent.map, &agent.start_pose)?;
                collective.merge_map(ontology, &rebased)?;
            }
        }

        let observed_dynamic: BTreeSet<usize> = agents
            .iter()
            .flat_map(|a| a.observed_dynamic.iter().copied())
            .collect();
        if discovered_static.len() == static_total && observed_dynamic.len() == dynamic_total {
            break;
        }
    }

    // Final snapshot so the collective map reflects every acquisition.
    for agent in &agents {
        let rebased = rebase_map(&agent.map, &agent.start_pose)?;
        collective.merge_map(ontology, &rebased)?;
    }

    let observed_dynamic: BTreeSet<usize> = agents
        .iter()
        .flat_map(|a| a.observed_dynamic.iter().copied())
        .collect();

    // Segmentation, both methods.
    let grid_params = GridParams {
        alpha: cfg.alpha,
        threshold: cfg.grid_threshold,
        sparsity_floor: cfg.sparsity_floor,
    };
    let grid_leaves = grid_segment(collective.map(), &spec.bounds, ontology, &grid_params)?;
    let seed_position = cfg
        .nnn_seed_position
        .map(|p| Point::new(p[0], p[1]))
        .unwrap_or_else(|| Point::new(spec.bounds.width_km * 0.5, spec.bounds.height_km * 0.5));
    let branch_params = BranchParams {
        alpha: cfg.alpha,
        seed_position,
        momentum: cfg.nnn_momentum,
        adjacency_km: None,
    };
    let fragments = branch_segment(collective.map(), ontology, &branch_params)?;

    let truth_grid = spec.ground_truth_grid();
    let pred_grid_grid = rasterize_grid(&grid_leaves, &spec.bounds);
    let pred_grid_branch = rasterize_fragments(&fragments, &spec.bounds);

    // Metrics.
    let agent_vw: Vec<(f64, f64)> = agents
        .iter()
        .map(|a| (a.config.speed_km_s, a.config.sweep_width_km))
        .collect();
    let (searched, coverage_ratio) =
        area_coverage(&agent_vw, elapsed as f64, spec.area_km2());
    let (avg_disp, norm_disp) = dispersion(&dispersion_samples, &spec.bounds);
    let er_final = avg_center_offset_error(collective.map());
    let static_features: Vec<crate::scenario::Feature> = spec
        .features
        .iter()
        .filter(|f| f.resolve_static(ontology))
        .cloned()
        .collect();
    let (topo_coverage, topo_accuracy) = topology_match(
        collective.map(),
        &static_features,
        ontology,
        cfg.topology_radius_km,
    )?;
    let grid_ap = precision_recall_ap(&pred_grid_grid, &truth_grid);
    let branch_ap = precision_recall_ap(&pred_grid_branch, &truth_grid);

    let report = TrialReport {
        scenario: spec.name.clone(),
        seed: cfg.seed,
        agent_count: cfg.agent_count,
        elapsed_s: elapsed,
        total_area_km2: spec.area_km2(),
        searched_area_km2: searched,
        coverage_ratio,
        tracked_coverage_ratio: tracker.ratio(),
        avg_dispersion_km: avg_disp,
        norm_dispersion: norm_disp,
        er_final_km: er_final,
        er_series_km: er_series,
        topology_coverage: topo_coverage,
        topology_accuracy_km: topo_accuracy,
        features_total: spec.features.len(),
        features_discovered: discovered_static.len() + observed_dynamic.len(),
        collective_landmarks: collective.len(),
        grid_macro_iou: macro_iou(&pred_grid_grid, &truth_grid),
        grid_map: grid_ap.macro_map,
        grid_micro_ap: grid_ap.micro_ap,
        branch_macro_iou: macro_iou(&pred_grid_branch, &truth_grid),
        branch_map: branch_ap.macro_map,
        branch_micro_ap: branch_ap.micro_ap,
        step_cap_reached: cap_reached,
    };

    Ok(TrialOutput {
        report,
        collective,
        grid_leaves,
        fragments,
        truth_grid,
        pred_grid_grid,
        pred_grid_branch,
    })
}

/// Load the scenario and ontology named by a config and run the trial.
pub fn run_trial_config(cfg: &TrialConfig) -> Result<TrialOutput, TrialError> {
    let ontology = Ontology::load(&cfg.ontology)?;
    let spec = load_scenario(&cfg.scenario, &ontology)?;
    run_trial(&spec, &ontology, cfg)
}

/// Run a batch of configs; each row keeps its own success or failure and the
/// output order matches the input order.
pub fn run_batch(configs: &[TrialConfig]) -> Vec<Result<TrialReport, TrialError>> {
    configs
        .iter()
        .map(|cfg| run_trial_config(cfg).map(|out| out.report))
        .collect()
}

/// As [`run_batch`] for in-memory worlds.
pub fn run_batch_in_memory(
    trials: &[(ScenarioSpec, Ontology, TrialConfig)],
) -> Vec<Result<TrialReport, TrialError>> {
    trials
        .iter()
        .map(|(spec, ontology, cfg)| run_trial(spec, ontology, cfg).map(|out| out.report))
        .collect()
}
