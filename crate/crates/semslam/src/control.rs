//! The control agent: rebases edge-agent maps into the collective frame,
//! merges landmarks under semantic/spatial rules, manages the discard store,
//! and issues dispersion incentives.
//!
//! ## Merge rules
//!
//! For each incoming landmark (already in the collective frame), in order:
//!
//! 1. While a semantically similar map entry lies within `merge_radius` of
//!    the incoming position, the pair collapses into one entry: the
//!    higher-confidence side supplies class and confidence, the position is
//!    the arithmetic mean of the two, and the entry keeps its map id. The
//!    collapse repeats until no similar entry is in radius, which is what
//!    keeps the post-merge separation invariant (no two similar landmarks
//!    within the merge radius). Outcome: merged.
//! 2. Otherwise, if no entry at all is within the radius, the landmark is
//!    added as a new entry. If dissimilar entries are in radius, it is added
//!    only when its confidence meets the floor and its nearest-neighbour
//!    separation meets the proximity tolerance; otherwise it goes to the
//!    discard store.
//! 3. After a discard, if at least `resurrection_threshold` stored discards
//!    of similar class lie within the proximity tolerance of the new one,
//!    they are cleared and a landmark is updated/inserted at their mean
//!    position, taking the class and the maximum confidence of the
//!    contributors. Outcome: resurrected.
//!
//! A merge pass needs exclusive access to the map; edge snapshots arrive by
//! value and are processed in insertion order, so the outcome sequence is a
//! deterministic function of input order and configuration.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::landmark::{Landmark, LandmarkMap, MapFrame};
use crate::ontology::Ontology;

#[derive(Debug, thiserror::Error)]
pub enum ControlError {
    #[error("expected a map in the {expected:?} frame, got {got:?}")]
    WrongFrame { expected: MapFrame, got: MapFrame },
    #[error("merge config invalid: {0}")]
    BadConfig(String),
}

/// Merge-pass parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MergeConfig {
    /// Radius `a` within which incoming landmarks are merge candidates, km.
    pub merge_radius_km: f64,
    /// Minimum separation from dissimilar neighbours for a new entry, km.
    pub proximity_tolerance_km: f64,
    /// Discards of similar class within tolerance needed to resurrect.
    pub resurrection_threshold: usize,
    /// Minimum confidence for a new entry near dissimilar neighbours.
    pub confidence_floor: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            merge_radius_km: 0.03,
            proximity_tolerance_km: 0.01,
            resurrection_threshold: 2,
            confidence_floor: 0.3,
        }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if self.merge_radius_km <= 0.0 || self.proximity_tolerance_km <= 0.0 {
            return Err(ControlError::BadConfig(
                "distances must be positive".into(),
            ));
        }
        if self.resurrection_threshold < 2 {
            return Err(ControlError::BadConfig(
                "resurrection threshold must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// What happened to one submitted landmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeOutcome {
    Merged,
    Added,
    Discarded,
    Resurrected,
}

#[derive(Debug, Clone, PartialEq)]
struct DiscardEntry {
    landmark: Landmark,
    seq: u64,
}

/// The shared collective map plus its discard store.
#[derive(Debug, Clone)]
pub struct CollectiveMap {
    map: LandmarkMap,
    discards: Vec<DiscardEntry>,
    config: MergeConfig,
    next_id: u64,
    seq: u64,
}

impl CollectiveMap {
    pub fn new(config: MergeConfig) -> Result<Self, ControlError> {
        config.validate()?;
        Ok(Self {
            map: LandmarkMap::new(MapFrame::Collective),
            discards: Vec::new(),
            config,
            next_id: 0,
            seq: 0,
        })
    }

    pub fn map(&self) -> &LandmarkMap {
        &self.map
    }

    pub fn config(&self) -> &MergeConfig {
        &self.config
    }

    pub fn discard_count(&self) -> usize {
        self.discards.len()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Nearest semantically similar entry within the merge radius.
    fn nearest_similar(&self, ontology: &Ontology, landmark: &Landmark) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, entry) in self.map.iter().enumerate() {
            let d = entry.position.distance(&landmark.position);
            if d > self.config.merge_radius_km {
                continue;
            }
            if !ontology
                .semantically_similar(&entry.class, &landmark.class)
                .unwrap_or(false)
            {
                continue;
            }
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Collapse an existing entry with an incoming landmark: winner class and
    /// confidence, mean position, the entry keeps its id.
    fn combine(existing: Landmark, incoming: &Landmark) -> Landmark {
        let incoming_wins = incoming.confidence > existing.confidence;
        let winner = if incoming_wins { incoming } else { &existing };
        Landmark {
            id: existing.id,
            class: winner.class.clone(),
            confidence: winner.confidence,
            position: existing.position.add(&incoming.position).scale(0.5),
            true_position: winner.true_position,
            is_static: true,
            source_agent: winner.source_agent,
            observations: existing.observations + incoming.observations,
        }
    }

    /// Repeatedly collapse `current` with similar in-radius entries, then
    /// insert it. Returns true when at least one collapse happened.
    fn insert_with_cascade(&mut self, ontology: &Ontology, mut current: Landmark) -> bool {
        let mut merged = false;
        while let Some(i) = self.nearest_similar(ontology, &current) {
            let existing = self.map.remove(i);
            current = Self::combine(existing, &current);
            merged = true;
        }
        self.map.insert(current).expect("unique id");
        merged
    }

    /// Apply the merge rules to one incoming landmark in the collective
    /// frame.
    pub fn merge_landmark(
        &mut self,
        ontology: &Ontology,
        incoming: &Landmark,
        frame: MapFrame,
    ) -> Result<MergeOutcome, ControlError> {
        if frame != MapFrame::Collective {
            return Err(ControlError::WrongFrame {
                expected: MapFrame::Collective,
                got: frame,
            });
        }

        if self.nearest_similar(ontology, incoming).is_some() {
            let mut current = incoming.clone();
            // The cascade assigns the first collapsed entry's id.
            current.id = u64::MAX;
            self.insert_with_cascade(ontology, current);
            return Ok(MergeOutcome::Merged);
        }

        // No similar candidate: look at dissimilar neighbours in radius.
        let mut min_sep = f64::INFINITY;
        for entry in self.map.iter() {
            let d = entry.position.distance(&incoming.position);
            if d <= self.config.merge_radius_km {
                min_sep = min_sep.min(d);
            }
        }
        let has_neighbors = min_sep.is_finite();
        if !has_neighbors
            || (incoming.confidence >= self.config.confidence_floor
                && min_sep >= self.config.proximity_tolerance_km)
        {
            let mut lm = incoming.clone();
            lm.id = self.fresh_id();
            self.map.insert(lm).expect("fresh id");
            return Ok(MergeOutcome::Added);
        }

        // Discard, then check for resurrection.
        self.seq += 1;
        self.discards.push(DiscardEntry {
            landmark: incoming.clone(),
            seq: self.seq,
        });
        let group: Vec<usize> = self
            .discards
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                ontology
                    .semantically_similar(&e.landmark.class, &incoming.class)
                    .unwrap_or(false)
                    && e.landmark.position.distance(&incoming.position)
                        <= self.config.proximity_tolerance_km
            })
            .map(|(i, _)| i)
            .collect();
        if group.len() < self.config.resurrection_threshold {
            return Ok(MergeOutcome::Discarded);
        }

        // Resurrect at the contributors' mean with their best confidence.
        let mut sum = Point::new(0.0, 0.0);
        let mut top: Option<&DiscardEntry> = None;
        for &i in &group {
            let e = &self.discards[i];
            sum = sum.add(&e.landmark.position);
            let better = match top {
                None => true,
                Some(t) => {
                    e.landmark.confidence > t.landmark.confidence
                        || (e.landmark.confidence == t.landmark.confidence && e.seq < t.seq)
                }
            };
            if better {
                top = Some(e);
            }
        }
        let mean = sum.scale(1.0 / group.len() as f64);
        let top = top.expect("group non-empty").landmark.clone();
        let count = group.len();
        let mut keep = Vec::new();
        for (i, e) in self.discards.drain(..).enumerate() {
            if !group.contains(&i) {
                keep.push(e);
            }
        }
        self.discards = keep;

        let resurrected = Landmark {
            id: u64::MAX,
            class: top.class,
            confidence: top.confidence,
            position: mean,
            true_position: top.true_position,
            is_static: true,
            source_agent: top.source_agent,
            observations: count as u32,
        };
        // Update a similar in-radius entry if one exists, else insert fresh;
        // the cascade keeps the separation invariant either way.
        if self.nearest_similar(ontology, &resurrected).is_some() {
            self.insert_with_cascade(ontology, resurrected);
        } else {
            let mut lm = resurrected;
            lm.id = self.fresh_id();
            self.map.insert(lm).expect("fresh id");
        }
        Ok(MergeOutcome::Resurrected)
    }

    /// Merge a rebased edge map landmark by landmark, in insertion order.
    pub fn merge_map(
        &mut self,
        ontology: &Ontology,
        edge_map: &LandmarkMap,
    ) -> Result<Vec<MergeOutcome>, ControlError> {
        if edge_map.frame != MapFrame::Collective {
            return Err(ControlError::WrongFrame {
                expected: MapFrame::Collective,
                got: edge_map.frame,
            });
        }
        edge_map
            .iter()
            .map(|lm| self.merge_landmark(ontology, lm, MapFrame::Collective))
            .collect()
    }

    /// Export with the documented record layout.
    pub fn to_export_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            class: &'a str,
            confidence: f64,
            x: f64,
            y: f64,
            source: usize,
            true_x: f64,
            true_y: f64,
        }
        #[derive(Serialize)]
        struct Export<'a> {
            landmarks: Vec<Record<'a>>,
        }
        let export = Export {
            landmarks: self
                .map
                .iter()
                .map(|lm| Record {
                    class: &lm.class,
                    confidence: lm.confidence,
                    x: lm.position.x,
                    y: lm.position.y,
                    source: lm.source_agent,
                    true_x: lm.true_position.x,
                    true_y: lm.true_position.y,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&export).expect("export serialization")
    }
}

/// Rebase an agent-local map into the collective frame using the agent's
/// known start pose: positions rotate by the start heading and translate by
/// the start position. True positions transform identically.
pub fn rebase_map(edge_map: &LandmarkMap, start_pose: &crate::geometry::Pose) -> Result<LandmarkMap, ControlError> {
    if edge_map.frame != MapFrame::AgentLocal {
        return Err(ControlError::WrongFrame {
            expected: MapFrame::AgentLocal,
            got: edge_map.frame,
        });
    }
    let mut out = LandmarkMap::new(MapFrame::Collective);
    for lm in edge_map.iter() {
        let mut rebased = lm.clone();
        rebased.position = start_pose.to_world(&lm.position);
        rebased.true_position = start_pose.to_world(&lm.true_position);
        out.insert(rebased).expect("ids preserved from source map");
    }
    Ok(out)
}

/// Incentive parameters for swarm dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IncentiveConfig {
    /// Magnitude of the per-agent bias vector (blend weight at 1.0).
    pub gain: f64,
    /// Agents farther than this from the GCM receive zero bias.
    pub distance_cap_km: Option<f64>,
}

impl Default for IncentiveConfig {
    fn default() -> Self {
        Self {
            gain: 0.3,
            distance_cap_km: None,
        }
    }
}

/// Per-agent unit bias pointing away from the global centre of mass of the
/// agent positions, scaled by the gain. A single agent (GCM on itself) and
/// agents beyond the cap get a zero bias.
pub fn dispersion_incentives(
    positions: &[(usize, Point)],
    config: &IncentiveConfig,
) -> Vec<(usize, Point)> {
    if positions.is_empty() {
        return Vec::new();
    }
    if positions.len() == 1 {
        return vec![(positions[0].0, Point::new(0.0, 0.0))];
    }
    let mut gcm = Point::new(0.0, 0.0);
    for (_, p) in positions {
        gcm = gcm.add(p);
    }
    let gcm = gcm.scale(1.0 / positions.len() as f64);
    positions
        .iter()
        .map(|(id, p)| {
            let away = p.sub(&gcm);
            let dist = away.norm();
            let capped = config.distance_cap_km.is_some_and(|cap| dist > cap);
            let bias = if dist == 0.0 || capped {
                Point::new(0.0, 0.0)
            } else {
                away.normalized().scale(config.gain)
            };
            (*id, bias)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::ontology::Ontology;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn merge_ontology() -> Ontology {
        Ontology::from_json(
            r#"{
                "environments": ["Urban", "Rural"],
                "feature_classes": [
                    { "name": "sedan", "static": true,
                      "superclasses": [{ "env": "Urban", "sp": 0.8 }],
                      "similarity_group": "car" },
                    { "name": "hatchback", "static": true,
                      "superclasses": [{ "env": "Urban", "sp": 0.7 }],
                      "similarity_group": "car" },
                    { "name": "tree", "static": true,
                      "superclasses": [{ "env": "Rural", "sp": 0.9 }] },
                    { "name": "barn", "static": true,
                      "superclasses": [{ "env": "Rural", "sp": 0.8 }] }
                ]
            }"#,
        )
        .unwrap()
    }

    fn lm(id: u64, class: &str, conf: f64, x: f64, y: f64) -> Landmark {
        Landmark {
            id,
            class: class.into(),
            confidence: conf,
            position: Point::new(x, y),
            true_position: Point::new(x, y),
            is_static: true,
            source_agent: 0,
            observations: 1,
        }
    }

    fn local_map(landmarks: Vec<Landmark>) -> LandmarkMap {
        let mut map = LandmarkMap::new(MapFrame::AgentLocal);
        for l in landmarks {
            map.insert(l).unwrap();
        }
        map
    }

    #[test]
    fn rebase_identity_translation_rotation() {
        let map = local_map(vec![lm(1, "tree", 0.9, 1.0, 0.0)]);

        let identity = rebase_map(&map, &Pose::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(identity.landmarks()[0].position, Point::new(1.0, 0.0));

        let translated = rebase_map(&map, &Pose::new(2.0, 3.0, 0.0)).unwrap();
        assert_eq!(translated.landmarks()[0].position, Point::new(3.0, 3.0));

        let rotated = rebase_map(&map, &Pose::new(0.0, 0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        let p = rotated.landmarks()[0].position;
        assert!(p.x.abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert_eq!(rotated.frame, MapFrame::Collective);
    }

    #[test]
    fn rebase_rejects_collective_input() {
        let mut map = LandmarkMap::new(MapFrame::Collective);
        map.insert(lm(1, "tree", 0.9, 0.0, 0.0)).unwrap();
        assert!(rebase_map(&map, &Pose::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn duplicate_submission_is_idempotent() {
        let o = merge_ontology();
        let mut cmap = CollectiveMap::new(MergeConfig::default()).unwrap();
        let a = lm(1, "tree", 0.9, 1.0, 1.0);
        assert_eq!(
            cmap.merge_landmark(&o, &a, MapFrame::Collective).unwrap(),
            MergeOutcome::Added
        );
        assert_eq!(
            cmap.merge_landmark(&o, &a, MapFrame::Collective).unwrap(),
            MergeOutcome::Merged
        );
        assert_eq!(cmap.len(), 1);
        assert_eq!(cmap.map().landmarks()[0].position, Point::new(1.0, 1.0));
    }

    #[test]
    fn merge_averages_position_and_keeps_confident_class() {
        let o = merge_ontology();
        let mut cmap = CollectiveMap::new(MergeConfig {
            merge_radius_km: 0.05,
            ..MergeConfig::default()
        })
        .unwrap();
        cmap.merge_landmark(&o, &lm(1, "sedan", 0.9, 0.0, 0.0), MapFrame::Collective)
            .unwrap();
        let outcome = cmap
            .merge_landmark(&o, &lm(2, "hatchback", 0.6, 0.02, 0.0), MapFrame::Collective)
            .unwrap();
        assert_eq!(outcome, MergeOutcome::Merged);
        assert_eq!(cmap.len(), 1);
        let entry = &cmap.map().landmarks()[0];
        assert_eq!(entry.class, "sedan");
        assert_eq!(entry.confidence, 0.9);
        assert!((entry.position.x - 0.01).abs() < 1e-15 && entry.position.y == 0.0);
    }

    #[test]
    fn wrong_frame_is_rejected() {
        let o = merge_ontology();
        let mut cmap = CollectiveMap::new(MergeConfig::default()).unwrap();
        assert!(cmap
            .merge_landmark(&o, &lm(1, "tree", 0.9, 0.0, 0.0), MapFrame::AgentLocal)
            .is_err());
    }

    #[test]
    fn resurrection_after_three_low_confidence_discards() {
        // Hand-stepped oracle for the rule sequence, threshold 3:
        //   an existing dissimilar high-confidence landmark sits at (0,0);
        //   three low-confidence "sedan" submissions land within tolerance
        //   of it and each other. Submissions 1-2: discarded (group < 3).
        //   Submission 3: group of 3 -> resurrected at their mean.
        let o = merge_ontology();
        let mut cmap = CollectiveMap::new(MergeConfig {
            merge_radius_km: 0.05,
            proximity_tolerance_km: 0.02,
            resurrection_threshold: 3,
            confidence_floor: 0.5,
        })
        .unwrap();
        cmap.merge_landmark(&o, &lm(0, "tree", 1.0, 0.0, 0.0), MapFrame::Collective)
            .unwrap();

        let subs = [
            lm(1, "sedan", 0.2, 0.004, 0.0),
            lm(2, "sedan", 0.25, 0.008, 0.0),
            lm(3, "sedan", 0.22, 0.006, 0.003),
        ];
        assert_eq!(
            cmap.merge_landmark(&o, &subs[0], MapFrame::Collective).unwrap(),
            MergeOutcome::Discarded
        );
        assert_eq!(
            cmap.merge_landmark(&o, &subs[1], MapFrame::Collective).unwrap(),
            MergeOutcome::Discarded
        );
        assert_eq!(
            cmap.merge_landmark(&o, &subs[2], MapFrame::Collective).unwrap(),
            MergeOutcome::Resurrected
        );
        assert_eq!(cmap.discard_count(), 0);
        assert_eq!(cmap.len(), 2);
        let resurrected = cmap
            .map()
            .iter()
            .find(|l| l.class == "sedan")
            .expect("resurrected entry");
        let mean = Point::new((0.004 + 0.008 + 0.006) / 3.0, 0.003 / 3.0);
        assert!((resurrected.position.x - mean.x).abs() < 1e-15);
        assert!((resurrected.position.y - mean.y).abs() < 1e-15);
        // Max confidence of the contributors.
        assert_eq!(resurrected.confidence, 0.25);
        assert_eq!(resurrected.observations, 3);
    }

    #[test]
    fn far_landmarks_all_add() {
        let o = merge_ontology();
        let mut cmap = CollectiveMap::new(MergeConfig::default()).unwrap();
        let map = {
            let mut m = LandmarkMap::new(MapFrame::Collective);
            for i in 0..10 {
                m.insert(lm(i, "tree", 0.9, i as f64, 0.0)).unwrap();
            }
            m
        };
        let outcomes = cmap.merge_map(&o, &map).unwrap();
        assert!(outcomes.iter().all(|m| *m == MergeOutcome::Added));
        assert_eq!(cmap.len(), 10);
    }

    #[test]
    fn merging_map_with_itself_keeps_entry_count() {
        let o = merge_ontology();
        let mut cmap = CollectiveMap::new(MergeConfig::default()).unwrap();
        let map = {
            let mut m = LandmarkMap::new(MapFrame::Collective);
            for i in 0..8 {
                m.insert(lm(i, "tree", 0.9, i as f64 * 0.5, 0.3)).unwrap();
            }
            m
        };
        cmap.merge_map(&o, &map).unwrap();
        let count = cmap.len();
        let outcomes = cmap.merge_map(&o, &map).unwrap();
        assert_eq!(cmap.len(), count);
        assert!(outcomes.iter().all(|m| *m == MergeOutcome::Merged));
    }

    // ── independent rule interpreter ────────────────────────────────────

    /// A from-scratch interpreter of the documented merge rules, sharing no
    /// code with `CollectiveMap`. Entries are plain tuples; scans are linear.
    struct RuleInterpreter {
        entries: Vec<(String, f64, Point, u32)>, // class, conf, pos, obs
        discards: Vec<(String, f64, Point, u64)>,
        next_seq: u64,
        cfg: MergeConfig,
    }

    impl RuleInterpreter {
        fn new(cfg: MergeConfig) -> Self {
            Self {
                entries: Vec::new(),
                discards: Vec::new(),
                next_seq: 0,
                cfg,
            }
        }

        fn submit(&mut self, o: &Ontology, class: &str, conf: f64, pos: Point) -> MergeOutcome {
            // Cascade of similar-in-radius collapses.
            let mut class = class.to_string();
            let mut conf = conf;
            let mut pos = pos;
            let mut obs = 1u32;
            let mut merged = false;
            loop {
                let mut nearest: Option<(usize, f64)> = None;
                for (i, (ec, _, ep, _)) in self.entries.iter().enumerate() {
                    let d = ep.distance(&pos);
                    if d <= self.cfg.merge_radius_km
                        && o.semantically_similar(ec, &class).unwrap()
                        && nearest.is_none_or(|(_, bd)| d < bd)
                    {
                        nearest = Some((i, d));
                    }
                }
                match nearest {
                    Some((i, _)) => {
                        let (ec, econf, epos, eobs) = self.entries.remove(i);
                        if conf > econf {
                            // incoming wins: keep class/conf
                        } else {
                            class = ec;
                            conf = econf;
                        }
                        pos = epos.add(&pos).scale(0.5);
                        obs += eobs;
                        merged = true;
                    }
                    None => break,
                }
            }
            if merged {
                self.entries.push((class, conf, pos, obs));
                return MergeOutcome::Merged;
            }
            let mut min_sep = f64::INFINITY;
            for (_, _, ep, _) in &self.entries {
                let d = ep.distance(&pos);
                if d <= self.cfg.merge_radius_km {
                    min_sep = min_sep.min(d);
                }
            }
            if !min_sep.is_finite()
                || (conf >= self.cfg.confidence_floor && min_sep >= self.cfg.proximity_tolerance_km)
            {
                self.entries.push((class, conf, pos, obs));
                return MergeOutcome::Added;
            }
            self.next_seq += 1;
            self.discards.push((class.clone(), conf, pos, self.next_seq));
            let group: Vec<usize> = self
                .discards
                .iter()
                .enumerate()
                .filter(|(_, (dc, _, dp, _))| {
                    o.semantically_similar(dc, &class).unwrap()
                        && dp.distance(&pos) <= self.cfg.proximity_tolerance_km
                })
                .map(|(i, _)| i)
                .collect();
            if group.len() < self.cfg.resurrection_threshold {
                return MergeOutcome::Discarded;
            }
            let mut sum = Point::new(0.0, 0.0);
            let mut top: Option<(String, f64, Point, u64)> = None;
            for &i in &group {
                let d = self.discards[i].clone();
                sum = sum.add(&d.2);
                let better = match &top {
                    None => true,
                    Some(t) => d.1 > t.1 || (d.1 == t.1 && d.3 < t.3),
                };
                if better {
                    top = Some(d);
                }
            }
            let mean = sum.scale(1.0 / group.len() as f64);
            let top = top.unwrap();
            let count = group.len() as u32;
            let mut kept = Vec::new();
            for (i, d) in self.discards.drain(..).enumerate() {
                if !group.contains(&i) {
                    kept.push(d);
                }
            }
            self.discards = kept;
            // Update/insert at the mean via the same cascade.
            let mut class = top.0;
            let mut conf = top.1;
            let mut pos = mean;
            let mut obs = count;
            loop {
                let mut nearest: Option<(usize, f64)> = None;
                for (i, (ec, _, ep, _)) in self.entries.iter().enumerate() {
                    let d = ep.distance(&pos);
                    if d <= self.cfg.merge_radius_km
                        && o.semantically_similar(ec, &class).unwrap()
                        && nearest.is_none_or(|(_, bd)| d < bd)
                    {
                        nearest = Some((i, d));
                    }
                }
                match nearest {
                    Some((i, _)) => {
                        let (ec, econf, epos, eobs) = self.entries.remove(i);
                        if conf > econf {
                        } else {
                            class = ec;
                            conf = econf;
                        }
                        pos = epos.add(&pos).scale(0.5);
                        obs += eobs;
                    }
                    None => break,
                }
            }
            self.entries.push((class, conf, pos, obs));
            MergeOutcome::Resurrected
        }
    }

    #[test]
    fn random_merges_match_rule_interpreter() {
        let o = merge_ontology();
        let classes = ["sedan", "hatchback", "tree", "barn"];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let cfg = MergeConfig {
                merge_radius_km: 0.08,
                proximity_tolerance_km: 0.04,
                resurrection_threshold: 2 + (trial % 2) as usize,
                confidence_floor: 0.4,
            };
            let mut cmap = CollectiveMap::new(cfg).unwrap();
            let mut oracle = RuleInterpreter::new(cfg);
            for i in 0..50 {
                let class = classes[rng.gen_range(0..classes.len())];
                let conf = rng.gen_range(0.0..1.0);
                let pos = Point::new(rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
                let got = cmap
                    .merge_landmark(&o, &lm(i, class, conf, pos.x, pos.y), MapFrame::Collective)
                    .unwrap();
                let expect = oracle.submit(&o, class, conf, pos);
                assert_eq!(got, expect, "trial {trial} submission {i}");
            }
            // Entry multisets must agree exactly.
            let mut got: Vec<(String, f64, f64, f64, u32)> = cmap
                .map()
                .iter()
                .map(|l| (l.class.clone(), l.confidence, l.position.x, l.position.y, l.observations))
                .collect();
            let mut expect: Vec<(String, f64, f64, f64, u32)> = oracle
                .entries
                .iter()
                .map(|(c, conf, p, obs)| (c.clone(), *conf, p.x, p.y, *obs))
                .collect();
            let key = |t: &(String, f64, f64, f64, u32)| {
                (t.0.clone(), t.2.to_bits(), t.3.to_bits(), t.1.to_bits(), t.4)
            };
            got.sort_by_key(key);
            expect.sort_by_key(key);
            assert_eq!(got, expect, "trial {trial} final maps differ");
            assert_eq!(cmap.discard_count(), oracle.discards.len());
        }
    }

    #[test]
    fn post_merge_separation_invariant() {
        let o = merge_ontology();
        let classes = ["sedan", "hatchback", "tree", "barn"];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let cfg = MergeConfig {
                merge_radius_km: 0.1,
                proximity_tolerance_km: 0.05,
                resurrection_threshold: 2,
                confidence_floor: 0.4,
            };
            let mut cmap = CollectiveMap::new(cfg).unwrap();
            for i in 0..80 {
                let class = classes[rng.gen_range(0..classes.len())];
                let pos = Point::new(rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.6));
                cmap.merge_landmark(
                    &o,
                    &lm(i, class, rng.gen_range(0.0..1.0), pos.x, pos.y),
                    MapFrame::Collective,
                )
                .unwrap();
            }
            let entries = cmap.map().landmarks();
            for a in 0..entries.len() {
                for b in (a + 1)..entries.len() {
                    let d = entries[a].position.distance(&entries[b].position);
                    let similar = o
                        .semantically_similar(&entries[a].class, &entries[b].class)
                        .unwrap();
                    assert!(
                        !similar || d > cfg.merge_radius_km,
                        "similar pair within radius: {} {} at {d}",
                        entries[a].class,
                        entries[b].class
                    );
                }
            }
        }
    }

    #[test]
    fn merged_positions_stay_in_submission_bounding_box() {
        let o = merge_ontology();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut cmap = CollectiveMap::new(MergeConfig::default()).unwrap();
        let mut min = Point::new(f64::MAX, f64::MAX);
        let mut max = Point::new(f64::MIN, f64::MIN);
        for i in 0..60 {
            let pos = Point::new(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2));
            min = Point::new(min.x.min(pos.x), min.y.min(pos.y));
            max = Point::new(max.x.max(pos.x), max.y.max(pos.y));
            cmap.merge_landmark(
                &o,
                &lm(i, "sedan", rng.gen_range(0.0..1.0), pos.x, pos.y),
                MapFrame::Collective,
            )
            .unwrap();
        }
        for entry in cmap.map().iter() {
            assert!(entry.position.x >= min.x - 1e-12 && entry.position.x <= max.x + 1e-12);
            assert!(entry.position.y >= min.y - 1e-12 && entry.position.y <= max.y + 1e-12);
        }
    }

    #[test]
    fn outcome_sequence_is_deterministic() {
        let o = merge_ontology();
        let run = || {
            let mut cmap = CollectiveMap::new(MergeConfig::default()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(31);
            let mut outcomes = Vec::new();
            for i in 0..40 {
                let pos = Point::new(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1));
                outcomes.push(
                    cmap.merge_landmark(
                        &o,
                        &lm(i, "sedan", rng.gen_range(0.0..1.0), pos.x, pos.y),
                        MapFrame::Collective,
                    )
                    .unwrap(),
                );
            }
            (outcomes, cmap.to_export_json())
        };
        let (a_out, a_json) = run();
        let (b_out, b_json) = run();
        assert_eq!(a_out, b_out);
        assert_eq!(a_json, b_json);
    }

    // ── dispersion incentives ───────────────────────────────────────────

    #[test]
    fn single_agent_gets_zero_bias() {
        let out = dispersion_incentives(&[(0, Point::new(1.0, 1.0))], &IncentiveConfig::default());
        assert_eq!(out, vec![(0, Point::new(0.0, 0.0))]);
    }

    #[test]
    fn symmetric_pair_gets_opposite_biases() {
        let cfg = IncentiveConfig {
            gain: 0.5,
            distance_cap_km: None,
        };
        let out = dispersion_incentives(
            &[(0, Point::new(-1.0, 0.0)), (1, Point::new(1.0, 0.0))],
            &cfg,
        );
        assert!((out[0].1.x + out[1].1.x).abs() < 1e-15);
        assert!((out[0].1.y + out[1].1.y).abs() < 1e-15);
        assert!((out[0].1.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cap_zeroes_far_agents() {
        // GCM is (9.5/3, 0) ~ (3.17, 0): agent 1 sits 2.67 from it (inside a
        // cap of 3), agents 0 and 2 sit 3.17 and 5.83 away (outside).
        let cfg = IncentiveConfig {
            gain: 0.5,
            distance_cap_km: Some(3.0),
        };
        let out = dispersion_incentives(
            &[
                (0, Point::new(0.0, 0.0)),
                (1, Point::new(0.5, 0.0)),
                (2, Point::new(9.0, 0.0)),
            ],
            &cfg,
        );
        assert_eq!(out[0].1, Point::new(0.0, 0.0));
        assert!(out[1].1.norm() > 0.0);
        assert_eq!(out[2].1, Point::new(0.0, 0.0));
    }

    #[test]
    fn incentives_increase_time_averaged_spread() {
        use crate::agent::{AgentConfig, AgentState};
        use crate::scenario::{Bounds, ScenarioSpec, Zone};

        let world = ScenarioSpec {
            name: "arena".into(),
            bounds: Bounds {
                width_km: 2.0,
                height_km: 2.0,
            },
            zones: vec![Zone::rect("NonUrban", 0.0, 0.0, 2.0, 2.0)],
            features: vec![],
            agent_starts: vec![],
            seed: 0,
        };
        let cfg = AgentConfig {
            speed_km_s: 0.01,
            ..AgentConfig::default()
        };
        let starts = [
            Pose::new(0.9, 1.0, 0.0),
            Pose::new(1.1, 1.0, 2.0),
            Pose::new(1.0, 1.1, 4.0),
        ];
        let spread = |use_incentives: bool, seed: u64| -> f64 {
            let mut agents: Vec<AgentState> = starts
                .iter()
                .enumerate()
                .map(|(i, s)| AgentState::new(i, *s, cfg))
                .collect();
            let mut rngs: Vec<ChaCha8Rng> = (0..3)
                .map(|i| {
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    r.set_stream(i as u64 + 1);
                    r
                })
                .collect();
            let icfg = IncentiveConfig::default();
            let mut total = 0.0;
            let steps = 300;
            for _ in 0..steps {
                let positions: Vec<(usize, Point)> = agents
                    .iter()
                    .map(|a| (a.id, a.true_pose.position()))
                    .collect();
                let biases = if use_incentives {
                    dispersion_incentives(&positions, &icfg)
                } else {
                    positions
                        .iter()
                        .map(|(id, _)| (*id, Point::new(0.0, 0.0)))
                        .collect()
                };
                for (agent, rng) in agents.iter_mut().zip(rngs.iter_mut()) {
                    let bias = biases
                        .iter()
                        .find(|(id, _)| *id == agent.id)
                        .map(|(_, b)| *b)
                        .unwrap();
                    agent.random_walk_step(&world, &bias, rng);
                }
                let mut pairwise = 0.0;
                let mut pairs = 0;
                for i in 0..agents.len() {
                    for j in (i + 1)..agents.len() {
                        pairwise += agents[i]
                            .true_pose
                            .position()
                            .distance(&agents[j].true_pose.position());
                        pairs += 1;
                    }
                }
                total += pairwise / pairs as f64;
            }
            total / steps as f64
        };

        let mut with_total = 0.0;
        let mut without_total = 0.0;
        for seed in 0..20 {
            with_total += spread(true, seed);
            without_total += spread(false, seed);
        }
        assert!(
            with_total > without_total,
            "incentives {with_total} vs baseline {without_total}"
        );
    }
}
