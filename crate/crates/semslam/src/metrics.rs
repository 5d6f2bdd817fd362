//! Evaluation statistics: search coverage and dispersion, map quality
//! (centre-offset error, topology match), and classification quality
//! (IoU, precision/recall, average precision) on the 24x24 overlay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::grid::{LabelGrid, GRID_N};
use crate::landmark::LandmarkMap;
use crate::ontology::{Ontology, UNKNOWN_ENV};
use crate::scenario::{Bounds, Feature};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("grids must both be {GRID_N}x{GRID_N}")]
    GridSizeMismatch,
    #[error("match radius must be positive")]
    BadRadius,
}

/// All metrics of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub scenario: String,
    pub seed: u64,
    pub agent_count: usize,
    /// Simulated seconds until termination.
    pub elapsed_s: u64,
    pub total_area_km2: f64,
    /// Washburn estimate `sum(V * W * t)`, capped at the total area.
    pub searched_area_km2: f64,
    pub coverage_ratio: f64,
    /// Fraction of visited occupancy cells (cell side = sweep width).
    pub tracked_coverage_ratio: f64,
    pub avg_dispersion_km: f64,
    pub norm_dispersion: f64,
    /// Final mean centre-offset error of the collective map, km.
    pub er_final_km: f64,
    /// Mean centre-offset error sampled each simulated second.
    pub er_series_km: Vec<f64>,
    pub topology_coverage: f64,
    /// Mean positional error of matched pairs, km.
    pub topology_accuracy_km: f64,
    pub features_total: usize,
    pub features_discovered: usize,
    pub collective_landmarks: usize,
    pub grid_macro_iou: f64,
    pub grid_map: f64,
    pub grid_micro_ap: f64,
    pub branch_macro_iou: f64,
    pub branch_map: f64,
    pub branch_micro_ap: f64,
    pub step_cap_reached: bool,
}

impl TrialReport {
    /// Stable CSV column order; `er_series_km` lives in the JSON form only.
    pub fn csv_header() -> &'static str {
        "scenario,seed,agent_count,elapsed_s,total_area_km2,searched_area_km2,\
         coverage_ratio,tracked_coverage_ratio,avg_dispersion_km,norm_dispersion,\
         er_final_km,topology_coverage,topology_accuracy_km,features_total,\
         features_discovered,collective_landmarks,grid_macro_iou,grid_map,\
         grid_micro_ap,branch_macro_iou,branch_map,branch_micro_ap,step_cap_reached"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.seed,
            self.agent_count,
            self.elapsed_s,
            self.total_area_km2,
            self.searched_area_km2,
            self.coverage_ratio,
            self.tracked_coverage_ratio,
            self.avg_dispersion_km,
            self.norm_dispersion,
            self.er_final_km,
            self.topology_coverage,
            self.topology_accuracy_km,
            self.features_total,
            self.features_discovered,
            self.collective_landmarks,
            self.grid_macro_iou,
            self.grid_map,
            self.grid_micro_ap,
            self.branch_macro_iou,
            self.branch_map,
            self.branch_micro_ap,
            self.step_cap_reached
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Washburn searched-area estimate: `A' = sum over agents of V * W * t`,
/// capped at the total area. Returns `(A', A'/A)`.
pub fn area_coverage(agent_vw: &[(f64, f64)], elapsed_s: f64, total_area_km2: f64) -> (f64, f64) {
    let raw: f64 = agent_vw.iter().map(|(v, w)| v * w * elapsed_s).sum();
    let a_prime = raw.min(total_area_km2);
    let ratio = if total_area_km2 > 0.0 {
        a_prime / total_area_km2
    } else {
        0.0
    };
    (a_prime, ratio)
}

/// Occupancy-cell visit tracker with cell side equal to the sweep width.
#[derive(Debug, Clone)]
pub struct VisitTracker {
    cell_km: f64,
    cols: usize,
    rows: usize,
    visited: Vec<bool>,
}

impl VisitTracker {
    pub fn new(bounds: &Bounds, sweep_width_km: f64) -> Self {
        let cell = sweep_width_km.max(1e-9);
        let cols = (bounds.width_km / cell).ceil().max(1.0) as usize;
        let rows = (bounds.height_km / cell).ceil().max(1.0) as usize;
        Self {
            cell_km: cell,
            cols,
            rows,
            visited: vec![false; cols * rows],
        }
    }

    pub fn mark(&mut self, p: &Point) {
        let col = ((p.x / self.cell_km) as usize).min(self.cols - 1);
        let row = ((p.y / self.cell_km) as usize).min(self.rows - 1);
        self.visited[row * self.cols + col] = true;
    }

    pub fn ratio(&self) -> f64 {
        self.visited.iter().filter(|v| **v).count() as f64 / self.visited.len() as f64
    }
}

/// Average dispersion over per-second samples of agent positions: the mean
/// distance to the global centre of mass, averaged over samples, plus the
/// same normalized by the maximum theoretical dispersion (half the bounds
/// diagonal).
pub fn dispersion(samples: &[Vec<Point>], bounds: &Bounds) -> (f64, f64) {
    let mut per_sample = Vec::new();
    for sample in samples {
        if sample.is_empty() {
            continue;
        }
        let gcm = sample
            .iter()
            .fold(Point::new(0.0, 0.0), |acc, p| acc.add(p))
            .scale(1.0 / sample.len() as f64);
        let mean_dist =
            sample.iter().map(|p| p.distance(&gcm)).sum::<f64>() / sample.len() as f64;
        per_sample.push(mean_dist);
    }
    if per_sample.is_empty() {
        return (0.0, 0.0);
    }
    let avg = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    let max_theoretical = bounds.diagonal_km() * 0.5;
    let norm = if max_theoretical > 0.0 {
        avg / max_theoretical
    } else {
        0.0
    };
    (avg, norm)
}

/// Mean Euclidean distance between believed and true landmark positions.
pub fn avg_center_offset_error(map: &LandmarkMap) -> f64 {
    map.mean_offset_error_km()
}

/// Greedy nearest-pair topology match between a generated map and the true
/// features: candidate pairs share a similar class and lie within the match
/// radius; pairs match closest-first, each vertex at most once. Returns
/// `(coverage, mean positional error of matched pairs)`.
pub fn topology_match(
    map: &LandmarkMap,
    truth: &[Feature],
    ontology: &Ontology,
    match_radius_km: f64,
) -> Result<(f64, f64), MetricsError> {
    if match_radius_km <= 0.0 {
        return Err(MetricsError::BadRadius);
    }
    if truth.is_empty() {
        return Ok((0.0, 0.0));
    }
    let landmarks = map.landmarks();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, lm) in landmarks.iter().enumerate() {
        for (j, f) in truth.iter().enumerate() {
            if !ontology
                .semantically_similar(&lm.class, &f.class)
                .unwrap_or(lm.class == f.class)
            {
                continue;
            }
            let d = lm.position.distance(&f.position());
            if d <= match_radius_km {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_lm = vec![false; landmarks.len()];
    let mut used_truth = vec![false; truth.len()];
    let mut matched = 0usize;
    let mut error_sum = 0.0;
    for (d, i, j) in candidates {
        if used_lm[i] || used_truth[j] {
            continue;
        }
        used_lm[i] = true;
        used_truth[j] = true;
        matched += 1;
        error_sum += d;
    }
    let coverage = matched as f64 / truth.len() as f64;
    let accuracy = if matched > 0 {
        error_sum / matched as f64
    } else {
        0.0
    };
    Ok((coverage, accuracy))
}

/// Intersection over union of one label's cell sets. Two empty sets count as
/// identical (IoU 1).
pub fn iou(pred: &LabelGrid, truth: &LabelGrid, label: &str) -> f64 {
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (p, t) in pred.labels().iter().zip(truth.labels().iter()) {
        let in_p = p == label;
        let in_t = t == label;
        if in_p && in_t {
            intersection += 1;
        }
        if in_p || in_t {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Mean IoU over the labels present in the truth grid, `Unknown` excluded.
pub fn macro_iou(pred: &LabelGrid, truth: &LabelGrid) -> f64 {
    let labels = truth.present_labels();
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().map(|l| iou(pred, truth, l)).sum::<f64>() / labels.len() as f64
}

/// Per-class precision/recall/AP plus macro and micro aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApReport {
    /// Per class: (precision, recall, average precision).
    pub per_class: BTreeMap<String, (f64, f64, f64)>,
    /// Mean AP over classes present in the truth.
    pub macro_map: f64,
    /// AP of the pooled ranking across classes.
    pub micro_ap: f64,
}

fn ranked_ap(mut ranked: Vec<(f64, usize, bool)>, total_truth: usize) -> f64 {
    if total_truth == 0 {
        return 0.0;
    }
    // Confidence descending, cell index ascending.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_precision = 1.0;
    let mut acc = 0.0;
    for (_, _, hit) in ranked {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        if hit {
            // One recall step of 1/total_truth: trapezoid against the
            // previous rank's precision.
            acc += precision + prev_precision;
        }
        prev_precision = precision;
    }
    acc / (2.0 * total_truth as f64)
}

/// Rank predicted cells by confidence and integrate the precision-recall
/// curve per class; `Unknown` is never a prediction and never a class.
pub fn precision_recall_ap(pred: &LabelGrid, truth: &LabelGrid) -> ApReport {
    let classes = truth.present_labels();
    let mut per_class = BTreeMap::new();
    let mut macro_sum = 0.0;
    for class in &classes {
        let ranked: Vec<(f64, usize, bool)> = pred
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| *l == class)
            .map(|(i, _)| (pred.confidences()[i], i, truth.labels()[i] == *class))
            .collect();
        let total_truth = truth.count_label(class);
        let tp = ranked.iter().filter(|(_, _, hit)| *hit).count();
        let fp = ranked.len() - tp;
        let fn_count = total_truth - tp;
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let recall = if tp + fn_count > 0 {
            tp as f64 / (tp + fn_count) as f64
        } else {
            0.0
        };
        let ap = ranked_ap(ranked, total_truth);
        macro_sum += ap;
        per_class.insert(class.clone(), (precision, recall, ap));
    }
    let macro_map = if classes.is_empty() {
        0.0
    } else {
        macro_sum / classes.len() as f64
    };

    // Micro: pooled ranking over every non-Unknown prediction.
    let pooled: Vec<(f64, usize, bool)> = pred
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.as_str() != UNKNOWN_ENV)
        .map(|(i, l)| (pred.confidences()[i], i, truth.labels()[i] == *l))
        .collect();
    let micro_truth = truth
        .labels()
        .iter()
        .filter(|l| l.as_str() != UNKNOWN_ENV)
        .count();
    let micro_ap = ranked_ap(pooled, micro_truth);

    ApReport {
        per_class,
        macro_map,
        micro_ap,
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    fn ranks(values: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut out = vec![0.0; values.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &order[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..n {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::landmark::{Landmark, MapFrame};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bounds(w: f64, h: f64) -> Bounds {
        Bounds {
            width_km: w,
            height_km: h,
        }
    }

    #[test]
    fn no_motion_means_no_coverage() {
        let (a_prime, ratio) = area_coverage(&[(0.0, 0.2), (0.0, 0.2)], 1000.0, 4.0);
        assert_eq!(a_prime, 0.0);
        assert_eq!(ratio, 0.0);
    }

    #[test]
    fn coverage_caps_at_total_area() {
        let (a_prime, ratio) = area_coverage(&[(1.0, 1.0)], 1000.0, 4.0);
        assert_eq!(a_prime, 4.0);
        assert_eq!(ratio, 1.0);
    }

    #[test]
    fn straight_sweep_tracked_ratio_matches_washburn() {
        // One agent sweeping a straight line with no overlap.
        let b = bounds(2.0, 2.0);
        let (v, w) = (0.01, 0.1);
        let mut tracker = VisitTracker::new(&b, w);
        let steps = 150;
        for k in 0..steps {
            // March along a row centre so each W-cell is visited once.
            let x = 0.05 + v * k as f64;
            tracker.mark(&Point::new(x, 0.05));
        }
        let elapsed = steps as f64;
        let washburn = (v * w * elapsed / b.area_km2()).min(1.0);
        let tracked = tracker.ratio();
        assert!(
            (tracked - washburn).abs() / washburn < 0.1,
            "tracked {tracked} vs washburn {washburn}"
        );
    }

    #[test]
    fn coincident_agents_have_zero_dispersion() {
        let samples = vec![vec![Point::new(1.0, 1.0); 3]; 5];
        let (avg, norm) = dispersion(&samples, &bounds(2.0, 2.0));
        assert_eq!(avg, 0.0);
        assert_eq!(norm, 0.0);
    }

    #[test]
    fn opposite_corners_have_unit_normalized_dispersion() {
        let b = bounds(2.0, 2.0);
        let samples = vec![vec![Point::new(0.0, 0.0), Point::new(2.0, 2.0)]; 4];
        let (avg, norm) = dispersion(&samples, &b);
        assert!((avg - b.diagonal_km() * 0.5).abs() < 1e-12);
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dispersion_matches_hand_computed_trace() {
        // Three agents, two samples; worked by hand:
        // sample 1: (0,0),(2,0),(1,3) -> GCM (1,1); dists sqrt2, sqrt2, 2
        // sample 2: (0,0),(4,0),(2,0) -> GCM (2,0); dists 2, 2, 0
        let samples = vec![
            vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 3.0)],
            vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(2.0, 0.0)],
        ];
        let s1 = (2.0f64.sqrt() + 2.0f64.sqrt() + 2.0) / 3.0;
        let s2 = (2.0 + 2.0 + 0.0) / 3.0;
        let expect = (s1 + s2) / 2.0;
        let b = bounds(4.0, 3.0);
        let (avg, norm) = dispersion(&samples, &b);
        assert!((avg - expect).abs() < 1e-9);
        assert!((norm - expect / (2.5)).abs() < 1e-9);
    }

    fn map_from(positions: &[((f64, f64), (f64, f64))]) -> LandmarkMap {
        let mut map = LandmarkMap::new(MapFrame::Collective);
        for (i, ((bx, by), (tx, ty))) in positions.iter().enumerate() {
            map.insert(Landmark {
                id: i as u64,
                class: "tree".into(),
                confidence: 1.0,
                position: Point::new(*bx, *by),
                true_position: Point::new(*tx, *ty),
                is_static: true,
                source_agent: 0,
                observations: 1,
            })
            .unwrap();
        }
        map
    }

    #[test]
    fn perfect_map_has_zero_offset_error() {
        let map = map_from(&[((1.0, 1.0), (1.0, 1.0)), ((2.0, 0.5), (2.0, 0.5))]);
        assert_eq!(avg_center_offset_error(&map), 0.0);
    }

    #[test]
    fn offset_error_is_the_three_four_five_triangle() {
        let map = map_from(&[((3.0, 4.0), (0.0, 0.0))]);
        assert_eq!(avg_center_offset_error(&map), 5.0);
    }

    #[test]
    fn offset_error_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let entries: Vec<((f64, f64), (f64, f64))> = (0..rng.gen_range(1..30))
                .map(|_| {
                    (
                        (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)),
                        (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)),
                    )
                })
                .collect();
            let map = map_from(&entries);
            let mut naive = 0.0;
            for ((bx, by), (tx, ty)) in &entries {
                naive += ((bx - tx).powi(2) + (by - ty).powi(2)).sqrt();
            }
            naive /= entries.len() as f64;
            assert!((avg_center_offset_error(&map) - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn er_is_translation_invariant() {
        let entries = [((1.0, 2.0), (1.5, 2.2)), ((0.3, 0.4), (0.1, 0.9))];
        let shifted: Vec<((f64, f64), (f64, f64))> = entries
            .iter()
            .map(|((bx, by), (tx, ty))| ((bx + 7.0, by - 3.0), (tx + 7.0, ty - 3.0)))
            .collect();
        let a = avg_center_offset_error(&map_from(&entries));
        let b = avg_center_offset_error(&map_from(&shifted));
        assert!((a - b).abs() < 1e-12);
    }

    fn truth_features(positions: &[(f64, f64)]) -> Vec<Feature> {
        positions
            .iter()
            .map(|(x, y)| Feature {
                class: "tree".into(),
                x_km: *x,
                y_km: *y,
                is_static: Some(true),
            })
            .collect()
    }

    #[test]
    fn identical_topology_matches_fully() {
        let o = catalog::default_ontology();
        let truth = truth_features(&[(1.0, 1.0), (2.0, 2.0)]);
        let map = map_from(&[((1.0, 1.0), (1.0, 1.0)), ((2.0, 2.0), (2.0, 2.0))]);
        let (coverage, accuracy) = topology_match(&map, &truth, &o, 0.1).unwrap();
        assert_eq!(coverage, 1.0);
        assert_eq!(accuracy, 0.0);
    }

    #[test]
    fn empty_map_has_zero_topology_coverage() {
        let o = catalog::default_ontology();
        let truth = truth_features(&[(1.0, 1.0)]);
        let map = LandmarkMap::new(MapFrame::Collective);
        let (coverage, _) = topology_match(&map, &truth, &o, 0.1).unwrap();
        assert_eq!(coverage, 0.0);
    }

    #[test]
    fn perturbed_truth_accuracy_matches_rayleigh_mean() {
        // Gaussian per-axis noise sigma: expected matched-pair distance is
        // sigma * sqrt(pi/2).
        let o = catalog::default_ontology();
        let sigma = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
        let mut truth_pos = Vec::new();
        let mut entries = Vec::new();
        for i in 0..1000 {
            use rand_distr::Distribution;
            let x = (i % 40) as f64 * 0.5;
            let y = (i / 40) as f64 * 0.5;
            truth_pos.push((x, y));
            entries.push((
                (x + normal.sample(&mut rng), y + normal.sample(&mut rng)),
                (x, y),
            ));
        }
        let truth = truth_features(&truth_pos);
        let map = map_from(&entries);
        let (coverage, accuracy) = topology_match(&map, &truth, &o, 10.0 * sigma).unwrap();
        assert!(coverage > 0.99);
        let expect = sigma * (std::f64::consts::PI / 2.0).sqrt();
        assert!(
            (accuracy - expect).abs() / expect < 0.1,
            "accuracy {accuracy} vs {expect}"
        );
    }

    fn grid_with(label: &str, cols: std::ops::Range<usize>) -> LabelGrid {
        let mut g = LabelGrid::unknown();
        for row in 0..GRID_N {
            for col in cols.clone() {
                g.set(row, col, label, 1.0);
            }
        }
        g
    }

    #[test]
    fn iou_identities() {
        let a = grid_with("X", 0..12);
        assert_eq!(iou(&a, &a, "X"), 1.0);

        let b = grid_with("X", 12..24);
        assert_eq!(iou(&a, &b, "X"), 0.0);

        // Equal rectangles overlapping half their area: IoU exactly 1/3.
        let c = grid_with("X", 6..18);
        assert_eq!(iou(&a, &c, "X"), 1.0 / 3.0);
    }

    #[test]
    fn iou_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut a = LabelGrid::unknown();
            let mut b = LabelGrid::unknown();
            for i in 0..GRID_N {
                for j in 0..GRID_N {
                    if rng.gen_bool(0.3) {
                        a.set(i, j, "X", 1.0);
                    }
                    if rng.gen_bool(0.3) {
                        b.set(i, j, "X", 1.0);
                    }
                }
            }
            let ab = iou(&a, &b, "X");
            let ba = iou(&b, &a, "X");
            assert_eq!(ab, ba);
            assert!((0.0..=1.0).contains(&ab));
            let equal_sets = a
                .labels()
                .iter()
                .zip(b.labels().iter())
                .all(|(x, y)| (x == "X") == (y == "X"));
            assert_eq!(ab == 1.0, equal_sets);
        }
    }

    #[test]
    fn perfect_prediction_has_unit_ap() {
        let truth = grid_with("X", 0..8);
        let report = precision_recall_ap(&truth, &truth);
        let (p, r, ap) = report.per_class["X"];
        assert_eq!(p, 1.0);
        assert_eq!(r, 1.0);
        assert_eq!(ap, 1.0);
        assert_eq!(report.macro_map, 1.0);
        assert_eq!(report.micro_ap, 1.0);
    }

    #[test]
    fn all_wrong_prediction_has_zero_ap() {
        let truth = grid_with("X", 0..8);
        let pred = grid_with("X", 16..24);
        let report = precision_recall_ap(&pred, &truth);
        let (_, _, ap) = report.per_class["X"];
        assert_eq!(ap, 0.0);
        assert_eq!(report.macro_map, 0.0);
    }

    #[test]
    fn six_cell_hand_example_matches_pr_table() {
        // Truth: class A at cells 0, 1, 2. Predictions of A at five cells
        // ranked by confidence: TP, FP, TP, FP, TP.
        // PR points: (1/3,1) (1/3,1/2) (2/3,2/3) (2/3,1/2) (1,3/5);
        // trapezoid area = 1/3 + 7/36 + 11/60 = 32/45.
        let mut truth = LabelGrid::unknown();
        truth.set(0, 0, "A", 1.0);
        truth.set(0, 1, "A", 1.0);
        truth.set(0, 2, "A", 1.0);
        let mut pred = LabelGrid::unknown();
        pred.set(0, 0, "A", 0.9); // TP
        pred.set(0, 3, "A", 0.8); // FP
        pred.set(0, 1, "A", 0.7); // TP
        pred.set(0, 4, "A", 0.6); // FP
        pred.set(0, 2, "A", 0.5); // TP
        let report = precision_recall_ap(&pred, &truth);
        let (_, _, ap) = report.per_class["A"];
        assert!((ap - 32.0 / 45.0).abs() < 1e-9, "ap {ap}");
    }

    #[test]
    fn ap_is_invariant_under_monotone_confidence_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut truth = LabelGrid::unknown();
        let mut pred = LabelGrid::unknown();
        for i in 0..GRID_N {
            for j in 0..GRID_N {
                if rng.gen_bool(0.4) {
                    truth.set(i, j, "A", 1.0);
                }
                if rng.gen_bool(0.4) {
                    pred.set(i, j, "A", rng.gen_range(0.01..0.99));
                }
            }
        }
        let base = precision_recall_ap(&pred, &truth).per_class["A"].2;
        let mut squashed = pred.clone();
        for i in 0..GRID_N {
            for j in 0..GRID_N {
                let c = pred.confidence(i, j);
                let l = pred.get(i, j).to_string();
                squashed.set(i, j, &l, c * c * 0.5);
            }
        }
        let transformed = precision_recall_ap(&squashed, &truth).per_class["A"].2;
        assert_eq!(base, transformed);
    }

    proptest::proptest! {
        #[test]
        fn iou_properties_hold_for_any_masks(
            a in proptest::collection::vec(proptest::bool::ANY, GRID_N * GRID_N),
            b in proptest::collection::vec(proptest::bool::ANY, GRID_N * GRID_N),
        ) {
            let build = |mask: &[bool]| {
                let mut g = LabelGrid::unknown();
                for (i, set) in mask.iter().enumerate() {
                    if *set {
                        g.set(i / GRID_N, i % GRID_N, "X", 1.0);
                    }
                }
                g
            };
            let (ga, gb) = (build(&a), build(&b));
            let ab = iou(&ga, &gb, "X");
            proptest::prop_assert_eq!(ab, iou(&gb, &ga, "X"));
            proptest::prop_assert!((0.0..=1.0).contains(&ab));
            proptest::prop_assert_eq!(ab == 1.0, a == b);
        }
    }

    #[test]
    fn spearman_detects_monotone_growth() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * 2.0 + 1.0).collect();
        assert!((spearman(&xs, &ys) - 1.0).abs() < 1e-12);
        let zs: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((spearman(&xs, &zs) + 1.0).abs() < 1e-12);
    }
}
