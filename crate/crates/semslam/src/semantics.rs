//! Environment-type classification of map segments.
//!
//! A segment's landmark set is converted into a probability distribution over
//! environment types in two steps:
//!
//! 1. **Confidence** `C(e)`: over every unordered pair of landmarks whose
//!    classes both have a positive semantic proximity to `e`, sum
//!    `(SP(e, f_x) * conf_x + SP(e, f_y) * conf_y) * (1 - d(x, y))` where
//!    `d` is the pairwise distance normalized to the segment's maximum
//!    possible distance. Each such pair is one *inference* for `e`. The sum
//!    is normalized by `2 *` the inference count, so a pair of coincident
//!    full-confidence, full-proximity landmarks yields exactly 1. Pairs whose
//!    classes do not share the environment contribute neither mass nor an
//!    inference, which is what penalises spatial closeness of classes with
//!    dissimilar superclasses: they inflate the pair budget without paying
//!    into any shared environment.
//! 2. **Probability** `P(e)`: the blend `alpha * C(e) + (1 - alpha) *
//!    inferences(e) / max_inferences` where `max_inferences` is the pair
//!    budget for `z` landmarks. Segments with fewer than two landmarks have
//!    a zero inference ratio; a single landmark contributes
//!    `C(e) = SP(e, f) * conf` directly.
//!
//! The classification of a segment is the argmax of `P`; a segment with no
//! supporting evidence (or no landmarks) classifies as `Unknown`.
//!
//! Everything here is a pure function of immutable inputs and is safe to
//! evaluate concurrently across segments.

use std::collections::BTreeMap;

use crate::geometry::{point_set_diameter, Point, Rect};
use crate::ontology::{Ontology, UNKNOWN_ENV};

#[derive(Debug, thiserror::Error)]
pub enum SemanticsError {
    #[error("alpha must lie strictly inside (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error("pairwise distance requires two distinct landmark indices, got {0} twice")]
    SamePair(usize),
    #[error("landmark index {0} out of range ({1} landmarks)")]
    BadIndex(usize, usize),
}

/// Pair-counting convention for the inference budget.
///
/// Both conventions produce identical probabilities (ordered counting doubles
/// both the numerator and the denominator everywhere); the reported inference
/// counts differ, so the convention is kept explicit and testable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairConvention {
    /// Unordered pairs `x < y`: budget `z(z-1)/2`.
    #[default]
    Unordered,
    /// Ordered pairs `x != y`: budget `z(z-1)`.
    Ordered,
}

/// One landmark as seen by the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentLandmark {
    pub class: String,
    pub confidence: f64,
    pub position: Point,
}

impl SegmentLandmark {
    pub fn new(class: &str, confidence: f64, x: f64, y: f64) -> Self {
        Self {
            class: class.to_string(),
            confidence,
            position: Point::new(x, y),
        }
    }
}

/// A spatial subset of the map, with the geometry used to normalize
/// pairwise distances.
#[derive(Debug, Clone)]
pub struct SegmentFeatures {
    pub landmarks: Vec<SegmentLandmark>,
    /// Maximum possible distance between two points of the segment, km.
    pub max_distance_km: f64,
}

impl SegmentFeatures {
    /// Rectangular segment: the maximum possible distance is the diagonal.
    pub fn from_rect(landmarks: Vec<SegmentLandmark>, rect: &Rect) -> Self {
        Self {
            landmarks,
            max_distance_km: rect.diagonal(),
        }
    }

    /// Point-cluster segment (branch fragments): the maximum possible
    /// distance is the diameter of the member set, i.e. of its convex hull.
    pub fn from_cluster(landmarks: Vec<SegmentLandmark>) -> Self {
        let positions: Vec<Point> = landmarks.iter().map(|l| l.position).collect();
        Self {
            landmarks,
            max_distance_km: point_set_diameter(&positions),
        }
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }
}

/// Normalized distance between landmarks `i` and `j`: Euclidean distance over
/// the segment's maximum possible distance, clamped to [0, 1]. Coincident
/// landmarks (and degenerate one-point geometry) give 0.
pub fn normalized_pairwise_distance(
    seg: &SegmentFeatures,
    i: usize,
    j: usize,
) -> Result<f64, SemanticsError> {
    if i == j {
        return Err(SemanticsError::SamePair(i));
    }
    let n = seg.landmarks.len();
    if i >= n {
        return Err(SemanticsError::BadIndex(i, n));
    }
    if j >= n {
        return Err(SemanticsError::BadIndex(j, n));
    }
    let raw = seg.landmarks[i].position.distance(&seg.landmarks[j].position);
    if seg.max_distance_km <= 0.0 {
        return Ok(0.0);
    }
    Ok((raw / seg.max_distance_km).clamp(0.0, 1.0))
}

fn sp_or_zero(ontology: &Ontology, class: &str, env: &str) -> f64 {
    ontology.semantic_proximity(class, env).unwrap_or(0.0)
}

/// Deterministic permutation-invariant sum: the term multiset does not depend
/// on landmark order, so summing in sorted order makes the result exactly
/// order-independent.
fn stable_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

/// Environment confidence `C(e)` and the number of inferences made for it.
pub fn environment_confidence(
    seg: &SegmentFeatures,
    ontology: &Ontology,
    env: &str,
    convention: PairConvention,
) -> (f64, usize) {
    let z = seg.landmarks.len();
    if z == 0 {
        return (0.0, 0);
    }
    if z == 1 {
        let l = &seg.landmarks[0];
        return (sp_or_zero(ontology, &l.class, env) * l.confidence, 0);
    }
    let mut terms = Vec::new();
    let mut count = 0usize;
    for x in 0..z {
        for y in (x + 1)..z {
            let lx = &seg.landmarks[x];
            let ly = &seg.landmarks[y];
            let sp_x = sp_or_zero(ontology, &lx.class, env);
            let sp_y = sp_or_zero(ontology, &ly.class, env);
            if sp_x > 0.0 && sp_y > 0.0 {
                let d = normalized_pairwise_distance(seg, x, y).expect("distinct indices");
                terms.push((sp_x * lx.confidence + sp_y * ly.confidence) * (1.0 - d));
                count += 1;
            }
        }
    }
    if count == 0 {
        return (0.0, 0);
    }
    let (raw, count) = match convention {
        PairConvention::Unordered => (stable_sum(terms), count),
        PairConvention::Ordered => {
            // Every unordered pair appears twice in the ordered sum.
            let doubled: Vec<f64> = terms.iter().flat_map(|t| [*t, *t]).collect();
            (stable_sum(doubled), count * 2)
        }
    };
    ((raw / (2.0 * count as f64)).clamp(0.0, 1.0), count)
}

/// Probability distribution over environment types for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentDistribution {
    /// `P(e)` per environment, all in [0, 1].
    pub probabilities: BTreeMap<String, f64>,
    /// `C(e)` per environment.
    pub confidences: BTreeMap<String, f64>,
    /// Inference count per environment.
    pub inferences: BTreeMap<String, usize>,
    /// Argmax label, `Unknown` when no environment has positive probability.
    pub label: String,
    /// Blend weight used.
    pub alpha: f64,
}

impl EnvironmentDistribution {
    pub fn max_probability(&self) -> f64 {
        self.probabilities.values().cloned().fold(0.0, f64::max)
    }

    pub fn probability(&self, env: &str) -> f64 {
        self.probabilities.get(env).copied().unwrap_or(0.0)
    }
}

/// Compute `P(e)` for every environment of the ontology.
pub fn environment_distribution(
    seg: &SegmentFeatures,
    ontology: &Ontology,
    alpha: f64,
) -> Result<EnvironmentDistribution, SemanticsError> {
    environment_distribution_with(seg, ontology, alpha, PairConvention::default())
}

/// As [`environment_distribution`] with an explicit pair convention.
pub fn environment_distribution_with(
    seg: &SegmentFeatures,
    ontology: &Ontology,
    alpha: f64,
    convention: PairConvention,
) -> Result<EnvironmentDistribution, SemanticsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SemanticsError::InvalidAlpha(alpha));
    }
    let z = seg.landmarks.len();
    let max_inferences = match convention {
        PairConvention::Unordered => z.saturating_sub(1) * z / 2,
        PairConvention::Ordered => z.saturating_sub(1) * z,
    };

    let mut probabilities = BTreeMap::new();
    let mut confidences = BTreeMap::new();
    let mut inferences = BTreeMap::new();
    for env in ontology.environments() {
        let (c, count) = environment_confidence(seg, ontology, env, convention);
        let ratio = if z < 2 || max_inferences == 0 {
            0.0
        } else {
            count as f64 / max_inferences as f64
        };
        let p = alpha * c + (1.0 - alpha) * ratio;
        probabilities.insert(env.clone(), p);
        confidences.insert(env.clone(), c);
        inferences.insert(env.clone(), count);
    }

    // Argmax with lexicographic tie-break; all-zero distributions are Unknown.
    let mut label = UNKNOWN_ENV.to_string();
    let mut best = 0.0;
    for (env, p) in &probabilities {
        if *p > best {
            best = *p;
            label = env.clone();
        }
    }

    Ok(EnvironmentDistribution {
        probabilities,
        confidences,
        inferences,
        label,
        alpha,
    })
}

/// Result of thresholded segment classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: String,
    pub confidence: f64,
    /// True when the maximum probability meets the threshold (inclusive).
    pub pass: bool,
}

/// Classify a segment: argmax label, its probability, and whether it clears
/// the confidence threshold.
pub fn classify_segment(
    seg: &SegmentFeatures,
    ontology: &Ontology,
    alpha: f64,
    threshold: f64,
) -> Result<Classification, SemanticsError> {
    let dist = environment_distribution(seg, ontology, alpha)?;
    let confidence = dist.max_probability();
    Ok(Classification {
        label: dist.label,
        confidence,
        pass: confidence >= threshold,
    })
}
