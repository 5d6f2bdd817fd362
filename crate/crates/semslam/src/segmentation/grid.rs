//! Recursive grid segmentation.
//!
//! The map starts as nine regions of interest (3x3). Any region whose
//! classification confidence misses the threshold is split into four
//! quadrants, recursively, stopping when a region classifies confidently,
//! is empty, holds too few landmarks to justify a split, or reaches the
//! 24x24 overlay granularity (3 -> 6 -> 12 -> 24 cells per axis, depth 3).

use serde::Serialize;

use crate::geometry::Rect;
use crate::landmark::LandmarkMap;
use crate::ontology::{Ontology, UNKNOWN_ENV};
use crate::scenario::Bounds;
use crate::semantics::{
    environment_distribution, EnvironmentDistribution, SegmentFeatures, SegmentLandmark,
    SemanticsError,
};

/// Maximum refinement depth: 3x3 cells split at most three times.
pub const MAX_DEPTH: u8 = 3;

/// Grid segmentation parameters.
#[derive(Debug, Clone, Copy)]
pub struct GridParams {
    pub alpha: f64,
    /// Classification confidence that stops refinement.
    pub threshold: f64,
    /// Minimum landmarks for a split to be worthwhile.
    pub sparsity_floor: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            threshold: 0.6,
            sparsity_floor: 4,
        }
    }
}

/// A classified leaf of the segmentation tree.
#[derive(Debug, Clone, Serialize)]
pub struct GridSegment {
    pub rect: Rect,
    pub depth: u8,
    pub label: String,
    /// Maximum probability of the distribution.
    pub confidence: f64,
    pub landmark_count: usize,
    #[serde(skip)]
    pub distribution: EnvironmentDistribution,
}

fn rect_claims(rect: &Rect, bounds: &Bounds, x: f64, y: f64) -> bool {
    let x_hi = if rect.x1 >= bounds.width_km {
        x <= rect.x1
    } else {
        x < rect.x1
    };
    let y_hi = if rect.y1 >= bounds.height_km {
        y <= rect.y1
    } else {
        y < rect.y1
    };
    x >= rect.x0 && x_hi && y >= rect.y0 && y_hi
}

fn refine(
    rect: Rect,
    depth: u8,
    landmarks: Vec<SegmentLandmark>,
    bounds: &Bounds,
    ontology: &Ontology,
    params: &GridParams,
    leaves: &mut Vec<GridSegment>,
) -> Result<(), SemanticsError> {
    let seg = SegmentFeatures::from_rect(landmarks.clone(), &rect);
    let distribution = environment_distribution(&seg, ontology, params.alpha)?;
    let confidence = distribution.max_probability();
    let split = confidence < params.threshold
        && !landmarks.is_empty()
        && landmarks.len() >= params.sparsity_floor
        && depth < MAX_DEPTH;
    if !split {
        let label = if landmarks.is_empty() {
            UNKNOWN_ENV.to_string()
        } else {
            distribution.label.clone()
        };
        leaves.push(GridSegment {
            rect,
            depth,
            confidence: if label == UNKNOWN_ENV { 0.0 } else { confidence },
            label,
            landmark_count: landmarks.len(),
            distribution,
        });
        return Ok(());
    }
    for quadrant in rect.quadrants() {
        let subset: Vec<SegmentLandmark> = landmarks
            .iter()
            .filter(|l| rect_claims(&quadrant, bounds, l.position.x, l.position.y))
            .cloned()
            .collect();
        refine(quadrant, depth + 1, subset, bounds, ontology, params, leaves)?;
    }
    Ok(())
}

/// Segment and classify a collective map over the world bounds.
pub fn grid_segment(
    map: &LandmarkMap,
    bounds: &Bounds,
    ontology: &Ontology,
    params: &GridParams,
) -> Result<Vec<GridSegment>, SemanticsError> {
    let all: Vec<SegmentLandmark> = map
        .iter()
        .map(|l| SegmentLandmark {
            class: l.class.clone(),
            confidence: l.confidence,
            position: l.position,
        })
        .collect();
    let cw = bounds.width_km / 3.0;
    let ch = bounds.height_km / 3.0;
    let mut leaves = Vec::new();
    for row in 0..3 {
        for col in 0..3 {
            let rect = Rect::new(
                col as f64 * cw,
                row as f64 * ch,
                if col == 2 { bounds.width_km } else { (col + 1) as f64 * cw },
                if row == 2 { bounds.height_km } else { (row + 1) as f64 * ch },
            );
            let subset: Vec<SegmentLandmark> = all
                .iter()
                .filter(|l| rect_claims(&rect, bounds, l.position.x, l.position.y))
                .cloned()
                .collect();
            refine(rect, 0, subset, bounds, ontology, params, &mut leaves)?;
        }
    }
    Ok(leaves)
}
