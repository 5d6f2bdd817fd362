//! Landmarks and landmark maps.
//!
//! A landmark is a semantically labelled static feature with a believed
//! position; the true position rides along for metrics only and is never
//! consulted by mapping logic (the oracle corrector is the one deliberate
//! exception). Maps are ordered collections in either the agent-local frame
//! (origin at the agent's start) or the shared collective frame.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Reference frame of a landmark map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapFrame {
    /// Origin at the owning agent's start pose.
    AgentLocal,
    /// The control agent's shared frame (world coordinates).
    Collective,
}

/// A semantically labelled feature observation promoted to a map entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub id: u64,
    pub class: String,
    /// Detector confidence in [0, 1].
    pub confidence: f64,
    /// Believed position in the map's frame.
    pub position: Point,
    /// Ground-truth position in the same frame, carried for metrics only.
    pub true_position: Point,
    pub is_static: bool,
    pub source_agent: usize,
    pub observations: u32,
}

impl Landmark {
    /// Distance between believed and true position.
    pub fn offset_error_km(&self) -> f64 {
        self.position.distance(&self.true_position)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("duplicate landmark id {0}")]
pub struct DuplicateLandmark(pub u64);

/// Ordered landmark collection in one reference frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkMap {
    pub frame: MapFrame,
    landmarks: Vec<Landmark>,
}

impl LandmarkMap {
    pub fn new(frame: MapFrame) -> Self {
        Self {
            frame,
            landmarks: Vec::new(),
        }
    }

    pub fn insert(&mut self, landmark: Landmark) -> Result<(), DuplicateLandmark> {
        if self.landmarks.iter().any(|l| l.id == landmark.id) {
            return Err(DuplicateLandmark(landmark.id));
        }
        self.landmarks.push(landmark);
        Ok(())
    }

    /// Remove and return the entry at `index`, preserving order.
    pub fn remove(&mut self, index: usize) -> Landmark {
        self.landmarks.remove(index)
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Landmark> {
        self.landmarks.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Landmark> {
        self.landmarks.iter_mut()
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    /// Mean distance between believed and true positions (0 for empty maps).
    pub fn mean_offset_error_km(&self) -> f64 {
        if self.landmarks.is_empty() {
            return 0.0;
        }
        self.landmarks.iter().map(Landmark::offset_error_km).sum::<f64>()
            / self.landmarks.len() as f64
    }

    /// Ids held by this map.
    pub fn ids(&self) -> BTreeSet<u64> {
        self.landmarks.iter().map(|l| l.id).collect()
    }
}
