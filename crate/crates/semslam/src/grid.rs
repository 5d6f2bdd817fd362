//! Fixed 24x24 label grid used for ground truth and rasterized predictions.
//!
//! The evaluation overlay is always 24x24 cells regardless of world size;
//! cell (row, col) covers `[col*w/24, (col+1)*w/24) x [row*h/24, (row+1)*h/24)`
//! with row 0 at the bottom of the map.

use std::fmt::Write as _;

use crate::ontology::UNKNOWN_ENV;

/// Number of cells per axis of the evaluation overlay.
pub const GRID_N: usize = 24;

/// Total cell count.
pub const GRID_CELLS: usize = GRID_N * GRID_N;

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("grid must be {GRID_N}x{GRID_N}, got {0} rows")]
    BadRowCount(usize),
    #[error("row {0} has {1} cells, expected {GRID_N}")]
    BadRowLength(usize, usize),
    #[error("bad confidence value in cell {0}: {1}")]
    BadConfidence(usize, String),
}

/// A 24x24 grid of environment labels with a per-cell confidence.
///
/// Ground-truth grids carry confidence 1.0 everywhere; predicted grids carry
/// the classifier's probability for the chosen label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGrid {
    labels: Vec<String>,
    confidence: Vec<f64>,
}

impl LabelGrid {
    /// Grid with every cell set to `Unknown`, confidence 0.
    pub fn unknown() -> Self {
        Self {
            labels: vec![UNKNOWN_ENV.to_string(); GRID_CELLS],
            confidence: vec![0.0; GRID_CELLS],
        }
    }

    /// Grid filled with one label at confidence 1.
    pub fn uniform(label: &str) -> Self {
        Self {
            labels: vec![label.to_string(); GRID_CELLS],
            confidence: vec![1.0; GRID_CELLS],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> &str {
        &self.labels[row * GRID_N + col]
    }

    pub fn confidence(&self, row: usize, col: usize) -> f64 {
        self.confidence[row * GRID_N + col]
    }

    pub fn set(&mut self, row: usize, col: usize, label: &str, confidence: f64) {
        let i = row * GRID_N + col;
        self.labels[i] = label.to_string();
        self.confidence[i] = confidence;
    }

    /// Flat row-major view of the labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Flat row-major view of the confidences.
    pub fn confidences(&self) -> &[f64] {
        &self.confidence
    }

    /// Distinct labels other than `Unknown`, sorted.
    pub fn present_labels(&self) -> Vec<String> {
        let mut set: Vec<String> = self
            .labels
            .iter()
            .filter(|l| l.as_str() != UNKNOWN_ENV)
            .cloned()
            .collect();
        set.sort();
        set.dedup();
        set
    }

    pub fn count_label(&self, label: &str) -> usize {
        self.labels.iter().filter(|l| l.as_str() == label).count()
    }

    /// CSV encoding: 24 rows of 24 cells, each `label` (confidence 1) or
    /// `label:confidence`. Row 0 is written first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in 0..GRID_N {
            for col in 0..GRID_N {
                if col > 0 {
                    out.push(',');
                }
                let i = row * GRID_N + col;
                if self.confidence[i] == 1.0 {
                    out.push_str(&self.labels[i]);
                } else {
                    let _ = write!(out, "{}:{}", self.labels[i], self.confidence[i]);
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parse the CSV encoding. Cells without an explicit confidence get 1.0.
    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != GRID_N {
            return Err(GridError::BadRowCount(rows.len()));
        }
        let mut grid = LabelGrid::unknown();
        for (r, line) in rows.iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != GRID_N {
                return Err(GridError::BadRowLength(r, cells.len()));
            }
            for (c, cell) in cells.iter().enumerate() {
                match cell.rsplit_once(':') {
                    Some((label, conf)) => {
                        let conf: f64 = conf
                            .parse()
                            .map_err(|_| GridError::BadConfidence(r * GRID_N + c, cell.to_string()))?;
                        grid.set(r, c, label, conf);
                    }
                    None => grid.set(r, c, cell, 1.0),
                }
            }
        }
        Ok(grid)
    }
}
