//! Deterministic multi-agent semantic mapping simulator.
//!
//! Edge agents explore a synthetic zoned world with an incentive-biased
//! random walk, detect typed features through a parametric sensor, and build
//! local landmark maps under drifting odometry. A control agent rebases and
//! merges those maps into a collective map, which an ontology-backed
//! semantics engine classifies into environment types through two
//! segmentation strategies (recursive grid refinement and progressive
//! nearest-neighbour clustering with max-margin boundary repair). A metric
//! suite evaluates search coverage, dispersion, map quality and
//! classification quality against ground truth on a 24x24 overlay.
//!
//! Every trial is a pure function of its configuration: all randomness flows
//! from a single master seed through per-agent substreams, so runs replay
//! byte-identically.
//!
//! The `examples/` directory demonstrates each capability end to end; the
//! thin `semslam` binary exposes the same library through subcommands
//! (`gen-scenario`, `run`, `batch`, `render`, `metrics`).

pub mod agent;
pub mod catalog;
pub mod cli;
pub mod control;
pub mod geometry;
pub mod grid;
pub mod landmark;
pub mod metrics;
pub mod ontology;
pub mod render;
pub mod scenario;
pub mod segmentation;
pub mod semantics;
pub mod trial;

pub use agent::{AgentConfig, AgentState, Detection, SensorConfig};
pub use control::{CollectiveMap, IncentiveConfig, MergeConfig, MergeOutcome};
pub use geometry::{Point, Pose, Rect};
pub use grid::{LabelGrid, GRID_CELLS, GRID_N};
pub use landmark::{Landmark, LandmarkMap, MapFrame};
pub use metrics::TrialReport;
pub use ontology::{Ontology, UNKNOWN_ENV};
pub use scenario::{Bounds, Feature, ScenarioSpec, Zone};
pub use semantics::{EnvironmentDistribution, SegmentFeatures, SegmentLandmark};
pub use trial::{run_batch, run_trial, TrialConfig, TrialOutput};
