//! Map segmentation: recursive grid refinement and N-nearest-neighbour
//! branch clustering with max-margin boundary repair, plus rasterization of
//! either result onto the 24x24 evaluation overlay.

pub mod branch;
pub mod grid;
pub mod margin;
pub mod raster;

pub use branch::{
    branch_segment, default_adjacency_km, detect_bisection, merge_fragments, nnn_cluster,
    trade_landmarks, BranchError, BranchParams, Fragment, Member,
};
pub use grid::{grid_segment, GridParams, GridSegment, MAX_DEPTH};
pub use margin::{best_effort_boundary, max_margin_boundary, Hyperplane, MarginError};
pub use raster::{rasterize_fragments, rasterize_grid};
