//! Generate synthetic worlds from the shipped presets and print their
//! ground-truth grids.
//!
//! ```sh
//! cargo run --example generate_world
//! ```

use semslam::catalog::PRESET_NAMES;
use semslam::grid::GRID_N;
use semslam::scenario::{generate_scenario, GenerateParams};

fn main() {
    for preset in PRESET_NAMES {
        let generated = generate_scenario(&GenerateParams::new(preset, None, 7)).unwrap();
        println!(
            "{:<12} {:>8.4} km^2  {:>5} features  {} zones",
            preset,
            generated.spec.area_km2(),
            generated.spec.features.len(),
            generated.spec.zones.len()
        );
    }
    println!();

    // The quadrant preset rasterized to the 24x24 evaluation overlay,
    // one letter per cell.
    let generated = generate_scenario(&GenerateParams::new("quadrant", Some(20.0), 7)).unwrap();
    let grid = generated.spec.ground_truth_grid();
    println!("quadrant ground truth (N row at the top):");
    for row in (0..GRID_N).rev() {
        let line: String = (0..GRID_N)
            .map(|col| grid.get(row, col).chars().next().unwrap_or('?'))
            .collect();
        println!("  {line}");
    }
}
