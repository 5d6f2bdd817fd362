//! Both segmentation methods side by side on one collective map, with
//! the IoU/AP comparison against ground truth.
//!
//! ```sh
//! cargo run --example grid_vs_branch
//! ```

use semslam::geometry::Point;
use semslam::grid::GRID_N;
use semslam::landmark::{Landmark, LandmarkMap, MapFrame};
use semslam::metrics::{macro_iou, precision_recall_ap};
use semslam::scenario::{generate_scenario, GenerateParams};
use semslam::segmentation::{
    branch_segment, grid_segment, rasterize_fragments, rasterize_grid, BranchParams, GridParams,
};

fn main() {
    // Build an idealized collective map straight from the ground truth, as a
    // drift-free trial would produce.
    let generated = generate_scenario(&GenerateParams::new("quadrant", Some(30.0), 21)).unwrap();
    let spec = generated.spec;
    let ontology = generated.ontology;
    let mut map = LandmarkMap::new(MapFrame::Collective);
    for (i, f) in spec.features.iter().enumerate() {
        map.insert(Landmark {
            id: i as u64,
            class: f.class.clone(),
            confidence: 0.9,
            position: f.position(),
            true_position: f.position(),
            is_static: true,
            source_agent: 0,
            observations: 1,
        })
        .unwrap();
    }

    let leaves = grid_segment(
        &map,
        &spec.bounds,
        &ontology,
        &GridParams {
            alpha: 0.5,
            threshold: 0.6,
            sparsity_floor: 4,
        },
    )
    .unwrap();
    let fragments = branch_segment(
        &map,
        &ontology,
        &BranchParams {
            alpha: 0.5,
            seed_position: Point::new(1.0, 1.0),
            momentum: 0,
            adjacency_km: None,
        },
    )
    .unwrap();

    println!(
        "grid method:   {} leaves (depths {:?})",
        leaves.len(),
        leaves.iter().map(|l| l.depth).max().unwrap_or(0)
    );
    println!(
        "branch method: {} fragments, sizes {:?}",
        fragments.len(),
        fragments.iter().map(|f| f.members.len()).collect::<Vec<_>>()
    );
    println!();

    let truth = spec.ground_truth_grid();
    let grid_pred = rasterize_grid(&leaves, &spec.bounds);
    let branch_pred = rasterize_fragments(&fragments, &spec.bounds);

    for (name, pred) in [("grid", &grid_pred), ("branch", &branch_pred)] {
        let ap = precision_recall_ap(pred, &truth);
        let unknown = pred.count_label(semslam::UNKNOWN_ENV);
        println!(
            "{name:<7} macro IoU {:.3}  mAP {:.3}  micro AP {:.3}  unknown cells {unknown}/{}",
            macro_iou(pred, &truth),
            ap.macro_map,
            ap.micro_ap,
            GRID_N * GRID_N
        );
    }
    println!();
    println!("branch prediction (N row at the top, '.' = Unknown):");
    for row in (0..GRID_N).rev() {
        let line: String = (0..GRID_N)
            .map(|col| {
                let label = branch_pred.get(row, col);
                if label == semslam::UNKNOWN_ENV {
                    '.'
                } else {
                    label.chars().next().unwrap()
                }
            })
            .collect();
        println!("  {line}");
    }
}
