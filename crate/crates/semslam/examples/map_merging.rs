//! The control agent's merge rules, one submission at a time: rebasing,
//! duplicate collapse, confidence-weighted class choice, discard and
//! resurrection.
//!
//! ```sh
//! cargo run --example map_merging
//! ```

use semslam::catalog;
use semslam::control::{rebase_map, CollectiveMap, MergeConfig};
use semslam::geometry::{Point, Pose};
use semslam::landmark::{Landmark, LandmarkMap, MapFrame};

fn landmark(id: u64, class: &str, confidence: f64, x: f64, y: f64) -> Landmark {
    Landmark {
        id,
        class: class.into(),
        confidence,
        position: Point::new(x, y),
        true_position: Point::new(x, y),
        is_static: true,
        source_agent: 0,
        observations: 1,
    }
}

fn main() {
    let ontology = catalog::default_ontology();

    // An agent map in its local frame, rebased by the known start pose.
    let mut local = LandmarkMap::new(MapFrame::AgentLocal);
    local.insert(landmark(0, "tree", 0.9, 0.1, 0.0)).unwrap();
    local.insert(landmark(1, "house", 0.8, 0.0, 0.2)).unwrap();
    let start = Pose::new(1.0, 1.0, std::f64::consts::FRAC_PI_2);
    let rebased = rebase_map(&local, &start).unwrap();
    println!("rebased positions (start at (1,1) facing north):");
    for lm in rebased.iter() {
        println!("  {:<6} ({:.2}, {:.2})", lm.class, lm.position.x, lm.position.y);
    }
    println!();

    let config = MergeConfig {
        merge_radius_km: 0.05,
        proximity_tolerance_km: 0.02,
        resurrection_threshold: 3,
        confidence_floor: 0.5,
    };
    let mut collective = CollectiveMap::new(config).unwrap();

    let submissions = [
        ("high-confidence sedan", landmark(10, "sedan", 0.9, 0.50, 0.50)),
        ("same sedan again", landmark(11, "sedan", 0.9, 0.50, 0.50)),
        ("nearby hatchback (same similarity group)", landmark(12, "hatchback", 0.6, 0.52, 0.50)),
        ("confident tree far away", landmark(13, "tree", 0.95, 1.50, 1.50)),
        ("weak skyscraper next to the tree", landmark(14, "skyscraper", 0.2, 1.505, 1.50)),
        ("weak skyscraper again", landmark(15, "skyscraper", 0.25, 1.506, 1.501)),
        ("weak skyscraper a third time", landmark(16, "skyscraper", 0.22, 1.504, 1.499)),
    ];
    println!("merge outcomes (radius 0.05, tolerance 0.02, resurrection at 3):");
    for (what, lm) in submissions {
        let outcome = collective
            .merge_landmark(&ontology, &lm, MapFrame::Collective)
            .unwrap();
        println!("  {what:<45} -> {outcome:?}");
    }
    println!();
    println!("final collective map ({} entries):", collective.len());
    for lm in collective.map().iter() {
        println!(
            "  {:<10} conf {:.2} at ({:.4}, {:.4}) from {} observation(s)",
            lm.class, lm.confidence, lm.position.x, lm.position.y, lm.observations
        );
    }
}
