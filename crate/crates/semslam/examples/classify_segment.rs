//! The semantics engine on hand-built segments: confidence, inference
//! counts and the blended probability distribution.
//!
//! ```sh
//! cargo run --example classify_segment
//! ```

use semslam::catalog;
use semslam::geometry::Rect;
use semslam::semantics::{
    classify_segment, environment_distribution, SegmentFeatures, SegmentLandmark,
};

fn show(name: &str, seg: &SegmentFeatures, ontology: &semslam::Ontology, alpha: f64) {
    let dist = environment_distribution(seg, ontology, alpha).unwrap();
    println!("{name} ({} landmarks, alpha {alpha}):", seg.len());
    for (env, p) in &dist.probabilities {
        if *p > 0.0 {
            println!(
                "  {env:<18} P {p:.3}  C {:.3}  inferences {}",
                dist.confidences[env], dist.inferences[env]
            );
        }
    }
    let cls = classify_segment(seg, ontology, alpha, 0.6).unwrap();
    println!(
        "  -> {} at {:.3} ({} threshold 0.6)\n",
        cls.label,
        cls.confidence,
        if cls.pass { "clears" } else { "misses" }
    );
}

fn main() {
    let ontology = catalog::default_ontology();
    let rect = Rect::new(0.0, 0.0, 1.0, 1.0);

    // A tight residential block: houses close together agree with each other.
    let residential = SegmentFeatures::from_rect(
        vec![
            SegmentLandmark::new("house", 0.95, 0.40, 0.40),
            SegmentLandmark::new("house", 0.90, 0.42, 0.41),
            SegmentLandmark::new("letterbox", 0.75, 0.41, 0.43),
            SegmentLandmark::new("backyard_pool", 0.80, 0.44, 0.40),
        ],
        &rect,
    );
    show("residential block", &residential, &ontology, 0.5);

    // The same classes spread to the segment corners: spatial distance
    // weakens every shared inference.
    let sparse = SegmentFeatures::from_rect(
        vec![
            SegmentLandmark::new("house", 0.95, 0.0, 0.0),
            SegmentLandmark::new("house", 0.90, 1.0, 1.0),
            SegmentLandmark::new("letterbox", 0.75, 0.0, 1.0),
            SegmentLandmark::new("backyard_pool", 0.80, 1.0, 0.0),
        ],
        &rect,
    );
    show("same classes, spread apart", &sparse, &ontology, 0.5);

    // Mixed evidence: trees next to a skyscraper split the mass, and the
    // cross-class pairs contribute to no environment at all.
    let mixed = SegmentFeatures::from_rect(
        vec![
            SegmentLandmark::new("tree", 0.9, 0.30, 0.30),
            SegmentLandmark::new("tree", 0.8, 0.32, 0.31),
            SegmentLandmark::new("skyscraper", 0.9, 0.35, 0.30),
        ],
        &rect,
    );
    show("trees beside a skyscraper", &mixed, &ontology, 0.5);

    // Alpha shifts the weight between pairwise confidence and the share of
    // possible inferences a hypothesis explains.
    for alpha in [0.2, 0.8] {
        show("mixed segment, shifted alpha", &mixed, &ontology, alpha);
    }
}
