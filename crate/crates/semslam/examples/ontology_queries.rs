//! Query the knowledge base: superclasses, semantic proximity, similarity.
//!
//! ```sh
//! cargo run --example ontology_queries
//! ```

use semslam::catalog;

fn main() {
    let ontology = catalog::default_ontology();

    println!("environments: {:?}", ontology.environments());
    println!("concepts: {}", ontology.concept_count());
    println!();

    for class in ["tree", "skyscraper", "bus", "sedan"] {
        let supers = ontology.environment_superclasses(class).unwrap();
        print!("{class:<12} -> ");
        let mut first = true;
        for env in &supers {
            let sp = ontology.semantic_proximity(class, env).unwrap();
            if !first {
                print!(", ");
            }
            print!("{env} (sp {sp})");
            first = false;
        }
        println!();
    }
    println!();

    for (a, b) in [("sedan", "hatchback"), ("sedan", "tree"), ("tree", "shrub")] {
        println!(
            "semantically_similar({a}, {b}) = {}",
            ontology.semantically_similar(a, b).unwrap()
        );
    }

    // The same knowledge base serializes to the JSON format the loader reads.
    let json = ontology.to_json();
    let reloaded = semslam::Ontology::from_json(&json).unwrap();
    println!();
    println!(
        "round-trip through JSON preserves {} concepts",
        reloaded.concept_count()
    );
}
