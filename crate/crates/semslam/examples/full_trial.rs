//! An end-to-end trial: three agents, drifting odometry with the oracle
//! corrector, map merging, both segmentation methods and the full report.
//!
//! ```sh
//! cargo run --example full_trial
//! ```

use semslam::agent::{AgentConfig, OracleConfig, SensorConfig};
use semslam::scenario::{generate_scenario, GenerateParams};
use semslam::trial::{run_trial, TrialConfig};

fn main() {
    let generated = generate_scenario(&GenerateParams::new("quadrant", Some(25.0), 3)).unwrap();
    let cfg = TrialConfig {
        agent_count: 3,
        agent: AgentConfig {
            speed_km_s: 0.02,
            sweep_width_km: 0.4,
            sensor: SensorConfig {
                range_km: 0.35,
                fov_rad: std::f64::consts::TAU,
                p_detect: 0.95,
                sigma_range_km: 0.002,
                sigma_bearing_rad: 0.01,
                confidence_min: 0.7,
                confidence_max: 1.0,
            },
            sigma_drift_km: 0.001,
            max_turn_rad: 0.7,
            acquisition_km: 0.05,
            approach_budget: 500,
            oracle: OracleConfig {
                enabled: true,
                theta_km: 0.05,
            },
        },
        seed: 3,
        step_cap: 200_000,
        ..TrialConfig::default()
    };

    let out = run_trial(&generated.spec, &generated.ontology, &cfg).unwrap();
    let r = &out.report;

    println!("scenario {} (seed {})", r.scenario, r.seed);
    println!("  simulated time     {} s", r.elapsed_s);
    println!(
        "  features           {}/{} discovered, {} collective landmarks",
        r.features_discovered, r.features_total, r.collective_landmarks
    );
    println!(
        "  coverage           A' = {:.3} km^2 of {:.3} km^2 ({:.1}%), tracked {:.1}%",
        r.searched_area_km2,
        r.total_area_km2,
        r.coverage_ratio * 100.0,
        r.tracked_coverage_ratio * 100.0
    );
    println!(
        "  dispersion         {:.3} km avg ({:.1}% of max)",
        r.avg_dispersion_km,
        r.norm_dispersion * 100.0
    );
    println!(
        "  map quality        Er {:.4} km, topology coverage {:.1}%, accuracy {:.4} km",
        r.er_final_km,
        r.topology_coverage * 100.0,
        r.topology_accuracy_km
    );
    println!(
        "  grid method        IoU {:.3}  mAP {:.3}  micro AP {:.3}",
        r.grid_macro_iou, r.grid_map, r.grid_micro_ap
    );
    println!(
        "  branch method      IoU {:.3}  mAP {:.3}  micro AP {:.3}",
        r.branch_macro_iou, r.branch_map, r.branch_micro_ap
    );
    println!();
    println!("CSV row:");
    println!("{}", semslam::TrialReport::csv_header());
    println!("{}", r.csv_row());
}
