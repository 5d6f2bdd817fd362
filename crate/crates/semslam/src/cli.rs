//! Command-line front end: scenario generation, trial execution, batch
//! sweeps, metric tabulation and map rendering.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::grid::LabelGrid;
use crate::metrics::{iou, macro_iou, precision_recall_ap};
use crate::ontology::Ontology;
use crate::render::{
    auto_gray_palette, grid_pgm, grids_side_by_side_pgm, scene_svg, LayerSelection, RenderFormat,
    RenderSpec,
};
use crate::scenario::{generate_scenario, load_scenario, GenerateParams};
use crate::segmentation::{Fragment, GridSegment};
use crate::trial::{run_trial, TrialConfig, TrialOutput};

#[derive(Parser)]
#[command(
    name = "semslam",
    version,
    about = "Deterministic multi-agent semantic mapping simulator"
)]
struct Cli {
    /// Trial configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Skip image rendering.
    #[arg(long, global = true)]
    no_render: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file (and its companion ontology) from a preset.
    GenScenario(GenScenarioArgs),
    /// Run one trial from a config file and write all artifacts.
    Run,
    /// Run a batch of trials (a seed sweep of one config, or many configs).
    Batch(BatchArgs),
    /// Render grids to PGM or a scenario scene to SVG.
    Render(RenderArgs),
    /// Tabulate IoU/AP metrics between a predicted and a truth grid.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct GenScenarioArgs {
    /// Preset name (quadrant, gunghalin, airport, fyshwick, kingston,
    /// train_depot, city).
    #[arg(long)]
    preset: String,
    /// Uniform feature density per km^2 (preset default when omitted).
    #[arg(long)]
    density: Option<f64>,
    /// Per-zone density overrides, `index=density`, repeatable.
    #[arg(long = "zone-density")]
    zone_density: Vec<String>,
    /// Scenario output file.
    #[arg(long, default_value = "scenario.json")]
    scenario_out: PathBuf,
    /// Companion ontology output file.
    #[arg(long, default_value = "ontology.json")]
    ontology_out: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    /// Comma-separated seed list applied to the base --config.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Additional config files run as-is.
    #[arg(long = "configs", num_args = 0..)]
    configs: Vec<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Predicted grid CSV (PGM path).
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Truth grid CSV for a side-by-side raster.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Scenario JSON (SVG path).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Ontology JSON for scenario validation (SVG path).
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// Collective map JSON export to overlay landmarks.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Output image file.
    #[arg(long)]
    image_out: Option<PathBuf>,
    /// Pixels per overlay cell (PGM).
    #[arg(long, default_value_t = 10)]
    cell_px: u32,
    /// Pixels per km (SVG).
    #[arg(long, default_value_t = 200.0)]
    px_per_km: f64,
    /// Layers to draw: zones, landmarks, fragments, grid, overlay.
    #[arg(long, value_delimiter = ',')]
    layers: Vec<String>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Predicted grid CSV.
    #[arg(long)]
    pred: PathBuf,
    /// Truth grid CSV.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error(transparent)]
    Ontology(#[from] crate::ontology::OntologyError),
    #[error(transparent)]
    Trial(#[from] crate::trial::TrialError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parse arguments from the process environment and run; returns the exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Clap prints its own message; usage errors exit 2, --help/--version 0.
        Err(e) => return e.exit_code_or_default(),
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

trait ClapErrorExt {
    fn exit_code_or_default(self) -> i32;
}

impl ClapErrorExt for clap::Error {
    fn exit_code_or_default(self) -> i32 {
        use clap::error::ErrorKind;
        let code = match self.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 2,
        };
        let _ = self.print();
        code
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::GenScenario(args) => cmd_gen_scenario(&cli, args),
        Command::Run => cmd_run(&cli),
        Command::Batch(args) => cmd_batch(&cli, args),
        Command::Render(args) => cmd_render(&cli, args),
        Command::Metrics(args) => cmd_metrics(&cli, args),
    }
}

fn cmd_gen_scenario(cli: &Cli, args: &GenScenarioArgs) -> Result<(), CliError> {
    let mut params = GenerateParams::new(&args.preset, args.density, cli.seed.unwrap_or(0));
    for entry in &args.zone_density {
        let (idx, value) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("bad --zone-density '{entry}', expected index=density")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| CliError::Usage(format!("bad zone index in '{entry}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("bad density in '{entry}'")))?;
        params.zone_density_overrides.push((idx, value));
    }
    let generated = generate_scenario(&params).map_err(|e| match e {
        crate::scenario::ScenarioError::UnknownPreset(p) => {
            CliError::Usage(format!("unknown preset: {p}"))
        }
        other => CliError::Scenario(other),
    })?;
    let scenario_path = cli.out.join(&args.scenario_out);
    let ontology_path = cli.out.join(&args.ontology_out);
    std::fs::write(&scenario_path, generated.spec.to_json())?;
    std::fs::write(&ontology_path, generated.ontology.to_json())?;
    println!(
        "wrote {} ({} features, {:.4} km^2) and {}",
        scenario_path.display(),
        generated.spec.features.len(),
        generated.spec.area_km2(),
        ontology_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct GridLeafExport<'a> {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    depth: u8,
    label: &'a str,
    confidence: f64,
    landmark_count: usize,
    probabilities: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct FragmentExport<'a> {
    ids: Vec<u64>,
    label: &'a str,
    confidence: f64,
    centroid: [f64; 2],
    hull: Vec<[f64; 2]>,
    probabilities: &'a BTreeMap<String, f64>,
}

fn grid_export_json(leaves: &[GridSegment]) -> String {
    #[derive(Serialize)]
    struct Export<'a> {
        leaves: Vec<GridLeafExport<'a>>,
    }
    let export = Export {
        leaves: leaves
            .iter()
            .map(|l| GridLeafExport {
                x0: l.rect.x0,
                y0: l.rect.y0,
                x1: l.rect.x1,
                y1: l.rect.y1,
                depth: l.depth,
                label: &l.label,
                confidence: l.confidence,
                landmark_count: l.landmark_count,
                probabilities: &l.distribution.probabilities,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&export).expect("grid export")
}

fn fragments_export_json(fragments: &[Fragment]) -> String {
    #[derive(Serialize)]
    struct Export<'a> {
        fragments: Vec<FragmentExport<'a>>,
    }
    let export = Export {
        fragments: fragments
            .iter()
            .map(|f| FragmentExport {
                ids: f.ids(),
                label: &f.label,
                confidence: f.confidence,
                centroid: [f.centroid.x, f.centroid.y],
                hull: f.hull.iter().map(|p| [p.x, p.y]).collect(),
                probabilities: &f.distribution.probabilities,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&export).expect("fragments export")
}

/// Write the full artifact set of one trial into `dir`.
fn write_trial_artifacts(
    dir: &Path,
    out: &TrialOutput,
    render: bool,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("report.csv"),
        format!(
            "{}\n{}\n",
            crate::metrics::TrialReport::csv_header(),
            out.report.csv_row()
        ),
    )?;
    std::fs::write(dir.join("report.json"), out.report.to_json())?;
    let mut er = String::from("t_s,er_km\n");
    for (t, e) in out.report.er_series_km.iter().enumerate() {
        er.push_str(&format!("{},{}\n", t + 1, e));
    }
    std::fs::write(dir.join("er_series.csv"), er)?;
    std::fs::write(dir.join("collective_map.json"), out.collective.to_export_json())?;
    std::fs::write(dir.join("grid.json"), grid_export_json(&out.grid_leaves))?;
    std::fs::write(dir.join("fragments.json"), fragments_export_json(&out.fragments))?;
    std::fs::write(dir.join("pred_grid_grid.csv"), out.pred_grid_grid.to_csv())?;
    std::fs::write(dir.join("pred_grid_branch.csv"), out.pred_grid_branch.to_csv())?;
    std::fs::write(dir.join("truth_grid.csv"), out.truth_grid.to_csv())?;

    if render {
        let labels: Vec<String> = out
            .truth_grid
            .present_labels()
            .into_iter()
            .chain(out.pred_grid_grid.present_labels())
            .chain(out.pred_grid_branch.present_labels())
            .collect();
        let palette = auto_gray_palette(labels);
        std::fs::write(
            dir.join("render_grid.pgm"),
            grids_side_by_side_pgm(&out.truth_grid, &out.pred_grid_grid, &palette, 10)?,
        )?;
        std::fs::write(
            dir.join("render_branch.pgm"),
            grids_side_by_side_pgm(&out.truth_grid, &out.pred_grid_branch, &palette, 10)?,
        )?;
    }
    Ok(())
}

fn load_run_inputs(cli: &Cli) -> Result<(TrialConfig, crate::scenario::ScenarioSpec, Ontology), CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut cfg = TrialConfig::load(config_path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // Paths are relative to the config file's directory.
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));
    let ontology = Ontology::load(base.join(&cfg.ontology))?;
    let spec = load_scenario(base.join(&cfg.scenario), &ontology)?;
    Ok((cfg, spec, ontology))
}

fn cmd_run(cli: &Cli) -> Result<(), CliError> {
    let (cfg, spec, ontology) = load_run_inputs(cli)?;
    let out = run_trial(&spec, &ontology, &cfg)?;
    write_trial_artifacts(&cli.out, &out, !cli.no_render)?;
    if !cli.no_render {
        let svg = scene_svg(
            &spec,
            Some(out.collective.map()),
            Some(&out.grid_leaves),
            Some(&out.fragments),
            &RenderSpec {
                layers: LayerSelection::default(),
                palette: BTreeMap::new(),
                format: RenderFormat::Svg,
                cell_px: 10,
                px_per_km: 200.0,
            },
        )?;
        std::fs::write(cli.out.join("scene.svg"), svg)?;
    }
    println!(
        "trial {} seed {} finished in {} simulated s: {} landmarks, grid IoU {:.3}, branch IoU {:.3}",
        out.report.scenario,
        out.report.seed,
        out.report.elapsed_s,
        out.report.collective_landmarks,
        out.report.grid_macro_iou,
        out.report.branch_macro_iou
    );
    Ok(())
}

fn cmd_batch(cli: &Cli, args: &BatchArgs) -> Result<(), CliError> {
    if args.seeds.is_empty() && args.configs.is_empty() {
        return Err(CliError::Usage(
            "batch needs --seeds (with --config) or --configs".into(),
        ));
    }
    let mut rows: Vec<Result<crate::metrics::TrialReport, String>> = Vec::new();

    if !args.seeds.is_empty() {
        let (base_cfg, spec, ontology) = load_run_inputs(cli)?;
        for &seed in &args.seeds {
            let mut cfg = base_cfg.clone();
            cfg.seed = seed;
            match run_trial(&spec, &ontology, &cfg) {
                Ok(out) => {
                    write_trial_artifacts(
                        &cli.out.join(format!("trial_{seed}")),
                        &out,
                        !cli.no_render,
                    )?;
                    rows.push(Ok(out.report));
                }
                Err(e) => rows.push(Err(format!("seed {seed}: {e}"))),
            }
        }
    }
    for path in &args.configs {
        let mut cfg = match TrialConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                rows.push(Err(format!("{}: {e}", path.display())));
                continue;
            }
        };
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let result = Ontology::load(base.join(&cfg.ontology))
            .map_err(crate::trial::TrialError::from)
            .and_then(|ontology| {
                let spec = load_scenario(base.join(&cfg.scenario), &ontology)?;
                run_trial(&spec, &ontology, &cfg)
            });
        match result {
            Ok(out) => {
                let stem = path.file_stem().map(|s| s.to_string_lossy().to_string());
                let dir = cli
                    .out
                    .join(format!("trial_{}", stem.unwrap_or_else(|| "config".into())));
                write_trial_artifacts(&dir, &out, !cli.no_render)?;
                rows.push(Ok(out.report));
            }
            Err(e) => rows.push(Err(format!("{}: {e}", path.display()))),
        }
    }

    let mut csv = format!("{}\n", crate::metrics::TrialReport::csv_header());
    let mut errors = String::from("index,error\n");
    let mut failures = 0;
    for (i, row) in rows.iter().enumerate() {
        match row {
            Ok(report) => csv.push_str(&format!("{}\n", report.csv_row())),
            Err(msg) => {
                failures += 1;
                errors.push_str(&format!("{i},\"{}\"\n", msg.replace('"', "'")));
            }
        }
    }
    std::fs::write(cli.out.join("batch_report.csv"), csv)?;
    if failures > 0 {
        std::fs::write(cli.out.join("batch_errors.csv"), errors)?;
    }
    println!(
        "batch finished: {} ok, {failures} failed, results in {}",
        rows.len() - failures,
        cli.out.join("batch_report.csv").display()
    );
    Ok(())
}

fn parse_layers(names: &[String]) -> Result<LayerSelection, CliError> {
    if names.is_empty() {
        return Ok(LayerSelection::default());
    }
    let mut layers = LayerSelection {
        zones: false,
        landmarks: false,
        grid_leaves: false,
        fragments: false,
        overlay: false,
    };
    for name in names {
        match name.as_str() {
            "zones" => layers.zones = true,
            "landmarks" => layers.landmarks = true,
            "grid" => layers.grid_leaves = true,
            "fragments" => layers.fragments = true,
            "overlay" => layers.overlay = true,
            other => return Err(CliError::Usage(format!("unknown layer: {other}"))),
        }
    }
    Ok(layers)
}

fn cmd_render(cli: &Cli, args: &RenderArgs) -> Result<(), CliError> {
    if let Some(pred_path) = &args.pred {
        let pred = LabelGrid::from_csv(&std::fs::read_to_string(pred_path)?)?;
        let mut labels: Vec<String> = pred.present_labels();
        let truth = match &args.truth {
            Some(p) => {
                let t = LabelGrid::from_csv(&std::fs::read_to_string(p)?)?;
                labels.extend(t.present_labels());
                Some(t)
            }
            None => None,
        };
        let palette = auto_gray_palette(labels);
        let bytes = match &truth {
            Some(t) => grids_side_by_side_pgm(t, &pred, &palette, args.cell_px)?,
            None => grid_pgm(&pred, &palette, args.cell_px)?,
        };
        let path = args
            .image_out
            .clone()
            .unwrap_or_else(|| cli.out.join("render.pgm"));
        std::fs::write(&path, bytes)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    if let Some(scenario_path) = &args.scenario {
        let ontology = match &args.ontology {
            Some(p) => Ontology::load(p)?,
            None => crate::catalog::default_ontology(),
        };
        let spec = load_scenario(scenario_path, &ontology)?;
        let map = match &args.map {
            Some(p) => Some(read_collective_export(p)?),
            None => None,
        };
        let svg = scene_svg(
            &spec,
            map.as_ref(),
            None,
            None,
            &RenderSpec {
                layers: parse_layers(&args.layers)?,
                palette: BTreeMap::new(),
                format: RenderFormat::Svg,
                cell_px: args.cell_px,
                px_per_km: args.px_per_km,
            },
        )?;
        let path = args
            .image_out
            .clone()
            .unwrap_or_else(|| cli.out.join("scene.svg"));
        std::fs::write(&path, svg)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    Err(CliError::Usage(
        "render needs --pred (PGM) or --scenario (SVG)".into(),
    ))
}

/// Read a collective-map export back into a landmark map.
fn read_collective_export(path: &Path) -> Result<crate::landmark::LandmarkMap, CliError> {
    use crate::geometry::Point;
    use crate::landmark::{Landmark, LandmarkMap, MapFrame};
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let mut map = LandmarkMap::new(MapFrame::Collective);
    for (i, lm) in value["landmarks"]
        .as_array()
        .ok_or_else(|| CliError::Usage("map export missing 'landmarks'".into()))?
        .iter()
        .enumerate()
    {
        map.insert(Landmark {
            id: i as u64,
            class: lm["class"].as_str().unwrap_or("?").to_string(),
            confidence: lm["confidence"].as_f64().unwrap_or(0.0),
            position: Point::new(lm["x"].as_f64().unwrap_or(0.0), lm["y"].as_f64().unwrap_or(0.0)),
            true_position: Point::new(
                lm["true_x"].as_f64().unwrap_or(0.0),
                lm["true_y"].as_f64().unwrap_or(0.0),
            ),
            is_static: true,
            source_agent: lm["source"].as_u64().unwrap_or(0) as usize,
            observations: 1,
        })
        .expect("sequential ids");
    }
    Ok(map)
}

fn cmd_metrics(cli: &Cli, args: &MetricsArgs) -> Result<(), CliError> {
    let pred = LabelGrid::from_csv(&std::fs::read_to_string(&args.pred)?)?;
    let truth = LabelGrid::from_csv(&std::fs::read_to_string(&args.truth)?)?;
    let report = precision_recall_ap(&pred, &truth);
    let mut csv = String::from("class,iou,precision,recall,ap\n");
    println!("{:<20} {:>8} {:>10} {:>8} {:>8}", "class", "iou", "precision", "recall", "ap");
    for (class, (precision, recall, ap)) in &report.per_class {
        let class_iou = iou(&pred, &truth, class);
        println!("{class:<20} {class_iou:>8.4} {precision:>10.4} {recall:>8.4} {ap:>8.4}");
        csv.push_str(&format!("{class},{class_iou},{precision},{recall},{ap}\n"));
    }
    let overall_iou = macro_iou(&pred, &truth);
    println!("{:<20} {:>8.4}", "macro_iou", overall_iou);
    println!("{:<20} {:>8.4}", "macro_map", report.macro_map);
    println!("{:<20} {:>8.4}", "micro_ap", report.micro_ap);
    csv.push_str(&format!("macro_iou,{overall_iou},,,\n"));
    csv.push_str(&format!("macro_map,,,,{}\n", report.macro_map));
    csv.push_str(&format!("micro_ap,,,,{}\n", report.micro_ap));
    std::fs::write(cli.out.join("metrics.csv"), csv)?;
    Ok(())
}
