//! Synthetic ground-truth worlds: zoned environment maps populated with
//! typed features, plus their 24x24 ground-truth rasterization.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::geometry::{point_in_polygon, Point, Rect};
use crate::grid::{LabelGrid, GRID_N};
use crate::ontology::{Ontology, UNKNOWN_ENV};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("feature {index} ({class}) at ({x}, {y}) is outside bounds")]
    FeatureOutOfBounds {
        index: usize,
        class: String,
        x: f64,
        y: f64,
    },
    #[error("feature {index} has unknown class {class}")]
    UnknownFeatureClass { index: usize, class: String },
    #[error("zone {index} has unknown environment label {label}")]
    UnknownZoneLabel { index: usize, label: String },
    #[error("zone {index} polygon needs at least 3 vertices")]
    DegenerateZone { index: usize },
    #[error("agent start {index} is outside bounds")]
    AgentStartOutOfBounds { index: usize },
    #[error("unknown preset: {0}")]
    UnknownPreset(String),
    #[error("negative density: {0}")]
    NegativeDensity(f64),
}

/// World extent in km. The origin is the south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub width_km: f64,
    pub height_km: f64,
}

impl Bounds {
    pub fn area_km2(&self) -> f64 {
        self.width_km * self.height_km
    }

    pub fn rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width_km, self.height_km)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.rect().contains(p)
    }

    pub fn diagonal_km(&self) -> f64 {
        self.rect().diagonal()
    }
}

/// Region geometry: axis-aligned rectangle or simple polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZoneShape {
    Rect { rect: [f64; 4] },
    Polygon { polygon: Vec<[f64; 2]> },
}

/// A region of the world labelled with an environment type.
///
/// (No `deny_unknown_fields` here: serde cannot combine it with `flatten`;
/// a zone without a `rect` or `polygon` key still fails to parse.)
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub label: String,
    #[serde(flatten)]
    pub shape: ZoneShape,
}

impl Zone {
    pub fn rect(label: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Zone {
        Zone {
            label: label.to_string(),
            shape: ZoneShape::Rect {
                rect: [x0, y0, x1, y1],
            },
        }
    }

    pub fn polygon(label: &str, points: &[(f64, f64)]) -> Zone {
        Zone {
            label: label.to_string(),
            shape: ZoneShape::Polygon {
                polygon: points.iter().map(|(x, y)| [*x, *y]).collect(),
            },
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match &self.shape {
            ZoneShape::Rect { rect } => {
                Rect::new(rect[0], rect[1], rect[2], rect[3]).contains(p)
            }
            ZoneShape::Polygon { polygon } => {
                let pts: Vec<Point> = polygon.iter().map(|q| Point::new(q[0], q[1])).collect();
                point_in_polygon(p, &pts)
            }
        }
    }

    pub fn area_km2(&self) -> f64 {
        match &self.shape {
            ZoneShape::Rect { rect } => (rect[2] - rect[0]) * (rect[3] - rect[1]),
            ZoneShape::Polygon { polygon } => {
                // Shoelace formula.
                let n = polygon.len();
                let mut twice = 0.0;
                for i in 0..n {
                    let a = polygon[i];
                    let b = polygon[(i + 1) % n];
                    twice += a[0] * b[1] - b[0] * a[1];
                }
                twice.abs() * 0.5
            }
        }
    }

    fn bounding_rect(&self) -> Rect {
        match &self.shape {
            ZoneShape::Rect { rect } => Rect::new(rect[0], rect[1], rect[2], rect[3]),
            ZoneShape::Polygon { polygon } => {
                let mut r = Rect::new(f64::MAX, f64::MAX, f64::MIN, f64::MIN);
                for p in polygon {
                    r.x0 = r.x0.min(p[0]);
                    r.y0 = r.y0.min(p[1]);
                    r.x1 = r.x1.max(p[0]);
                    r.y1 = r.y1.max(p[1]);
                }
                r
            }
        }
    }
}

/// One placed feature instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feature {
    pub class: String,
    pub x_km: f64,
    pub y_km: f64,
    /// Authored static/dynamic flag; `None` defers to the ontology class
    /// attribute.
    #[serde(rename = "static", default, skip_serializing_if = "Option::is_none")]
    pub is_static: Option<bool>,
}

impl Feature {
    pub fn position(&self) -> Point {
        Point::new(self.x_km, self.y_km)
    }

    /// Resolved static flag: authored value, else ontology class default.
    pub fn resolve_static(&self, ontology: &Ontology) -> bool {
        match self.is_static {
            Some(v) => v,
            None => ontology.is_static_class(&self.class).unwrap_or(true),
        }
    }
}

/// A complete synthetic world definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub bounds: Bounds,
    pub zones: Vec<Zone>,
    pub features: Vec<Feature>,
    pub agent_starts: Vec<[f64; 2]>,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Parse scenario JSON without ontology cross-checks.
    pub fn from_json(text: &str) -> Result<ScenarioSpec, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization")
    }

    /// Validate bounds, zone labels and feature classes against the
    /// companion ontology.
    pub fn validate(&self, ontology: &Ontology) -> Result<(), ScenarioError> {
        for (index, zone) in self.zones.iter().enumerate() {
            if !ontology.has_environment(&zone.label) {
                return Err(ScenarioError::UnknownZoneLabel {
                    index,
                    label: zone.label.clone(),
                });
            }
            if let ZoneShape::Polygon { polygon } = &zone.shape {
                if polygon.len() < 3 {
                    return Err(ScenarioError::DegenerateZone { index });
                }
            }
        }
        for (index, f) in self.features.iter().enumerate() {
            if !self.bounds.contains(&f.position()) {
                return Err(ScenarioError::FeatureOutOfBounds {
                    index,
                    class: f.class.clone(),
                    x: f.x_km,
                    y: f.y_km,
                });
            }
            if !ontology.has_class(&f.class) {
                return Err(ScenarioError::UnknownFeatureClass {
                    index,
                    class: f.class.clone(),
                });
            }
        }
        for (index, s) in self.agent_starts.iter().enumerate() {
            if !self.bounds.contains(&Point::new(s[0], s[1])) {
                return Err(ScenarioError::AgentStartOutOfBounds { index });
            }
        }
        Ok(())
    }

    pub fn area_km2(&self) -> f64 {
        self.bounds.area_km2()
    }

    /// Environment label at a point: the first declared zone containing it,
    /// `Unknown` when uncovered.
    pub fn label_at(&self, p: &Point) -> &str {
        for zone in &self.zones {
            if zone.contains(p) {
                return &zone.label;
            }
        }
        UNKNOWN_ENV
    }

    /// Rasterize the zones onto the 24x24 evaluation overlay; each cell takes
    /// the label of the zone containing its centre.
    pub fn ground_truth_grid(&self) -> LabelGrid {
        let mut grid = LabelGrid::unknown();
        let cw = self.bounds.width_km / GRID_N as f64;
        let ch = self.bounds.height_km / GRID_N as f64;
        for row in 0..GRID_N {
            for col in 0..GRID_N {
                let centre = Point::new((col as f64 + 0.5) * cw, (row as f64 + 0.5) * ch);
                let label = self.label_at(&centre);
                let conf = if label == UNKNOWN_ENV { 0.0 } else { 1.0 };
                grid.set(row, col, label, conf);
            }
        }
        grid
    }
}

/// Load a scenario file and validate it against its companion ontology.
pub fn load_scenario(
    path: impl AsRef<Path>,
    ontology: &Ontology,
) -> Result<ScenarioSpec, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let spec = ScenarioSpec::from_json(&text)?;
    spec.validate(ontology)?;
    Ok(spec)
}

/// Parameters for the deterministic scenario generator.
#[derive(Debug, Clone)]
pub struct GenerateParams {
    pub preset: String,
    /// Uniform density (features per km^2) applied to every zone; `None`
    /// keeps the preset default.
    pub density_per_km2: Option<f64>,
    /// Per-zone density overrides by zone index.
    pub zone_density_overrides: Vec<(usize, f64)>,
    pub seed: u64,
}

impl GenerateParams {
    pub fn new(preset: &str, density: Option<f64>, seed: u64) -> Self {
        Self {
            preset: preset.to_string(),
            density_per_km2: density,
            zone_density_overrides: Vec::new(),
            seed,
        }
    }
}

/// Generated scenario plus the companion ontology its classes come from.
pub struct GeneratedScenario {
    pub spec: ScenarioSpec,
    pub ontology: Ontology,
}

/// Deterministically generate a scenario from a preset layout.
///
/// Feature count per zone is `round(density * zone_area)`; positions are
/// uniform within the zone; classes are drawn from the catalog classes whose
/// strongest environment association matches the zone label. The same
/// `(params, seed)` always produces a byte-identical spec.
pub fn generate_scenario(params: &GenerateParams) -> Result<GeneratedScenario, ScenarioError> {
    let preset = catalog::preset(&params.preset)
        .ok_or_else(|| ScenarioError::UnknownPreset(params.preset.clone()))?;
    if let Some(d) = params.density_per_km2 {
        if d < 0.0 {
            return Err(ScenarioError::NegativeDensity(d));
        }
    }
    for (_, d) in &params.zone_density_overrides {
        if *d < 0.0 {
            return Err(ScenarioError::NegativeDensity(*d));
        }
    }

    let ontology = preset.ontology;
    let bounds = Bounds {
        width_km: preset.width_km,
        height_km: preset.height_km,
    };

    // Classes whose strongest association is the zone environment.
    let classes_for = |env: &str| -> Vec<String> {
        let mut picks = Vec::new();
        for class in ontology.class_names() {
            let mut best_env = String::new();
            let mut best_sp = 0.0;
            for e in ontology.environments() {
                let sp = ontology.semantic_proximity(class, e).unwrap();
                if sp > best_sp {
                    best_sp = sp;
                    best_env = e.clone();
                }
            }
            if best_env == env {
                picks.push(class.to_string());
            }
        }
        picks
    };

    // Zones may overlap (base layers under smaller districts); a position
    // belongs to the first zone containing it, matching rasterization.
    let owner = |p: &Point| preset.zones.iter().position(|z| z.contains(p));

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut features = Vec::new();
    for (zi, zone) in preset.zones.iter().enumerate() {
        let density = params
            .zone_density_overrides
            .iter()
            .find(|(i, _)| *i == zi)
            .map(|(_, d)| *d)
            .or(params.density_per_km2)
            .unwrap_or(preset.default_density);
        let count = (density * zone.area_km2()).round() as usize;
        let pool = classes_for(&zone.label);
        if pool.is_empty() {
            continue;
        }
        let bbox = zone.bounding_rect();
        for _ in 0..count {
            // Rejection-sample a position owned by this zone.
            let mut p = None;
            for _ in 0..100_000 {
                let candidate = Point::new(
                    rng.gen_range(bbox.x0..bbox.x1),
                    rng.gen_range(bbox.y0..bbox.y1),
                );
                if bounds.contains(&candidate) && owner(&candidate) == Some(zi) {
                    p = Some(candidate);
                    break;
                }
            }
            let Some(p) = p else {
                // Zone fully shadowed by earlier zones; nothing to place.
                break;
            };
            let class = pool[rng.gen_range(0..pool.len())].clone();
            let is_static = ontology.is_static_class(&class).unwrap();
            features.push(Feature {
                class,
                x_km: p.x,
                y_km: p.y,
                is_static: Some(is_static),
            });
        }
    }

    let (w, h) = (bounds.width_km, bounds.height_km);
    let spec = ScenarioSpec {
        name: preset.name.to_string(),
        bounds,
        zones: preset.zones,
        features,
        agent_starts: vec![[w * 0.25, h * 0.25], [w * 0.75, h * 0.25], [w * 0.5, h * 0.75]],
        seed: params.seed,
    };
    spec.validate(&ontology)?;
    Ok(GeneratedScenario { spec, ontology })
}
