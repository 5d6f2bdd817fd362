//! Deterministic map rendering: PGM rasters of label grids and SVG scenes
//! of zones, landmarks and fragments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::grid::{LabelGrid, GRID_N};
use crate::landmark::LandmarkMap;
use crate::ontology::UNKNOWN_ENV;
use crate::scenario::{ScenarioSpec, ZoneShape};
use crate::segmentation::{Fragment, GridSegment};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("palette has no entry for label {0}")]
    MissingLabel(String),
    #[error("scale must be positive")]
    BadScale,
}

/// Output format for rendered maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Pgm,
    Svg,
}

/// Which layers an SVG scene draws.
#[derive(Debug, Clone, Copy)]
pub struct LayerSelection {
    pub zones: bool,
    pub landmarks: bool,
    pub grid_leaves: bool,
    pub fragments: bool,
    pub overlay: bool,
}

impl Default for LayerSelection {
    fn default() -> Self {
        Self {
            zones: true,
            landmarks: true,
            grid_leaves: false,
            fragments: true,
            overlay: false,
        }
    }
}

/// Rendering parameters shared by the raster and vector paths.
#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub layers: LayerSelection,
    /// Grey level per environment label for PGM output.
    pub palette: BTreeMap<String, u8>,
    pub format: RenderFormat,
    /// Pixels per overlay cell for PGM grids.
    pub cell_px: u32,
    /// Pixels per km for SVG scenes.
    pub px_per_km: f64,
}

impl RenderSpec {
    pub fn for_labels(labels: impl IntoIterator<Item = String>) -> Self {
        Self {
            layers: LayerSelection::default(),
            palette: auto_gray_palette(labels),
            format: RenderFormat::Pgm,
            cell_px: 10,
            px_per_km: 200.0,
        }
    }
}

/// Grey palette over sorted labels, evenly spaced in [32, 224]; `Unknown`
/// renders white.
pub fn auto_gray_palette(labels: impl IntoIterator<Item = String>) -> BTreeMap<String, u8> {
    let mut sorted: Vec<String> = labels
        .into_iter()
        .filter(|l| l.as_str() != UNKNOWN_ENV)
        .collect();
    sorted.sort();
    sorted.dedup();
    let mut palette = BTreeMap::new();
    let n = sorted.len().max(1);
    for (i, label) in sorted.into_iter().enumerate() {
        let level = if n == 1 {
            128
        } else {
            32 + (192 * i) / (n - 1)
        };
        palette.insert(label, level as u8);
    }
    palette.insert(UNKNOWN_ENV.to_string(), 255);
    palette
}

const HEX_COLORS: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

/// Hex colour palette over sorted labels; `Unknown` renders white.
pub fn auto_hex_palette(labels: impl IntoIterator<Item = String>) -> BTreeMap<String, String> {
    let mut sorted: Vec<String> = labels
        .into_iter()
        .filter(|l| l.as_str() != UNKNOWN_ENV)
        .collect();
    sorted.sort();
    sorted.dedup();
    let mut palette = BTreeMap::new();
    for (i, label) in sorted.into_iter().enumerate() {
        palette.insert(label, HEX_COLORS[i % HEX_COLORS.len()].to_string());
    }
    palette.insert(UNKNOWN_ENV.to_string(), "#ffffff".to_string());
    palette
}

fn grid_pixels(
    grid: &LabelGrid,
    palette: &BTreeMap<String, u8>,
    cell_px: u32,
) -> Result<Vec<Vec<u8>>, RenderError> {
    let px = cell_px as usize;
    let side = GRID_N * px;
    let mut rows = vec![vec![255u8; side]; side];
    for row in 0..GRID_N {
        for col in 0..GRID_N {
            let label = grid.get(row, col);
            let level = *palette
                .get(label)
                .ok_or_else(|| RenderError::MissingLabel(label.to_string()))?;
            // Grid row 0 is the south edge; image row 0 is the top.
            let top = (GRID_N - 1 - row) * px;
            for line in rows.iter_mut().skip(top).take(px) {
                line[col * px..(col + 1) * px].fill(level);
            }
        }
    }
    Ok(rows)
}

fn pgm_bytes(rows: &[Vec<u8>]) -> Vec<u8> {
    let height = rows.len();
    let width = if height > 0 { rows[0].len() } else { 0 };
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    for row in rows {
        out.extend_from_slice(row);
    }
    out
}

/// Render one grid as a binary PGM raster at `cell_px` pixels per cell.
pub fn grid_pgm(
    grid: &LabelGrid,
    palette: &BTreeMap<String, u8>,
    cell_px: u32,
) -> Result<Vec<u8>, RenderError> {
    if cell_px == 0 {
        return Err(RenderError::BadScale);
    }
    Ok(pgm_bytes(&grid_pixels(grid, palette, cell_px)?))
}

/// Render truth and prediction side by side with a 2-pixel divider.
pub fn grids_side_by_side_pgm(
    left: &LabelGrid,
    right: &LabelGrid,
    palette: &BTreeMap<String, u8>,
    cell_px: u32,
) -> Result<Vec<u8>, RenderError> {
    if cell_px == 0 {
        return Err(RenderError::BadScale);
    }
    let a = grid_pixels(left, palette, cell_px)?;
    let b = grid_pixels(right, palette, cell_px)?;
    let rows: Vec<Vec<u8>> = a
        .into_iter()
        .zip(b)
        .map(|(mut la, lb)| {
            la.push(0);
            la.push(0);
            la.extend(lb);
            la
        })
        .collect();
    Ok(pgm_bytes(&rows))
}

/// Vector scene of the world: zones, landmarks (believed and true),
/// grid leaves, fragment hulls and the 24x24 overlay.
pub fn scene_svg(
    spec: &ScenarioSpec,
    map: Option<&LandmarkMap>,
    leaves: Option<&[GridSegment]>,
    fragments: Option<&[Fragment]>,
    render: &RenderSpec,
) -> Result<String, RenderError> {
    if render.px_per_km <= 0.0 {
        return Err(RenderError::BadScale);
    }
    let s = render.px_per_km;
    let (w, h) = (spec.bounds.width_km, spec.bounds.height_km);
    let hex = auto_hex_palette(
        spec.zones
            .iter()
            .map(|z| z.label.clone())
            .chain(leaves.into_iter().flatten().map(|l| l.label.clone()))
            .chain(fragments.into_iter().flatten().map(|f| f.label.clone())),
    );
    let color = |label: &str| -> &str {
        hex.get(label).map(|c| c.as_str()).unwrap_or("#cccccc")
    };
    // World y points up; SVG y points down.
    let ty = |y_km: f64| (h - y_km) * s;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
        w * s,
        h * s,
        w * s,
        h * s
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{:.0}\" height=\"{:.0}\" fill=\"#ffffff\"/>",
        w * s,
        h * s
    );

    if render.layers.zones {
        for zone in &spec.zones {
            match &zone.shape {
                ZoneShape::Rect { rect } => {
                    let _ = writeln!(
                        svg,
                        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\"/>",
                        rect[0] * s,
                        ty(rect[3]),
                        (rect[2] - rect[0]) * s,
                        (rect[3] - rect[1]) * s,
                        color(&zone.label),
                        color(&zone.label)
                    );
                }
                ZoneShape::Polygon { polygon } => {
                    let pts: Vec<String> = polygon
                        .iter()
                        .map(|p| format!("{:.2},{:.2}", p[0] * s, ty(p[1])))
                        .collect();
                    let _ = writeln!(
                        svg,
                        "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\"/>",
                        pts.join(" "),
                        color(&zone.label),
                        color(&zone.label)
                    );
                }
            }
        }
    }

    if render.layers.grid_leaves {
        for leaf in leaves.into_iter().flatten() {
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.4\" stroke=\"#333333\" stroke-width=\"0.5\"/>",
                leaf.rect.x0 * s,
                ty(leaf.rect.y1),
                leaf.rect.width() * s,
                leaf.rect.height() * s,
                color(&leaf.label)
            );
        }
    }

    if render.layers.fragments {
        for frag in fragments.into_iter().flatten() {
            if frag.hull.len() >= 3 {
                let pts: Vec<String> = frag
                    .hull
                    .iter()
                    .map(|p| format!("{:.2},{:.2}", p.x * s, ty(p.y)))
                    .collect();
                let _ = writeln!(
                    svg,
                    "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.45\" stroke=\"#222222\" stroke-width=\"0.8\"/>",
                    pts.join(" "),
                    color(&frag.label)
                );
            }
        }
    }

    if render.layers.landmarks {
        for lm in map.into_iter().flat_map(|m| m.iter()) {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#000000\"><title>{} ({:.2})</title></circle>",
                lm.position.x * s,
                ty(lm.position.y),
                lm.class,
                lm.confidence
            );
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.8\"/>",
                lm.true_position.x * s,
                ty(lm.true_position.y)
            );
        }
    }

    if render.layers.overlay {
        for i in 0..=GRID_N {
            let x = i as f64 * w / GRID_N as f64 * s;
            let y = i as f64 * h / GRID_N as f64 * s;
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.2}\" y1=\"0\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-width=\"0.3\"/>",
                h * s
            );
            let _ = writeln!(
                svg,
                "<line x1=\"0\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#999999\" stroke-width=\"0.3\"/>",
                w * s
            );
        }
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
