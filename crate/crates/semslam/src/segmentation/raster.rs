//! Rasterization of segmentation results onto the 24x24 evaluation overlay.

use crate::geometry::{hull_contains, Point};
use crate::grid::{LabelGrid, GRID_N};
use crate::ontology::UNKNOWN_ENV;
use crate::scenario::Bounds;

use super::branch::Fragment;
use super::grid::GridSegment;

/// Grid leaves map exactly onto blocks of overlay cells (leaf edges land on
/// cell boundaries by construction, so boundary indices round cleanly).
pub fn rasterize_grid(leaves: &[GridSegment], bounds: &Bounds) -> LabelGrid {
    let mut grid = LabelGrid::unknown();
    let cw = bounds.width_km / GRID_N as f64;
    let ch = bounds.height_km / GRID_N as f64;
    for leaf in leaves {
        let col0 = (leaf.rect.x0 / cw).round() as usize;
        let col1 = ((leaf.rect.x1 / cw).round() as usize).min(GRID_N);
        let row0 = (leaf.rect.y0 / ch).round() as usize;
        let row1 = ((leaf.rect.y1 / ch).round() as usize).min(GRID_N);
        for row in row0..row1 {
            for col in col0..col1 {
                grid.set(row, col, &leaf.label, leaf.confidence);
            }
        }
    }
    grid
}

/// A cell takes the label of the first fragment whose hull contains its
/// centre; uncovered cells stay `Unknown`.
pub fn rasterize_fragments(fragments: &[Fragment], bounds: &Bounds) -> LabelGrid {
    let mut grid = LabelGrid::unknown();
    let cw = bounds.width_km / GRID_N as f64;
    let ch = bounds.height_km / GRID_N as f64;
    for row in 0..GRID_N {
        for col in 0..GRID_N {
            let centre = Point::new((col as f64 + 0.5) * cw, (row as f64 + 0.5) * ch);
            for frag in fragments {
                if frag.label != UNKNOWN_ENV && hull_contains(&frag.hull, &centre) {
                    grid.set(row, col, &frag.label, frag.confidence);
                    break;
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::geometry::Rect;
    use crate::grid::GRID_CELLS;
    use crate::semantics::{environment_distribution, SegmentFeatures};
    use crate::segmentation::branch::{Fragment, Member};

    fn bounds() -> Bounds {
        Bounds {
            width_km: 2.4,
            height_km: 2.4,
        }
    }

    fn leaf(rect: Rect, depth: u8, label: &str) -> GridSegment {
        let o = catalog::quadrant_ontology();
        let seg = SegmentFeatures::from_rect(vec![], &rect);
        GridSegment {
            rect,
            depth,
            label: label.to_string(),
            confidence: if label == UNKNOWN_ENV { 0.0 } else { 0.9 },
            landmark_count: 0,
            distribution: environment_distribution(&seg, &o, 0.5).unwrap(),
        }
    }

    #[test]
    fn full_bounds_leaf_labels_everything() {
        let grid = rasterize_grid(
            &[leaf(Rect::new(0.0, 0.0, 2.4, 2.4), 0, "Residential")],
            &bounds(),
        );
        assert_eq!(grid.count_label("Residential"), GRID_CELLS);
    }

    #[test]
    fn depth_three_leaf_is_one_cell() {
        let cell = 2.4 / 24.0;
        let grid = rasterize_grid(
            &[leaf(Rect::new(0.0, 0.0, cell, cell), 3, "Commercial")],
            &bounds(),
        );
        assert_eq!(grid.count_label("Commercial"), 1);
        assert_eq!(grid.get(0, 0), "Commercial");
    }

    #[test]
    fn half_covering_fragment_leaves_half_unknown() {
        let o = catalog::quadrant_ontology();
        // A rectangle hull over the left half.
        let members: Vec<Member> = [
            (0.0, 0.0),
            (1.2, 0.0),
            (1.2, 2.4),
            (0.0, 2.4),
        ]
        .iter()
        .enumerate()
        .map(|(i, (x, y))| Member {
            id: i as u64,
            class: "house".into(),
            confidence: 1.0,
            position: Point::new(*x, *y),
        })
        .collect();
        let positions: Vec<Point> = members.iter().map(|m| m.position).collect();
        let seg = SegmentFeatures::from_cluster(
            members
                .iter()
                .map(|m| crate::semantics::SegmentLandmark {
                    class: m.class.clone(),
                    confidence: m.confidence,
                    position: m.position,
                })
                .collect(),
        );
        let distribution = environment_distribution(&seg, &o, 0.5).unwrap();
        let frag = Fragment {
            members,
            hull: crate::geometry::convex_hull(&positions),
            centroid: Point::new(0.6, 1.2),
            label: distribution.label.clone(),
            confidence: distribution.max_probability(),
            distribution,
        };
        let grid = rasterize_fragments(&[frag], &bounds());
        assert_eq!(grid.count_label("Residential"), GRID_CELLS / 2);
        assert_eq!(grid.count_label(UNKNOWN_ENV), GRID_CELLS / 2);
    }

    #[test]
    fn labels_come_only_from_inputs() {
        let grid = rasterize_grid(
            &[
                leaf(Rect::new(0.0, 0.0, 1.2, 2.4), 0, "Residential"),
                leaf(Rect::new(1.2, 0.0, 2.4, 2.4), 0, UNKNOWN_ENV),
            ],
            &bounds(),
        );
        for label in grid.labels() {
            assert!(label == "Residential" || label == UNKNOWN_ENV);
        }
    }
}
