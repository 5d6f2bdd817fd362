//! Hard-margin linear separators for fragment boundary repair.
//!
//! For two linearly separable 2D point sets, the maximum-margin hyperplane is
//! the perpendicular bisector of the shortest segment joining their convex
//! hulls, with margin equal to half that distance. The solver finds the
//! closest hull points directly, which is exact at this scale.
//!
//! When the sets are not separable, a least-misclassification boundary is
//! searched over the same support candidates (directions defined by point
//! pairs and their perpendiculars).

use crate::geometry::{convex_hull, point_segment_closest, Point};

#[derive(Debug, thiserror::Error)]
pub enum MarginError {
    #[error("both point sets must be non-empty")]
    EmptySet,
    #[error("point sets are not linearly separable")]
    NotSeparable,
}

/// A separating line `normal . p + offset = 0` with `|normal| = 1`.
///
/// By construction the first training set lies on the negative side and the
/// second on the non-negative side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperplane {
    pub normal: Point,
    pub offset: f64,
    /// Minimum distance from the boundary to any training point, km.
    pub margin_km: f64,
}

impl Hyperplane {
    /// Signed distance of a point to the boundary (negative on the first
    /// set's side).
    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.normal.dot(p) + self.offset
    }
}

fn hull_edges(hull: &[Point]) -> Vec<(Point, Point)> {
    match hull.len() {
        0 => Vec::new(),
        1 => vec![(hull[0], hull[0])],
        2 => vec![(hull[0], hull[1])],
        _ => (0..hull.len())
            .map(|i| (hull[i], hull[(i + 1) % hull.len()]))
            .collect(),
    }
}

/// Closest pair of points between two hull boundaries.
fn closest_hull_points(a: &[Point], b: &[Point]) -> (Point, Point, f64) {
    let mut best = (a[0], b[0], f64::INFINITY);
    for (b1, b2) in hull_edges(b) {
        for va in a {
            let q = point_segment_closest(va, &b1, &b2);
            let d = va.distance(&q);
            if d < best.2 {
                best = (*va, q, d);
            }
        }
    }
    for (a1, a2) in hull_edges(a) {
        for vb in b {
            let q = point_segment_closest(vb, &a1, &a2);
            let d = vb.distance(&q);
            if d < best.2 {
                best = (q, *vb, d);
            }
        }
    }
    best
}

/// The 2D hard-margin separator of two linearly separable point sets.
pub fn max_margin_boundary(
    points_a: &[Point],
    points_b: &[Point],
) -> Result<Hyperplane, MarginError> {
    if points_a.is_empty() || points_b.is_empty() {
        return Err(MarginError::EmptySet);
    }
    let hull_a = convex_hull(points_a);
    let hull_b = convex_hull(points_b);
    let (pa, pb, dist) = closest_hull_points(&hull_a, &hull_b);
    if dist <= 0.0 {
        return Err(MarginError::NotSeparable);
    }
    let normal = pb.sub(&pa).normalized();
    let midpoint = pa.add(&pb).scale(0.5);
    let offset = -normal.dot(&midpoint);
    let h = Hyperplane {
        normal,
        offset,
        margin_km: dist * 0.5,
    };
    // Collinear degeneracies can defeat the hull distance; verify separation.
    let separated = points_a.iter().all(|p| h.signed_distance(p) < 0.0)
        && points_b.iter().all(|p| h.signed_distance(p) > 0.0);
    if !separated {
        return Err(MarginError::NotSeparable);
    }
    Ok(h)
}

/// Least-misclassification fallback over the same support candidates.
///
/// Candidate normals come from every point pair (direct and perpendicular);
/// for each, the offset sweeps the projection midpoints. Selection minimizes
/// misclassifications, then maximizes the split gap, with a deterministic
/// candidate order.
pub fn best_effort_boundary(points_a: &[Point], points_b: &[Point]) -> Result<Hyperplane, MarginError> {
    if points_a.is_empty() || points_b.is_empty() {
        return Err(MarginError::EmptySet);
    }
    if let Ok(h) = max_margin_boundary(points_a, points_b) {
        return Ok(h);
    }

    let all: Vec<Point> = points_a.iter().chain(points_b.iter()).cloned().collect();
    let mut candidates: Vec<Point> = Vec::new();
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            let d = all[j].sub(&all[i]);
            if d.norm() < 1e-12 {
                continue;
            }
            let u = d.normalized();
            candidates.push(u);
            candidates.push(Point::new(-u.y, u.x));
        }
    }
    if candidates.is_empty() {
        candidates.push(Point::new(1.0, 0.0));
    }

    let mut best: Option<(usize, f64, Hyperplane)> = None;
    for normal in candidates {
        let mut projections: Vec<f64> = all.iter().map(|p| normal.dot(p)).collect();
        projections.sort_by(f64::total_cmp);
        projections.dedup();
        let mut thresholds = vec![projections[0] - 1.0];
        for w in projections.windows(2) {
            thresholds.push((w[0] + w[1]) * 0.5);
        }
        thresholds.push(projections[projections.len() - 1] + 1.0);
        for t in thresholds {
            let miss = points_a
                .iter()
                .filter(|p| normal.dot(p) - t >= 0.0)
                .count()
                + points_b.iter().filter(|p| normal.dot(p) - t < 0.0).count();
            let gap = all
                .iter()
                .map(|p| (normal.dot(p) - t).abs())
                .fold(f64::INFINITY, f64::min);
            let better = match &best {
                None => true,
                Some((bm, bg, _)) => miss < *bm || (miss == *bm && gap > *bg),
            };
            if better {
                best = Some((
                    miss,
                    gap,
                    Hyperplane {
                        normal,
                        offset: -t,
                        margin_km: gap,
                    },
                ));
            }
        }
    }
    Ok(best.expect("at least one candidate").2)
}
