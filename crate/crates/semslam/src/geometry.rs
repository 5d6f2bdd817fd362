//! Planar geometry primitives shared by every module: points, poses,
//! rectangles, polygons, convex hulls and segment predicates.
//!
//! All distances are in kilometres, all angles in radians.

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane, km units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(&self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product of `self` and `other`.
    pub fn cross(&self, other: &Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(&self) -> Point {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n)
        } else {
            Point::new(0.0, 0.0)
        }
    }

    /// Rotate by `angle` radians about the origin.
    pub fn rotated(&self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// An agent pose: position plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Map a point expressed in this pose's local frame into the parent frame.
    pub fn to_world(&self, local: &Point) -> Point {
        local.rotated(self.heading).add(&self.position())
    }

    /// Map a world point into this pose's local frame.
    pub fn to_local(&self, world: &Point) -> Point {
        world.sub(&self.position()).rotated(-self.heading)
    }
}

/// Axis-aligned rectangle, `[x0, x1) x [y0, y1)` for point assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        (self.width() * self.width() + self.height() * self.height()).sqrt()
    }

    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) * 0.5, (self.y0 + self.y1) * 0.5)
    }

    /// Closed containment on all edges.
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Half-open containment, used to assign points to grid cells without
    /// double counting along shared edges.
    pub fn contains_half_open(&self, p: &Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    /// Split into four equal quadrants: [SW, SE, NW, NE].
    pub fn quadrants(&self) -> [Rect; 4] {
        let mx = (self.x0 + self.x1) * 0.5;
        let my = (self.y0 + self.y1) * 0.5;
        [
            Rect::new(self.x0, self.y0, mx, my),
            Rect::new(mx, self.y0, self.x1, my),
            Rect::new(self.x0, my, mx, self.y1),
            Rect::new(mx, my, self.x1, self.y1),
        ]
    }
}

/// Orientation of the triple (a, b, c): positive for counter-clockwise.
fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.sub(a)).cross(&c.sub(a))
}

/// True when segments `a1-a2` and `b1-b2` intersect, including collinear
/// overlap and endpoint touches.
pub fn segments_intersect(a1: &Point, a2: &Point, b1: &Point, b2: &Point) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: &Point, q: &Point, r: &Point| {
        orient(p, q, r) == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(b1, b2, a1) || on(b1, b2, a2) || on(a1, a2, b1) || on(a1, a2, b2)
}

/// Intersection point of two properly crossing segments, midpoint fallback
/// for degenerate configurations.
pub fn segment_crossing_point(a1: &Point, a2: &Point, b1: &Point, b2: &Point) -> Point {
    let r = a2.sub(a1);
    let s = b2.sub(b1);
    let denom = r.cross(&s);
    if denom.abs() < 1e-15 {
        return a1.add(a2).add(b1).add(b2).scale(0.25);
    }
    let t = b1.sub(a1).cross(&s) / denom;
    a1.add(&r.scale(t))
}

/// Closest point to `p` on the segment `a-b`.
pub fn point_segment_closest(p: &Point, a: &Point, b: &Point) -> Point {
    let ab = b.sub(a);
    let len_sq = ab.dot(&ab);
    if len_sq == 0.0 {
        return *a;
    }
    let t = (p.sub(a).dot(&ab) / len_sq).clamp(0.0, 1.0);
    a.add(&ab.scale(t))
}

/// Shortest distance from `p` to the segment `a-b`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    p.distance(&point_segment_closest(p, a, b))
}

/// Shortest distance between two segments.
pub fn segment_segment_distance(a1: &Point, a2: &Point, b1: &Point, b2: &Point) -> f64 {
    if segments_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    point_segment_distance(a1, b1, b2)
        .min(point_segment_distance(a2, b1, b2))
        .min(point_segment_distance(b1, a1, a2))
        .min(point_segment_distance(b2, a1, a2))
}

/// Point-in-polygon test by ray casting. Points on the boundary count as
/// inside within a small tolerance.
pub fn point_in_polygon(p: &Point, poly: &[Point]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    // Boundary tolerance keeps zone rasterization stable when cell centres
    // land exactly on an edge.
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        if point_segment_distance(p, a, b) < 1e-12 {
            return true;
        }
    }
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (pi, pj) = (&poly[i], &poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = pj.x + (p.y - pj.y) / (pi.y - pj.y) * (pi.x - pj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Convex hull by Andrew's monotone chain, counter-clockwise, no duplicate
/// endpoint. Collinear inputs collapse to their extreme points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    for p in pts.iter() {
        while hull.len() >= 2 && orient(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev() {
        while hull.len() >= lower && orient(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Largest pairwise distance of a point set (its hull diameter).
pub fn point_set_diameter(points: &[Point]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.max(points[i].distance(&points[j]));
        }
    }
    best
}

/// Point containment for a convex hull of any degeneracy (point, segment,
/// polygon). Boundary points count as inside.
pub fn hull_contains(hull: &[Point], p: &Point) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0].distance(p) < 1e-12,
        2 => point_segment_distance(p, &hull[0], &hull[1]) < 1e-12,
        _ => point_in_polygon(p, hull),
    }
}

/// Shortest distance between two hulls (0 when they touch or overlap).
pub fn hull_distance(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    if a.iter().any(|p| hull_contains(b, p)) || b.iter().any(|p| hull_contains(a, p)) {
        return 0.0;
    }
    let edges = |h: &[Point]| -> Vec<(Point, Point)> {
        match h.len() {
            1 => vec![(h[0], h[0])],
            2 => vec![(h[0], h[1])],
            _ => (0..h.len()).map(|i| (h[i], h[(i + 1) % h.len()])).collect(),
        }
    };
    let mut best = f64::INFINITY;
    for (a1, a2) in edges(a) {
        for (b1, b2) in edges(b) {
            best = best.min(segment_segment_distance(&a1, &a2, &b1, &b2));
        }
    }
    best
}

/// Normalize an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn pose_round_trip() {
        let pose = Pose::new(2.0, 3.0, FRAC_PI_2);
        let local = Point::new(1.0, 0.0);
        let world = pose.to_world(&local);
        assert!((world.x - 2.0).abs() < 1e-12);
        assert!((world.y - 4.0).abs() < 1e-12);
        let back = pose.to_local(&world);
        assert!((back.x - 1.0).abs() < 1e-12 && back.y.abs() < 1e-12);
    }

    #[test]
    fn rect_quadrants_partition() {
        let r = Rect::new(0.0, 0.0, 2.0, 2.0);
        let qs = r.quadrants();
        let total: f64 = qs.iter().map(|q| q.area()).sum();
        assert!((total - r.area()).abs() < 1e-12);
        assert!(qs[0].contains_half_open(&Point::new(0.5, 0.5)));
        assert!(qs[3].contains_half_open(&Point::new(1.5, 1.5)));
    }

    #[test]
    fn segment_intersection_cases() {
        let o = Point::new(0.0, 0.0);
        assert!(segments_intersect(
            &o,
            &Point::new(2.0, 2.0),
            &Point::new(0.0, 2.0),
            &Point::new(2.0, 0.0)
        ));
        assert!(!segments_intersect(
            &o,
            &Point::new(1.0, 0.0),
            &Point::new(0.0, 1.0),
            &Point::new(1.0, 1.0)
        ));
        // Shared endpoint counts as touching.
        assert!(segments_intersect(
            &o,
            &Point::new(1.0, 0.0),
            &Point::new(1.0, 0.0),
            &Point::new(2.0, 1.0)
        ));
    }

    #[test]
    fn crossing_point_of_x() {
        let p = segment_crossing_point(
            &Point::new(0.0, 0.0),
            &Point::new(2.0, 2.0),
            &Point::new(0.0, 2.0),
            &Point::new(2.0, 0.0),
        );
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_containment() {
        let square = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert!(point_in_polygon(&Point::new(1.0, 1.0), &square));
        assert!(!point_in_polygon(&Point::new(3.0, 1.0), &square));
        assert!(point_in_polygon(&Point::new(0.0, 1.0), &square));
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(hull_contains(&hull, &Point::new(0.5, 0.5)));
    }

    #[test]
    fn hull_distance_disjoint_and_touching() {
        let a = convex_hull(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        let b = convex_hull(&[
            Point::new(3.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(3.0, 1.0),
        ]);
        assert!((hull_distance(&a, &b) - 2.0).abs() < 1e-12);
        assert_eq!(hull_distance(&a, &a), 0.0);
    }

    #[test]
    fn angle_wrapping() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn diameter_matches_brute_force() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 4.0),
            Point::new(1.0, 1.0),
        ];
        assert!((point_set_diameter(&pts) - 5.0).abs() < 1e-12);
    }
}
