//! Planar primitives shared by the hull, walk and analysis code.
//!
//! Conventions:
//! - Angles are canonical radians in `[0, 2π)`; arc arithmetic is modular.
//! - Orientation and collinearity use the absolute tolerance [`EPS_GEOM`],
//!   which is adequate for unit-step walks with coordinates below `1e6`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// Absolute tolerance for orientation, collinearity and on-boundary tests.
pub const EPS_GEOM: f64 = 1e-12;

/// A point (or displacement) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Direction of this vector, or `None` for the zero vector.
    pub fn direction(self) -> Option<Dir> {
        if self.x == 0.0 && self.y == 0.0 {
            None
        } else {
            Some(Dir::new(self.y.atan2(self.x)))
        }
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Wraps any finite angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// A unit direction, stored as its canonical angle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dir {
    theta: f64,
}

impl Dir {
    #[inline]
    pub fn new(theta: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
        }
    }

    #[inline]
    pub fn theta(self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn unit(self) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(c, s)
    }

    /// Counterclockwise rotation from `self` to `other`, in `[0, 2π)`.
    #[inline]
    pub fn ccw_to(self, other: Dir) -> f64 {
        wrap_angle(other.theta - self.theta)
    }

    #[inline]
    pub fn rotated(self, by: f64) -> Dir {
        Dir::new(self.theta + by)
    }

    #[inline]
    pub fn opposite(self) -> Dir {
        self.rotated(PI)
    }
}

/// Counterclockwise arc of directions starting at `start`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: Dir,
    pub length: f64,
}

impl Arc {
    pub fn full_circle() -> Self {
        Self {
            start: Dir::new(0.0),
            length: TAU,
        }
    }

    pub fn new(start: Dir, length: f64) -> Self {
        debug_assert!((0.0..=TAU).contains(&length));
        Self {
            start,
            length: length.clamp(0.0, TAU),
        }
    }

    /// Closed membership test.
    pub fn contains(&self, d: Dir) -> bool {
        self.length >= TAU || self.start.ccw_to(d) <= self.length
    }

    /// Maps `u ∈ [0, 1)` affinely onto the arc.
    #[inline]
    pub fn at_fraction(&self, u: f64) -> Dir {
        self.start.rotated(u * self.length)
    }
}

/// Sign of the signed area of triangle `(a, b, c)`; `0` within [`EPS_GEOM`].
///
/// The cross product is always evaluated on the lexicographically sorted
/// triple, so the result is exactly antisymmetric under argument swaps.
pub fn orient(a: Point2, b: Point2, c: Point2) -> i8 {
    let mut pts = [a, b, c];
    let mut parity = 1i8;
    // three-element sorting network, tracking permutation parity
    let lex_gt = |p: Point2, q: Point2| p.x > q.x || (p.x == q.x && p.y > q.y);
    for (i, j) in [(0, 1), (1, 2), (0, 1)] {
        if lex_gt(pts[i], pts[j]) {
            pts.swap(i, j);
            parity = -parity;
        }
    }
    let area = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
    if area.abs() <= EPS_GEOM {
        0
    } else if area > 0.0 {
        parity
    } else {
        -parity
    }
}

/// Unsigned angle between two directions, in `[0, π]`.
pub fn angle_between(u: Dir, v: Dir) -> f64 {
    let d = (v.theta - u.theta).abs();
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Foot of the perpendicular from `p` onto the line through `a` and `b`.
pub fn project_onto_line(p: Point2, a: Point2, b: Point2) -> Result<Point2, GeomError> {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2.sqrt() <= EPS_GEOM {
        return Err(GeomError::DegenerateLine);
    }
    let t = (p - a).dot(ab) / len2;
    Ok(a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FRAC_PI_2: f64 = PI / 2.0;

    #[test]
    fn orient_examples() {
        let o = Point2::ORIGIN;
        assert_eq!(orient(o, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)), 1);
        assert_eq!(orient(o, Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)), 0);
        assert_eq!(orient(o, Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)), -1);
    }

    #[test]
    fn angle_examples() {
        assert!((angle_between(Dir::new(0.0), Dir::new(FRAC_PI_2)) - FRAC_PI_2).abs() < 1e-15);
        assert!((angle_between(Dir::new(0.0), Dir::new(3.0 * FRAC_PI_2)) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_between(Dir::new(1.0), Dir::new(1.0)), 0.0);
    }

    #[test]
    fn projection_examples() {
        let z = project_onto_line(
            Point2::new(1.0, 1.0),
            Point2::ORIGIN,
            Point2::new(2.0, 0.0),
        )
        .unwrap();
        assert_eq!(z, Point2::new(1.0, 0.0));

        let on = Point2::new(0.5, 0.0);
        assert_eq!(
            project_onto_line(on, Point2::ORIGIN, Point2::new(2.0, 0.0)).unwrap(),
            on
        );

        let z = project_onto_line(
            Point2::new(3.0, 4.0),
            Point2::ORIGIN,
            Point2::new(0.0, 1.0),
        )
        .unwrap();
        assert_eq!(z, Point2::new(0.0, 4.0));
    }

    #[test]
    fn projection_rejects_degenerate_line() {
        let a = Point2::new(1.0, 1.0);
        assert_eq!(
            project_onto_line(Point2::ORIGIN, a, a),
            Err(GeomError::DegenerateLine)
        );
    }

    #[test]
    fn wrap_is_canonical() {
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!((wrap_angle(-FRAC_PI_2) - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert_eq!(wrap_angle(TAU), 0.0);
        let arc = Arc::new(Dir::new(3.0 * FRAC_PI_2), PI);
        assert!(arc.contains(Dir::new(0.1)));
        assert!(!arc.contains(Dir::new(PI)));
    }

    fn pt() -> impl Strategy<Value = Point2> {
        (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn orient_antisymmetric(a in pt(), b in pt(), c in pt()) {
            let s = orient(a, b, c);
            prop_assert_eq!(orient(b, a, c), -s);
            prop_assert_eq!(orient(a, c, b), -s);
            prop_assert_eq!(orient(c, b, a), -s);
            prop_assert_eq!(orient(b, c, a), s);
        }

        #[test]
        fn angle_symmetric_and_triangle(a in 0.0..TAU, b in 0.0..TAU, c in 0.0..TAU) {
            let (u, v, w) = (Dir::new(a), Dir::new(b), Dir::new(c));
            prop_assert_eq!(angle_between(u, v), angle_between(v, u));
            prop_assert!(angle_between(u, w) <= angle_between(u, v) + angle_between(v, w) + 1e-12);
            let x = angle_between(u, v);
            prop_assert!((0.0..=PI).contains(&x));
        }

        #[test]
        fn projection_is_orthogonal(p in pt().prop_map(|p| p * 1e3), a in pt().prop_map(|p| p * 1e3), b in pt().prop_map(|p| p * 1e3)) {
            prop_assume!(a.dist(b) > 1.0);
            let z = project_onto_line(p, a, b).unwrap();
            let ab = b - a;
            let resid = (p - z).dot(ab) / ab.norm();
            prop_assert!(resid.abs() <= 1e-9, "resid {}", resid);
        }
    }
}
