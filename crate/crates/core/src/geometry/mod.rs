//! Planar primitives: points, oriented lines, convex polygons and the
//! regular-polygon problem family.
//!
//! All predicates use an absolute tolerance. [`DEFAULT_TOLERANCE`] is the
//! value used when a caller does not pass one explicitly.

mod polygon;
mod problem;

pub use polygon::{clip_by_line, ClipResult, ConvexPolygon, MIN_AREA, MIN_VERTEX_SEPARATION};
pub use problem::{
    chord_crosses_boundary, classify_point, regular_polygon, v_even_prime, Class, Label, ProblemInstance,
    MAX_POLYGON_M,
};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Absolute tolerance for sign predicates.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A point in the input plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Checked constructor for values coming from outside the crate.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point2 { x, y })
        } else {
            Err(domain(format!("non-finite point ({x}, {y})")))
        }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    #[inline]
    pub fn midpoint(self, other: Point2) -> Point2 {
        self.lerp(other, 0.5)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// `(b - a) x (c - a)`; positive when `a, b, c` turn counterclockwise.
#[inline]
pub fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Which side of an oriented line a point falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Positive,
    Negative,
    On,
}

/// The oriented line `a*x + b*y + c = 0`, stored with `a^2 + b^2 = 1`.
///
/// The positive side is where `a*x + b*y + c > 0`, so [`Line::eval`] is a
/// signed Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    a: f64,
    b: f64,
    c: f64,
}

impl Line {
    /// Normalizes `(a, b, c)`. Fails when the normal is (numerically) zero.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(domain("line coefficients must be finite"));
        }
        let n = a.hypot(b);
        if n < 1e-12 {
            return Err(domain(format!("degenerate line normal ({a}, {b})")));
        }
        Ok(Line { a: a / n, b: b / n, c: c / n })
    }

    /// The line through `p` and `q`, with the positive side on the left of `p -> q`.
    pub fn through(p: Point2, q: Point2) -> Result<Self> {
        Line::new(p.y - q.y, q.x - p.x, p.x * q.y - q.x * p.y)
    }

    pub fn vertical(x: f64) -> Self {
        Line { a: 1.0, b: 0.0, c: -x }
    }

    pub fn horizontal(y: f64) -> Self {
        Line { a: 0.0, b: 1.0, c: -y }
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    pub fn flipped(&self) -> Line {
        Line { a: -self.a, b: -self.b, c: -self.c }
    }

    /// Signed distance from the line.
    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    pub fn side(&self, p: Point2, tol: f64) -> Side {
        let v = self.eval(p);
        if v.abs() <= tol {
            Side::On
        } else if v > 0.0 {
            Side::Positive
        } else {
            Side::Negative
        }
    }
}

/// Side test at [`DEFAULT_TOLERANCE`].
pub fn point_side(line: &Line, p: Point2) -> Side {
    line.side(p, DEFAULT_TOLERANCE)
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}
