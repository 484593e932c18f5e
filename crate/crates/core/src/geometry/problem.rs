use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use super::{cross, segment_distance, ConvexPolygon, Point2, DEFAULT_TOLERANCE};
use crate::error::{domain, Result};

/// Largest `m` accepted by [`regular_polygon`].
pub const MAX_POLYGON_M: u32 = 24;

/// Output class of a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Positive,
    Negative,
}

impl Class {
    pub fn sign(self) -> i8 {
        match self {
            Class::Positive => 1,
            Class::Negative => -1,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Positive => "+1",
            Class::Negative => "-1",
        })
    }
}

/// Ground-truth label of a point with respect to `P_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Strictly inside (class +1).
    Inside,
    /// Strictly outside (class -1).
    Outside,
    /// Within tolerance of an edge; carries no class.
    Boundary,
}

impl Label {
    pub fn class(self) -> Option<Class> {
        match self {
            Label::Inside => Some(Class::Positive),
            Label::Outside => Some(Class::Negative),
            Label::Boundary => None,
        }
    }
}

/// The regular polygon with `2^(m+1)` vertices on the unit circle, first
/// vertex at `(0, 1)`, stored counterclockwise.
pub fn regular_polygon(m: u32) -> Result<ConvexPolygon> {
    if !(1..=MAX_POLYGON_M).contains(&m) {
        return Err(domain(format!("m must be in 1..={MAX_POLYGON_M}, got {m}")));
    }
    let n = 1usize << (m + 1);
    let step = TAU / n as f64;
    let quarter = n / 4;
    let vertices = (0..n)
        .map(|i| {
            if i % quarter == 0 {
                // snap the four axis vertices
                match i / quarter {
                    0 => Point2::new(0.0, 1.0),
                    1 => Point2::new(-1.0, 0.0),
                    2 => Point2::new(0.0, -1.0),
                    _ => Point2::new(1.0, 0.0),
                }
            } else {
                let t = FRAC_PI_2 + i as f64 * step;
                Point2::new(t.cos(), t.sin())
            }
        })
        .collect();
    Ok(ConvexPolygon::from_vertices_unchecked(vertices))
}

/// The classification problem `f_m`: inside `P_m` is class +1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    m: u32,
    polygon: ConvexPolygon,
    tolerance: f64,
}

impl ProblemInstance {
    pub fn new(m: u32) -> Result<Self> {
        Ok(ProblemInstance { m, polygon: regular_polygon(m)?, tolerance: DEFAULT_TOLERANCE })
    }

    /// Overrides the width of the boundary band used by [`classify_point`].
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(domain(format!("tolerance must be finite and non-negative, got {tolerance}")));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn polygon(&self) -> &ConvexPolygon {
        &self.polygon
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn edge_count(&self) -> usize {
        self.polygon.len()
    }

    /// Radius of the inscribed circle, `cos(pi / 2^(m+1))`.
    pub fn inradius(&self) -> f64 {
        (std::f64::consts::PI / self.edge_count() as f64).cos()
    }

    fn edge(&self, k: usize) -> (Point2, Point2) {
        let v = self.polygon.vertices();
        let n = v.len();
        (v[k % n], v[(k + 1) % n])
    }

    /// Index of the edge whose angular sector (seen from the origin) holds `p`.
    fn sector(&self, p: Point2) -> usize {
        let n = self.edge_count();
        let step = TAU / n as f64;
        let t = (p.y.atan2(p.x) - FRAC_PI_2).rem_euclid(TAU);
        ((t / step).floor() as usize).min(n - 1)
    }

    /// Distance from `p` to the boundary of `P_m`.
    ///
    /// Only the sector edge and its two neighbours can be nearest for a
    /// regular polygon centered at the origin.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        let n = self.edge_count();
        let k = self.sector(p);
        [k + n - 1, k, k + 1]
            .into_iter()
            .map(|e| {
                let (a, b) = self.edge(e);
                segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed distance to the sector edge's supporting line; positive inside.
    fn inward_distance(&self, p: Point2) -> f64 {
        let (a, b) = self.edge(self.sector(p));
        cross(a, b, p) / a.dist(b)
    }
}

/// Ground-truth label for `f_m`.
pub fn classify_point(problem: &ProblemInstance, p: Point2) -> Label {
    if problem.boundary_distance(p) <= problem.tolerance {
        Label::Boundary
    } else if problem.inward_distance(p) > 0.0 {
        Label::Inside
    } else {
        Label::Outside
    }
}

/// Every second vertex of `P_m` (starting at `(0, 1)`), pushed radially out
/// by a factor `1 + epsilon`.
pub fn v_even_prime(problem: &ProblemInstance, epsilon: f64) -> Result<Vec<Point2>> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(domain(format!("epsilon must be in (0, 0.1], got {epsilon}")));
    }
    Ok(problem
        .polygon
        .vertices()
        .iter()
        .step_by(2)
        .map(|v| v.scale(1.0 + epsilon))
        .collect())
}

/// Whether the open segment `(p, q)` passes strictly inside `P_m`.
pub fn chord_crosses_boundary(problem: &ProblemInstance, p: Point2, q: Point2) -> bool {
    if p.dist(q) == 0.0 {
        return false;
    }
    let tol = problem.tolerance;
    // Keep the parameter interval where every inward distance exceeds `tol`.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (a, b) in problem.polygon.edges() {
        let len = a.dist(b);
        let d0 = cross(a, b, p) / len - tol;
        let d1 = cross(a, b, q) / len - tol;
        if d0 <= 0.0 && d1 <= 0.0 {
            return false;
        }
        let t = d0 / (d0 - d1);
        if d0 < 0.0 {
            lo = lo.max(t);
        } else if d1 < 0.0 {
            hi = hi.min(t);
        }
        if lo >= hi {
            return false;
        }
    }
    lo < hi
}
