use serde::{Deserialize, Serialize};

use super::{cross, Line, Point2, DEFAULT_TOLERANCE};
use crate::error::{domain, Result};

/// Clip pieces with less area than this are discarded.
pub const MIN_AREA: f64 = 1e-18;
/// Consecutive vertices closer than this are merged.
pub const MIN_VERTEX_SEPARATION: f64 = 1e-12;

const CONVEXITY_SLACK: f64 = 1e-12;

/// A convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for ConvexPolygon {
    type Error = crate::Error;

    fn try_from(vertices: Vec<Point2>) -> Result<Self> {
        ConvexPolygon::new(vertices)
    }
}

impl From<ConvexPolygon> for Vec<Point2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    /// Validates vertex count, separation, finiteness and counterclockwise convexity.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(domain(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(domain(format!("non-finite vertex {p:?}")));
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if a.dist(b) < MIN_VERTEX_SEPARATION {
                return Err(domain(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
            if cross(a, b, c) < -CONVEXITY_SLACK {
                return Err(domain(format!("polygon is not convex/counterclockwise at vertex {}", (i + 1) % n)));
            }
        }
        let poly = ConvexPolygon { vertices };
        if poly.area() <= 0.0 {
            return Err(domain("polygon has no positive area"));
        }
        Ok(poly)
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point2>) -> Self {
        ConvexPolygon { vertices }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) {
            return Err(domain("rectangle bounds must be finite"));
        }
        if x1 - x0 <= MIN_VERTEX_SEPARATION || y1 - y0 <= MIN_VERTEX_SEPARATION {
            return Err(domain(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(ConvexPolygon {
            vertices: vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ],
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area (positive for counterclockwise order).
    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let o = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let (px, py, qx, qy) = (p.x - o.x, p.y - o.y, q.x - o.x, q.y - o.y);
            let w = px * qy - qx * py;
            a2 += w;
            cx += (px + qx) * w;
            cy += (py + qy) * w;
        }
        if a2.abs() < 1e-300 {
            return self.vertex_mean();
        }
        Point2::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))
    }

    pub fn vertex_mean(&self) -> Point2 {
        let n = self.vertices.len() as f64;
        let (sx, sy) = self.vertices.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point2::new(sx / n, sy / n)
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        )
    }

    /// Smallest signed distance from `p` to the supporting lines of the edges.
    /// Positive inside, negative outside.
    pub fn min_edge_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let len = a.dist(b);
                cross(a, b, p) / len
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed containment with tolerance `tol`.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.min_edge_distance(p) >= -tol
    }

    /// Splits the polygon by `line` at [`DEFAULT_TOLERANCE`].
    pub fn clip(&self, line: &Line) -> ClipResult {
        self.clip_with_tolerance(line, DEFAULT_TOLERANCE)
    }

    /// Splits the polygon into its parts on the closed positive and closed
    /// negative side of `line`. Vertices within `tol` of the line are shared
    /// by both parts. Parts below [`MIN_AREA`] are dropped.
    pub fn clip_with_tolerance(&self, line: &Line, tol: f64) -> ClipResult {
        let d: Vec<f64> = self.vertices.iter().map(|&p| line.eval(p)).collect();
        let n = self.vertices.len();
        let mut pos = Vec::with_capacity(n + 2);
        let mut neg = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            let (p, q) = (self.vertices[i], self.vertices[j]);
            let (dp, dq) = (d[i], d[j]);
            if dp >= -tol {
                pos.push(p);
            }
            if dp <= tol {
                neg.push(p);
            }
            if (dp > tol && dq < -tol) || (dp < -tol && dq > tol) {
                let x = p.lerp(q, dp / (dp - dq));
                pos.push(x);
                neg.push(x);
            }
        }
        ClipResult { positive: finish_piece(pos), negative: finish_piece(neg) }
    }
}

/// The two closed halves of a polygon cut by a line.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipResult {
    pub positive: Option<ConvexPolygon>,
    pub negative: Option<ConvexPolygon>,
}

/// Free-function form of [`ConvexPolygon::clip`].
pub fn clip_by_line(poly: &ConvexPolygon, line: &Line) -> ClipResult {
    poly.clip(line)
}

fn shoelace(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let o = vertices[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += cross(o, vertices[i], vertices[i + 1]);
    }
    0.5 * s
}

fn finish_piece(mut vertices: Vec<Point2>) -> Option<ConvexPolygon> {
    vertices.dedup_by(|b, a| a.dist(*b) < MIN_VERTEX_SEPARATION);
    while vertices.len() > 1 && vertices[0].dist(*vertices.last().unwrap()) < MIN_VERTEX_SEPARATION {
        vertices.pop();
    }
    if vertices.len() < 3 || shoelace(&vertices) < MIN_AREA {
        return None;
    }
    Some(ConvexPolygon { vertices })
}
