//! Exact linear response regions of a planar ReLU MLP inside a box.
//!
//! Refinement runs layer by layer. Each region carries the affine map from
//! the raw input to the current layer's output. For the next layer, every
//! neuron's pre-activation is affine over the region, so its zero line
//! either misses the region or cuts it in two convex pieces.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{ConvexPolygon, Line, Point2, DEFAULT_TOLERANCE};
use crate::network::{ActivationPattern, AffineLayer, MlpNetwork};

/// Enumeration aborts once more regions than this exist.
pub const DEFAULT_REGION_BUDGET: usize = 1_000_000;

/// Neuron lines with a normal shorter than this are treated as constant.
const DEGENERATE_NORMAL: f64 = 1e-12;

/// `a*x + b*y + c` over the raw input.
type AffineForm = [f64; 3];

#[inline]
fn eval_form(f: &AffineForm, p: Point2) -> f64 {
    f[0] * p.x + f[1] * p.y + f[2]
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        ConvexPolygon::rectangle(x0, y0, x1, y1)?;
        Ok(BoundingBox { x0, y0, x1, y1 })
    }

    /// The square `[-half, half]^2`.
    pub fn square(half: f64) -> Result<Self> {
        BoundingBox::new(-half, -half, half, half)
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        ConvexPolygon::rectangle(self.x0, self.y0, self.x1, self.y1).expect("validated box")
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

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        p.x >= self.x0 - tol && p.x <= self.x1 + tol && p.y >= self.y0 - tol && p.y <= self.y1 + tol
    }
}

impl Default for BoundingBox {
    /// `[-2, 2]^2`, which holds `P_m` and the witness points.
    fn default() -> Self {
        BoundingBox { x0: -2.0, y0: -2.0, x1: 2.0, y1: 2.0 }
    }
}

/// One linear response region.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub polygon: ConvexPolygon,
    pub pattern: ActivationPattern,
    /// The two values fed to the head, as an affine function of the input.
    pub restricted_map: AffineLayer,
    /// Head value `a'*x + b'*y + c'` on this region.
    pub pre_sign: [f64; 3],
}

impl Region {
    pub fn pre_sign_at(&self, p: Point2) -> f64 {
        eval_form(&self.pre_sign, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    pub tolerance: f64,
    pub budget: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { tolerance: DEFAULT_TOLERANCE, budget: DEFAULT_REGION_BUDGET }
    }
}

/// The regions of a network inside a box, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    net: MlpNetwork,
    bbox: BoundingBox,
    regions: Vec<Region>,
    tolerance: f64,
}

/// Region enumeration at default tolerance and budget.
pub fn enumerate_regions(net: &MlpNetwork, bbox: BoundingBox) -> Result<Decomposition> {
    enumerate_regions_with(net, bbox, EnumerationOptions::default())
}

struct Cell {
    polygon: ConvexPolygon,
    pattern: Vec<Vec<bool>>,
    map: Vec<AffineForm>,
}

enum Cut {
    Whole(bool),
    Split(Option<ConvexPolygon>, Option<ConvexPolygon>),
}

fn cut(poly: &ConvexPolygon, form: &AffineForm, tol: f64) -> Cut {
    let norm = form[0].hypot(form[1]);
    if norm < DEGENERATE_NORMAL {
        return Cut::Whole(form[2] > 0.0);
    }
    let line = Line::new(form[0], form[1], form[2]).expect("non-degenerate normal");
    let (lo, hi) = poly
        .vertices()
        .iter()
        .map(|&p| line.eval(p))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if hi > tol && lo < -tol {
        let r = poly.clip_with_tolerance(&line, tol);
        Cut::Split(r.positive, r.negative)
    } else {
        Cut::Whole(eval_form(form, poly.centroid()) > 0.0)
    }
}

pub fn enumerate_regions_with(
    net: &MlpNetwork,
    bbox: BoundingBox,
    options: EnumerationOptions,
) -> Result<Decomposition> {
    let tol = options.tolerance;
    let mut cells = vec![Cell {
        polygon: bbox.to_polygon(),
        pattern: Vec::new(),
        map: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    }];
    for layer in net.hidden_layers() {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            let pre = compose(layer, &cell.map);
            let mut pieces = vec![(cell.polygon, Vec::with_capacity(pre.len()))];
            for form in &pre {
                let mut split = Vec::with_capacity(pieces.len() * 2);
                for (poly, mut bits) in pieces {
                    match cut(&poly, form, tol) {
                        Cut::Whole(bit) => {
                            bits.push(bit);
                            split.push((poly, bits));
                        }
                        Cut::Split(pos, neg) => {
                            if let Some(p) = pos {
                                let mut b = bits.clone();
                                b.push(true);
                                split.push((p, b));
                            }
                            if let Some(n) = neg {
                                bits.push(false);
                                split.push((n, bits));
                            }
                        }
                    }
                }
                pieces = split;
            }
            for (polygon, bits) in pieces {
                let map = pre.iter().zip(&bits).map(|(f, &on)| if on { *f } else { [0.0; 3] }).collect();
                let mut pattern = cell.pattern.clone();
                pattern.push(bits);
                next.push(Cell { polygon, pattern, map });
                if next.len() > options.budget {
                    return Err(Error::Resource(format!(
                        "more than {} regions; raise the budget or shrink the box",
                        options.budget
                    )));
                }
            }
        }
        cells = next;
    }

    let head = net.head();
    let mut regions: Vec<Region> = cells
        .into_iter()
        .map(|cell| {
            let out = match net.output_layer() {
                Some(l) => compose(l, &cell.map),
                None => cell.map,
            };
            let (a, b, c) = head.coefficients();
            let pre_sign = [
                a * out[0][0] + b * out[1][0],
                a * out[0][1] + b * out[1][1],
                a * out[0][2] + b * out[1][2] + c,
            ];
            let restricted_map = AffineLayer::new(
                vec![vec![out[0][0], out[0][1]], vec![out[1][0], out[1][1]]],
                vec![out[0][2], out[1][2]],
            )
            .expect("finite restricted map");
            Region { polygon: cell.polygon, pattern: ActivationPattern::new(cell.pattern), restricted_map, pre_sign }
        })
        .collect();
    regions.sort_by(canonical_order);
    Ok(Decomposition { net: net.clone(), bbox, regions, tolerance: tol })
}

/// Pattern bits first, then centroid `x`, then centroid `y`.
fn canonical_order(a: &Region, b: &Region) -> Ordering {
    a.pattern.cmp(&b.pattern).then_with(|| {
        let (ca, cb) = (a.polygon.centroid(), b.polygon.centroid());
        ca.x.total_cmp(&cb.x).then(ca.y.total_cmp(&cb.y))
    })
}

/// Pre-activations of `layer` as affine forms, given the forms feeding it.
fn compose(layer: &AffineLayer, inputs: &[AffineForm]) -> Vec<AffineForm> {
    layer
        .weights()
        .iter()
        .zip(layer.bias())
        .map(|(row, &b)| {
            let mut f = [0.0, 0.0, b];
            for (w, g) in row.iter().zip(inputs) {
                f[0] += w * g[0];
                f[1] += w * g[1];
                f[2] += w * g[2];
            }
            f
        })
        .collect()
}

impl Decomposition {
    pub fn net(&self) -> &MlpNetwork {
        &self.net
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn total_area(&self) -> f64 {
        self.regions.iter().map(|r| r.polygon.area()).sum()
    }

    /// `w^(2d)` for this network's width and depth.
    pub fn upper_bound(&self) -> Result<u64> {
        region_upper_bound(self.net.max_width() as u64, self.net.depth() as u64)
    }

    /// Index of the first region (canonical order) containing `p`, with the
    /// decomposition's tolerance. Points on a shared edge resolve to the
    /// earlier region.
    pub fn region_of_point(&self, p: Point2) -> Result<usize> {
        if !self.bbox.contains(p, self.tolerance) {
            return Err(domain(format!("point ({}, {}) lies outside the bounding box", p.x, p.y)));
        }
        if let Some(i) = self.regions.iter().position(|r| r.polygon.contains(p, self.tolerance)) {
            return Ok(i);
        }
        // only reachable inside a dropped sliver; take the closest region
        self.regions
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.polygon.min_edge_distance(p).total_cmp(&b.polygon.min_edge_distance(p)))
            .map(|(i, _)| i)
            .ok_or_else(|| domain("decomposition has no regions"))
    }

    pub fn records(&self) -> Vec<RegionRecord> {
        self.regions
            .iter()
            .map(|r| RegionRecord {
                vertices: r.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
                pattern: r.pattern.to_strings(),
                pre_sign: r.pre_sign,
            })
            .collect()
    }

    /// JSON array of `{"vertices", "pattern", "pre_sign"}` objects.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("regions serialize")
    }
}

/// Serialized form of a [`Region`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub vertices: Vec<[f64; 2]>,
    pub pattern: Vec<String>,
    pub pre_sign: [f64; 3],
}

pub fn records_from_json(s: &str) -> std::result::Result<Vec<RegionRecord>, serde_json::Error> {
    serde_json::from_str(s)
}

/// Most regions `n` lines in general position cut the plane into.
pub fn line_arrangement_max_regions(n: u64) -> u64 {
    1 + n * (n + 1) / 2
}

/// `w^(2d)`.
pub fn region_upper_bound(w: u64, d: u64) -> Result<u64> {
    if w < 1 || d < 1 {
        return Err(domain(format!("width and depth must be positive, got w={w} d={d}")));
    }
    let exp = u32::try_from(2 * d).map_err(|_| domain("depth too large"))?;
    w.checked_pow(exp).ok_or_else(|| domain(format!("{w}^{exp} overflows 64 bits")))
}

/// Distinct activation patterns seen on a `resolution x resolution` grid.
///
/// Samples sit at cell centers nudged by a small fixed offset, so the grid
/// never lands exactly on lines through the origin at rational slopes.
pub fn grid_pattern_count(net: &MlpNetwork, bbox: BoundingBox, resolution: usize) -> Result<usize> {
    if resolution < 8 {
        return Err(domain(format!("grid resolution must be at least 8, got {resolution}")));
    }
    let (dx, dy) = (bbox.width() / resolution as f64, bbox.height() / resolution as f64);
    let (ox, oy) = (0.5 + 1e-3 * std::f64::consts::SQRT_2, 0.5 + 1e-3 * std::f64::consts::E);
    let mut seen = HashSet::new();
    for i in 0..resolution {
        let x = bbox.x0 + (i as f64 + ox) * dx;
        for j in 0..resolution {
            let y = bbox.y0 + (j as f64 + oy) * dy;
            seen.insert(net.activation_pattern(Point2::new(x, y)));
        }
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::OutputHead;

    fn one_layer(lines: &[(f64, f64, f64)]) -> MlpNetwork {
        let w = lines.len();
        let layer = AffineLayer::new(lines.iter().map(|l| vec![l.0, l.1]).collect(), lines.iter().map(|l| l.2).collect())
            .unwrap();
        let out = AffineLayer::new(vec![vec![1.0; w], (0..w).map(|i| i as f64 - 1.0).collect()], vec![0.0, 0.0]).unwrap();
        MlpNetwork::with_output_layer(vec![layer], Some(out), OutputHead::new(1.0, -0.5, -0.3).unwrap()).unwrap()
    }

    #[test]
    fn crossing_lines_give_four_regions() {
        let net = one_layer(&[(1.0, 0.0, 0.1), (0.0, 1.0, -0.2)]);
        let d = enumerate_regions(&net, BoundingBox::default()).unwrap();
        assert_eq!(d.len(), 4);
        assert!((d.total_area() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn general_position_lines() {
        let net = one_layer(&[(1.0, 0.2, 0.1), (-0.3, 1.0, 0.2), (1.0, 1.1, -0.4)]);
        assert_eq!(enumerate_regions(&net, BoundingBox::square(10.0).unwrap()).unwrap().len(), 7);
    }

    #[test]
    fn no_hidden_layers_is_one_region() {
        let net = MlpNetwork::new(vec![], OutputHead::new(1.0, 2.0, 3.0).unwrap()).unwrap();
        let d = enumerate_regions(&net, BoundingBox::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.regions()[0].pre_sign, [1.0, 2.0, 3.0]);
        assert_eq!(d.region_of_point(Point2::new(0.3, -1.2)).unwrap(), 0);
    }

    #[test]
    fn region_of_point_tie_break() {
        let net = one_layer(&[(1.0, 0.0, 0.0)]);
        let d = enumerate_regions(&net, BoundingBox::default()).unwrap();
        assert_eq!(d.len(), 2);
        // bit 0 (x <= 0) sorts first
        assert!(d.regions()[0].polygon.centroid().x < 0.0);
        let right = d.region_of_point(Point2::new(1.0, 0.0)).unwrap();
        assert!(d.regions()[right].polygon.centroid().x > 0.0);
        assert_eq!(d.region_of_point(Point2::new(0.0, 0.7)).unwrap(), 0);
        assert!(d.region_of_point(Point2::new(3.0, 0.0)).is_err());
    }

    #[test]
    fn width_one_splits_once() {
        let net = one_layer(&[(0.3, -1.0, 0.2)]);
        assert_eq!(enumerate_regions(&net, BoundingBox::default()).unwrap().len(), 2);
    }

    #[test]
    fn constant_neuron_never_splits() {
        let layer = AffineLayer::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.0]).unwrap();
        let net = MlpNetwork::new(vec![layer], OutputHead::new(1.0, 1.0, 0.0).unwrap()).unwrap();
        let d = enumerate_regions(&net, BoundingBox::default()).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.regions().iter().all(|r| r.pattern.layer(0)[0]));
    }

    #[test]
    fn budget_guard() {
        let net = one_layer(&[(1.0, 0.2, 0.1), (-0.3, 1.0, 0.2), (1.0, 1.1, -0.4)]);
        let opts = EnumerationOptions { budget: 5, ..Default::default() };
        assert!(matches!(enumerate_regions_with(&net, BoundingBox::default(), opts), Err(Error::Resource(_))));
    }

    #[test]
    fn degenerate_box() {
        assert!(BoundingBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn counting_formulas() {
        assert_eq!(line_arrangement_max_regions(0), 1);
        assert_eq!(line_arrangement_max_regions(3), 7);
        assert_eq!(line_arrangement_max_regions(4), 11);
        assert_eq!(region_upper_bound(2, 1).unwrap(), 4);
        assert_eq!(region_upper_bound(3, 2).unwrap(), 81);
        assert_eq!(region_upper_bound(1, 9).unwrap(), 1);
        assert!(region_upper_bound(0, 1).is_err());
        assert!(region_upper_bound(2, 0).is_err());
        assert!(region_upper_bound(2, 32).is_err());
        assert_eq!(region_upper_bound(2, 31).unwrap(), 1 << 62);
    }

    #[test]
    fn grid_counts() {
        let constant = one_layer(&[(1.0, 1.0, 100.0), (2.0, 0.5, 100.0)]);
        assert_eq!(grid_pattern_count(&constant, BoundingBox::default(), 16).unwrap(), 1);
        let crossing = one_layer(&[(1.0, 0.0, 0.1), (0.0, 1.0, -0.2)]);
        assert_eq!(grid_pattern_count(&crossing, BoundingBox::default(), 64).unwrap(), 4);
        assert!(grid_pattern_count(&crossing, BoundingBox::default(), 7).is_err());
    }

    #[test]
    fn json_export_shape() {
        let net = one_layer(&[(1.0, 0.0, 0.1), (0.0, 1.0, -0.2)]);
        let d = enumerate_regions(&net, BoundingBox::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        let first = &v[0];
        assert_eq!(first["pattern"], serde_json::json!(["00"]));
        assert_eq!(first["pre_sign"].as_array().unwrap().len(), 3);
        assert!(first["vertices"][0].as_array().unwrap().len() == 2);
        assert_eq!(records_from_json(&d.to_json()).unwrap(), d.records());
    }
}
