//! Executable checks of the width lower bound, the witness-region argument,
//! piecewise linearity and zero-error classification.
//!
//! Every check returns a [`VerificationReport`]; the named suites in
//! [`suite`] bundle them for the command line.

pub mod suite;

use std::collections::BTreeMap;
use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{chord_crosses_boundary, classify_point, v_even_prime, Class, Point2, ProblemInstance};
use crate::network::MlpNetwork;
use crate::regions::{region_upper_bound, BoundingBox, Decomposition};
use crate::sampling;

pub use suite::{SuiteContext, SuiteRegistry, VerificationSuite};

/// Default margin around the polygon boundary excluded from error counts.
pub const DEFAULT_MARGIN: f64 = 1e-6;
/// Largest witness step used by [`default_witness_epsilon`].
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Interpolation tolerance for the piecewise-linearity check.
pub const LINEARITY_TOLERANCE: f64 = 1e-8;

/// A metric value in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Int(i64),
    Real(f64),
}

impl From<usize> for Metric {
    fn from(v: usize) -> Self {
        Metric::Int(v as i64)
    }
}

impl From<u64> for Metric {
    fn from(v: u64) -> Self {
        Metric::Int(v as i64)
    }
}

impl From<i64> for Metric {
    fn from(v: i64) -> Self {
        Metric::Int(v)
    }
}

impl From<f64> for Metric {
    fn from(v: f64) -> Self {
        Metric::Real(v)
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Int(v) => write!(f, "{v}"),
            Metric::Real(v) => write!(f, "{v:e}"),
        }
    }
}

/// Outcome of one claim. `passed` is the conjunction of every recorded check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub passed: bool,
    pub details: BTreeMap<String, Metric>,
}

impl VerificationReport {
    pub fn new(claim: impl Into<String>) -> Self {
        VerificationReport { claim: claim.into(), passed: true, details: BTreeMap::new() }
    }

    pub fn metric(&mut self, name: &str, value: impl Into<Metric>) -> &mut Self {
        self.details.insert(name.to_string(), value.into());
        self
    }

    pub fn check(&mut self, ok: bool) -> &mut Self {
        self.passed &= ok;
        self
    }

    pub fn get(&self, name: &str) -> Option<Metric> {
        self.details.get(name).copied()
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        match self.get(name)? {
            Metric::Int(v) => Some(v),
            Metric::Real(_) => None,
        }
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            Metric::Real(v) => Some(v),
            Metric::Int(v) => Some(v as f64),
        }
    }
}

/// Minimum width `2^(m / 2d)` and its per-unit base `2^(1 / 2d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthLowerBound {
    pub width: f64,
    pub base: f64,
}

/// Width a depth-`d` network needs so that `w^(2d) >= 2^m`.
pub fn width_lower_bound(m: u32, d: u32) -> Result<WidthLowerBound> {
    if m == 0 || d == 0 {
        return Err(domain(format!("m and d must be positive, got m={m} d={d}")));
    }
    let two_d = 2.0 * d as f64;
    Ok(WidthLowerBound { width: (m as f64 / two_d).exp2(), base: (1.0 / two_d).exp2() })
}

/// Witness step for problem `m`: at most [`DEFAULT_EPSILON`], and small enough
/// that the chord between two adjacent witnesses still passes inside `P_m`
/// (that needs `(1 + eps) cos(2 pi / 2^(m+1)) < 1`; a quarter of the slack is used).
pub fn default_witness_epsilon(m: u32) -> f64 {
    let half_gap = std::f64::consts::TAU / (1u64 << (m + 1)) as f64;
    let slack = 1.0 / half_gap.cos() - 1.0;
    if slack.is_finite() && slack > 0.0 {
        DEFAULT_EPSILON.min(slack / 4.0)
    } else {
        DEFAULT_EPSILON
    }
}

/// Checks the witness argument on a decomposition: every pushed-out even
/// vertex is classified -1, all of them sit in distinct regions, there are
/// at least `2^m` regions, and every chord between two witnesses enters `P_m`.
pub fn verify_lemma2(m: u32, epsilon: f64, decomposition: &Decomposition) -> Result<VerificationReport> {
    let problem = ProblemInstance::new(m)?;
    let witnesses = v_even_prime(&problem, epsilon)?;
    let bbox = decomposition.bbox();
    if let Some(p) = witnesses.iter().find(|p| !bbox.contains(**p, 0.0)) {
        return Err(domain(format!("witness ({}, {}) lies outside the bounding box", p.x, p.y)));
    }
    let expected = witnesses.len();
    let net = decomposition.net();

    let negative = witnesses.iter().filter(|&&p| net.classify(p) == Class::Negative).count();
    let indices = witnesses.iter().map(|&p| decomposition.region_of_point(p)).collect::<Result<Vec<_>>>()?;
    let distinct = indices.iter().collect::<HashSet<_>>().len();
    let mut pairs = 0usize;
    let mut crossing = 0usize;
    for i in 0..witnesses.len() {
        for j in i + 1..witnesses.len() {
            pairs += 1;
            if chord_crosses_boundary(&problem, witnesses[i], witnesses[j]) {
                crossing += 1;
            }
        }
    }

    let mut report = VerificationReport::new(format!("lemma2/m={m}"));
    report
        .metric("epsilon", epsilon)
        .metric("witnesses", expected)
        .metric("classified_negative", negative)
        .metric("distinct_regions", distinct)
        .metric("region_count", decomposition.len())
        .metric("chord_pairs", pairs)
        .metric("chords_crossing", crossing)
        .check(negative == expected)
        .check(distinct == expected)
        .check(decomposition.len() >= expected)
        .check(crossing == pairs);
    Ok(report)
}

/// Compares `net` with the ground truth for `f_m` on seeded random points in
/// `[-2, 2]^2` plus every polygon vertex and edge midpoint scaled by
/// `1 +- 10 * margin`, and the origin. Points labelled Boundary or closer
/// than `margin` to the boundary are skipped.
pub fn verify_zero_error(
    net: &MlpNetwork,
    m: u32,
    n_random: usize,
    seed: u64,
    margin: f64,
) -> Result<VerificationReport> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(domain(format!("margin must be finite and non-negative, got {margin}")));
    }
    let problem = ProblemInstance::new(m)?;
    let bbox = BoundingBox::default();
    let mut rng = sampling::rng(seed);
    let mut points: Vec<Point2> = (0..n_random).map(|_| sampling::uniform_point(&mut rng, &bbox)).collect();

    let verts = problem.polygon().vertices();
    let mut adversarial = vec![Point2::ORIGIN];
    for (i, &v) in verts.iter().enumerate() {
        let mid = v.midpoint(verts[(i + 1) % verts.len()]);
        for s in [1.0 + 10.0 * margin, 1.0 - 10.0 * margin] {
            adversarial.push(v.scale(s));
            adversarial.push(mid.scale(s));
        }
    }
    let n_adversarial = adversarial.len();
    points.extend(adversarial);

    let (mut evaluated, mut excluded, mut mismatches) = (0usize, 0usize, 0usize);
    for &p in &points {
        let truth = match classify_point(&problem, p).class() {
            Some(c) if problem.boundary_distance(p) >= margin => c,
            _ => {
                excluded += 1;
                continue;
            }
        };
        evaluated += 1;
        if net.classify(p) != truth {
            mismatches += 1;
        }
    }

    let mut report = VerificationReport::new(format!("zero-error/m={m}"));
    report
        .metric("seed", seed)
        .metric("margin", margin)
        .metric("random_points", n_random)
        .metric("adversarial_points", n_adversarial)
        .metric("evaluated", evaluated)
        .metric("excluded", excluded)
        .metric("mismatches", mismatches)
        .metric("origin_class", net.classify(Point2::ORIGIN).sign() as i64)
        .check(mismatches == 0);
    Ok(report)
}

/// Random interior point: a random convex combination of the vertices,
/// pulled 10% toward the centroid.
fn interior_point(rng: &mut impl Rng, verts: &[Point2], centroid: Point2) -> Point2 {
    let weights: Vec<f64> = verts.iter().map(|_| rng.gen_range(1e-3..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let (x, y) =
        verts.iter().zip(&weights).fold((0.0, 0.0), |(x, y), (v, w)| (x + v.x * w / total, y + v.y * w / total));
    centroid.lerp(Point2::new(x, y), 0.9)
}

/// Per region, draws `samples_per_region` interior triples `p, q` and
/// `r = lam p + (1 - lam) q` and measures how far the network's value at `r`
/// is from the interpolated value. Also checks each sample's activation
/// pattern and the region's stored affine head form.
pub fn verify_piecewise_linearity(
    net: &MlpNetwork,
    decomposition: &Decomposition,
    samples_per_region: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if samples_per_region < 3 {
        return Err(domain(format!("need at least 3 samples per region, got {samples_per_region}")));
    }
    let mut rng = sampling::rng(seed);
    let (mut max_dev, mut max_affine_dev) = (0.0f64, 0.0f64);
    let mut pattern_mismatches = 0usize;
    let mut triples = 0usize;
    for region in decomposition.regions() {
        let verts = region.polygon.vertices();
        let c = region.polygon.centroid();
        for _ in 0..samples_per_region {
            let p = interior_point(&mut rng, verts, c);
            let q = interior_point(&mut rng, verts, c);
            let lam: f64 = rng.gen_range(0.0..1.0);
            let r = q.lerp(p, lam);
            let (fp, fq, fr) = (net.evaluate_pre_sign(p), net.evaluate_pre_sign(q), net.evaluate_pre_sign(r));
            max_dev = max_dev.max((fr - (lam * fp + (1.0 - lam) * fq)).abs());
            for (s, f) in [(p, fp), (q, fq), (r, fr)] {
                if net.activation_pattern(s) != region.pattern {
                    pattern_mismatches += 1;
                }
                max_affine_dev = max_affine_dev.max((region.pre_sign_at(s) - f).abs());
            }
            triples += 1;
        }
    }
    let mut report = VerificationReport::new("linearity");
    report
        .metric("seed", seed)
        .metric("regions", decomposition.len())
        .metric("triples", triples)
        .metric("max_deviation", max_dev)
        .metric("max_affine_deviation", max_affine_dev)
        .metric("pattern_mismatches", pattern_mismatches)
        .check(max_dev <= LINEARITY_TOLERANCE)
        .check(max_affine_dev <= LINEARITY_TOLERANCE)
        .check(pattern_mismatches == 0);
    Ok(report)
}

/// For each `m`, checks `ceil(2^(m/2d))^(2d) >= 2^m`.
pub fn verify_bound_consistency(m_range: &[u32], d: u32) -> Result<VerificationReport> {
    let mut failures = 0usize;
    let mut exact = 0usize;
    for &m in m_range {
        let lb = width_lower_bound(m, d)?;
        let w_min = lb.width.ceil() as u64;
        let bound = region_upper_bound(w_min, d as u64)?;
        let needed = 1u64
            .checked_shl(m)
            .filter(|_| m < 64)
            .ok_or_else(|| domain(format!("2^{m} does not fit in 64 bits")))?;
        if bound < needed {
            failures += 1;
        }
        if m % (2 * d) == 0 && lb.width == (1u64 << (m / (2 * d))) as f64 {
            exact += 1;
        }
    }
    let mut report = VerificationReport::new(format!("bounds/d={d}"));
    report
        .metric("depth", d as u64)
        .metric("checked", m_range.len())
        .metric("failures", failures)
        .metric("exact_powers", exact)
        .check(failures == 0);
    Ok(report)
}
