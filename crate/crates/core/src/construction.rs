//! The folding network for `f_m`.
//!
//! The input is first folded into the first quadrant with `(x, y) -> (|x|, |y|)`.
//! Then `m` times: rotate by the next angle in `pi/4, pi/8, ...` so that the
//! remaining boundary is symmetric about the x axis, and fold across it.
//! What is left of `P_m` is one straight segment, separated by the head.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::geometry::{classify_point, Line, Point2, ProblemInstance};
use crate::network::{head_input_of, AffineLayer, MlpNetwork, OutputHead, Stage, StagedNetwork};

/// Largest `m` accepted by [`build_network`].
pub const MAX_NETWORK_M: u32 = 16;

/// Minimum separation of the two edge images used by [`derive_top`].
const MIN_IMAGE_SEPARATION: f64 = 1e-9;

/// Which way [`make_rotation`] turns the plane for a positive angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationSense {
    /// `[[cos, sin], [-sin, cos]]`.
    Clockwise,
    /// `[[cos, -sin], [sin, cos]]`.
    Counterclockwise,
}

/// Rotation schedule for problem `m`: `pi / 2^(k+2)` for `k = 0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    m: u32,
    rotation_angles: Vec<f64>,
}

impl FoldPlan {
    pub fn new(m: u32) -> Result<Self> {
        check_m(m)?;
        let rotation_angles = (0..m).map(|k| PI / f64::powi(2.0, k as i32 + 2)).collect();
        Ok(FoldPlan { m, rotation_angles })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rotation_angles(&self) -> &[f64] {
        &self.rotation_angles
    }
}

fn check_m(m: u32) -> Result<()> {
    if (1..=MAX_NETWORK_M).contains(&m) {
        Ok(())
    } else {
        Err(domain(format!("m must be in 1..={MAX_NETWORK_M}, got {m}")))
    }
}

/// `(x, y) -> (|x|, |y|)` as linear 4x2, ReLU, linear 2x4.
pub fn make_fold_xy() -> Vec<Stage> {
    let expand = vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
    let sum = vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]];
    vec![
        Stage::Linear(AffineLayer::linear(expand).expect("static matrix")),
        Stage::Relu,
        Stage::Linear(AffineLayer::linear(sum).expect("static matrix")),
    ]
}

/// `(x, y) -> (x, |y|)` for `x >= 0`, as linear 3x2, ReLU, linear 2x3.
pub fn make_fold_x() -> Vec<Stage> {
    let expand = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
    let sum = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
    vec![
        Stage::Linear(AffineLayer::linear(expand).expect("static matrix")),
        Stage::Relu,
        Stage::Linear(AffineLayer::linear(sum).expect("static matrix")),
    ]
}

pub fn make_rotation(theta: f64, sense: RotationSense) -> AffineLayer {
    let (s, c) = theta.sin_cos();
    let weights = match sense {
        RotationSense::Counterclockwise => vec![vec![c, -s], vec![s, c]],
        RotationSense::Clockwise => vec![vec![c, s], vec![-s, c]],
    };
    AffineLayer::linear(weights).expect("finite rotation")
}

/// Every stage of the construction except the head.
pub fn fold_prefix(m: u32, sense: RotationSense) -> Result<Vec<Stage>> {
    let plan = FoldPlan::new(m)?;
    let mut stages = make_fold_xy();
    for &theta in plan.rotation_angles() {
        stages.push(Stage::Linear(make_rotation(theta, sense)));
        stages.extend(make_fold_x());
    }
    Ok(stages)
}

/// Head for a fold prefix of problem `m`.
///
/// The edge of `P_m` from `(0, 1)` into the first quadrant survives every
/// fold, and its image is the final decision segment. The final fold maps
/// both of its endpoints onto the same point, so the line is taken through
/// the images of the vertex `(0, 1)` and the edge midpoint. It is oriented
/// so the image of the origin lands on the positive side.
pub fn derive_top(m: u32, prefix: &[Stage]) -> Result<OutputHead> {
    let problem = ProblemInstance::new(m)?;
    let verts = problem.polygon().vertices();
    let top = verts[0];
    let neighbour = verts[verts.len() - 1];
    let image = |p: Point2| {
        let [x0, x1] = head_input_of(prefix, p);
        Point2::new(x0, x1)
    };
    let u = image(top);
    let v = image(top.midpoint(neighbour));
    if u.dist(v) < MIN_IMAGE_SEPARATION {
        return Err(Error::Construction(format!("edge image degenerates to a point for m={m}")));
    }
    let mut line = Line::through(u, v)?;
    let origin = image(Point2::ORIGIN);
    let side = line.eval(origin);
    if side.abs() < MIN_IMAGE_SEPARATION {
        return Err(Error::Construction("origin image lies on the decision line".into()));
    }
    if side < 0.0 {
        line = line.flipped();
    }
    let (a, b, c) = line.coefficients();
    OutputHead::new(a, b, c)
}

/// The staged folding network for `f_m` with an explicit rotation sense.
pub fn build_network_with_sense(m: u32, sense: RotationSense) -> Result<StagedNetwork> {
    let stages = fold_prefix(m, sense)?;
    let head = derive_top(m, &stages)?;
    StagedNetwork::new(stages, head)
}

/// The staged folding network for `f_m`, using [`resolve_rotation_sense`].
pub fn build_network(m: u32) -> Result<StagedNetwork> {
    build_network_with_sense(m, resolve_rotation_sense()?)
}

/// [`build_network`] followed by [`StagedNetwork::collapse`].
pub fn build_collapsed(m: u32) -> Result<MlpNetwork> {
    build_network(m)?.collapse()
}

/// The construction for `m` with its last fold-x block removed and the head
/// left as built.
///
/// The last fold acts on a single polygon edge lying symmetric about the x
/// axis, so the decision line is unchanged by it and this network still
/// classifies `f_m` correctly.
pub fn build_without_final_fold(m: u32) -> Result<StagedNetwork> {
    if m < 2 {
        return Err(domain("dropping the final fold needs m >= 2"));
    }
    let full = build_network(m)?;
    let mut stages = full.stages().to_vec();
    stages.truncate(stages.len() - make_fold_x().len());
    StagedNetwork::new(stages, *full.head())
}

/// The construction for `m` with its last `steps` rotate-and-fold blocks
/// removed and the head re-derived for the shorter prefix. Dropping two or
/// more leaves several edges in the final wedge, which no line separates.
pub fn build_truncated(m: u32, steps: u32) -> Result<StagedNetwork> {
    if steps > m {
        return Err(domain(format!("cannot drop {steps} of {m} rotate-and-fold steps")));
    }
    let mut stages = fold_prefix(m, resolve_rotation_sense()?)?;
    stages.truncate(stages.len() - steps as usize * (1 + make_fold_x().len()));
    let head = derive_top(m, &stages)?;
    StagedNetwork::new(stages, head)
}

/// Picks the rotation matrix that makes the construction correct.
///
/// Both senses are built for `m = 2` and checked against [`classify_point`]
/// on a 100x100 grid over `[-2, 2]^2`, skipping points within `1e-6` of the
/// polygon boundary. The sense with zero mismatches wins; the result is
/// computed once per process.
pub fn resolve_rotation_sense() -> Result<RotationSense> {
    static SENSE: OnceLock<Result<RotationSense>> = OnceLock::new();
    SENSE.get_or_init(|| {
        let candidates = [RotationSense::Counterclockwise, RotationSense::Clockwise];
        candidates
            .into_iter()
            .find(|&s| grid_mismatches(2, s).is_ok_and(|n| n == 0))
            .ok_or_else(|| Error::Construction("no rotation sense classifies f_2 without error".into()))
    })
    .clone()
}

fn grid_mismatches(m: u32, sense: RotationSense) -> Result<usize> {
    const N: usize = 100;
    let net = build_network_with_sense(m, sense)?.collapse()?;
    let problem = ProblemInstance::new(m)?;
    let step = 4.0 / N as f64;
    let mut mismatches = 0;
    for i in 0..N {
        for j in 0..N {
            let p = Point2::new(-2.0 + (i as f64 + 0.5) * step, -2.0 + (j as f64 + 0.5) * step);
            if problem.boundary_distance(p) < 1e-6 {
                continue;
            }
            if let Some(truth) = classify_point(&problem, p).class() {
                if net.classify(p) != truth {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Class;
    use rand::{Rng, SeedableRng};

    fn run(stages: &[Stage], x: f64, y: f64) -> [f64; 2] {
        head_input_of(stages, Point2::new(x, y))
    }

    #[test]
    fn fold_xy_matrices_and_examples() {
        let s = make_fold_xy();
        match (&s[0], &s[2]) {
            (Stage::Linear(a), Stage::Linear(b)) => {
                assert_eq!(a.weights(), &[vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]);
                assert_eq!(b.weights(), &[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]);
                assert!(a.bias().iter().chain(b.bias()).all(|&v| v == 0.0));
            }
            _ => panic!("unexpected stage layout"),
        }
        assert_eq!(s[1], Stage::Relu);
        assert_eq!(run(&s, -3.0, 2.0), [3.0, 2.0]);
        assert_eq!(run(&s, 0.0, 0.0), [0.0, 0.0]);
        assert_eq!(run(&s, 5.0, -5.0), [5.0, 5.0]);
    }

    #[test]
    fn fold_xy_activation_bits() {
        let s = make_fold_xy();
        let head = OutputHead::new(1.0, 0.0, 0.0).unwrap();
        let net = StagedNetwork::new(s, head).unwrap().collapse().unwrap();
        assert_eq!(net.activation_pattern(Point2::new(-3.0, 2.0)).layer(0), &[true, false, true, false]);
    }

    #[test]
    fn fold_x_matrices_and_examples() {
        let s = make_fold_x();
        match (&s[0], &s[2]) {
            (Stage::Linear(a), Stage::Linear(b)) => {
                assert_eq!(a.weights(), &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]);
                assert_eq!(b.weights(), &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]);
            }
            _ => panic!("unexpected stage layout"),
        }
        assert_eq!(run(&s, 2.0, -5.0), [2.0, 5.0]);
        assert_eq!(run(&s, 2.0, 5.0), [2.0, 5.0]);
        // x < 0 is outside the fold's domain; ReLU clamps it
        assert_eq!(run(&s, -1.0, 1.0), [0.0, 1.0]);
    }

    #[test]
    fn rotation_examples() {
        for sense in [RotationSense::Clockwise, RotationSense::Counterclockwise] {
            assert_eq!(make_rotation(0.0, sense), AffineLayer::identity(2));
            let q = make_rotation(PI / 2.0, sense).apply(&[1.0, 0.0]);
            assert!(q[0].abs() < 1e-15 && (q[1].abs() - 1.0).abs() < 1e-15);
            for theta in [0.3, PI / 8.0, 2.0] {
                let r = make_rotation(theta, sense);
                let inv = make_rotation(-theta, sense);
                let id = r.then(&inv).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((id.weights()[i][j] - e).abs() < 1e-12);
                    }
                }
                // orthogonality: R^T R = I
                let w = r.weights();
                let dot = w[0][0] * w[0][1] + w[1][0] * w[1][1];
                assert!(dot.abs() < 1e-12);
            }
        }
        let ccw = make_rotation(PI / 2.0, RotationSense::Counterclockwise).apply(&[1.0, 0.0]);
        assert!((ccw[1] - 1.0).abs() < 1e-15);
        let cw = make_rotation(PI / 2.0, RotationSense::Clockwise).apply(&[1.0, 0.0]);
        assert!((cw[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn resolved_sense_is_clockwise() {
        assert_eq!(resolve_rotation_sense().unwrap(), RotationSense::Clockwise);
        assert!(grid_mismatches(2, RotationSense::Counterclockwise).map_or(true, |n| n > 0));
    }

    #[test]
    fn plan_angles() {
        let plan = FoldPlan::new(3).unwrap();
        assert_eq!(plan.rotation_angles(), &[PI / 4.0, PI / 8.0, PI / 16.0]);
        let plan = FoldPlan::new(12).unwrap();
        for w in plan.rotation_angles().windows(2) {
            assert_eq!(w[1], w[0] / 2.0);
        }
        assert!(FoldPlan::new(0).is_err());
        assert!(FoldPlan::new(MAX_NETWORK_M + 1).is_err());
        assert!(build_network(0).is_err());
        assert!(build_network(17).is_err());
    }

    #[test]
    fn collapsed_shape() {
        for m in 1..=12 {
            let staged = build_network(m).unwrap();
            let net = staged.collapse().unwrap();
            assert_eq!(net.depth(), m as usize + 1, "m={m}");
            assert_eq!(net.max_width(), 4);
            assert!(net.param_count() <= 20 * (m as usize + 2));
        }
    }

    #[test]
    fn top_layer_properties() {
        for m in 1..=12 {
            let net = build_collapsed(m).unwrap();
            let (a, b, c) = net.head().coefficients();
            assert!((a * a + b * b - 1.0).abs() < 1e-12);
            assert!(c != 0.0);
            assert_eq!(net.classify(Point2::ORIGIN), Class::Positive, "m={m}");
            assert_eq!(net.classify(Point2::new(0.0, 1.0 + 1e-3)), Class::Negative, "m={m}");
        }
    }

    #[test]
    fn top_for_m1_is_the_edge_line() {
        // After one fold the decision line is x = cos(pi/4).
        let net = build_collapsed(1).unwrap();
        let (a, b, c) = net.head().coefficients();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a + 1.0).abs() < 1e-12 && b.abs() < 1e-12 && (c - h).abs() < 1e-12);
    }

    #[test]
    fn m5_matches_oracle_on_random_points() {
        let problem = ProblemInstance::new(5).unwrap();
        let net = build_collapsed(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        for _ in 0..100_000 {
            let p = Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if problem.boundary_distance(p) < 1e-6 {
                continue;
            }
            if let Some(truth) = classify_point(&problem, p).class() {
                assert_eq!(net.classify(p), truth, "p={p:?}");
                checked += 1;
            }
        }
        assert!(checked > 99_000);
    }

    #[test]
    fn collapse_matches_staged() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for m in 1..=12 {
            let staged = build_network(m).unwrap();
            let net = staged.collapse().unwrap();
            for _ in 0..10_000 {
                let p = Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                assert!((net.evaluate_pre_sign(p) - staged.evaluate_pre_sign(p)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn folds_preserve_norm_and_quadrant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for m in [1, 3, 8] {
            let staged = build_network(m).unwrap();
            for _ in 0..1000 {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r: f64 = rng.gen_range(0.0..2.0);
                let p = Point2::new(r * t.cos(), r * t.sin());
                let trace = staged.trace(p);
                let mut fold_count = 0;
                for (stage, out) in staged.stages().iter().zip(&trace) {
                    if out.len() == 2 && matches!(stage, Stage::Linear(_)) {
                        assert!((out[0].hypot(out[1]) - r).abs() < 1e-9);
                    }
                    // every 2x4 / 2x3 sum layer closes a fold
                    if let Stage::Linear(l) = stage {
                        if l.out_dim() == 2 && l.in_dim() > 2 {
                            fold_count += 1;
                            assert!(out[1] >= 0.0);
                            if fold_count == 1 {
                                assert!(out[0] >= 0.0);
                            }
                        }
                    }
                }
                assert_eq!(fold_count, m as usize + 1);
            }
        }
    }

    #[test]
    fn function_is_even_in_each_coordinate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for m in 1..=8 {
            let net = build_collapsed(m).unwrap();
            for _ in 0..500 {
                let p = Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let v = net.evaluate_pre_sign(p);
                assert!((v - net.evaluate_pre_sign(Point2::new(-p.x, p.y))).abs() <= 1e-9);
                assert!((v - net.evaluate_pre_sign(Point2::new(p.x, -p.y))).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn truncated_network_shape() {
        let s = build_without_final_fold(3).unwrap();
        assert_eq!(s.collapse().unwrap().depth(), 3);
        assert!(build_without_final_fold(1).is_err());
        assert_eq!(build_truncated(3, 2).unwrap().collapse().unwrap().depth(), 2);
        assert!(build_truncated(3, 4).is_err());
    }

    fn oracle_mismatches(net: &StagedNetwork, m: u32) -> usize {
        let problem = ProblemInstance::new(m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(u64::from(m));
        let mut wrong = 0;
        for _ in 0..20_000 {
            let p = Point2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            if problem.boundary_distance(p) < 1e-6 {
                continue;
            }
            let truth = classify_point(&problem, p).class().unwrap();
            wrong += (net.classify(p) != truth) as usize;
        }
        wrong
    }

    #[test]
    fn last_fold_is_redundant_but_the_one_before_is_not() {
        for m in 2..=6 {
            assert_eq!(oracle_mismatches(&build_without_final_fold(m).unwrap(), m), 0, "m={m}");
            assert_eq!(oracle_mismatches(&build_truncated(m, 1).unwrap(), m), 0, "m={m}");
            assert!(oracle_mismatches(&build_truncated(m, 2).unwrap(), m) > 0, "m={m}");
        }
    }
}
