//! Seeded generators for random networks and point sets.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

use crate::error::{domain, Result};
use crate::geometry::Point2;
use crate::network::{AffineLayer, MlpNetwork, OutputHead};
use crate::regions::BoundingBox;

/// The generator used for every seeded computation in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_point(rng: &mut impl Rng, bbox: &BoundingBox) -> Point2 {
    Point2::new(rng.gen_range(bbox.x0..bbox.x1), rng.gen_range(bbox.y0..bbox.y1))
}

fn random_layer(rng: &mut impl Rng, in_dim: usize, out_dim: usize) -> AffineLayer {
    let weights = (0..out_dim).map(|_| (0..in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let bias = (0..out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    AffineLayer::new(weights, bias).expect("finite random layer")
}

fn random_head(rng: &mut impl Rng) -> OutputHead {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    OutputHead::new(t.cos(), t.sin(), rng.gen_range(-1.0..1.0)).expect("unit normal")
}

/// `depth` hidden layers of `width` neurons with weights and biases uniform
/// in `[-1, 1]`, a random 2-output layer and a random head.
pub fn random_network(rng: &mut impl Rng, width: usize, depth: usize) -> Result<MlpNetwork> {
    if width == 0 || depth == 0 {
        return Err(domain("random networks need positive width and depth"));
    }
    let mut hidden = vec![random_layer(rng, 2, width)];
    for _ in 1..depth {
        hidden.push(random_layer(rng, width, width));
    }
    let out = random_layer(rng, width, 2);
    MlpNetwork::with_output_layer(hidden, Some(out), random_head(rng))
}

/// A single-hidden-layer network whose `width` neuron lines are in general
/// position, plus a box holding every pairwise intersection.
///
/// Lines are drawn with uniform direction and offset in `[-1, 1]`, and
/// rejected while any two are within `min_sin` of parallel or any
/// intersection is within `min_gap` of a third line.
pub fn general_position_network(
    rng: &mut impl Rng,
    width: usize,
    min_sin: f64,
    min_gap: f64,
) -> Result<(MlpNetwork, BoundingBox)> {
    if width == 0 {
        return Err(domain("width must be positive"));
    }
    let mut lines: Vec<(f64, f64, f64)> = Vec::with_capacity(width);
    let mut attempts = 0;
    while lines.len() < width {
        attempts += 1;
        if attempts > 100_000 {
            return Err(domain("could not place lines in general position"));
        }
        let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let cand = (t.cos(), t.sin(), rng.gen_range(-1.0..1.0));
        if admissible(&lines, cand, min_sin, min_gap) {
            lines.push(cand);
        }
    }
    let (mut x0, mut y0, mut x1, mut y1) = (-2.0f64, -2.0f64, 2.0f64, 2.0f64);
    for i in 0..width {
        for j in i + 1..width {
            let p = intersect(lines[i], lines[j]);
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
    }
    let bbox = BoundingBox::new(x0 - 1.0, y0 - 1.0, x1 + 1.0, y1 + 1.0)?;
    // random positive scale per neuron; the zero lines stay put
    let weights = lines
        .iter()
        .map(|&(a, b, c)| {
            let s = rng.gen_range(0.5..2.0);
            (vec![a * s, b * s], c * s)
        })
        .collect::<Vec<_>>();
    let layer = AffineLayer::new(weights.iter().map(|w| w.0.clone()).collect(), weights.iter().map(|w| w.1).collect())?;
    let out = random_layer(rng, width, 2);
    let net = MlpNetwork::with_output_layer(vec![layer], Some(out), random_head(rng))?;
    Ok((net, bbox))
}

fn intersect(l: (f64, f64, f64), k: (f64, f64, f64)) -> Point2 {
    let det = l.0 * k.1 - l.1 * k.0;
    Point2::new((l.1 * k.2 - k.1 * l.2) / det, (k.0 * l.2 - l.0 * k.2) / det)
}

fn admissible(lines: &[(f64, f64, f64)], cand: (f64, f64, f64), min_sin: f64, min_gap: f64) -> bool {
    if lines.iter().any(|l| (l.0 * cand.1 - l.1 * cand.0).abs() < min_sin) {
        return false;
    }
    // unit normals, so |a x + b y + c| is a distance
    for i in 0..lines.len() {
        let p = intersect(lines[i], cand);
        for (j, l) in lines.iter().enumerate() {
            if j != i && (l.0 * p.x + l.1 * p.y + l.2).abs() < min_gap {
                return false;
            }
        }
        for j in i + 1..lines.len() {
            let q = intersect(lines[i], lines[j]);
            if (cand.0 * q.x + cand.1 * q.y + cand.2).abs() < min_gap {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_network(&mut rng(4), 3, 2).unwrap();
        let b = random_network(&mut rng(4), 3, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.depth(), 2);
        assert_eq!(a.max_width(), 3);
    }

    #[test]
    fn general_position_box_holds_intersections() {
        let (net, bbox) = general_position_network(&mut rng(1), 6, 0.05, 1e-3).unwrap();
        let l = &net.hidden_layers()[0];
        let lines: Vec<_> = l.weights().iter().zip(l.bias()).map(|(w, &b)| (w[0], w[1], b)).collect();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                assert!(bbox.contains(intersect(lines[i], lines[j]), 0.0));
            }
        }
    }
}
