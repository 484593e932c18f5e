//! Rectified MLPs: affine layers with a ReLU after each hidden layer, an
//! optional affine output layer, and a sign head reading two values.
//!
//! A [`StagedNetwork`] is the un-collapsed form: an arbitrary sequence of
//! linear and ReLU stages. [`StagedNetwork::collapse`] multiplies each run of
//! consecutive linear stages into one layer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::geometry::{Class, Point2};

/// Dense affine map `x -> W x + b`; row `i` of `W` belongs to output neuron `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayer")]
pub struct AffineLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl TryFrom<RawLayer> for AffineLayer {
    type Error = crate::Error;

    fn try_from(raw: RawLayer) -> Result<Self> {
        AffineLayer::new(raw.weights, raw.bias)
    }
}

impl AffineLayer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let out_dim = weights.len();
        if out_dim == 0 {
            return Err(structural("layer must have at least one output"));
        }
        let in_dim = weights[0].len();
        if in_dim == 0 {
            return Err(structural("layer must have at least one input"));
        }
        if weights.iter().any(|row| row.len() != in_dim) {
            return Err(structural("weight rows have differing lengths"));
        }
        if bias.len() != out_dim {
            return Err(structural(format!("bias length {} != output dimension {out_dim}", bias.len())));
        }
        if weights.iter().flatten().chain(&bias).any(|v| !v.is_finite()) {
            return Err(structural("layer parameters must be finite"));
        }
        Ok(AffineLayer { weights, bias })
    }

    /// Bias-free layer.
    pub fn linear(weights: Vec<Vec<f64>>) -> Result<Self> {
        let bias = vec![0.0; weights.len()];
        AffineLayer::new(weights, bias)
    }

    pub fn identity(dim: usize) -> Self {
        let weights = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        AffineLayer { weights, bias: vec![0.0; dim] }
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn in_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.out_dim() * self.in_dim() + self.out_dim()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim());
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    /// The composition `next ∘ self`.
    pub fn then(&self, next: &AffineLayer) -> Result<AffineLayer> {
        if next.in_dim() != self.out_dim() {
            return Err(structural(format!(
                "cannot compose {}x{} after {}x{}",
                next.out_dim(),
                next.in_dim(),
                self.out_dim(),
                self.in_dim()
            )));
        }
        let weights = next
            .weights
            .iter()
            .map(|row| {
                (0..self.in_dim())
                    .map(|j| row.iter().zip(&self.weights).map(|(w, srow)| w * srow[j]).sum())
                    .collect()
            })
            .collect();
        let bias = next.apply(&self.bias);
        Ok(AffineLayer { weights, bias })
    }
}

/// The sign head `sign(a*x0 + b*x1 + c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHead")]
pub struct OutputHead {
    pub(crate) a: f64,
    pub(crate) b: f64,
    pub(crate) c: f64,
}

#[derive(Deserialize)]
struct RawHead {
    a: f64,
    b: f64,
    c: f64,
}

impl TryFrom<RawHead> for OutputHead {
    type Error = crate::Error;

    fn try_from(raw: RawHead) -> Result<Self> {
        OutputHead::new(raw.a, raw.b, raw.c)
    }
}

impl OutputHead {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(structural("head coefficients must be finite"));
        }
        if a == 0.0 && b == 0.0 {
            return Err(structural("head needs (a, b) != (0, 0)"));
        }
        Ok(OutputHead { a, b, c })
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    #[inline]
    pub fn value(&self, x0: f64, x1: f64) -> f64 {
        self.a * x0 + self.b * x1 + self.c
    }

    /// The head with every coefficient multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<OutputHead> {
        OutputHead::new(self.a * s, self.b * s, self.c * s)
    }
}

/// +1 iff the pre-sign value is strictly positive.
#[inline]
pub fn sign_class(pre_sign: f64) -> Class {
    if pre_sign > 0.0 {
        Class::Positive
    } else {
        Class::Negative
    }
}

/// Per hidden layer, which neurons have a strictly positive pre-activation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ActivationPattern {
    layers: Vec<Vec<bool>>,
}

impl ActivationPattern {
    pub fn new(layers: Vec<Vec<bool>>) -> Self {
        ActivationPattern { layers }
    }

    pub fn layers(&self) -> &[Vec<bool>] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &[bool] {
        &self.layers[i]
    }

    /// One `"0101"` string per layer.
    pub fn to_strings(&self) -> Vec<String> {
        self.layers
            .iter()
            .map(|l| l.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn from_strings<S: AsRef<str>>(layers: &[S]) -> Result<Self> {
        layers
            .iter()
            .map(|s| {
                s.as_ref()
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(structural(format!("bad pattern character {other:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()
            .map(ActivationPattern::new)
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_strings().join("|"))
    }
}

/// `h_out ∘ [output] ∘ σ ∘ h_d ∘ ... ∘ σ ∘ h_1`, input in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct MlpNetwork {
    hidden_layers: Vec<AffineLayer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_layer: Option<AffineLayer>,
    head: OutputHead,
}

#[derive(Deserialize)]
struct RawNetwork {
    hidden_layers: Vec<AffineLayer>,
    #[serde(default)]
    output_layer: Option<AffineLayer>,
    head: OutputHead,
}

impl TryFrom<RawNetwork> for MlpNetwork {
    type Error = crate::Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        MlpNetwork::with_output_layer(raw.hidden_layers, raw.output_layer, raw.head)
    }
}

impl MlpNetwork {
    /// Network whose last hidden layer feeds the head directly.
    pub fn new(hidden_layers: Vec<AffineLayer>, head: OutputHead) -> Result<Self> {
        MlpNetwork::with_output_layer(hidden_layers, None, head)
    }

    /// Network with an affine (un-rectified) layer between the last hidden
    /// layer and the head. That layer must produce exactly 2 values.
    pub fn with_output_layer(
        hidden_layers: Vec<AffineLayer>,
        output_layer: Option<AffineLayer>,
        head: OutputHead,
    ) -> Result<Self> {
        let mut dim = 2;
        for (i, layer) in hidden_layers.iter().enumerate() {
            if layer.in_dim() != dim {
                return Err(structural(format!(
                    "hidden layer {i} expects {} inputs but receives {dim}",
                    layer.in_dim()
                )));
            }
            dim = layer.out_dim();
        }
        if let Some(out) = &output_layer {
            if out.in_dim() != dim {
                return Err(structural(format!(
                    "output layer expects {} inputs but receives {dim}",
                    out.in_dim()
                )));
            }
            dim = out.out_dim();
        }
        if dim != 2 {
            return Err(structural(format!("head consumes 2 values but receives {dim}")));
        }
        Ok(MlpNetwork { hidden_layers, output_layer, head })
    }

    pub fn hidden_layers(&self) -> &[AffineLayer] {
        &self.hidden_layers
    }

    pub fn output_layer(&self) -> Option<&AffineLayer> {
        self.output_layer.as_ref()
    }

    pub fn head(&self) -> &OutputHead {
        &self.head
    }

    /// Number of hidden (rectified) layers.
    pub fn depth(&self) -> usize {
        self.hidden_layers.len()
    }

    /// Same network with a different head.
    pub fn with_head(&self, head: OutputHead) -> MlpNetwork {
        MlpNetwork { head, ..self.clone() }
    }

    /// The two values consumed by the head.
    pub fn head_input(&self, p: Point2) -> [f64; 2] {
        let mut x = vec![p.x, p.y];
        for layer in &self.hidden_layers {
            x = layer.apply(&x);
            relu_in_place(&mut x);
        }
        if let Some(out) = &self.output_layer {
            x = out.apply(&x);
        }
        [x[0], x[1]]
    }

    pub fn evaluate_pre_sign(&self, p: Point2) -> f64 {
        let [x0, x1] = self.head_input(p);
        self.head.value(x0, x1)
    }

    /// +1 iff the pre-sign value is strictly positive; ties go to -1.
    pub fn classify(&self, p: Point2) -> Class {
        sign_class(self.evaluate_pre_sign(p))
    }

    pub fn activation_pattern(&self, p: Point2) -> ActivationPattern {
        let mut x = vec![p.x, p.y];
        let mut layers = Vec::with_capacity(self.hidden_layers.len());
        for layer in &self.hidden_layers {
            x = layer.apply(&x);
            layers.push(x.iter().map(|&v| v > 0.0).collect());
            relu_in_place(&mut x);
        }
        ActivationPattern { layers }
    }

    pub fn param_count(&self) -> usize {
        self.hidden_layers.iter().chain(&self.output_layer).map(AffineLayer::param_count).sum::<usize>() + 3
    }

    pub fn max_width(&self) -> usize {
        self.hidden_layers.iter().map(AffineLayer::out_dim).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[inline]
fn relu_in_place(x: &mut [f64]) {
    for v in x {
        *v = v.max(0.0);
    }
}

/// One step of a [`StagedNetwork`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Stage {
    Linear(AffineLayer),
    Relu,
}

/// An un-collapsed sequence of linear and ReLU stages followed by a head.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedNetwork {
    stages: Vec<Stage>,
    head: OutputHead,
}

impl StagedNetwork {
    pub fn new(stages: Vec<Stage>, head: OutputHead) -> Result<Self> {
        let dim = chain_dims(&stages)?;
        if dim != 2 {
            return Err(structural(format!("head consumes 2 values but stages produce {dim}")));
        }
        Ok(StagedNetwork { stages, head })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn head(&self) -> &OutputHead {
        &self.head
    }

    pub fn with_head(&self, head: OutputHead) -> StagedNetwork {
        StagedNetwork { stages: self.stages.clone(), head }
    }

    /// Output of every stage, in order, for input `p`.
    pub fn trace(&self, p: Point2) -> Vec<Vec<f64>> {
        let mut x = vec![p.x, p.y];
        let mut out = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            match stage {
                Stage::Linear(l) => x = l.apply(&x),
                Stage::Relu => relu_in_place(&mut x),
            }
            out.push(x.clone());
        }
        out
    }

    /// The two values consumed by the head.
    pub fn head_input(&self, p: Point2) -> [f64; 2] {
        head_input_of(&self.stages, p)
    }

    pub fn evaluate_pre_sign(&self, p: Point2) -> f64 {
        let [x0, x1] = self.head_input(p);
        self.head.value(x0, x1)
    }

    pub fn classify(&self, p: Point2) -> Class {
        sign_class(self.evaluate_pre_sign(p))
    }

    /// Standard MLP form: every maximal run of linear stages becomes one
    /// affine layer. A trailing run becomes the output layer. A ReLU with no
    /// linear stage in front of it gets an identity layer, and repeated ReLUs
    /// merge since ReLU is idempotent.
    pub fn collapse(&self) -> Result<MlpNetwork> {
        let mut hidden = Vec::new();
        let mut pending: Option<AffineLayer> = None;
        let mut dim = 2;
        let mut last_was_relu = false;
        for stage in &self.stages {
            match stage {
                Stage::Linear(l) => {
                    pending = Some(match pending.take() {
                        None => l.clone(),
                        Some(acc) => acc.then(l)?,
                    });
                    dim = l.out_dim();
                    last_was_relu = false;
                }
                Stage::Relu => {
                    match pending.take() {
                        Some(layer) => hidden.push(layer),
                        None if last_was_relu => {}
                        None => hidden.push(AffineLayer::identity(dim)),
                    }
                    last_was_relu = true;
                }
            }
        }
        MlpNetwork::with_output_layer(hidden, pending, self.head)
    }

    /// JSON document holding the collapsed network plus a `"stages"` array.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            #[serde(flatten)]
            network: &'a MlpNetwork,
            stages: &'a [Stage],
        }
        let network = self.collapse()?;
        Ok(serde_json::to_string_pretty(&Doc { network: &network, stages: &self.stages })
            .expect("staged network serializes"))
    }

    /// Reads the `"stages"` and `"head"` keys of a staged document.
    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        #[derive(Deserialize)]
        struct Doc {
            stages: Vec<Stage>,
            head: OutputHead,
        }
        let doc: Doc = serde_json::from_str(s)?;
        StagedNetwork::new(doc.stages, doc.head).map_err(serde::de::Error::custom)
    }
}

/// Runs a stage list without a head.
pub fn head_input_of(stages: &[Stage], p: Point2) -> [f64; 2] {
    let mut x = vec![p.x, p.y];
    for stage in stages {
        match stage {
            Stage::Linear(l) => x = l.apply(&x),
            Stage::Relu => relu_in_place(&mut x),
        }
    }
    [x[0], x[1]]
}

/// Output dimension of a stage list fed with a 2-vector.
pub fn chain_dims(stages: &[Stage]) -> Result<usize> {
    let mut dim = 2;
    for (i, stage) in stages.iter().enumerate() {
        if let Stage::Linear(l) = stage {
            if l.in_dim() != dim {
                return Err(structural(format!(
                    "stage {i} expects {} inputs but receives {dim}",
                    l.in_dim()
                )));
            }
            dim = l.out_dim();
        }
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye2() -> AffineLayer {
        AffineLayer::identity(2)
    }

    fn head(a: f64, b: f64, c: f64) -> OutputHead {
        OutputHead::new(a, b, c).unwrap()
    }

    #[test]
    fn pre_sign_examples() {
        let zero = AffineLayer::linear(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let net = MlpNetwork::new(vec![zero], head(1.0, 0.0, 5.0)).unwrap();
        assert_eq!(net.evaluate_pre_sign(Point2::new(3.0, -8.0)), 5.0);

        let net = MlpNetwork::new(vec![eye2()], head(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(net.evaluate_pre_sign(Point2::new(2.0, 3.0)), 5.0);
        assert_eq!(net.evaluate_pre_sign(Point2::new(-2.0, 3.0)), 3.0);
    }

    #[test]
    fn classify_ties_go_negative() {
        let net = |c| MlpNetwork::new(vec![], head(1.0, 0.0, c)).unwrap();
        assert_eq!(net(0.0).classify(Point2::ORIGIN), Class::Negative);
        assert_eq!(net(1e-15).classify(Point2::ORIGIN), Class::Positive);
        assert_eq!(net(-3.0).classify(Point2::ORIGIN), Class::Negative);
    }

    #[test]
    fn activation_pattern_examples() {
        let net = MlpNetwork::new(vec![eye2()], head(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(net.activation_pattern(Point2::new(1.0, -1.0)).layers(), &[vec![true, false]]);
        assert_eq!(net.activation_pattern(Point2::ORIGIN).layers(), &[vec![false, false]]);
        assert_eq!(net.activation_pattern(Point2::new(1.0, -1.0)).to_string(), "10");
    }

    #[test]
    fn pattern_strings_roundtrip() {
        let p = ActivationPattern::new(vec![vec![true, false, true], vec![false, true]]);
        assert_eq!(p.to_strings(), vec!["101", "01"]);
        assert_eq!(ActivationPattern::from_strings(&p.to_strings()).unwrap(), p);
        assert!(ActivationPattern::from_strings(&["10x"]).is_err());
    }

    #[test]
    fn param_count_and_width() {
        let net = MlpNetwork::new(vec![eye2()], head(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(net.param_count(), 9);
        assert_eq!(net.max_width(), 2);
        let bare = MlpNetwork::new(vec![], head(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(bare.param_count(), 3);
        assert_eq!(bare.max_width(), 0);
        let wide = AffineLayer::new(vec![vec![1.0, 0.0]; 7], vec![0.0; 7]).unwrap();
        let out = AffineLayer::new(vec![vec![1.0; 7]; 2], vec![0.0; 2]).unwrap();
        let net = MlpNetwork::with_output_layer(vec![wide], Some(out), head(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(net.max_width(), 7);
        assert_eq!(net.param_count(), 21 + 16 + 3);
    }

    #[test]
    fn structural_errors() {
        let wide = AffineLayer::new(vec![vec![1.0, 0.0]; 3], vec![0.0; 3]).unwrap();
        // head would receive 3 values
        assert!(MlpNetwork::new(vec![wide.clone()], head(1.0, 0.0, 0.0)).is_err());
        // chaining mismatch
        assert!(MlpNetwork::new(vec![wide, eye2()], head(1.0, 0.0, 0.0)).is_err());
        assert!(AffineLayer::new(vec![vec![1.0, 0.0], vec![1.0]], vec![0.0, 0.0]).is_err());
        assert!(AffineLayer::new(vec![vec![1.0, 0.0]], vec![0.0, 0.0]).is_err());
        assert!(AffineLayer::new(vec![vec![f64::NAN, 0.0]], vec![0.0]).is_err());
        assert!(AffineLayer::new(vec![], vec![]).is_err());
        assert!(OutputHead::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn collapse_composes_linear_runs() {
        let w1 = AffineLayer::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.5, -1.0]).unwrap();
        let w2 = AffineLayer::new(vec![vec![0.0, 1.0], vec![-1.0, 2.0]], vec![1.0, 1.0]).unwrap();
        let staged = StagedNetwork::new(
            vec![Stage::Linear(w1.clone()), Stage::Linear(w2.clone()), Stage::Relu],
            head(1.0, -1.0, 0.25),
        )
        .unwrap();
        let net = staged.collapse().unwrap();
        assert_eq!(net.depth(), 1);
        let layer = &net.hidden_layers()[0];
        // W2 W1 and W2 b1 + b2
        assert_eq!(layer.weights(), &[vec![3.0, 4.0], vec![5.0, 6.0]]);
        assert_eq!(layer.bias(), &[0.0, -1.5]);
        assert!(net.output_layer().is_none());
    }

    #[test]
    fn collapse_without_linear_runs_is_unchanged() {
        let w1 = AffineLayer::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.5, -1.0]).unwrap();
        let w2 = AffineLayer::new(vec![vec![0.0, 1.0], vec![-1.0, 2.0]], vec![1.0, 1.0]).unwrap();
        let h = head(1.0, 2.0, 3.0);
        let staged =
            StagedNetwork::new(vec![Stage::Linear(w1.clone()), Stage::Relu, Stage::Linear(w2.clone()), Stage::Relu], h)
                .unwrap();
        assert_eq!(staged.collapse().unwrap(), MlpNetwork::new(vec![w1, w2], h).unwrap());
    }

    #[test]
    fn collapse_edge_shapes() {
        // leading relu, doubled relu, trailing linear run
        let w = AffineLayer::new(vec![vec![1.0, -1.0], vec![2.0, 0.5]], vec![0.1, 0.2]).unwrap();
        let staged = StagedNetwork::new(
            vec![Stage::Relu, Stage::Relu, Stage::Linear(w.clone()), Stage::Linear(w.clone())],
            head(1.0, 1.0, 0.0),
        )
        .unwrap();
        let net = staged.collapse().unwrap();
        assert_eq!(net.depth(), 1);
        assert!(net.output_layer().is_some());
        for p in [Point2::new(0.3, -2.0), Point2::new(-1.0, 4.0), Point2::new(2.0, 2.0)] {
            assert!((net.evaluate_pre_sign(p) - staged.evaluate_pre_sign(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn staged_dimension_mismatch() {
        let w = AffineLayer::new(vec![vec![1.0, 0.0, 0.0]], vec![0.0]).unwrap();
        assert!(StagedNetwork::new(vec![Stage::Linear(w)], head(1.0, 0.0, 0.0)).is_err());
        let w3 = AffineLayer::new(vec![vec![1.0, 0.0]; 3], vec![0.0; 3]).unwrap();
        assert!(StagedNetwork::new(vec![Stage::Linear(w3)], head(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn json_schema_shape() {
        let net = MlpNetwork::new(vec![eye2()], head(1.0, -0.5, 0.1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&net.to_json()).unwrap();
        assert_eq!(v["hidden_layers"][0]["weights"], serde_json::json!([[1.0, 0.0], [0.0, 1.0]]));
        assert_eq!(v["hidden_layers"][0]["bias"], serde_json::json!([0.0, 0.0]));
        assert_eq!(v["head"], serde_json::json!({"a": 1.0, "b": -0.5, "c": 0.1}));
        assert!(v.get("output_layer").is_none());
        assert_eq!(MlpNetwork::from_json(&net.to_json()).unwrap(), net);
    }

    #[test]
    fn json_rejects_invalid_networks() {
        let bad_head = r#"{"hidden_layers": [], "head": {"a": 0, "b": 0, "c": 1}}"#;
        assert!(MlpNetwork::from_json(bad_head).is_err());
        let bad_dims = r#"{"hidden_layers": [{"weights": [[1,0,0]], "bias": [0]}], "head": {"a": 1, "b": 0, "c": 1}}"#;
        assert!(MlpNetwork::from_json(bad_dims).is_err());
        assert!(MlpNetwork::from_json("{not json").is_err());
    }

    #[test]
    fn staged_json_roundtrip() {
        let w = AffineLayer::new(vec![vec![1.0, -1.0], vec![2.0, 0.5]], vec![0.1, 0.2]).unwrap();
        let staged = StagedNetwork::new(
            vec![Stage::Linear(w.clone()), Stage::Relu, Stage::Linear(w)],
            head(1.0, 1.0, 0.0),
        )
        .unwrap();
        let s = staged.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["stages"][0]["type"], "linear");
        assert_eq!(v["stages"][1]["type"], "relu");
        assert_eq!(StagedNetwork::from_json(&s).unwrap(), staged);
        // the staged document is also a readable collapsed network
        assert_eq!(MlpNetwork::from_json(&s).unwrap(), staged.collapse().unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn layer(in_dim: usize, out_dim: usize) -> impl Strategy<Value = AffineLayer> {
            (
                proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, in_dim), out_dim),
                proptest::collection::vec(-1.0f64..1.0, out_dim),
            )
                .prop_map(|(w, b)| AffineLayer::new(w, b).unwrap())
        }

        fn network() -> impl Strategy<Value = MlpNetwork> {
            (1usize..4, 1usize..4)
                .prop_flat_map(|(w, d)| {
                    let mut layers = vec![layer(2, w).boxed()];
                    for _ in 1..d {
                        layers.push(layer(w, w).boxed());
                    }
                    (layers, layer(w, 2), (-1.0f64..1.0, 0.1f64..1.0, -1.0f64..1.0))
                })
                .prop_map(|(hidden, out, (a, b, c))| {
                    MlpNetwork::with_output_layer(hidden, Some(out), OutputHead::new(a, b, c).unwrap()).unwrap()
                })
        }

        proptest! {
            #[test]
            fn affine_on_constant_pattern(
                net in network(),
                p in (-2.0f64..2.0, -2.0f64..2.0),
                q in (-2.0f64..2.0, -2.0f64..2.0),
                lam in 0.0f64..1.0,
            ) {
                let p = Point2::new(p.0, p.1);
                let q = Point2::new(q.0, q.1);
                let r = q.lerp(p, lam);
                let pat = net.activation_pattern(p);
                prop_assume!(pat == net.activation_pattern(q) && pat == net.activation_pattern(r));
                let interp = lam * net.evaluate_pre_sign(p) + (1.0 - lam) * net.evaluate_pre_sign(q);
                prop_assert!((net.evaluate_pre_sign(r) - interp).abs() <= 1e-8);
            }

            #[test]
            fn positive_head_scaling_keeps_classes(
                net in network(),
                s in 1e-3f64..1e3,
                p in (-2.0f64..2.0, -2.0f64..2.0),
            ) {
                let p = Point2::new(p.0, p.1);
                let scaled = net.with_head(net.head().scaled(s).unwrap());
                prop_assert_eq!(scaled.classify(p), net.classify(p));
            }

            #[test]
            fn json_roundtrip_is_exact(net in network(), p in (-2.0f64..2.0, -2.0f64..2.0)) {
                let back = MlpNetwork::from_json(&net.to_json()).unwrap();
                prop_assert_eq!(&back, &net);
                let p = Point2::new(p.0, p.1);
                prop_assert_eq!(back.evaluate_pre_sign(p).to_bits(), net.evaluate_pre_sign(p).to_bits());
            }
        }
    }
}
