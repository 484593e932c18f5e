//! Named verification suites behind a common trait.
//!
//! A [`SuiteRegistry`] maps names such as `"zero-error"` to boxed
//! [`VerificationSuite`] implementations. `"all"` runs every registered
//! suite in registration order.

use crate::construction::build_collapsed;
use crate::error::{domain, Result};
use crate::network::MlpNetwork;
use crate::geometry::DEFAULT_TOLERANCE;
use crate::regions::{enumerate_regions_with, BoundingBox, Decomposition, EnumerationOptions};

use super::{
    default_witness_epsilon, verify_bound_consistency, verify_lemma2, verify_piecewise_linearity, verify_zero_error,
    VerificationReport, DEFAULT_MARGIN,
};

/// Inputs shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteContext {
    pub m: u32,
    pub seed: u64,
    /// Network under test; the folding construction for `m` unless overridden.
    pub net: MlpNetwork,
    pub bbox: BoundingBox,
    pub margin: f64,
    pub epsilon: f64,
    pub n_random: usize,
    pub samples_per_region: usize,
    /// The bounds suite checks `m = 1..=bound_m_max` for each depth here.
    pub bound_depths: Vec<u32>,
    pub bound_m_max: u32,
    /// Geometric tolerance for region enumeration and point location.
    pub tolerance: f64,
}

impl SuiteContext {
    pub fn for_problem(m: u32, seed: u64) -> Result<Self> {
        Ok(SuiteContext {
            m,
            seed,
            net: build_collapsed(m)?,
            bbox: BoundingBox::default(),
            margin: DEFAULT_MARGIN,
            epsilon: default_witness_epsilon(m),
            n_random: 100_000,
            samples_per_region: 9,
            bound_depths: vec![1, 2, 3, 4],
            bound_m_max: 30,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_network(mut self, net: MlpNetwork) -> Self {
        self.net = net;
        self
    }

    fn decomposition(&self) -> Result<Decomposition> {
        let options = EnumerationOptions { tolerance: self.tolerance, ..Default::default() };
        enumerate_regions_with(&self.net, self.bbox, options)
    }
}

pub trait VerificationSuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, ctx: &SuiteContext) -> Result<Vec<VerificationReport>>;
}

struct ZeroError;

impl VerificationSuite for ZeroError {
    fn name(&self) -> &'static str {
        "zero-error"
    }

    fn description(&self) -> &'static str {
        "network agrees with f_m away from the polygon boundary"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<Vec<VerificationReport>> {
        Ok(vec![verify_zero_error(&ctx.net, ctx.m, ctx.n_random, ctx.seed, ctx.margin)?])
    }
}

struct Lemma2;

impl VerificationSuite for Lemma2 {
    fn name(&self) -> &'static str {
        "lemma2"
    }

    fn description(&self) -> &'static str {
        "2^m witnesses fall in pairwise distinct response regions"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<Vec<VerificationReport>> {
        let d = ctx.decomposition()?;
        Ok(vec![verify_lemma2(ctx.m, ctx.epsilon, &d)?])
    }
}

struct Linearity;

impl VerificationSuite for Linearity {
    fn name(&self) -> &'static str {
        "linearity"
    }

    fn description(&self) -> &'static str {
        "network is affine on every enumerated region"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<Vec<VerificationReport>> {
        let d = ctx.decomposition()?;
        Ok(vec![verify_piecewise_linearity(&ctx.net, &d, ctx.samples_per_region, ctx.seed)?])
    }
}

struct Bounds;

impl VerificationSuite for Bounds {
    fn name(&self) -> &'static str {
        "bounds"
    }

    fn description(&self) -> &'static str {
        "width lower bound is consistent with the region upper bound"
    }

    fn run(&self, ctx: &SuiteContext) -> Result<Vec<VerificationReport>> {
        let ms: Vec<u32> = (1..=ctx.bound_m_max).collect();
        ctx.bound_depths.iter().map(|&d| verify_bound_consistency(&ms, d)).collect()
    }
}

pub struct SuiteRegistry {
    suites: Vec<Box<dyn VerificationSuite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        SuiteRegistry { suites: Vec::new() }
    }

    /// Registry holding `zero-error`, `lemma2`, `linearity` and `bounds`.
    pub fn with_builtins() -> Self {
        let mut r = SuiteRegistry::empty();
        r.register(Box::new(ZeroError));
        r.register(Box::new(Lemma2));
        r.register(Box::new(Linearity));
        r.register(Box::new(Bounds));
        r
    }

    /// Adds a suite, replacing any suite of the same name.
    pub fn register(&mut self, suite: Box<dyn VerificationSuite>) {
        match self.suites.iter().position(|s| s.name() == suite.name()) {
            Some(i) => self.suites[i] = suite,
            None => self.suites.push(suite),
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn VerificationSuite> {
        self.suites.iter().find(|s| s.name() == name).map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    /// Runs one suite by name, or every suite for `"all"`.
    pub fn run(&self, name: &str, ctx: &SuiteContext) -> Result<Vec<VerificationReport>> {
        if name == "all" {
            let mut out = Vec::new();
            for s in &self.suites {
                out.extend(s.run(ctx)?);
            }
            return Ok(out);
        }
        let suite = self
            .get(name)
            .ok_or_else(|| domain(format!("unknown suite {name:?}; known: {}", self.names().join(", "))))?;
        suite.run(ctx)
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        SuiteRegistry::with_builtins()
    }
}
