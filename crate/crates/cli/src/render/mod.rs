//! SVG figures, each registered under a target name.

mod figures;
pub mod svg;

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::builder::PossibleValuesParser;

pub use figures::{Arrangement, FoldSequence, ProblemPolygons, ResponseRegions, WitnessChords};

#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub target: String,
    pub m: Option<u32>,
    /// Line count for the arrangement figure.
    pub n: u32,
    pub width: u32,
    pub height: u32,
    pub color_seed: u64,
    /// Optional network for the regions figure.
    pub net: Option<PathBuf>,
}

impl RenderSpec {
    pub fn require_m(&self) -> Result<u32> {
        self.m.ok_or_else(|| anyhow!("target {:?} needs --m", self.target))
    }
}

pub trait Figure {
    fn name(&self) -> &'static str;
    fn render(&self, spec: &RenderSpec) -> Result<String>;
}

pub struct FigureRegistry {
    figures: Vec<Box<dyn Figure>>,
}

impl FigureRegistry {
    pub fn with_builtins() -> Self {
        FigureRegistry {
            figures: vec![
                Box::new(ProblemPolygons),
                Box::new(FoldSequence),
                Box::new(ResponseRegions),
                Box::new(WitnessChords),
                Box::new(Arrangement),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn Figure> {
        self.figures.iter().find(|f| f.name() == name).map(|f| f.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.figures.iter().map(|f| f.name()).collect()
    }
}

pub fn target_names() -> PossibleValuesParser {
    PossibleValuesParser::new(FigureRegistry::with_builtins().names())
}
