//! `foldnet`: build folding networks, evaluate them, enumerate their linear
//! regions, run verification suites and render SVG figures.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{ArgGroup, Parser, Subcommand};

use foldnet::geometry::DEFAULT_TOLERANCE;
use foldnet::verification::SuiteRegistry;

#[derive(Debug, Parser)]
#[command(name = "foldnet", version, about = "Folding ReLU networks for regular-polygon classification")]
struct Cli {
    /// Absolute tolerance for geometric predicates.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE, allow_negative_numbers = true)]
    tolerance: f64,

    /// Suppress summary lines on standard output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the folding network for problem m and write it as JSON.
    #[command(group(ArgGroup::new("form").args(["staged", "collapsed"])))]
    Build {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=foldnet::construction::MAX_NETWORK_M as i64))]
        m: u32,
        /// Write the stage-by-stage form (with a "stages" array).
        #[arg(long)]
        staged: bool,
        /// Write the collapsed MLP form (default).
        #[arg(long)]
        collapsed: bool,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify one point with a network read from JSON.
    Eval {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
    /// Enumerate the linear response regions of a network inside a box.
    Regions {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, num_args = 4, value_names = ["X0", "Y0", "X1", "Y1"], allow_negative_numbers = true)]
        bbox: Option<Vec<f64>>,
        /// Write the decomposition JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only print the count line.
        #[arg(long)]
        count_only: bool,
        /// Give up (exit status 3) beyond this many regions.
        #[arg(long, default_value_t = foldnet::regions::DEFAULT_REGION_BUDGET)]
        budget: usize,
    },
    /// Run verification suites; exit status 0 iff every claim passed.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=foldnet::construction::MAX_NETWORK_M as i64))]
        m: u32,
        #[arg(long, default_value = "all", value_parser = suite_names())]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print reports as JSON.
        #[arg(long)]
        json: bool,
        /// Verify this network instead of the construction for m.
        #[arg(long)]
        net: Option<PathBuf>,
        /// Random sample count for the zero-error suite.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Render an SVG figure.
    Render {
        #[arg(long, value_parser = render::target_names())]
        target: String,
        /// Problem index (all targets except arrangement).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=foldnet::construction::MAX_NETWORK_M as i64))]
        m: Option<u32>,
        /// Number of lines for the arrangement target.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=24))]
        n: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 800, value_parser = clap::value_parser!(u32).range(64..))]
        width: u32,
        #[arg(long, default_value_t = 800, value_parser = clap::value_parser!(u32).range(64..))]
        height: u32,
        #[arg(long, default_value_t = 0)]
        color_seed: u64,
        /// Network JSON for the regions target instead of the construction.
        #[arg(long)]
        net: Option<PathBuf>,
    },
}

fn suite_names() -> PossibleValuesParser {
    let mut names: Vec<&'static str> = SuiteRegistry::with_builtins().names();
    names.push("all");
    PossibleValuesParser::new(names)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.tolerance.is_finite() && cli.tolerance >= 0.0) {
        eprintln!("error: --tolerance must be finite and non-negative");
        return ExitCode::from(2);
    }
    let out = commands::Output { quiet: cli.quiet, tolerance: cli.tolerance };
    let result = match cli.command {
        Command::Build { m, staged, collapsed: _, out: path } => commands::build(&out, m, staged, path.as_deref()),
        Command::Eval { net, x, y } => commands::eval(&out, &net, x, y),
        Command::Regions { net, bbox, out: path, count_only, budget } => {
            commands::regions(&out, &net, bbox.as_deref(), path.as_deref(), count_only, budget)
        }
        Command::Verify { m, suite, seed, json, net, samples } => {
            commands::verify(&out, m, &suite, seed, json, net.as_deref(), samples)
        }
        Command::Render { target, m, n, out: path, width, height, color_seed, net } => {
            let spec = render::RenderSpec { target, m, n, width, height, color_seed, net };
            commands::render(&out, &spec, &path)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
