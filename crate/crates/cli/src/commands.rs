use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};

use foldnet::construction::build_network;
use foldnet::regions::{enumerate_regions_with, BoundingBox, EnumerationOptions};
use foldnet::verification::{SuiteContext, SuiteRegistry, VerificationReport};
use foldnet::{MlpNetwork, Point2};

use crate::render::{self, RenderSpec};

/// Global flags shared by every command.
pub struct Output {
    pub quiet: bool,
    pub tolerance: f64,
}

impl Output {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

/// Region budget exhaustion maps to 3; everything else to 1.
pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<foldnet::Error>() {
        Some(foldnet::Error::Resource(_)) => 3,
        _ => 1,
    }
}

fn write_or_print(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            match writeln!(stdout, "{contents}") {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

pub fn read_network(path: &Path) -> Result<MlpNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    MlpNetwork::from_json(&text).with_context(|| format!("invalid network file {}", path.display()))
}

pub fn build(out: &Output, m: u32, staged: bool, path: Option<&Path>) -> Result<ExitCode> {
    let net = build_network(m)?;
    let collapsed = net.collapse()?;
    let json = if staged { net.to_json()? } else { collapsed.to_json() };
    write_or_print(path, &json)?;
    let summary = format!(
        "m={m} hidden_layers={} max_width={} params={}",
        collapsed.depth(),
        collapsed.max_width(),
        collapsed.param_count()
    );
    // Keep stdout pure JSON when the network goes there.
    match path {
        Some(_) => out.say(summary),
        None if !out.quiet => eprintln!("{summary}"),
        None => {}
    }
    Ok(ExitCode::SUCCESS)
}

pub fn eval(_out: &Output, net: &Path, x: f64, y: f64) -> Result<ExitCode> {
    let net = read_network(net)?;
    let p = Point2::try_new(x, y)?;
    println!("class={} pre_sign={}", net.classify(p), net.evaluate_pre_sign(p));
    Ok(ExitCode::SUCCESS)
}

pub fn parse_bbox(values: Option<&[f64]>) -> Result<BoundingBox> {
    match values {
        None => Ok(BoundingBox::default()),
        Some(&[x0, y0, x1, y1]) => Ok(BoundingBox::new(x0, y0, x1, y1)?),
        Some(v) => bail!("--bbox takes 4 numbers, got {}", v.len()),
    }
}

pub fn regions(
    out: &Output,
    net: &Path,
    bbox: Option<&[f64]>,
    path: Option<&Path>,
    count_only: bool,
    budget: usize,
) -> Result<ExitCode> {
    let net = read_network(net)?;
    let bbox = parse_bbox(bbox)?;
    let options = EnumerationOptions { tolerance: out.tolerance, budget };
    let d = enumerate_regions_with(&net, bbox, options)?;
    let bound = match (net.max_width(), net.depth()) {
        (0, _) | (_, 0) => "1".to_string(),
        _ => d.upper_bound().map_or_else(|_| "overflow".to_string(), |b| b.to_string()),
    };
    println!("regions={} bound={bound}", d.len());
    if !count_only {
        if let Some(p) = path {
            fs::write(p, d.to_json()).with_context(|| format!("cannot write {}", p.display()))?;
            out.say(format!("wrote {}", p.display()));
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(
    out: &Output,
    m: u32,
    suite: &str,
    seed: u64,
    json: bool,
    net: Option<&Path>,
    samples: usize,
) -> Result<ExitCode> {
    let mut ctx = SuiteContext::for_problem(m, seed)?;
    ctx.tolerance = out.tolerance;
    ctx.n_random = samples;
    if let Some(path) = net {
        ctx = ctx.with_network(read_network(path)?);
    }
    let reports = SuiteRegistry::with_builtins().run(suite, &ctx)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        print_table(out, &reports);
    }
    Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn print_table(out: &Output, reports: &[VerificationReport]) {
    let width = reports.iter().map(|r| r.claim.len()).max().unwrap_or(5).max(5);
    out.say(format!("{:width$}  result  details", "claim"));
    for r in reports {
        let details: Vec<String> = r.details.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.say(format!("{:width$}  {:6}  {}", r.claim, if r.passed { "PASS" } else { "FAIL" }, details.join(" ")));
    }
}

pub fn render(out: &Output, spec: &RenderSpec, path: &Path) -> Result<ExitCode> {
    let svg = render::FigureRegistry::with_builtins()
        .get(&spec.target)
        .ok_or_else(|| anyhow!("unknown render target {:?}", spec.target))?
        .render(spec)?;
    fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    out.say(format!("wrote {}", path.display()));
    Ok(ExitCode::SUCCESS)
}
