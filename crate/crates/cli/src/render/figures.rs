use anyhow::{Context, Result};

use foldnet::construction::{build_collapsed, build_network};
use foldnet::geometry::{regular_polygon, v_even_prime, Line, ProblemInstance};
use foldnet::network::{chain_dims, head_input_of};
use foldnet::regions::{enumerate_regions, BoundingBox};
use foldnet::sampling::{general_position_network, rng};
use foldnet::verification::default_witness_epsilon;
use foldnet::{MlpNetwork, Point2};

use super::svg::{distinct_colors, grid_cell, Document, Panel};
use super::{Figure, RenderSpec};
use crate::commands::read_network;

const TITLE: f64 = 28.0;
const PAD: f64 = 8.0;

fn unit_circle(segments: usize) -> Vec<Point2> {
    (0..segments)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / segments as f64;
            Point2::new(t.cos(), t.sin())
        })
        .collect()
}

fn main_panel(doc: &Document, view: BoundingBox) -> Panel {
    Panel::fit(PAD, TITLE, doc.width() - 2.0 * PAD, doc.height() - TITLE - PAD, view)
}

/// Portion of `line` inside `bbox`, if any.
fn clip_line(line: &Line, bbox: &BoundingBox) -> Option<(Point2, Point2)> {
    let corners = [
        Point2::new(bbox.x0, bbox.y0),
        Point2::new(bbox.x1, bbox.y0),
        Point2::new(bbox.x1, bbox.y1),
        Point2::new(bbox.x0, bbox.y1),
    ];
    let mut hits = Vec::new();
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let (fa, fb) = (line.eval(a), line.eval(b));
        if fa == 0.0 {
            hits.push(a);
        } else if fa * fb < 0.0 {
            hits.push(a.lerp(b, fa / (fa - fb)));
        }
    }
    let (mut best, mut pair) = (0.0, None);
    for i in 0..hits.len() {
        for j in i + 1..hits.len() {
            let d = hits[i].dist(hits[j]);
            if d > best {
                best = d;
                pair = Some((hits[i], hits[j]));
            }
        }
    }
    pair
}

/// P_m inscribed in the unit circle.
pub struct ProblemPolygons;

impl Figure for ProblemPolygons {
    fn name(&self) -> &'static str {
        "problem"
    }

    fn render(&self, spec: &RenderSpec) -> Result<String> {
        let m = spec.require_m()?;
        let poly = regular_polygon(m)?;
        let mut doc = Document::new(spec.width, spec.height);
        let panel = main_panel(&doc, BoundingBox::square(1.2)?);
        doc.text(PAD, 20.0, 16.0, "title", &format!("P_{m}: regular polygon with {} vertices", poly.len()));
        doc.closed_path(&panel, &unit_circle(256), "circle", "none", "#888888");
        doc.closed_path(&panel, poly.vertices(), "polygon", "#cfe3f7", "#1f4e79");
        for v in poly.vertices() {
            doc.dot(&panel, *v, 2.5, "vertex", "#1f4e79");
        }
        Ok(doc.finish())
    }
}

/// Images of the P_m boundary and three marked points after each fold
/// block of the construction.
pub struct FoldSequence;

impl Figure for FoldSequence {
    fn name(&self) -> &'static str {
        "folds"
    }

    fn render(&self, spec: &RenderSpec) -> Result<String> {
        let m = spec.require_m()?;
        let net = build_network(m)?;
        let stages = net.stages();
        let cuts: Vec<usize> =
            (0..=stages.len()).filter(|&k| chain_dims(&stages[..k]).ok() == Some(2)).collect();

        let poly = regular_polygon(m)?;
        let mut boundary = Vec::new();
        for (a, b) in poly.edges() {
            for t in 0..16 {
                boundary.push(a.lerp(b, t as f64 / 16.0));
            }
        }
        boundary.push(poly.vertices()[0]);
        let markers = [Point2::new(-0.55, 0.35), Point2::new(0.3, -0.6), Point2::new(0.45, 0.5)];
        let marker_colors = ["#d62728", "#2ca02c", "#9467bd"];

        let mut doc = Document::new(spec.width, spec.height);
        doc.text(PAD, 20.0, 16.0, "title", &format!("Fold sequence for m={m}"));
        let view = BoundingBox::square(1.15)?;
        for (i, &k) in cuts.iter().enumerate() {
            let (x, y, w, h) = grid_cell(&doc, i, cuts.len(), TITLE);
            let panel = Panel::fit(x + PAD, y + PAD + 12.0, w - 2.0 * PAD, h - 2.0 * PAD - 12.0, view);
            doc.rect_outline(&panel, "panel");
            doc.text(panel.left, panel.top - 3.0, 11.0, "stage", &format!("after {k} stages"));
            let image: Vec<Point2> = boundary
                .iter()
                .map(|p| {
                    let [u, v] = head_input_of(&stages[..k], *p);
                    Point2::new(u, v)
                })
                .collect();
            doc.polyline(&panel, &image, "boundary", "#1f4e79", 1.0);
            for (p, c) in markers.iter().zip(marker_colors) {
                let [u, v] = head_input_of(&stages[..k], *p);
                doc.dot(&panel, Point2::new(u, v), 4.0, "marker", c);
            }
        }
        Ok(doc.finish())
    }
}

/// Linear regions of a network, one fill colour per region.
pub struct ResponseRegions;

impl Figure for ResponseRegions {
    fn name(&self) -> &'static str {
        "regions"
    }

    fn render(&self, spec: &RenderSpec) -> Result<String> {
        let (net, label): (MlpNetwork, String) = match &spec.net {
            Some(path) => (read_network(path)?, path.display().to_string()),
            None => {
                let m = spec.require_m()?;
                (build_collapsed(m)?, format!("m={m}"))
            }
        };
        let bbox = BoundingBox::default();
        let dec = enumerate_regions(&net, bbox).context("region enumeration failed")?;
        let colors = distinct_colors(dec.len(), spec.color_seed);
        let mut doc = Document::new(spec.width, spec.height);
        let panel = main_panel(&doc, bbox);
        doc.text(PAD, 20.0, 16.0, "title", &format!("{} regions ({label})", dec.len()));
        for (region, color) in dec.regions().iter().zip(&colors) {
            doc.polygon(&panel, region.polygon.vertices(), "region", color, "#333333");
        }
        if let Some(m) = spec.m.filter(|_| spec.net.is_none()) {
            doc.closed_path(&panel, regular_polygon(m)?.vertices(), "polygon", "none", "#000000");
        }
        Ok(doc.finish())
    }
}

/// P_m, the witness set V'_even and one chord between two witnesses.
pub struct WitnessChords;

impl Figure for WitnessChords {
    fn name(&self) -> &'static str {
        "witness"
    }

    fn render(&self, spec: &RenderSpec) -> Result<String> {
        let m = spec.require_m()?;
        let problem = ProblemInstance::new(m)?;
        let witnesses = v_even_prime(&problem, default_witness_epsilon(m))?;
        let mut doc = Document::new(spec.width, spec.height);
        let panel = main_panel(&doc, BoundingBox::square(1.2)?);
        doc.text(PAD, 20.0, 16.0, "title", &format!("{} witnesses outside P_{m}", witnesses.len()));
        doc.closed_path(&panel, problem.polygon().vertices(), "polygon", "#eeeeee", "#1f4e79");
        let (a, b) = (witnesses[0], witnesses[(witnesses.len() / 3).max(1)]);
        doc.line(&panel, a, b, "chord", "#2ca02c", 2.0);
        for w in &witnesses {
            doc.dot(&panel, *w, 3.0, "witness", "#d62728");
        }
        Ok(doc.finish())
    }
}

/// `n` lines in general position and the number of regions they cut.
pub struct Arrangement;

impl Figure for Arrangement {
    fn name(&self) -> &'static str {
        "arrangement"
    }

    fn render(&self, spec: &RenderSpec) -> Result<String> {
        let mut doc = Document::new(spec.width, spec.height);
        let mut r = rng(spec.color_seed);
        let (net, bbox) = general_position_network(&mut r, spec.n as usize, 0.05, 0.02)?;
        let dec = enumerate_regions(&net, bbox)?;
        let panel = main_panel(&doc, bbox);
        let colors = distinct_colors(dec.len(), spec.color_seed);
        for (region, color) in dec.regions().iter().zip(&colors) {
            doc.polygon(&panel, region.polygon.vertices(), "region", color, "none");
        }
        let layer = &net.hidden_layers()[0];
        for (row, b) in layer.weights().iter().zip(layer.bias()) {
            let line = Line::new(row[0], row[1], *b)?;
            if let Some((p, q)) = clip_line(&line, &bbox) {
                doc.line(&panel, p, q, "line", "#000000", 1.5);
            }
        }
        doc.text(PAD, 20.0, 16.0, "label", &format!("{} regions", dec.len()));
        Ok(doc.finish())
    }
}
