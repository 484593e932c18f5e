//! Minimal SVG 1.1 writer with world-to-pixel panels.

use std::collections::HashSet;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use foldnet::regions::BoundingBox;
use foldnet::Point2;

pub struct Document {
    width: u32,
    height: u32,
    body: String,
}

/// A rectangle of the canvas showing `view`, with y pointing up.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub left: f64,
    pub top: f64,
    pub size: f64,
    pub view: BoundingBox,
}

impl Panel {
    /// Largest square panel centred in the given pixel rectangle. The view
    /// is widened along one axis so the aspect ratio is preserved.
    pub fn fit(left: f64, top: f64, w: f64, h: f64, view: BoundingBox) -> Panel {
        let size = w.min(h);
        let span = view.width().max(view.height());
        let cx = (view.x0 + view.x1) / 2.0;
        let cy = (view.y0 + view.y1) / 2.0;
        let view = BoundingBox {
            x0: cx - span / 2.0,
            y0: cy - span / 2.0,
            x1: cx + span / 2.0,
            y1: cy + span / 2.0,
        };
        Panel { left: left + (w - size) / 2.0, top: top + (h - size) / 2.0, size, view }
    }

    pub fn px(&self, p: Point2) -> (f64, f64) {
        let sx = self.size / self.view.width();
        let sy = self.size / self.view.height();
        (self.left + (p.x - self.view.x0) * sx, self.top + (self.view.y1 - p.y) * sy)
    }

}

fn points_attr(panel: &Panel, pts: &[Point2]) -> String {
    let mut s = String::with_capacity(pts.len() * 16);
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = panel.px(*p);
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Document {
    pub fn new(width: u32, height: u32) -> Self {
        let mut body = String::new();
        let _ = writeln!(body, r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##);
        Document { width, height, body }
    }

    pub fn width(&self) -> f64 {
        self.width as f64
    }

    pub fn height(&self) -> f64 {
        self.height as f64
    }

    /// Closed path through `pts`; one `L` command per vertex after the first.
    pub fn closed_path(&mut self, panel: &Panel, pts: &[Point2], class: &str, fill: &str, stroke: &str) {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = panel.px(*p);
            let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            self.body,
            r#"<path class="{class}" d="{d}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }

    pub fn polygon(&mut self, panel: &Panel, pts: &[Point2], class: &str, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<polygon class="{class}" points="{}" fill="{fill}" stroke="{stroke}" stroke-width="0.5"/>"#,
            points_attr(panel, pts)
        );
    }

    pub fn polyline(&mut self, panel: &Panel, pts: &[Point2], class: &str, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            points_attr(panel, pts)
        );
    }

    pub fn line(&mut self, panel: &Panel, a: Point2, b: Point2, class: &str, stroke: &str, width: f64) {
        let (x1, y1) = panel.px(a);
        let (x2, y2) = panel.px(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    /// Marker of fixed pixel radius.
    pub fn dot(&mut self, panel: &Panel, c: Point2, r_px: f64, class: &str, fill: &str) {
        let (cx, cy) = panel.px(c);
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{cx:.2}" cy="{cy:.2}" r="{r_px:.2}" fill="{fill}"/>"#
        );
    }

    pub fn rect_outline(&mut self, panel: &Panel, class: &str) {
        let _ = writeln!(
            self.body,
            r##"<rect class="{class}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999999"/>"##,
            panel.left, panel.top, panel.size, panel.size
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, class: &str, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text class="{class}" x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="{size:.1}">{}</text>"#,
            escape(text)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// `count` pairwise distinct fill colours, reproducible from `seed`.
/// Channels stay in 64..=240 so fills are neither black nor white.
pub fn distinct_colors(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let rgb: [u8; 3] = [rng.gen_range(64..=240), rng.gen_range(64..=240), rng.gen_range(64..=240)];
        if seen.insert(rgb) {
            out.push(format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]));
        }
    }
    out
}

/// Rectangle for panel `i` of a `cols`-wide grid below a title strip.
pub fn grid_cell(doc: &Document, i: usize, n: usize, title: f64) -> (f64, f64, f64, f64) {
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols).max(1);
    let w = doc.width() / cols as f64;
    let h = (doc.height() - title) / rows as f64;
    let (r, c) = (i / cols, i % cols);
    (c as f64 * w, title + r as f64 * h, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colors_are_distinct_and_seeded() {
        let a = distinct_colors(2000, 3);
        let set: HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 2000);
        assert_eq!(a, distinct_colors(2000, 3));
        assert_ne!(a[..5], distinct_colors(5, 4)[..]);
    }

    #[test]
    fn panel_flips_y() {
        let p = Panel::fit(0.0, 0.0, 100.0, 100.0, BoundingBox::default());
        assert_eq!(p.px(Point2::new(-2.0, 2.0)), (0.0, 0.0));
        assert_eq!(p.px(Point2::new(2.0, -2.0)), (100.0, 100.0));
    }

    #[test]
    fn text_is_escaped() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
