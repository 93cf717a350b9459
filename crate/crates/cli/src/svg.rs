//! Deterministic SVG Kruskal diagrams: singularities, horizons, and leaves
//! colored by mean curvature.

use std::fmt::Write;

use kruskal_cmc::Sample;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 640.0;
const PAD: f64 = 40.0;
const CURVE_POINTS: usize = 201;

const NEGATIVE: [f64; 3] = [33.0, 102.0, 172.0];
const NEUTRAL: [f64; 3] = [170.0, 170.0, 170.0];
const POSITIVE: [f64; 3] = [178.0, 24.0, 43.0];

/// One slice to draw, ordered by `X`. Samples on `X >= 0` alone are mirrored.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotLeaf {
    pub c: f64,
    pub h: f64,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View {
    pub m: f64,
    pub x_range: f64,
    pub t_range: f64,
}

impl View {
    pub fn new(m: f64, x_range: f64) -> Self {
        Self {
            m,
            x_range,
            t_range: x_range,
        }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x + self.x_range) / (2.0 * self.x_range) * (WIDTH - 2.0 * PAD)
    }

    fn py(&self, t: f64) -> f64 {
        // Keep far-off points finite; the clip path hides them anyway.
        let t = t.clamp(-10.0 * self.t_range, 10.0 * self.t_range);
        HEIGHT - PAD - (t + self.t_range) / (2.0 * self.t_range) * (HEIGHT - 2.0 * PAD)
    }

    fn point(&self, x: f64, t: f64) -> String {
        format!("{:.3},{:.3}", self.px(x), self.py(t))
    }
}

/// Symmetric-log position of `h` in `[-1, 1]` relative to `h_max > 0`.
pub fn diverging_position(h: f64, h_max: f64, m: f64) -> f64 {
    if h == 0.0 || h_max == 0.0 {
        return 0.0;
    }
    let h0 = 1.0 / m;
    let u = (h.abs() / h0).ln_1p() / (h_max / h0).ln_1p();
    u.min(1.0).copysign(h)
}

pub fn diverging_color(u: f64) -> String {
    let (end, w) = if u < 0.0 { (NEGATIVE, -u) } else { (POSITIVE, u) };
    let ch = |k: usize| (NEUTRAL[k] + (end[k] - NEUTRAL[k]) * w).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

fn polyline(out: &mut String, id: &str, class: &str, points: &[String], extra: &str) {
    let _ = writeln!(
        out,
        r#"    <polyline id="{id}" class="{class}" points="{}"{extra}/>"#,
        points.join(" ")
    );
}

/// `T = ±sqrt(X^2 + 2M)`: where `(r - 2M) e^(r/2M) = X^2 - T^2` reaches `r = 0`.
fn singularity(view: &View, sign: f64) -> Vec<String> {
    (0..CURVE_POINTS)
        .map(|i| {
            let x = -view.x_range + 2.0 * view.x_range * i as f64 / (CURVE_POINTS - 1) as f64;
            view.point(x, sign * (x * x + 2.0 * view.m).sqrt())
        })
        .collect()
}

fn mirrored(view: &View, samples: &[Sample]) -> Vec<String> {
    if samples.first().is_some_and(|q| q.x < 0.0) {
        return samples.iter().map(|q| view.point(q.x, q.t)).collect();
    }
    let left = samples.iter().rev().filter(|q| q.x > 0.0).map(|q| view.point(-q.x, q.t));
    let right = samples.iter().map(|q| view.point(q.x, q.t));
    left.chain(right).collect()
}

pub fn render(view: &View, leaves: &[PlotLeaf]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"  <defs><clipPath id="plot-area"><rect x="{PAD}" y="{PAD}" width="{}" height="{}"/></clipPath></defs>"#,
        WIDTH - 2.0 * PAD,
        HEIGHT - 2.0 * PAD
    );
    let _ = writeln!(out, r#"  <rect id="background" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let _ = writeln!(out, r##"  <g id="axes" stroke="#dddddd" stroke-width="1">"##);
    let _ = writeln!(
        out,
        r#"    <line id="axis-X" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
        view.px(-view.x_range),
        view.py(0.0),
        view.px(view.x_range),
        view.py(0.0)
    );
    let _ = writeln!(
        out,
        r#"    <line id="axis-T" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
        view.px(0.0),
        view.py(-view.t_range),
        view.px(0.0),
        view.py(view.t_range)
    );
    let _ = writeln!(out, "  </g>");

    let _ = writeln!(
        out,
        r#"  <g id="horizons" clip-path="url(#plot-area)" stroke="black" stroke-width="1" stroke-dasharray="6,4">"#
    );
    let r = view.x_range.max(view.t_range);
    for (id, s) in [("horizon-future", 1.0), ("horizon-past", -1.0)] {
        let _ = writeln!(
            out,
            r#"    <line id="{id}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            view.px(-r),
            view.py(-s * r),
            view.px(r),
            view.py(s * r)
        );
    }
    let _ = writeln!(out, "  </g>");

    let _ = writeln!(
        out,
        r#"  <g id="singularities" clip-path="url(#plot-area)" fill="none" stroke="black" stroke-width="2">"#
    );
    polyline(&mut out, "singularity-future", "singularity", &singularity(view, 1.0), "");
    polyline(&mut out, "singularity-past", "singularity", &singularity(view, -1.0), "");
    let _ = writeln!(out, "  </g>");

    let h_max = leaves.iter().map(|l| l.h.abs()).fold(0.0, f64::max);
    let _ = writeln!(
        out,
        r#"  <g id="leaves" clip-path="url(#plot-area)" fill="none" stroke-width="1.2">"#
    );
    for (i, leaf) in leaves.iter().enumerate() {
        let color = diverging_color(diverging_position(leaf.h, h_max, view.m));
        let extra = format!(r#" stroke="{color}" data-c="{:e}" data-H="{:e}""#, leaf.c, leaf.h);
        polyline(&mut out, &format!("leaf-{i:03}"), "leaf", &mirrored(view, &leaf.samples), &extra);
    }
    let _ = writeln!(out, "  </g>");

    let _ = writeln!(
        out,
        r#"  <text id="caption" x="{PAD}" y="{:.3}" font-family="sans-serif" font-size="12">{} leaves, |H| up to {:e}; M = {}</text>"#,
        HEIGHT - PAD / 3.0,
        leaves.len(),
        h_max,
        view.m
    );
    let _ = writeln!(out, "</svg>");
    out
}
