//! Minimal SVG plots.

use std::fmt::Write as _;

use menli_core::evalstats::SweepCurve;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 52.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Frame {
        let span = |vals: Vec<f64>| {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = ((hi - lo) * 0.05).max(1e-3);
            (lo - pad, hi + pad)
        };
        Frame { x: span(points.iter().map(|p| p.0).collect()), y: span(points.iter().map(|p| p.1).collect()) }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, f: &Frame, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title));
    let (x0, x1, y0, y1) = (PAD, W - PAD, H - PAD, PAD);
    let _ = writeln!(out, r#"<path d="M{x0},{y1} V{y0} H{x1}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#, f.px(xv), y0 + 16.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#, x0 - 4.0, f.py(yv) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

/// Accuracy against correlation along the weight grid, best weight in red.
pub fn sweep_svg(curve: &SweepCurve) -> String {
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.correlation, p.accuracy)).collect();
    let f = Frame::fit(&pts);
    let mut out = String::new();
    open(&mut out, &f, &format!("{} + {}", curve.nli_metric, curve.base_metric), "correlation", "adversarial accuracy");
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", f.px(x), f.py(y))).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, path.join(" "));
    for p in &curve.points {
        let best = (p.w_nli - curve.best_w).abs() < 1e-12;
        let (cx, cy) = (f.px(p.correlation), f.py(p.accuracy));
        let fill = if best { "crimson" } else { "steelblue" };
        let _ = writeln!(out, r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="3" fill="{fill}"/>"#);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="9">{:.1}</text>"#, cx + 4.0, cy - 4.0, p.w_nli);
    }
    out.push_str("</svg>\n");
    out
}

pub fn scatter_svg(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let f = Frame::fit(points);
    let mut out = String::new();
    open(&mut out, &f, title, xlabel, ylabel);
    for &(x, y) in points {
        let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="2" fill="steelblue" fill-opacity="0.6"/>"#, f.px(x), f.py(y));
    }
    out.push_str("</svg>\n");
    out
}
