//! Standalone SVG of a decay curve: `ln P` against `n` on the left and
//! against `ln n` on the right, each with both fitted models.

use std::fmt::Write;

use lineperc_core::stats::{DecayFit, DecayModel};

const W: f64 = 420.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
    left: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        self.left + PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn span(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(hi > lo) {
        return (lo - 1.0, lo + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn panel(svg: &mut String, ax: &Axes, title: &str, xlabel: &str, pts: &[(f64, f64)], fit: Option<&DecayFit>, logx: bool) {
    let (l, t, r, b) = (ax.left + PAD, PAD, ax.left + W - PAD, H - PAD);
    let _ = writeln!(svg, r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{title}</text>"#, (l + r) / 2.0, t - 14.0);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{xlabel}</text>"#, (l + r) / 2.0, b + 34.0);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.1} {:.1})">ln P</text>"#,
        l - 34.0, (t + b) / 2.0, l - 34.0, (t + b) / 2.0
    );
    for (i, v) in [ax.x.0, ax.x.1].iter().enumerate() {
        let anchor = if i == 0 { "start" } else { "end" };
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}" font-size="10">{v:.2}</text>"#, ax.px(*v), b + 14.0);
    }
    for v in [ax.y.0, ax.y.1] {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{v:.2}</text>"#, l - 4.0, ax.py(v) + 3.0);
    }
    if let Some(fit) = fit {
        for (model, colour, dash) in [(DecayModel::Exponential, "#c03030", ""), (DecayModel::Power, "#3050c0", r#" stroke-dasharray="5,3""#)] {
            let mut d = String::new();
            for i in 0..=64 {
                let x = ax.x.0 + (ax.x.1 - ax.x.0) * i as f64 / 64.0;
                let n = if logx { x.exp() } else { x };
                if !(n > 0.0) {
                    continue;
                }
                let y = fit.predict(model, n).ln().clamp(ax.y.0, ax.y.1);
                let _ = write!(d, "{}{:.1},{:.1} ", if d.is_empty() { "M" } else { "L" }, ax.px(x), ax.py(y));
            }
            let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="{colour}"{dash}/>"#, d.trim_end());
        }
    }
    for &(n, p) in pts {
        let x = if logx { n.ln() } else { n };
        let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="black"/>"#, ax.px(x), ax.py(p.ln()));
    }
}

/// SVG document for the positive points of `curve`.
pub fn decay_svg(curve: &[(f64, f64)], fit: Option<&DecayFit>, title: &str) -> String {
    let pts: Vec<(f64, f64)> = curve.iter().copied().filter(|&(n, p)| n > 0.0 && p > 0.0).collect();
    let y = span(pts.iter().map(|p| p.1.ln()));
    let lin = Axes { x: span(pts.iter().map(|p| p.0)), y, left: 0.0 };
    let log = Axes { x: span(pts.iter().map(|p| p.0.ln())), y, left: W };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        2.0 * W, H + 20.0, 2.0 * W, H + 20.0
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="16" text-anchor="middle" font-size="14">{}</text>"#, W, escape(title));
    if pts.is_empty() {
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">no positive estimates</text>"#, W, H / 2.0);
    } else {
        panel(&mut svg, &lin, "log-linear", "n", &pts, fit, false);
        panel(&mut svg, &log, "log-log", "ln n", &pts, fit, true);
    }
    if let Some(f) = fit {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">exponential (solid) rate {:.4}, R² {:.4}; power (dashed) exponent {:.4}, R² {:.4}; preferred {:?}</text>"#,
            W, H + 12.0, f.exponential.rate, f.exponential.r_squared, f.power.rate, f.power.r_squared, f.preferred
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
