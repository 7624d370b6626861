//! Minimal SVG line plot of curves.

use std::fmt::Write;

use crate::metrics::Curve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Renders all curves on one axis pair; probabilities on a linear [0, 1]
/// axis, thresholds on a log axis when `log_x`.
pub fn render(curves: &[Curve], log_x: bool, x_label: &str) -> String {
    let xs: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.threshold))
        .filter(|&t| !log_x || t > 0.0)
        .collect();
    let (mut lo, mut hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(lo < hi) {
        lo = if lo.is_finite() { lo } else { 0.0 };
        hi = if log_x { lo.max(1e-300) * 10.0 } else { lo + 1.0 };
    }
    let fx = |x: f64| if log_x { x.log10() } else { x };
    let (flo, fhi) = (fx(lo), fx(hi));
    let px = |x: f64| LEFT + (fx(x) - flo) / (fhi - flo) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| TOP + (1.0 - y) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"##);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, py(0.0), py(1.0));
    let _ = writeln!(s, r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"##, x1 - x0, y0 - y1);
    for k in 0..=4 {
        let y = k as f64 / 4.0;
        let _ = writeln!(s, r##"<line x1="{x0}" x2="{x1}" y1="{0}" y2="{0}" stroke="#ddd"/>"##, py(y));
        let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="end">{y}</text>"##, x0 - 6.0, py(y) + 4.0);
    }
    for tick in x_ticks(lo, hi, log_x) {
        let x = px(tick);
        let _ = writeln!(s, r##"<line x1="{x}" x2="{x}" y1="{y1}" y2="{y0}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r##"<text x="{x}" y="{}" text-anchor="middle">{}</text>"##, y0 + 16.0, format_tick(tick));
    }
    let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"##, (x0 + x1) / 2.0, HEIGHT - 10.0);

    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .filter(|p| !log_x || p.threshold > 0.0)
            .map(|p| format!("{:.2},{:.2}", px(p.threshold), py(p.value)))
            .collect();
        let _ = writeln!(s, r##"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"##, pts.join(" "));
        let ly = TOP + 16.0 * i as f64 + 6.0;
        let _ = writeln!(s, r##"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"##, x1 + 10.0, x1 + 30.0);
        let _ = writeln!(s, r##"<text x="{}" y="{}">{}</text>"##, x1 + 35.0, ly + 4.0, escape(&c.label));
    }
    s.push_str("</svg>\n");
    s
}

fn x_ticks(lo: f64, hi: f64, log_x: bool) -> Vec<f64> {
    if log_x {
        let first = lo.log10().ceil() as i32;
        let last = hi.log10().floor() as i32;
        (first..=last).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=5).map(|k| lo + (hi - lo) * k as f64 / 5.0).collect()
    }
}

fn format_tick(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        format!("{x:e}")
    } else {
        format!("{}", (x * 1e6).round() / 1e6)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
