//! Minimal standalone SVG charts.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARKERS: [&str; 4] = ["circle", "square", "diamond", "triangle"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= count as f64).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (v, lo, hi) = if self.log_y { (y.log10(), self.y.0.log10(), self.y.1.log10()) } else { (y, self.y.0, self.y.1) };
        H - BOTTOM - (v - lo) / (hi - lo) * (H - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn axes(svg: &mut String, f: &Frame, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + W - RIGHT) / 2.0, escape(title));
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(svg, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
    for t in nice_ticks(f.x.0, f.x.1, 8) {
        let x = f.px(t);
        let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{y1}" x2="{x:.1}" y2="{}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, y1 + 18.0, fmt_tick(t));
    }
    let yticks = if f.log_y {
        let (a, b) = (f.y.0.log10().ceil() as i32, f.y.1.log10().floor() as i32);
        (a..=b).map(|e| 10f64.powi(e)).collect()
    } else {
        nice_ticks(f.y.0, f.y.1, 6)
    };
    for t in yticks {
        let y = f.py(t);
        let _ = writeln!(svg, r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#ddd"/>"##);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn marker(svg: &mut String, kind: &str, x: f64, y: f64, color: &str) {
    match kind {
        "square" => {
            let _ = writeln!(svg, r#"<rect x="{:.1}" y="{:.1}" width="7" height="7" fill="{color}"/>"#, x - 3.5, y - 3.5);
        }
        "diamond" => {
            let _ = writeln!(svg, r#"<path d="M{x:.1} {:.1} l4 4 l-4 4 l-4 -4 z" fill="{color}"/>"#, y - 4.0);
        }
        "triangle" => {
            let _ = writeln!(svg, r#"<path d="M{x:.1} {:.1} l4 7 l-8 0 z" fill="{color}"/>"#, y - 4.0);
        }
        _ => {
            let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3.5" fill="{color}"/>"#);
        }
    }
}

fn legend(svg: &mut String, labels: &[&str]) {
    for (i, l) in labels.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let c = COLORS[i % COLORS.len()];
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{c}" stroke-width="2"/>"#, x + 20.0);
        marker(svg, MARKERS[i % MARKERS.len()], x + 10.0, y, c);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, x + 26.0, y + 4.0, escape(l));
    }
}

/// Lines with markers; points with non-finite `y` (or `y ≤ 0` on a log
/// axis) break the line.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let usable = |y: f64| y.is_finite() && (!log_y || y > 0.0);
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).filter(|p| usable(p.1)).collect();
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (xlo, xhi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (ylo, yhi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (xlo, xhi) = if xlo.is_finite() { padded(xlo, xhi) } else { (0.0, 1.0) };
    let y = if !ylo.is_finite() {
        if log_y { (0.1, 10.0) } else { (0.0, 1.0) }
    } else if log_y {
        let (a, b) = (ylo.log10().floor(), yhi.log10().ceil());
        (10f64.powf(a), 10f64.powf(if b > a { b } else { a + 1.0 }))
    } else {
        padded(ylo, yhi)
    };
    let f = Frame { x: (xlo, xhi), y, log_y };
    let mut svg = String::new();
    axes(&mut svg, &f, title, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if usable(y) {
                let _ = write!(d, "{}{:.1} {:.1} ", if pen_down { "L" } else { "M" }, f.px(x), f.py(y));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        if !d.is_empty() {
            let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, d.trim_end());
        }
        for &(x, y) in s.points.iter().filter(|p| usable(p.1)) {
            marker(&mut svg, MARKERS[i % MARKERS.len()], f.px(x), f.py(y), c);
        }
    }
    let labels: Vec<&str> = series.iter().map(|s| s.label.as_str()).collect();
    legend(&mut svg, &labels);
    svg.push_str("</svg>\n");
    svg
}

/// Grouped bars over shared bins `[lo, hi)`; `groups[g].1[b]` is the height
/// of group `g` in bin `b`.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bins: &[(f64, f64)], groups: &[(String, Vec<f64>)]) -> String {
    let (xlo, xhi) = match (bins.first(), bins.last()) {
        (Some(a), Some(b)) => (a.0, b.1),
        _ => (0.0, 1.0),
    };
    let ymax = groups.iter().flat_map(|g| g.1.iter().copied()).fold(0.0, f64::max);
    let f = Frame { x: (xlo, xhi), y: (0.0, if ymax > 0.0 { 1.05 * ymax } else { 1.0 }), log_y: false };
    let mut svg = String::new();
    axes(&mut svg, &f, title, x_label, y_label);
    let n = groups.len().max(1) as f64;
    for (gi, (_, heights)) in groups.iter().enumerate() {
        let c = COLORS[gi % COLORS.len()];
        for (&(lo, hi), &h) in bins.iter().zip(heights) {
            if h <= 0.0 {
                continue;
            }
            let width = (f.px(hi) - f.px(lo)) * 0.9 / n;
            let x = f.px(lo) + (f.px(hi) - f.px(lo)) * 0.05 + gi as f64 * width;
            let top = f.py(h);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.1}" y="{top:.1}" width="{width:.1}" height="{:.1}" fill="{c}"/>"#,
                f.py(0.0) - top
            );
        }
    }
    let labels: Vec<&str> = groups.iter().map(|g| g.0.as_str()).collect();
    legend(&mut svg, &labels);
    svg.push_str("</svg>\n");
    svg
}
