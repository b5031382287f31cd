//! Plain SVG renderings of toolpaths and line charts.

use std::fmt::Write as _;

use lpbf_core::geometry::BoundingBox;
use lpbf_core::{PolygonDomain, Toolpath};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Toolpath drawing: laser-on moves solid, laser-off moves dashed, the
/// start marked with a dot. The domain outline is drawn when given.
pub fn toolpath_svg(path: &Toolpath, domain: Option<&PolygonDomain>, title: &str) -> String {
    let size = 600.0;
    let margin = 30.0;
    let mut pts: Vec<_> = path.moves.iter().map(|m| m.pos).collect();
    if let Some(d) = domain {
        pts.extend_from_slice(d.vertices());
    }
    let bb = BoundingBox::of(&pts).unwrap_or(BoundingBox {
        min: lpbf_core::Point2::new(0.0, 0.0),
        max: lpbf_core::Point2::new(1.0, 1.0),
    });
    let span = bb.width().max(bb.height()).max(1e-9);
    let scale = (size - 2.0 * margin) / span;
    let map = |p: lpbf_core::Point2| (margin + (p.x - bb.min.x) * scale, size - margin - (p.y - bb.min.y) * scale);
    let stroke = (path.hatch * scale * 0.35).clamp(0.3, 3.0);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" viewBox="0 0 {size} {}">"#, size + 20.0, size + 20.0).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{margin}" y="18" font-family="sans-serif" font-size="14">{}</text>"#, escape(title)).unwrap();
    if let Some(d) = domain {
        let ring: Vec<String> = d.vertices().iter().map(|&p| {
            let (x, y) = map(p);
            format!("{x:.2},{y:.2}")
        }).collect();
        writeln!(s, r##"<polygon points="{}" fill="none" stroke="#999" stroke-width="1"/>"##, ring.join(" ")).unwrap();
    }
    for w in path.moves.windows(2) {
        let (x1, y1) = map(w[0].pos);
        let (x2, y2) = map(w[1].pos);
        if w[1].laser_on() {
            writeln!(s, r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#c0392b" stroke-width="{stroke:.2}" stroke-linecap="round"/>"##).unwrap();
        } else {
            writeln!(s, r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#2471a3" stroke-width="0.8" stroke-dasharray="3,3"/>"##).unwrap();
        }
    }
    if let Some(first) = path.moves.first() {
        let (x, y) = map(first.pos);
        writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#27ae60"/>"##).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Horizontal dashed reference line in the series colour.
    pub mean_line: Option<f64>,
    /// Marker (downward triangle) in the series colour.
    pub marker: Option<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points, mean_line: None, marker: None }
    }
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= n as f64).unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() * step;
    (0..=n * 2).map(|k| start + k as f64 * step).take_while(|v| *v <= hi + 1e-9 * span).collect()
}

/// Line chart with axes, ticks and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (800.0, 420.0);
    let (left, right, top, bottom) = (70.0, 160.0, 40.0, 50.0);
    let all = series.iter().flat_map(|s| {
        s.points.iter().copied().chain(s.marker).chain(s.mean_line.map(|m| (f64::NAN, m)))
    });
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        if x.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        if y.is_finite() {
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    let pad = ((y1 - y0) * 0.05).max(1e-9);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let mx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let my = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{left}" y="24" font-family="sans-serif" font-size="15">{}</text>"#, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for t in nice_ticks(x0, x1, 8) {
        let x = mx(t);
        writeln!(s, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, top, top + ph).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, top + ph + 16.0, fmt_tick(t)).unwrap();
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = my(t);
        writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, fmt_tick(t)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 10.0, escape(x_label)).unwrap();
    writeln!(s, r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, top + ph / 2.0, top + ph / 2.0, escape(y_label)).unwrap();
    for (k, ser) in series.iter().enumerate() {
        let c = color(k);
        if ser.points.len() > 1 {
            let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", mx(x), my(y))).collect();
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1"/>"#, pts.join(" ")).unwrap();
        } else if let Some(&(x, y)) = ser.points.first() {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, mx(x), my(y)).unwrap();
        }
        if let Some(m) = ser.mean_line {
            writeln!(s, r#"<line x1="{left}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{c}" stroke-width="1.5" stroke-dasharray="6,4"/>"#, my(m), left + pw, my(m)).unwrap();
        }
        if let Some((x, y)) = ser.marker {
            let (px, py) = (mx(x), my(y));
            writeln!(s, r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}"/>"#, px - 6.0, py - 10.0, px + 6.0, py - 10.0, px, py).unwrap();
        }
        let ly = top + 16.0 + 18.0 * k as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, left + pw + 12.0, left + pw + 36.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#, left + pw + 42.0, ly + 4.0, escape(&ser.name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}
