//! Minimal SVG 1.1 line plots.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#c0392b", "#2c3e50", "#2980b9", "#27ae60", "#8e44ad", "#d35400"];
const MARGIN: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct Line {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub width: f64,
    /// Index into the palette; raw and fitted versions of a series share it.
    pub color: usize,
    pub opacity: f64,
}

pub fn render(title: &str, lines: &[Line], width: u32, height: u32) -> String {
    let (w, h) = (f64::from(width), f64::from(height));
    let finite = |v: &&f64| v.is_finite();
    let bounds = |sel: fn(&Line) -> &Vec<f64>| {
        let all = || lines.iter().flat_map(|l| sel(l).iter()).filter(finite);
        let lo = all().copied().fold(f64::INFINITY, f64::min);
        let hi = all().copied().fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (x0, x1) = bounds(|l| &l.x);
    let (y0, y1) = bounds(|l| &l.y);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (w - 2.0 * MARGIN);
    let py = |y: f64| h - MARGIN - (y - y0) / (y1 - y0) * (h - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{m}" y="{m}" width="{:.1}" height="{:.1}" fill="none" stroke="#999" stroke-width="1"/>"##,
        w - 2.0 * MARGIN,
        h - 2.0 * MARGIN,
        m = MARGIN
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{m}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#ccc" stroke-width="1"/>"##,
            w - MARGIN,
            m = MARGIN,
            y = py(0.0)
        );
    }
    let label = |svg: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
            escape(&text)
        );
    };
    label(&mut svg, MARGIN, h - MARGIN + 15.0, "start", format!("{x0:.4}"));
    label(&mut svg, w - MARGIN, h - MARGIN + 15.0, "end", format!("{x1:.4}"));
    label(&mut svg, MARGIN - 4.0, h - MARGIN, "end", format!("{y0:.3}"));
    label(&mut svg, MARGIN - 4.0, MARGIN + 8.0, "end", format!("{y1:.3}"));
    label(&mut svg, w / 2.0, MARGIN - 14.0, "middle", title.to_string());

    for line in lines {
        let mut points = String::new();
        for (x, y) in line.x.iter().zip(&line.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(*x), py(*y));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="{}" stroke-opacity="{}" points="{}"><title>{}</title></polyline>"#,
            PALETTE[line.color % PALETTE.len()],
            line.width,
            line.opacity,
            points.trim_end(),
            escape(&line.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
