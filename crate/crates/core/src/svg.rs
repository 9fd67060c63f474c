//! Minimal self-contained SVG line charts.

use std::fmt::Write as _;

use crate::error::{Result, WhipError};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    /// Extra line of text under the title, e.g. a fitted slope.
    pub annotation: Option<String>,
    pub width: f64,
    pub height: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            title: String::new(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_log: false,
            annotation: None,
            width: 640.0,
            height: 420.0,
        }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 50.0, 60.0); // left, right, top, bottom

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo > 1e-12 * hi.abs().max(1.0) {
        (lo, hi)
    } else {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

/// Renders the series as an SVG document. In log-log mode points with a
/// non-positive coordinate are dropped.
pub fn emit_svg(series: &[Series], options: &ChartOptions) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(WhipError::Invalid("cannot plot an empty series".into()));
    }
    let map = |(x, y): (f64, f64)| -> Option<(f64, f64)> {
        if options.log_log {
            (x > 0.0 && y > 0.0).then(|| (x.log10(), y.log10()))
        } else {
            Some((x, y))
        }
    };
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).filter_map(|&p| map(p)).collect())
        .collect();
    if mapped.iter().all(|m| m.is_empty()) {
        return Err(WhipError::Invalid("no plottable points".into()));
    }
    let (x0, x1) = range(mapped.iter().flatten().map(|p| p.0));
    let (y0, y1) = range(mapped.iter().flatten().map(|p| p.1));
    let (w, h) = (options.width, options.height);
    let (ml, mr, mt, mb) = MARGIN;
    let pw = w - ml - mr;
    let ph = h - mt - mb;
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&options.title)
    );
    if let Some(note) = &options.annotation {
        let _ = writeln!(out, r#"<text x="{}" y="38" text-anchor="middle">{}</text>"#, w / 2.0, escape(note));
    }
    let _ = writeln!(
        out,
        r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for t in 0..=4 {
        let fx = x0 + (x1 - x0) * t as f64 / 4.0;
        let fy = y0 + (y1 - y0) * t as f64 / 4.0;
        let (sx, sy) = (px(fx), py(fy));
        let _ = writeln!(
            out,
            r##"<line x1="{sx:.2}" y1="{:.2}" x2="{sx:.2}" y2="{:.2}" stroke="#333"/><text x="{sx:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            mt + ph,
            mt + ph + 5.0,
            mt + ph + 18.0,
            fmt_tick(fx, options.log_log && (fx - fx.round()).abs() < 1e-9)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{sy:.2}" x2="{ml}" y2="{sy:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            ml - 5.0,
            ml - 8.0,
            sy + 4.0,
            fmt_tick(fy, options.log_log && (fy - fy.round()).abs() < 1e-9)
        );
    }
    let axis = |label: &str| {
        if options.log_log {
            format!("log10 {label}")
        } else {
            label.to_string()
        }
    };
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        h - 15.0,
        escape(&axis(&options.x_label))
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(&axis(&options.y_label))
    );
    for (idx, (s, pts)) in series.iter().zip(&mapped).enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        if pts.len() <= 16 {
            for &(x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
            }
        }
        let ly = mt + 14.0 + 16.0 * idx as f64;
        let lx = ml + pw - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
