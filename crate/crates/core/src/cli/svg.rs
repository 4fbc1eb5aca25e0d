//! Log-log scatter plots rendered from result CSVs.
//!
//! The plot depends only on the CSV text, so regenerating it from the same
//! file gives the same bytes.

use std::fmt::Write;

use super::csv::{self, ResultRow};
use super::CliError;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Horizontal coordinate of a row: the horizon `t`, else the offset `s`.
fn abscissa(r: &ResultRow) -> Option<f64> {
    r.t.or(r.s)
}

/// Series keyed by row kind, in order of first appearance.
fn series(rows: &[ResultRow]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let Some(x) = abscissa(r) else { continue };
        if !(x > 0.0 && r.estimate > 0.0 && x.is_finite() && r.estimate.is_finite()) {
            continue;
        }
        let key = format!("{}:{}", r.experiment, r.kind);
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push((x.log10(), r.estimate.log10())),
            None => out.push((key, vec![(x.log10(), r.estimate.log10())])),
        }
    }
    out
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Renders the CSV's plottable rows (positive estimate and positive `t` or `s`).
pub fn svg_from_csv(text: &str) -> Result<String, CliError> {
    let rows = csv::parse(text)?;
    let data = series(&rows);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    if data.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">no plottable rows</text>"#,
            LEFT + 10.0,
            TOP + 20.0
        );
        svg.push_str("</svg>\n");
        return Ok(svg);
    }
    let all = data.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    // leave room for the guide line
    let (gx, gy) = data[0].1[0];
    y0 = y0.min(gy - (x1 - gx));
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    for e in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = px(e as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ccc"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    for e in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = py(e as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t (or s)</text>"#,
        LEFT + pw / 2.0,
        H - 12.0
    );

    // slope −1 guide through the first point
    let (ga, gb) = (x0.max(gx - (y1 - gy)), x1.min(gx + (gy - y0)));
    let _ = writeln!(
        svg,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#777" stroke-dasharray="5,4"/>"##,
        px(ga),
        py(gy - (ga - gx)),
        px(gb),
        py(gy - (gb - gx))
    );

    for (i, (name, pts)) in data.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = TOP + 14.0 * (i as f64 + 1.0);
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<circle cx="{lx:.2}" cy="{:.2}" r="3.5" fill="{color}"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 8.0,
            escape(name)
        );
    }
    let ly = TOP + 14.0 * (data.len() as f64 + 1.0);
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{ly:.2}" fill="#777">dashed: slope -1</text>"##,
        LEFT + pw + 12.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
