use std::fmt::Write as _;
use std::path::Path;

use super::engine::{RunTrace, TraceRow};
use super::export::CSV_COLUMNS;
use crate::{Error, Result};

const PANEL_WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 180.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 30.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

struct Series {
    label: String,
    column: String,
    dashed: bool,
    color: &'static str,
}

/// Named channel groups; every CSV column is also a valid channel.
const GROUPS: [&str; 8] = ["x_C", "span", "yaw", "x_A", "x_B", "thrust", "attitude_A", "attitude_B"];

pub fn valid_channels() -> Vec<String> {
    GROUPS.iter().chain(CSV_COLUMNS[1..].iter()).map(|s| s.to_string()).collect()
}

fn series(column: &str, dashed: bool, color: &'static str) -> Series {
    Series { label: column.to_string(), column: column.to_string(), dashed, color }
}

fn expand(channel: &str) -> Option<Vec<Series>> {
    let triple = |cols: [&str; 3], desired: Option<[&str; 3]>| {
        let mut out: Vec<Series> = cols.iter().zip(COLORS).map(|(c, col)| series(c, false, col)).collect();
        if let Some(d) = desired {
            out.extend(d.iter().zip(COLORS).map(|(c, col)| series(c, true, col)));
        }
        out
    };
    Some(match channel {
        "x_C" => triple(["xC_x", "xC_y", "xC_z"], Some(["xCd_x", "xCd_y", "xCd_z"])),
        "x_A" => triple(["xA_x", "xA_y", "xA_z"], None),
        "x_B" => triple(["xB_x", "xB_y", "xB_z"], None),
        "span" => vec![series("span", false, COLORS[0]), series("span_d", true, COLORS[0])],
        "yaw" => vec![series("psi", false, COLORS[0]), series("psi_d", true, COLORS[0])],
        "thrust" => vec![series("fA", false, COLORS[0]), series("fB", false, COLORS[1])],
        "attitude_A" => triple(["rollA", "pitchA", "yawA"], None),
        "attitude_B" => triple(["rollB", "pitchB", "yawB"], None),
        col if CSV_COLUMNS[1..].contains(&col) => vec![series(col, false, COLORS[0])],
        _ => return None,
    })
}

fn value(row: &TraceRow, column: &str) -> f64 {
    row.column(column).unwrap_or(f64::NAN)
}

fn panel(svg: &mut String, trace: &RunTrace, title: &str, lines: &[Series], top: f64) {
    let (x0, x1) = (MARGIN_LEFT, PANEL_WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (top + MARGIN_TOP, top + PANEL_HEIGHT - MARGIN_BOTTOM);
    let t_min = trace.rows.first().map_or(0.0, |r| r.t);
    let t_max = trace.rows.last().map_or(1.0, |r| r.t).max(t_min + 1e-9);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in lines {
        for r in &trace.rows {
            let v = value(r, &s.column);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |t: f64| x0 + (t - t_min) / (t_max - t_min) * (x1 - x0);
    let py = |v: f64| y1 - (v - lo) / (hi - lo) * (y1 - y0);

    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888"/>"##,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(svg, r#"<text x="{x0:.1}" y="{:.1}" font-size="13">{title}</text>"#, y0 - 6.0);
    for (v, y) in [(hi, y0), (lo, y1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{v:.3}</text>"#,
            x0 - 4.0,
            y + 4.0
        );
    }
    for (t, x) in [(t_min, x0), (t_max, x1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{t:.1} s</text>"#,
            y1 + 14.0
        );
    }

    let mut legend_x = x0 + 120.0;
    for s in lines {
        let mut points = String::new();
        for r in &trace.rows {
            let v = value(r, &s.column);
            if v.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(r.t), py(v));
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2"{dash} points="{}"/>"#,
            s.color,
            points.trim_end()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{legend_x:.1}" y="{:.1}" font-size="10" fill="{}">{}</text>"#,
            y0 - 6.0,
            s.color,
            s.label
        );
        legend_x += 8.0 * s.label.len() as f64 + 12.0;
    }
}

/// Writes an SVG with one panel per channel; desired series are dashed.
pub fn plot(trace: &RunTrace, channels: &[&str], path: &Path) -> Result<()> {
    let mut panels = Vec::with_capacity(channels.len());
    for ch in channels {
        let lines = expand(ch).ok_or_else(|| Error::Channel { name: ch.to_string(), valid: valid_channels() })?;
        panels.push((*ch, lines));
    }
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_WIDTH}" height="{height}" viewBox="0 0 {PANEL_WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, (title, lines)) in panels.iter().enumerate() {
        panel(&mut svg, trace, title, lines, i as f64 * PANEL_HEIGHT);
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
