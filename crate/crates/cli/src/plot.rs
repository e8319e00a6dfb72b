//! Static SVG line charts for a finished run: outputs against the
//! reference, control commands, the scheduled filter diagonal, and the
//! tracking error, stacked in one self-contained document.

use anyhow::{anyhow, Context, Result};
use fuzzyl1_core::sim::Trace;
use std::fmt::Write as _;
use std::path::Path;

const PANEL_W: f64 = 880.0;
const PANEL_H: f64 = 180.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const PANEL_GAP: f64 = 58.0;
const TOP: f64 = 48.0;
/// Longest polyline emitted; denser traces are decimated by stride.
const MAX_POINTS: usize = 1200;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

struct Panel<'a> {
    title: &'a str,
    unit: &'a str,
    series: Vec<Series<'a>>,
}

/// Renders the four-panel chart as SVG text.
pub fn trace_to_svg(trace: &Trace, name: &str) -> Result<String> {
    if trace.rows.is_empty() {
        return Err(anyhow!("cannot plot an empty trace"));
    }
    let stride = trace.rows.len().div_ceil(MAX_POINTS).max(1);
    let pick = |f: &dyn Fn(&fuzzyl1_core::sim::TraceRow) -> f64| -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = trace
            .rows
            .iter()
            .step_by(stride)
            .map(|r| (r.t, f(r)))
            .collect();
        // Always keep the final sample so truncation points stay visible.
        let last = trace.rows.last().unwrap();
        if pts.last().map(|p| p.0) != Some(last.t) {
            pts.push((last.t, f(last)));
        }
        pts
    };

    let panels = [
        Panel {
            title: "outputs and reference",
            unit: "rad",
            series: vec![
                Series { label: "y1", color: "#1f77b4", dashed: false, points: pick(&|r| r.y[0]) },
                Series { label: "r1", color: "#1f77b4", dashed: true, points: pick(&|r| r.r[0]) },
                Series { label: "y2", color: "#d62728", dashed: false, points: pick(&|r| r.y[1]) },
                Series { label: "r2", color: "#d62728", dashed: true, points: pick(&|r| r.r[1]) },
            ],
        },
        Panel {
            title: "control commands",
            unit: "V",
            series: vec![
                Series { label: "u1", color: "#2ca02c", dashed: false, points: pick(&|r| r.u[0]) },
                Series { label: "u2", color: "#9467bd", dashed: false, points: pick(&|r| r.u[1]) },
            ],
        },
        Panel {
            title: "feedback-filter gain",
            unit: "",
            series: vec![
                Series { label: "K1", color: "#ff7f0e", dashed: false, points: pick(&|r| r.k_diag[0]) },
                Series { label: "K2", color: "#8c564b", dashed: true, points: pick(&|r| r.k_diag[1]) },
            ],
        },
        Panel {
            title: "tracking error",
            unit: "rad",
            series: vec![
                Series { label: "e1", color: "#1f77b4", dashed: false, points: pick(&|r| r.e[0]) },
                Series { label: "e2", color: "#d62728", dashed: false, points: pick(&|r| r.e[1]) },
            ],
        },
    ];

    let width = MARGIN_L + PANEL_W + MARGIN_R;
    let height = TOP + panels.len() as f64 * (PANEL_H + PANEL_GAP);
    let mut svg = String::with_capacity(1 << 16);
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = write!(
        svg,
        r#"<rect width="{width:.0}" height="{height:.0}" fill="white"/><text x="{:.0}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN_L + PANEL_W / 2.0,
        escape(name)
    );
    if trace.diverged {
        let _ = write!(
            svg,
            r##"<text x="{:.0}" y="42" font-size="12" fill="#b00" text-anchor="middle">run diverged; trace truncated</text>"##,
            MARGIN_L + PANEL_W / 2.0
        );
    }
    for (i, panel) in panels.iter().enumerate() {
        draw_panel(&mut svg, panel, TOP + i as f64 * (PANEL_H + PANEL_GAP));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn draw_panel(svg: &mut String, panel: &Panel, y0: f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut t0, mut t1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &panel.series {
        for &(t, v) in &s.points {
            lo = lo.min(v);
            hi = hi.max(v);
            t0 = t0.min(t);
            t1 = t1.max(t);
        }
    }
    if !(t1 > t0) {
        t1 = t0 + 1.0;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    lo -= pad;
    hi += pad;
    let sx = |t: f64| MARGIN_L + (t - t0) / (t1 - t0) * PANEL_W;
    let sy = |v: f64| y0 + PANEL_H - (v - lo) / (hi - lo) * PANEL_H;

    let _ = write!(
        svg,
        r##"<rect x="{MARGIN_L:.1}" y="{y0:.1}" width="{PANEL_W:.1}" height="{PANEL_H:.1}" fill="none" stroke="#999"/>"##
    );
    let title = if panel.unit.is_empty() {
        panel.title.to_string()
    } else {
        format!("{} [{}]", panel.title, panel.unit)
    };
    let _ = write!(
        svg,
        r#"<text x="{MARGIN_L:.1}" y="{:.1}" font-size="13">{}</text>"#,
        y0 - 8.0,
        escape(&title)
    );

    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = sy(v);
        let _ = write!(
            svg,
            r##"<line x1="{MARGIN_L:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eee"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"##,
            MARGIN_L + PANEL_W,
            MARGIN_L - 6.0,
            y + 3.0,
            tick(v)
        );
        let t = t0 + (t1 - t0) * k as f64 / 4.0;
        let x = sx(t);
        let _ = write!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            y0 + PANEL_H + 14.0,
            tick(t)
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">t [s]</text>"#,
        MARGIN_L + PANEL_W / 2.0,
        y0 + PANEL_H + 30.0
    );

    let mut legend_x = MARGIN_L + 10.0;
    for s in &panel.series {
        let mut pts = String::with_capacity(s.points.len() * 12);
        for &(t, v) in &s.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(t), sy(v));
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = write!(
            svg,
            r#"<polyline fill="none" stroke="{}"{dash} stroke-width="1.3" points="{}"/>"#,
            s.color,
            pts.trim_end()
        );
        let ly = y0 + 14.0;
        let _ = write!(
            svg,
            r#"<line x1="{legend_x:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}"{dash} stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            legend_x + 18.0,
            s.color,
            legend_x + 22.0,
            ly + 4.0,
            escape(s.label)
        );
        legend_x += 60.0;
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the chart to `path`.
pub fn emit_plot(trace: &Trace, name: &str, path: &Path) -> Result<()> {
    let svg = trace_to_svg(trace, name)?;
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}
