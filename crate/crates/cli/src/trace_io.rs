//! Trace serialization: CSV emission/parsing and the JSON metadata sidecar.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! `parse(emit(trace))` reproduces every sample bit for bit.

use anyhow::{anyhow, Context, Result};
use fuzzyl1_core::sim::{Trace, TraceRow};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Column header of a trace CSV: time, plant state, predictor state,
/// outputs, reference, error, control, filter diagonal, and the sixteen
/// adaptive estimates (input-gain rows, matched/unmatched state-norm
/// gains, matched/unmatched disturbances).
pub const CSV_HEADER: &str = "t,x1,x2,x3,x4,x5,x6,xh1,xh2,xh3,xh4,xh5,xh6,\
y1,y2,r1,r2,e1,e2,u1,u2,K1,K2,\
om11,om12,om21,om22,th11,th12,th21,th22,th23,th24,\
sg11,sg12,sg21,sg22,sg23,sg24";

/// Number of columns in a trace CSV row.
pub const CSV_COLUMNS: usize = 39;

/// Renders a trace as CSV text (header plus one line per sample).
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &trace.rows {
        write_row(&mut out, row);
    }
    out
}

fn write_row(out: &mut String, row: &TraceRow) {
    let mut fields = Vec::with_capacity(CSV_COLUMNS);
    fields.push(row.t);
    fields.extend_from_slice(&row.x);
    fields.extend_from_slice(&row.x_hat);
    fields.extend_from_slice(&row.y);
    fields.extend_from_slice(&row.r);
    fields.extend_from_slice(&row.e);
    fields.extend_from_slice(&row.u);
    fields.extend_from_slice(&row.k_diag);
    fields.extend_from_slice(&row.estimates);
    debug_assert_eq!(fields.len(), CSV_COLUMNS);
    for (i, v) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// Writes a trace CSV to `path`.
pub fn emit_csv(trace: &Trace, path: &Path) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace))
        .with_context(|| format!("writing {}", path.display()))
}

/// Parses CSV text produced by [`trace_to_csv`] back into sample rows.
pub fn parse_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty trace CSV"))?;
    if header != CSV_HEADER {
        return Err(anyhow!("unrecognized trace CSV header"));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut vals = [0.0f64; CSV_COLUMNS];
        let mut n = 0;
        for field in line.split(',') {
            if n == CSV_COLUMNS {
                n += 1;
                break;
            }
            vals[n] = field
                .parse::<f64>()
                .map_err(|e| anyhow!("line {}: bad number {field:?}: {e}", lineno + 2))?;
            n += 1;
        }
        if n != CSV_COLUMNS {
            return Err(anyhow!(
                "line {}: expected {CSV_COLUMNS} fields",
                lineno + 2
            ));
        }
        let take = |lo: usize, len: usize| -> &[f64] { &vals[lo..lo + len] };
        let mut row = TraceRow {
            t: vals[0],
            x: [0.0; 6],
            x_hat: [0.0; 6],
            y: [0.0; 2],
            r: [0.0; 2],
            e: [0.0; 2],
            u: [0.0; 2],
            k_diag: [0.0; 2],
            estimates: [0.0; 16],
        };
        row.x.copy_from_slice(take(1, 6));
        row.x_hat.copy_from_slice(take(7, 6));
        row.y.copy_from_slice(take(13, 2));
        row.r.copy_from_slice(take(15, 2));
        row.e.copy_from_slice(take(17, 2));
        row.u.copy_from_slice(take(19, 2));
        row.k_diag.copy_from_slice(take(21, 2));
        row.estimates.copy_from_slice(take(23, 16));
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a trace CSV file.
pub fn read_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&text)
}

/// Run summary written alongside the trace CSV.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct TraceMeta {
    /// Scenario name.
    pub name: String,
    /// Seed recorded from the scenario document.
    pub seed: u64,
    /// Whether the run crossed the divergence threshold (trace truncated).
    pub diverged: bool,
    /// Whether the scenario document declared divergence acceptable.
    pub expected_divergence: bool,
    /// Captured sample count.
    pub rows: usize,
    /// Capture step in seconds.
    pub dt: f64,
    /// Horizon in seconds.
    pub t_end: f64,
    /// Integrator substeps per capture step.
    pub substeps: usize,
    /// Largest `‖x‖∞` over the trace.
    pub max_state_norm: f64,
    /// Tracking-energy and control-effort objectives (divergence maps to
    /// the sentinel value).
    pub objectives: MetaObjectives,
    /// Window used for the RMS figures below, `[t0, t1]` in seconds.
    pub rms_window: [f64; 2],
    /// Per-channel RMS tracking error over the window (null when the
    /// window holds no samples).
    pub rms_error: [Option<f64>; 2],
    /// Largest reference magnitude over the trace.
    pub reference_peak: f64,
    /// Largest output magnitude over the late window (second half of the
    /// horizon) — the sustained-oscillation indicator.
    pub late_output_peak: f64,
}

/// Objective pair in metadata form.
#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
pub struct MetaObjectives {
    /// Summed squared tracking error.
    pub e: f64,
    /// Summed per-channel control peaks.
    pub u: f64,
}

/// Builds the metadata summary for a finished run.
pub fn summarize(
    name: &str,
    seed: u64,
    expected_divergence: bool,
    dt: f64,
    t_end: f64,
    substeps: usize,
    trace: &Trace,
) -> TraceMeta {
    let objectives = trace.objectives();
    let rms_window = [5.0_f64.min(t_end), t_end];
    let rms = trace.rms_error(rms_window[0], rms_window[1]);
    let reference_peak = trace
        .rows
        .iter()
        .flat_map(|r| r.r.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let late_start = t_end / 2.0;
    let late_output_peak = trace
        .rows
        .iter()
        .filter(|r| r.t >= late_start)
        .flat_map(|r| r.y.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    TraceMeta {
        name: name.to_string(),
        seed,
        diverged: trace.diverged,
        expected_divergence,
        rows: trace.rows.len(),
        dt,
        t_end,
        substeps,
        max_state_norm: trace.max_state_norm(),
        objectives: MetaObjectives {
            e: objectives.e,
            u: objectives.u,
        },
        rms_window,
        rms_error: [
            (!rms[0].is_nan()).then_some(rms[0]),
            (!rms[1].is_nan()).then_some(rms[1]),
        ],
        reference_peak,
        late_output_peak,
    }
}

/// Writes the metadata sidecar as pretty JSON.
pub fn emit_meta(meta: &TraceMeta, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_trace(n: usize) -> Trace {
        let rows = (0..n)
            .map(|k| {
                let t = k as f64 * 0.01;
                let mut estimates = [0.0; 16];
                for (i, v) in estimates.iter_mut().enumerate() {
                    *v = (k * 17 + i) as f64 * 0.037 - 1.0;
                }
                TraceRow {
                    t,
                    x: [t, -t, 2.0 * t, 0.5, -0.25, 1.0 / 3.0],
                    x_hat: [t + 1e-3, -t, 2.0 * t, 0.5, -0.25, 0.3333333333333333],
                    y: [t, 2.0 * t],
                    r: [0.45, 0.45],
                    e: [0.45 - t, 0.45 - 2.0 * t],
                    u: [1.5 * t, -0.7],
                    k_diag: [10.0, 10.0],
                    estimates,
                }
            })
            .collect();
        Trace {
            rows,
            diverged: false,
        }
    }

    #[test]
    fn csv_has_header_plus_one_line_per_sample() {
        let text = trace_to_csv(&synthetic_trace(3));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(CSV_HEADER.split(',').count(), CSV_COLUMNS);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let trace = synthetic_trace(25);
        let parsed = parse_csv(&trace_to_csv(&trace)).unwrap();
        assert_eq!(parsed.len(), trace.rows.len());
        for (a, b) in parsed.iter().zip(trace.rows.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("not,a,trace\n").is_err());
        let mut text = trace_to_csv(&synthetic_trace(2));
        text.push_str("1.0,2.0\n");
        assert!(parse_csv(&text).is_err());
    }

    #[test]
    fn summary_reports_window_and_peaks() {
        let trace = synthetic_trace(101);
        let meta = summarize("unit", 7, false, 0.01, 1.0, 2, &trace);
        assert_eq!(meta.rows, 101);
        assert!(!meta.diverged);
        assert_eq!(meta.reference_peak, 0.45);
        // Late window starts at t = 0.5; the largest |y| there is y2 at
        // the last sample: 2·1.0.
        assert!((meta.late_output_peak - 2.0).abs() < 1e-12);
        assert!(meta.rms_error[0].is_some());
    }
}
