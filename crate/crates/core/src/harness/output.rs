//! Diagnostics CSV, text reports and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use plotters::prelude::*;

use super::converge::ConvergenceTable;
use super::HarnessError;
use crate::diagnostics::{DiagnosticsRecord, DiagnosticsSeries};

/// One header line, then one line per record with 17 significant digits.
pub fn diagnostics_csv(series: &DiagnosticsSeries) -> String {
    let mut out = String::from(DiagnosticsRecord::CSV_HEADER);
    out.push('\n');
    for rec in &series.records {
        let row: Vec<String> = rec.values().iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("parameter,l1_error_n,l2_error_grad_p,order\n");
    for row in &table.rows {
        let order = row.order.map_or_else(String::new, |o| format!("{o:.16e}"));
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{order}",
            row.parameter, row.l1_error_n, row.l2_error_grad_p
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn plot_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Plot {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Six panels of monitored quantities against time.
pub fn plot_diagnostics(series: &DiagnosticsSeries, path: &Path) -> Result<(), HarnessError> {
    type Getter = fn(&DiagnosticsRecord) -> f64;
    let panels: [(&str, Getter); 6] = [
        ("mass", |r| r.mass),
        ("p_max", |r| r.p_max),
        ("entropy", |r| r.entropy),
        ("energy", |r| r.energy),
        ("w_minus_L2", |r| r.w_minus_l2),
        ("lap_L1", |r| r.lap_l1),
    ];
    let root = SVGBackend::new(path, (1200, 900)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let t0 = series.records.first().map_or(0.0, |r| r.t);
    let t1 = series.records.last().map_or(1.0, |r| r.t);
    let (t0, t1) = padded(t0, t1);
    for (area, (name, get)) in root.split_evenly((3, 2)).iter().zip(panels) {
        let pts: Vec<(f64, f64)> = series.records.iter().map(|r| (r.t, get(r))).collect();
        let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { padded(lo, hi) } else { (0.0, 1.0) };
        let mut chart = ChartBuilder::on(area)
            .caption(name, ("sans-serif", 18))
            .margin(10)
            .x_label_area_size(30)
            .y_label_area_size(70)
            .build_cartesian_2d(t0..t1, lo..hi)
            .map_err(|e| plot_err(path, e))?;
        chart
            .configure_mesh()
            .x_desc("t")
            .draw()
            .map_err(|e| plot_err(path, e))?;
        chart
            .draw_series(LineSeries::new(pts, &BLUE))
            .map_err(|e| plot_err(path, e))?;
    }
    root.present().map_err(|e| plot_err(path, e))
}

/// Log-log plot of both error columns against the level parameter.
pub fn plot_convergence(table: &ConvergenceTable, path: &Path) -> Result<(), HarnessError> {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let xs: Vec<f64> = table.rows.iter().map(|r| r.parameter).filter(|&v| positive(v)).collect();
    let ys: Vec<f64> = table
        .rows
        .iter()
        .flat_map(|r| [r.l1_error_n, r.l2_error_grad_p])
        .filter(|&v| positive(v))
        .collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo / 2.0, hi * 2.0)
        } else {
            (1e-3, 1.0)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("convergence along {}", table.axis), ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(80)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
        .map_err(|e| plot_err(path, e))?;
    chart
        .configure_mesh()
        .x_desc(table.axis.to_string())
        .y_desc("error")
        .draw()
        .map_err(|e| plot_err(path, e))?;
    let series = [
        ("L1 error of n", RED, 0usize),
        ("L2 error of grad p", BLUE, 1usize),
    ];
    for (label, color, col) in series {
        let pts: Vec<(f64, f64)> = table
            .rows
            .iter()
            .map(|r| (r.parameter, if col == 0 { r.l1_error_n } else { r.l2_error_grad_p }))
            .filter(|&(x, y)| positive(x) && positive(y))
            .collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color))
            .map_err(|e| plot_err(path, e))?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        chart
            .draw_series(pts.into_iter().map(|p| Circle::new(p, 4, color.filled())))
            .map_err(|e| plot_err(path, e))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(path, e))?;
    root.present().map_err(|e| plot_err(path, e))
}
