//! Deterministic text and CSV artifacts. All floats use a fixed scientific
//! format and nothing time- or path-dependent enters the files, so equal
//! configurations produce byte-identical reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hheat_core::solver::{SolveConfig, SolveResult};
use hheat_core::Result;

use crate::config::FileConfig;
use crate::scan::{DichotomyScan, LifespanScan};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_e(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.10e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_e(x),
        None => "nofit".to_string(),
    }
}

/// `trace.csv`: one row per recorded step.
pub fn write_trace_csv(res: &SolveResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("t,sup_norm,l1_norm,l2_norm");
    for (q, _) in &res.lq_norms {
        let _ = write!(out, ",lq_{q}");
    }
    out.push_str(",moment_f,moment_residual,min_value\n");
    for k in 0..res.times.len() {
        let _ = write!(
            out,
            "{},{},{},{}",
            fmt_e(res.times[k]),
            fmt_e(res.sup_norms[k]),
            fmt_e(res.l1_norms[k]),
            fmt_e(res.l2_norms[k])
        );
        for (_, series) in &res.lq_norms {
            let _ = write!(out, ",{}", fmt_e(series[k]));
        }
        let resid = res
            .moment_residuals
            .get(k)
            .map(|&r| fmt_e(r))
            .unwrap_or_else(|| "".to_string());
        let _ = write!(
            out,
            ",{},{},{}\n",
            fmt_e(res.moment[k]),
            resid,
            fmt_e(res.min_values[k])
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// `summary.txt`: status, estimates, monitor verdicts, config echo.
pub fn render_summary(cfg: &SolveConfig, res: &SolveResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "version: {VERSION}");
    let _ = writeln!(out, "status: {}", res.status.label());
    let _ = writeln!(out, "t_est: {}", fmt_opt(res.status.t_est()));
    let _ = writeln!(out, "window_guaranteed: {}", fmt_e(res.window_guaranteed));
    let _ = writeln!(out, "initial_sup: {}", fmt_e(res.initial_sup));
    let _ = writeln!(
        out,
        "final_sup: {}",
        fmt_e(*res.sup_norms.last().unwrap_or(&f64::NAN))
    );
    let _ = writeln!(out, "steps_recorded: {}", res.times.len());
    let _ = writeln!(
        out,
        "monitor_positivity: {} (min value {})",
        res.monitors.positivity_ok,
        fmt_e(res.monitors.min_value_seen)
    );
    let _ = writeln!(
        out,
        "monitor_local_window: {} (worst ratio {})",
        res.monitors.window_ok,
        fmt_e(res.monitors.worst_window_ratio)
    );
    let _ = writeln!(
        out,
        "monitor_moment: {} (worst residual {}, tolerance {})",
        res.monitors.moment_ok,
        fmt_e(res.monitors.worst_moment_residual),
        fmt_e(res.monitors.moment_tolerance)
    );
    out.push_str("config:\n");
    for line in FileConfig::echo(cfg).lines() {
        let _ = writeln!(out, "  {line}");
    }
    out
}

pub fn write_summary(cfg: &SolveConfig, res: &SolveResult, path: &Path) -> Result<()> {
    fs::write(path, render_summary(cfg, res))?;
    Ok(())
}

/// Dichotomy matrix CSV: axes, closed-vocabulary status, estimates.
pub fn render_dichotomy_csv(scan: &DichotomyScan) -> String {
    let mut out = String::from("p,amplitude,status,t_est,initial_sup,final_sup,error\n");
    for c in &scan.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_e(c.p),
            fmt_e(c.amplitude),
            c.status,
            fmt_opt(c.t_est),
            fmt_e(c.initial_sup),
            fmt_e(c.final_sup),
            c.error.clone().unwrap_or_default()
        );
    }
    out
}

/// Lifespan CSV: the epsilon ladder plus a fit footer.
pub fn render_lifespan_csv(scan: &LifespanScan) -> String {
    let mut out = String::from("epsilon,status,t_est\n");
    for c in &scan.cells {
        let _ = writeln!(out, "{},{},{}", fmt_e(c.amplitude), c.status, fmt_opt(c.t_est));
    }
    match scan.fitted_slope {
        Some((slope, half_width)) => {
            let _ = writeln!(out, "fit,slope,{}", fmt_e(slope));
            let _ = writeln!(out, "fit,half_width,{}", fmt_e(half_width));
        }
        None => {
            let _ = writeln!(out, "fit,slope,nofit");
        }
    }
    let _ = writeln!(out, "fit,theoretical,{}", fmt_opt(scan.theoretical_slope));
    let _ = writeln!(out, "fit,censored,{}", scan.censored);
    out
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}
