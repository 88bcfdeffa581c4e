//! Parameter scans: the blow-up/global dichotomy over a `(p, amplitude)`
//! matrix, and lifespan scaling over a geometric amplitude ladder with a
//! log-log slope fit.

use rayon::prelude::*;

use hheat_core::fit::fit_line;
use hheat_core::solver::{solve, InitialData, InitialProfile, SolveConfig, SolveResult};
use hheat_core::{CoreError, Result, SolveStatus};

use crate::exponents::exponents;

/// Outcome of one scan cell; errors are recorded, not propagated, so one
/// bad cell cannot kill a scan.
#[derive(Debug, Clone)]
pub struct ScanCell {
    pub p: f64,
    pub amplitude: f64,
    pub status: String,
    pub t_est: Option<f64>,
    pub initial_sup: f64,
    pub final_sup: f64,
    pub error: Option<String>,
}

impl ScanCell {
    fn from_result(p: f64, amplitude: f64, res: &SolveResult) -> Self {
        ScanCell {
            p,
            amplitude,
            status: res.status.label().to_string(),
            t_est: res.status.t_est(),
            initial_sup: res.initial_sup,
            final_sup: *res.sup_norms.last().unwrap_or(&f64::NAN),
            error: None,
        }
    }

    fn from_error(p: f64, amplitude: f64, err: &CoreError) -> Self {
        ScanCell {
            p,
            amplitude,
            status: "aborted".to_string(),
            t_est: None,
            initial_sup: f64::NAN,
            final_sup: f64::NAN,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DichotomyScan {
    pub cells: Vec<ScanCell>,
}

fn with_amplitude(base: &SolveConfig, p: f64, amplitude: f64) -> SolveConfig {
    let mut cfg = base.clone();
    cfg.p = p;
    cfg.initial = match &base.initial {
        InitialData::Profile { profile, .. } => InitialData::Profile {
            profile: *profile,
            amplitude,
        },
        other => other.clone(),
    };
    cfg
}

/// Runs `solve` for every `(p, amplitude)` pair. Cells are independent
/// jobs; the result vector is ordered by the axes, so the merge is
/// deterministic regardless of scheduling.
pub fn scan_dichotomy(p_list: &[f64], amplitudes: &[f64], base: &SolveConfig) -> DichotomyScan {
    let mut jobs = Vec::new();
    for &p in p_list {
        for &a in amplitudes {
            jobs.push((p, a));
        }
    }
    let cells: Vec<ScanCell> = jobs
        .par_iter()
        .map(|&(p, a)| match solve(with_amplitude(base, p, a)) {
            Ok(res) => ScanCell::from_result(p, a, &res),
            Err(e) => ScanCell::from_error(p, a, &e),
        })
        .collect();
    DichotomyScan { cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifespanProfile {
    /// Integrable datum (Koranyi Gaussian); scaling exponent uses Q/2.
    Integrable,
    /// Power-decay datum `(1+|eta|)^-kappa`; exponent uses kappa/2.
    PowerDecay { kappa_milli: u64 },
}

impl LifespanProfile {
    pub fn power_decay(kappa: f64) -> Self {
        LifespanProfile::PowerDecay {
            kappa_milli: (kappa * 1000.0).round() as u64,
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match self {
            LifespanProfile::Integrable => None,
            LifespanProfile::PowerDecay { kappa_milli } => Some(*kappa_milli as f64 / 1000.0),
        }
    }

    fn initial(&self, eps: f64) -> InitialData {
        match self.kappa() {
            None => InitialData::Profile {
                profile: InitialProfile::KoranyiGaussian,
                amplitude: eps,
            },
            Some(kappa) => InitialData::Profile {
                profile: InitialProfile::PowerDecay { kappa },
                amplitude: eps,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LifespanScan {
    pub cells: Vec<ScanCell>,
    /// least-squares slope of `log T_est` against `log eps`, with a
    /// confidence half-width (two standard errors); None with fewer than
    /// four blow-up points
    pub fitted_slope: Option<(f64, f64)>,
    pub theoretical_slope: Option<f64>,
    pub censored: usize,
}

impl LifespanScan {
    /// True when detected lifespans never decrease as eps shrinks.
    pub fn monotone_nonincreasing_in_eps(&self) -> bool {
        // cells are ordered by decreasing eps; T_est must be nondecreasing
        // along that order
        let detected: Vec<(f64, f64)> = self
            .cells
            .iter()
            .filter_map(|c| c.t_est.map(|t| (c.amplitude, t)))
            .collect();
        detected
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 || w[1].1 >= w[0].1 - 1e-12)
    }
}

/// Runs the solver over `eps_list` (descending) and fits the lifespan law.
pub fn scan_lifespan(
    p: f64,
    eps_list: &[f64],
    profile: LifespanProfile,
    base: &SolveConfig,
) -> Result<LifespanScan> {
    if eps_list.is_empty() {
        return Err(CoreError::InvalidParameter("need at least one epsilon".into()));
    }
    let cells: Vec<ScanCell> = eps_list
        .par_iter()
        .map(|&eps| {
            let mut cfg = base.clone();
            cfg.p = p;
            cfg.initial = profile.initial(eps);
            match solve(cfg) {
                Ok(res) => ScanCell::from_result(p, eps, &res),
                Err(e) => ScanCell::from_error(p, eps, &e),
            }
        })
        .collect();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut censored = 0usize;
    for c in &cells {
        match c.t_est {
            Some(t) => {
                xs.push(c.amplitude.ln());
                ys.push(t.ln());
            }
            None => censored += 1,
        }
    }
    let fitted_slope = if xs.len() >= 4 {
        fit_line(&xs, &ys).map(|f| (f.slope, 2.0 * f.slope_stderr))
    } else {
        None
    };
    let theoretical_slope = {
        let rep = exponents(base.n, base.gamma, p, profile.kappa())?;
        match profile {
            LifespanProfile::Integrable => rep.lifespan_exponent_l1,
            LifespanProfile::PowerDecay { .. } => rep.lifespan_exponent_kappa,
        }
    };
    Ok(LifespanScan {
        cells,
        fitted_slope,
        theoretical_slope,
        censored,
    })
}
