//! Closed-form exponents governing the blow-up/global dichotomy and the
//! lifespan scaling laws.

use hheat_core::{CoreError, Result};

/// All exponents for a parameter set `(n, gamma, p, kappa)`.
///
/// `p_c = max(1/gamma, p_gamma)` separates the regimes: at or below it every
/// nontrivial nonnegative datum blows up, above it small data live globally.
/// `gamma = 0` pushes `1/gamma`, and hence `p_c`, to infinity.
#[derive(Debug, Clone, Copy)]
pub struct ExponentReport {
    pub n: usize,
    pub q_dim: f64,
    pub gamma: f64,
    pub p: f64,
    pub kappa: Option<f64>,
    pub p_c: f64,
    pub p_gamma: f64,
    pub p_sc: f64,
    pub q_sc: f64,
    /// `-1 / ((2-gamma)/(p-1) - Q/2)` when the denominator is positive.
    pub lifespan_exponent_l1: Option<f64>,
    /// `-1 / ((2-gamma)/(p-1) - kappa/2)` when defined.
    pub lifespan_exponent_kappa: Option<f64>,
}

pub fn exponents(n: usize, gamma: f64, p: f64, kappa: Option<f64>) -> Result<ExponentReport> {
    if n < 1 {
        return Err(CoreError::InvalidParameter("n must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(CoreError::InvalidParameter(format!(
            "gamma must lie in [0,1), got {gamma}"
        )));
    }
    if !(p > 1.0) {
        return Err(CoreError::InvalidParameter(format!("p must be > 1, got {p}")));
    }
    if let Some(k) = kappa {
        if !(k > 0.0) {
            return Err(CoreError::InvalidParameter("kappa must be positive".into()));
        }
    }
    let q_dim = (2 * n + 2) as f64;
    let p_gamma = 1.0 + 2.0 * (2.0 - gamma) / (q_dim - 2.0 + 2.0 * gamma);
    let p_c = if gamma == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / gamma).max(p_gamma)
    };
    let p_sc = 1.0 + 2.0 * (2.0 - gamma) / q_dim;
    let q_sc = q_dim * (p - 1.0) / (2.0 * (2.0 - gamma));
    let slope = |shift: f64| {
        let d = (2.0 - gamma) / (p - 1.0) - shift;
        if d > 0.0 {
            Some(-1.0 / d)
        } else {
            None
        }
    };
    Ok(ExponentReport {
        n,
        q_dim,
        gamma,
        p,
        kappa,
        p_c,
        p_gamma,
        p_sc,
        q_sc,
        lifespan_exponent_l1: slope(q_dim / 2.0),
        lifespan_exponent_kappa: kappa.and_then(|k| slope(k / 2.0)),
    })
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.12}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt(x),
        None => "n/a".to_string(),
    }
}

impl ExponentReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n                      = {}\n", self.n));
        out.push_str(&format!("Q                      = {}\n", self.q_dim));
        out.push_str(&format!("gamma                  = {}\n", self.gamma));
        out.push_str(&format!("p                      = {}\n", self.p));
        if let Some(k) = self.kappa {
            out.push_str(&format!("kappa                  = {k}\n"));
        }
        out.push_str(&format!("p_c                    = {}\n", fmt(self.p_c)));
        out.push_str(&format!("p_gamma                = {}\n", fmt(self.p_gamma)));
        out.push_str(&format!("p_sc                   = {}\n", fmt(self.p_sc)));
        out.push_str(&format!("q_sc                   = {}\n", fmt(self.q_sc)));
        out.push_str(&format!(
            "lifespan_exponent_L1   = {}\n",
            fmt_opt(self.lifespan_exponent_l1)
        ));
        out.push_str(&format!(
            "lifespan_exponent_kappa = {}\n",
            fmt_opt(self.lifespan_exponent_kappa)
        ));
        out
    }
}
