//! Riemann-Liouville fractional integrals and derivatives on uniform time
//! grids, with product-integration quadrature for the weakly singular
//! kernel, and the memory term of the evolution equation.
//!
//! The singular factor is integrated exactly against a piecewise-constant
//! interpolant of the smooth factor (first-order product integration). On a
//! uniform grid the weights depend only on the lag:
//!
//! ```text
//! w_m = Int_{t_{k-m}}^{t_{k-m+1}} (t_k - s)^-g ds
//!     = dt^(1-g) * (m^(1-g) - (m-1)^(1-g)) / (1-g),     m = 1..k
//! ```
//!
//! computed in closed form, never by quadrature. `g = 0` falls out of the
//! same formula (all weights equal `dt`), so the memoryless limit shares
//! the code path.

use statrs::function::gamma::gamma;

use crate::error::{CoreError, Result};
use crate::exec;
use crate::grid::GridField;

/// Lag weights for the kernel `(t-s)^-exponent`, lags `1..=count`.
pub fn singular_weights(exponent: f64, dt: f64, count: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&exponent) {
        return Err(CoreError::InvalidParameter(format!(
            "kernel exponent must lie in [0,1), got {exponent}"
        )));
    }
    if !(dt > 0.0) {
        return Err(CoreError::InvalidParameter("time step must be positive".into()));
    }
    let b = 1.0 - exponent;
    let scale = dt.powf(b) / b;
    Ok((1..=count)
        .map(|m| scale * ((m as f64).powf(b) - ((m - 1) as f64).powf(b)))
        .collect())
}

/// Product-integration scheme for the memory kernel `(t-s)^-gamma`.
#[derive(Debug, Clone)]
pub struct FracScheme {
    gamma: f64,
    alpha: f64,
    time_step: f64,
    steps: usize,
    /// weights by lag, `weights[m-1]` for lag m
    weights: Vec<f64>,
}

impl FracScheme {
    pub fn new(gamma: f64, time_step: f64, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(CoreError::InvalidParameter("need at least one step".into()));
        }
        let weights = singular_weights(gamma, time_step, steps)?;
        Ok(FracScheme {
            gamma,
            alpha: 1.0 - gamma,
            time_step,
            steps,
            weights,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Weight of the cell `[t_j, t_{j+1}]` in the integral up to `t_k`.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.weights[k - j - 1]
    }

    /// Exact value of the telescoping sum of the first `k` weights.
    pub fn cumulative_exact(&self, k: usize) -> f64 {
        let t_k = k as f64 * self.time_step;
        t_k.powf(1.0 - self.gamma) / (1.0 - self.gamma)
    }

    /// Memory integral of a scalar series at node `k`:
    /// `sum_{j<k} w_{k,j} v[j]`.
    pub fn memory_scalar(&self, values: &[f64], k: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..k {
            acc += self.weight(k, j) * values[j];
        }
        acc
    }
}

/// A scalar series on the uniform grid `t_k = k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || values.len() < 2 {
            return Err(CoreError::InvalidParameter(
                "series needs dt > 0 and at least two nodes".into(),
            ));
        }
        Ok(TimeSeries { dt, values })
    }

    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        TimeSeries::new(dt, (0..=steps).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// End of the grid, `T = dt * (len - 1)`.
    pub fn horizon(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }
}

fn check_order(order: f64) -> Result<()> {
    if !(order > 0.0 && order < 1.0) {
        return Err(CoreError::InvalidOrder(order));
    }
    Ok(())
}

/// Left Riemann-Liouville integral `I^a_{0|t} f` at every node; node 0 is 0.
pub fn rl_integral_left(f: &TimeSeries, order: f64) -> Result<TimeSeries> {
    check_order(order)?;
    let w = singular_weights(1.0 - order, f.dt, f.values.len() - 1)?;
    let g = 1.0 / gamma(order);
    let values = (0..f.values.len())
        .map(|k| {
            let mut acc = 0.0;
            for j in 0..k {
                acc += w[k - j - 1] * f.values[j];
            }
            g * acc
        })
        .collect();
    TimeSeries::new(f.dt, values)
}

/// Right Riemann-Liouville integral `I^a_{t|T} f` at every node.
fn rl_integral_right(f: &TimeSeries, order: f64) -> Result<TimeSeries> {
    check_order(order)?;
    let w = singular_weights(1.0 - order, f.dt, f.values.len() - 1)?;
    let g = 1.0 / gamma(order);
    let m = f.values.len();
    // mirror of the left rule: cells carry their endpoint away from t_k
    let values = (0..m)
        .map(|k| {
            let mut acc = 0.0;
            for j in k..m - 1 {
                acc += w[j - k] * f.values[j + 1];
            }
            g * acc
        })
        .collect();
    TimeSeries::new(f.dt, values)
}

fn differentiate(series: &TimeSeries, sign: f64) -> TimeSeries {
    let m = series.values.len();
    let dt = series.dt;
    let v = &series.values;
    let mut out = Vec::with_capacity(m);
    out.push(sign * (v[1] - v[0]) / dt);
    for k in 1..m - 1 {
        out.push(sign * (v[k + 1] - v[k - 1]) / (2.0 * dt));
    }
    out.push(sign * (v[m - 1] - v[m - 2]) / dt);
    TimeSeries { dt, values: out }
}

/// Left derivative `D^a_{0|t} f = d/dt I^{1-a}_{0|t} f`.
pub fn rl_derivative_left(f: &TimeSeries, order: f64) -> Result<TimeSeries> {
    check_order(order)?;
    Ok(differentiate(&rl_integral_left(f, 1.0 - order)?, 1.0))
}

/// Right derivative `D^a_{t|T} f = -d/dt I^{1-a}_{t|T} f`.
pub fn rl_derivative_right(f: &TimeSeries, order: f64) -> Result<TimeSeries> {
    check_order(order)?;
    Ok(differentiate(&rl_integral_right(f, 1.0 - order)?, -1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum W1Kind {
    /// `D^a_{t|T} (1 - t/T)^s`
    Alpha,
    /// `D^{1+a}_{t|T} (1 - t/T)^s`
    OnePlusAlpha,
}

/// Closed forms for the right fractional derivatives of `(1 - t/T)^sigma`;
/// the oracle for [`rl_derivative_right`].
pub fn w1_exact(t: f64, horizon: f64, sigma: f64, alpha: f64, kind: W1Kind) -> Result<f64> {
    check_order(alpha)?;
    if !(0.0..=horizon).contains(&t) {
        return Err(CoreError::InvalidParameter(format!(
            "t = {t} outside [0, {horizon}]"
        )));
    }
    let rest = 1.0 - t / horizon;
    match kind {
        W1Kind::Alpha => Ok(gamma(sigma + 1.0) / gamma(sigma + 1.0 - alpha)
            * horizon.powf(-alpha)
            * rest.powf(sigma - alpha)),
        W1Kind::OnePlusAlpha => {
            if sigma <= alpha + 1.0 {
                return Err(CoreError::InvalidParameter(format!(
                    "the order-(1+a) form needs sigma > alpha + 1, got sigma = {sigma}"
                )));
            }
            Ok(gamma(sigma + 1.0) / gamma(sigma - alpha)
                * horizon.powf(-(1.0 + alpha))
                * rest.powf(sigma - alpha - 1.0))
        }
    }
}

/// Defect of the fractional integration-by-parts identity
/// `Int f D^a_{0|t} g = Int g D^a_{t|T} f`, both sides by trapezoid.
pub fn integration_by_parts_defect(f: &TimeSeries, g: &TimeSeries, order: f64) -> Result<f64> {
    if f.len() != g.len() || f.dt != g.dt {
        return Err(CoreError::ShapeMismatch("series must share the grid".into()));
    }
    let dg = rl_derivative_left(g, order)?;
    let df = rl_derivative_right(f, order)?;
    let trapezoid = |a: &TimeSeries, b: &TimeSeries| {
        let m = a.len();
        let mut acc = 0.5 * (a.values[0] * b.values[0] + a.values[m - 1] * b.values[m - 1]);
        for k in 1..m - 1 {
            acc += a.values[k] * b.values[k];
        }
        acc * a.dt
    };
    Ok((trapezoid(f, &dg) - trapezoid(g, &df)).abs())
}

/// Memory term at node `k`: `sum_{j<k} w_{k,j} u_power[j]`, a field.
///
/// `u_power` holds `|u|^{p-1} u` at nodes `0..k`; parallel over grid points,
/// with the lag accumulation sequential per point in fixed order.
pub fn memory_term(u_power: &[GridField], scheme: &FracScheme, k: usize) -> Result<GridField> {
    if k > scheme.steps {
        return Err(CoreError::ShapeMismatch(format!(
            "node {k} beyond the scheme's {} steps",
            scheme.steps
        )));
    }
    if u_power.len() < k {
        return Err(CoreError::ShapeMismatch(format!(
            "memory term at node {k} needs {k} history fields, got {}",
            u_power.len()
        )));
    }
    if k == 0 {
        // empty integral; need some field to take the spec from
        if let Some(first) = u_power.first() {
            return Ok(GridField::zeros(*first.spec()));
        }
        return Err(CoreError::ShapeMismatch(
            "memory term at node 0 needs at least the shape of the history".into(),
        ));
    }
    let spec = *u_power[0].spec();
    for f in &u_power[..k] {
        if *f.spec() != spec {
            return Err(CoreError::SpecMismatch);
        }
    }
    let mut out = GridField::zeros(spec);
    exec::fill_indexed(out.values_mut(), |i| {
        let mut acc = 0.0;
        for (j, field) in u_power[..k].iter().enumerate() {
            acc += scheme.weight(k, j) * field.values()[i];
        }
        acc
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn weights_telescope_and_stay_positive() {
        for &g in &[0.0, 0.3, 0.5, 0.9] {
            let scheme = FracScheme::new(g, 1e-3, 10_000).unwrap();
            assert!(scheme.weights.iter().all(|&w| w > 0.0));
            for k in [1usize, 10, 100, 10_000] {
                let sum: f64 = exec::pairwise_sum(&scheme.weights[..k]);
                let exact = scheme.cumulative_exact(k);
                assert!(
                    (sum - exact).abs() <= 1e-12 * exact.max(1.0),
                    "telescoping off at k={k}, gamma={g}: {sum} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gamma_zero_weights_are_the_plain_measure() {
        let scheme = FracScheme::new(0.0, 0.25, 8).unwrap();
        for w in &scheme.weights {
            assert_abs_diff_eq!(*w, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn integral_of_one_hits_the_closed_form() {
        // I^a 1 = t^a / Gamma(a+1); the product rule integrates the constant
        // density exactly, so this is tight
        let f = TimeSeries::from_fn(1.0 / 1024.0, 1024, |_| 1.0).unwrap();
        let i = rl_integral_left(&f, 0.5).unwrap();
        let last = *i.values().last().unwrap();
        assert_relative_eq!(last, 1.1283791670955126, max_relative = 1e-10);
        assert_eq!(i.values()[0], 0.0);
    }

    #[test]
    fn integral_is_linear_and_kills_zero() {
        let dt = 1.0 / 256.0;
        let f = TimeSeries::from_fn(dt, 256, |t| t * t - 0.3).unwrap();
        let g = TimeSeries::from_fn(dt, 256, |t| (3.0 * t).sin()).unwrap();
        let zero = TimeSeries::from_fn(dt, 256, |_| 0.0).unwrap();
        let iz = rl_integral_left(&zero, 0.4).unwrap();
        assert!(iz.values().iter().all(|&v| v == 0.0));

        let combo = TimeSeries::from_fn(dt, 256, |t| 2.0 * (t * t - 0.3) - 0.5 * (3.0 * t).sin())
            .unwrap();
        let i_combo = rl_integral_left(&combo, 0.4).unwrap();
        let i_f = rl_integral_left(&f, 0.4).unwrap();
        let i_g = rl_integral_left(&g, 0.4).unwrap();
        for k in 0..i_combo.len() {
            let lin = 2.0 * i_f.values()[k] - 0.5 * i_g.values()[k];
            assert_abs_diff_eq!(i_combo.values()[k], lin, epsilon = 1e-12);
        }
    }

    #[test]
    fn integral_of_t_converges_at_first_order() {
        // I^a t = t^{1+a} / Gamma(2+a)
        let a = 0.5;
        let exact = |t: f64| t.powf(1.5) / gamma(2.5);
        let err = |steps: usize| {
            let f = TimeSeries::from_fn(1.0 / steps as f64, steps, |t| t).unwrap();
            let i = rl_integral_left(&f, a).unwrap();
            (0..=steps)
                .map(|k| (i.values()[k] - exact(i.time(k))).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = err(512);
        let fine = err(1024);
        let ratio = coarse / fine;
        assert!(
            (1.7..=2.3).contains(&ratio),
            "first-order convergence ratio {ratio}"
        );
    }

    #[test]
    fn w1_closed_forms() {
        // frozen: Gamma(4)/Gamma(3.5) * 2^{-1/2} * (1/2)^{2.5}
        let v = w1_exact(1.0, 2.0, 3.0, 0.5, W1Kind::Alpha).unwrap();
        assert_relative_eq!(v, 0.22567583341910258, max_relative = 1e-12);
        // vanishes at t = T for sigma > alpha
        let v = w1_exact(2.0, 2.0, 3.0, 0.5, W1Kind::Alpha).unwrap();
        assert_eq!(v, 0.0);
        // (P3)/(P1) = (sigma - alpha)/(T - t)
        let p1 = w1_exact(0.7, 2.0, 3.0, 0.5, W1Kind::Alpha).unwrap();
        let p3 = w1_exact(0.7, 2.0, 3.0, 0.5, W1Kind::OnePlusAlpha).unwrap();
        assert_relative_eq!(p3 / p1, 2.5 / 1.3, max_relative = 1e-12);
        // domain and parameter guards
        assert!(w1_exact(-0.1, 2.0, 3.0, 0.5, W1Kind::Alpha).is_err());
        assert!(w1_exact(2.1, 2.0, 3.0, 0.5, W1Kind::Alpha).is_err());
        assert!(w1_exact(1.0, 2.0, 1.2, 0.5, W1Kind::OnePlusAlpha).is_err());
    }

    #[test]
    fn right_derivative_matches_the_w1_oracle() {
        let horizon = 2.0;
        let steps = 2048;
        let sigma = 3.0;
        for &a in &[0.3, 0.5, 0.7] {
            let f = TimeSeries::from_fn(horizon / steps as f64, steps, |t| {
                (1.0 - t / horizon).powf(sigma)
            })
            .unwrap();
            let d = rl_derivative_right(&f, a).unwrap();
            let mut sup_rel = 0.0f64;
            for k in 0..=steps {
                let t = d.time(k);
                if t < 0.1 * horizon || t > 0.9 * horizon {
                    continue;
                }
                let exact = w1_exact(t, horizon, sigma, a, W1Kind::Alpha).unwrap();
                sup_rel = sup_rel.max((d.values()[k] - exact).abs() / exact.abs());
            }
            assert!(
                sup_rel <= 2e-2,
                "oracle disagreement {sup_rel} at alpha = {a}"
            );
        }
    }

    #[test]
    fn right_derivative_of_a_constant() {
        // D^a c = c (T-t)^{-a} / Gamma(1-a); check at t = T/2
        let horizon = 2.0;
        let steps = 2048;
        let a = 0.5;
        let c = 1.7;
        let f = TimeSeries::from_fn(horizon / steps as f64, steps, |_| c).unwrap();
        let d = rl_derivative_right(&f, a).unwrap();
        let exact = c * 1.0_f64.powf(-a) / gamma(1.0 - a);
        assert_relative_eq!(d.values()[steps / 2], exact, max_relative = 1e-2);
    }

    #[test]
    fn left_derivative_inverts_the_left_integral() {
        // D^a I^a f = f for f(t) = t, interior nodes
        let steps = 2048;
        let a = 0.5;
        let f = TimeSeries::from_fn(1.0 / steps as f64, steps, |t| t).unwrap();
        let i = rl_integral_left(&f, a).unwrap();
        let d = rl_derivative_left(&i, a).unwrap();
        let mut sup_rel = 0.0f64;
        let mut sup_abs = 0.0f64;
        for k in 0..=steps {
            let t = f.time(k);
            if t < 0.1 || t > 0.9 {
                continue;
            }
            sup_rel = sup_rel.max((d.values()[k] - t).abs() / t);
            sup_abs = sup_abs.max((d.values()[k] - t).abs());
        }
        // first-order scheme: relative error is largest at the smallest t
        assert!(sup_rel <= 1e-2, "round-trip relative error {sup_rel}");
        assert!(sup_abs <= 1e-3, "round-trip absolute error {sup_abs}");
    }

    #[test]
    fn parts_defect_vanishes_for_smooth_bumps() {
        let steps = 2048;
        let horizon = 1.0;
        let dt = horizon / steps as f64;
        let bump = |t: f64| (t * (horizon - t) * 4.0).powi(3);
        let f = TimeSeries::from_fn(dt, steps, bump).unwrap();
        let zero = TimeSeries::from_fn(dt, steps, |_| 0.0).unwrap();
        let defect = integration_by_parts_defect(&f, &f, 0.5).unwrap();
        // scale of either side
        let df = rl_derivative_left(&f, 0.5).unwrap();
        let scale: f64 = f
            .values()
            .iter()
            .zip(df.values())
            .map(|(a, b)| (a * b).abs())
            .fold(0.0, f64::max);
        assert!(defect <= 2e-3 * scale.max(1.0), "defect {defect} vs scale {scale}");
        assert_eq!(integration_by_parts_defect(&f, &zero, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn parts_defect_with_the_exact_closed_form_on_one_side() {
        // replace D^a_{t|T} f by the w1 closed form for f = (1-t/T)^sigma;
        // the residual is then the quadrature error of the other side alone
        let steps = 2048;
        let horizon = 1.0;
        let sigma = 6.0;
        let a = 0.5;
        let dt = horizon / steps as f64;
        let f = TimeSeries::from_fn(dt, steps, |t| (1.0 - t / horizon).powf(sigma)).unwrap();
        let g = TimeSeries::from_fn(dt, steps, |t| (t * (horizon - t) * 4.0).powi(3)).unwrap();
        let dg = rl_derivative_left(&g, a).unwrap();
        let trapz = |x: &[f64], y: &[f64]| {
            let m = x.len();
            let mut acc = 0.5 * (x[0] * y[0] + x[m - 1] * y[m - 1]);
            for k in 1..m - 1 {
                acc += x[k] * y[k];
            }
            acc * dt
        };
        let lhs = trapz(f.values(), dg.values());
        let exact_df: Vec<f64> = (0..=steps)
            .map(|k| w1_exact(f.time(k), horizon, sigma, a, W1Kind::Alpha).unwrap())
            .collect();
        let rhs = trapz(g.values(), &exact_df);
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        assert!(
            (lhs - rhs).abs() <= 5e-3 * scale,
            "one-sided defect {} vs scale {scale}",
            (lhs - rhs).abs()
        );
    }

    #[test]
    fn memory_term_examples() {
        let spec = GridSpec::new(1, 1.0, 1.0, 3, 3).unwrap();
        let steps = 64;
        let scheme = FracScheme::new(0.5, 1.0 / steps as f64, steps).unwrap();
        let ones: Vec<GridField> = (0..steps)
            .map(|_| GridField::from_fn(spec, |_| 1.0))
            .collect();

        // k = 0: empty integral
        let z = memory_term(&ones, &scheme, 0).unwrap();
        assert!(z.sup_norm() == 0.0);

        // u == 1, gamma = 0.5, t_k = 1 -> t^{1/2} / (1/2) = 2, weight-exact
        let m = memory_term(&ones, &scheme, steps).unwrap();
        for &v in m.values() {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn memory_term_gamma_zero_is_a_running_integral() {
        let spec = GridSpec::new(1, 1.0, 1.0, 3, 3).unwrap();
        let steps = 256;
        let dt = 1.0 / steps as f64;
        let scheme = FracScheme::new(0.0, dt, steps).unwrap();
        // spatially constant, quadratic in time
        let hist: Vec<GridField> = (0..steps)
            .map(|k| {
                let t = k as f64 * dt;
                GridField::from_fn(spec, move |_| t * t)
            })
            .collect();
        let k = steps;
        let m = memory_term(&hist, &scheme, k).unwrap();
        // left-endpoint rule vs the exact integral t^3/3: first-order error
        let exact = 1.0 / 3.0;
        let got = m.values()[0];
        assert!(
            (got - exact).abs() <= 1.5 * dt,
            "running integral {got} vs {exact}"
        );
        // and against a cumulative trapezoid oracle, also first-order close
        let mut trap = 0.0;
        for j in 0..k {
            let a = (j as f64 * dt).powi(2);
            let b = ((j + 1) as f64 * dt).powi(2);
            trap += 0.5 * (a + b) * dt;
        }
        assert!((got - trap).abs() <= 1.5 * dt);
    }

    #[test]
    fn memory_term_shape_errors() {
        let spec = GridSpec::new(1, 1.0, 1.0, 3, 3).unwrap();
        let scheme = FracScheme::new(0.5, 0.1, 4).unwrap();
        let hist = vec![GridField::from_fn(spec, |_| 1.0)];
        assert!(memory_term(&hist, &scheme, 2).is_err());
        assert!(memory_term(&hist, &scheme, 5).is_err());
    }

    #[test]
    fn order_validation() {
        let f = TimeSeries::from_fn(0.1, 10, |t| t).unwrap();
        assert!(rl_integral_left(&f, 0.0).is_err());
        assert!(rl_integral_left(&f, 1.0).is_err());
        assert!(rl_derivative_right(&f, 1.5).is_err());
    }
}
