//! The `verify-all` suite: every structural identity the library relies on,
//! run end to end with pass/fail lines and a deterministic report.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hheat_core::bump::smooth_transition;
use hheat_core::frac::{
    integration_by_parts_defect, rl_derivative_left, rl_derivative_right, rl_integral_left,
    singular_weights, FracScheme, TimeSeries, W1Kind,
};
use hheat_core::grid::{GridField, GridSpec, MAX_AXES};
use hheat_core::kernel::{kernel_value, sample_kernel, semigroup_defect, KernelQuadrature};
use hheat_core::point::{dilate, group_inverse, koranyi_norm_coords, GroupPoint};
use hheat_core::semigroup::{heisenberg_convolve, lp_lq_decay_fit, SemigroupBackend};
use hheat_core::solver::theta_field;
use hheat_core::stencil::sub_laplacian;
use hheat_core::{frac::w1_exact, Result};

use crate::cutoff::verify_cutoff;
use crate::exponents::exponents;
use crate::report::{fmt_e, VERSION};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
    pub seed: u64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version: {VERSION}");
        let _ = writeln!(out, "seed: {}", self.seed);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.all_passed() { "ok" } else { "failed" }
        );
        out
    }
}

/// Grid knobs for the suite; defaults fit a laptop-scale run.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    /// points per axis for the kernel-mass check
    pub mass_points_xy: usize,
    pub mass_points_tau: usize,
    /// lambda nodes for kernel sampling
    pub lambda_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            mass_points_xy: 48,
            mass_points_tau: 48,
            lambda_points: 2048,
        }
    }
}

fn check(
    checks: &mut Vec<CheckOutcome>,
    name: &'static str,
    passed: bool,
    detail: String,
) {
    checks.push(CheckOutcome {
        name,
        passed,
        detail,
    });
}

fn run_check<F: FnOnce() -> Result<(bool, String)>>(
    checks: &mut Vec<CheckOutcome>,
    name: &'static str,
    f: F,
) {
    match f() {
        Ok((passed, detail)) => check(checks, name, passed, detail),
        Err(e) => check(checks, name, false, format!("error: {e}")),
    }
}

pub fn verify_all(cfg: &VerifyConfig, seed: u64) -> VerifyReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // kernel center value against the closed form 1/64 derived from the
    // classical integral of u/sinh u, itself re-derived here by Simpson
    run_check(&mut checks, "kernel_center_value", || {
        let m = 200_000;
        let h = 40.0 / m as f64;
        let f = |u: f64| if u == 0.0 { 1.0 } else { u / u.sinh() };
        let mut acc = f(0.0) + f(40.0);
        for j in 1..m {
            acc += if j % 2 == 1 { 4.0 } else { 2.0 } * f(j as f64 * h);
        }
        let classical = acc * h / 3.0;
        let classical_ok = (classical - PI * PI / 4.0).abs() <= 1e-9;
        let v = kernel_value(&GroupPoint::identity(1), 1.0, &KernelQuadrature::for_time(1.0))?;
        let rel = (v - 1.0 / 64.0).abs() * 64.0;
        Ok((
            classical_ok && rel <= 1e-6,
            format!("value={} rel_err={} oracle_int={}", fmt_e(v), fmt_e(rel), fmt_e(classical)),
        ))
    });

    // unit mass of the sampled kernel on the documented box
    run_check(&mut checks, "kernel_mass", || {
        let t = 0.5;
        let spec = GridSpec::new(
            1,
            9.0 * t.sqrt(),
            40.0 * t,
            cfg.mass_points_xy,
            cfg.mass_points_tau,
        )?;
        let q = KernelQuadrature::for_time(t).with_points(cfg.lambda_points);
        let k = sample_kernel(t, &spec, &q)?;
        let mass = k.field.integral_trapezoid();
        let err = (mass - 1.0).abs();
        Ok((
            err <= 1e-3 && k.field.min_value() >= 0.0,
            format!("mass={} err={} clamped={}", fmt_e(mass), fmt_e(err), k.clamped),
        ))
    });

    // parabolic scaling h_{r^2 t}(delta_r eta) = r^-Q h_t(eta)
    {
        let mut worst = 0.0f64;
        let mut failed = false;
        for _ in 0..10 {
            let eta = GroupPoint::new(
                vec![rng.gen_range(-1.5..1.5)],
                vec![rng.gen_range(-1.5..1.5)],
                rng.gen_range(-3.0..3.0),
            )
            .unwrap();
            for &(r, t) in &[(0.5, 1.0), (2.0, 0.25), (0.5, 0.25), (2.0, 1.0)] {
                let big = dilate(&eta, r).unwrap();
                let res = (|| -> Result<f64> {
                    let lhs =
                        kernel_value(&big, r * r * t, &KernelQuadrature::for_time(r * r * t))?;
                    let rhs = r.powi(-4) * kernel_value(&eta, t, &KernelQuadrature::for_time(t))?;
                    Ok((lhs - rhs).abs() / rhs.abs().max(1e-300))
                })();
                match res {
                    Ok(rel) => worst = worst.max(rel),
                    Err(_) => failed = true,
                }
            }
        }
        check(
            &mut checks,
            "kernel_scaling",
            !failed && worst <= 1e-6,
            format!("worst_rel={}", fmt_e(worst)),
        );
    }

    // symmetry under group inversion
    {
        let mut worst = 0.0f64;
        let q = KernelQuadrature::for_time(0.7);
        for _ in 0..10 {
            let eta = GroupPoint::new(
                vec![rng.gen_range(-1.5..1.5)],
                vec![rng.gen_range(-1.5..1.5)],
                rng.gen_range(-3.0..3.0),
            )
            .unwrap();
            let a = kernel_value(&eta, 0.7, &q).unwrap_or(f64::NAN);
            let b = kernel_value(&group_inverse(&eta), 0.7, &q).unwrap_or(f64::NAN);
            worst = worst.max((a - b).abs() / a.abs().max(1e-300));
        }
        check(
            &mut checks,
            "kernel_symmetry",
            worst <= 1e-10,
            format!("worst_rel={}", fmt_e(worst)),
        );
    }

    // quadrature convergence: doubling the nodes must not move values
    {
        let t = 0.8;
        let base = KernelQuadrature::for_time(t);
        let fine = base.with_points(2 * base.lambda_points);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let eta = GroupPoint::new(
                vec![rng.gen_range(-2.0..2.0)],
                vec![rng.gen_range(-2.0..2.0)],
                rng.gen_range(-4.0..4.0),
            )
            .unwrap();
            let a = kernel_value(&eta, t, &base).unwrap_or(f64::NAN);
            let b = kernel_value(&eta, t, &fine).unwrap_or(f64::NAN);
            worst = worst.max((a - b).abs() / b.abs().max(1e-12));
        }
        check(
            &mut checks,
            "kernel_quadrature_convergence",
            worst <= 1e-8,
            format!("worst_rel={}", fmt_e(worst)),
        );
    }

    // convolution semigroup law on the standard defect box
    run_check(&mut checks, "semigroup_law_defect", || {
        let spec = GridSpec::new(1, 4.5, 8.0, 27, 65)?;
        let q = KernelQuadrature::for_time(0.5).with_points(cfg.lambda_points);
        let defect = semigroup_defect(0.5, 0.5, &spec, &q)?;
        let peak = kernel_value(&GroupPoint::identity(1), 1.0, &KernelQuadrature::for_time(1.0))?;
        Ok((
            defect <= 5e-3 * peak,
            format!("defect={} peak={}", fmt_e(defect), fmt_e(peak)),
        ))
    });

    // Young's inequality in L1
    run_check(&mut checks, "young_l1", || {
        let spec = GridSpec::new(1, 2.0, 4.0, 15, 15)?;
        let f = GridField::from_fn(spec, |c| {
            let nrm = koranyi_norm_coords(c);
            smooth_transition(nrm * nrm / 1.44)
        });
        let g = GridField::from_fn(spec, |c| {
            (-(c[0] * c[0] + c[1] * c[1]) - 0.25 * c[2] * c[2]).exp()
        });
        let conv = heisenberg_convolve(&f, &g)?;
        let lhs = conv.lq_norm(1.0);
        let rhs = f.lq_norm(1.0) * g.lq_norm(1.0);
        Ok((
            lhs <= rhs * (1.0 + 1e-6),
            format!("lhs={} rhs={}", fmt_e(lhs), fmt_e(rhs)),
        ))
    });

    // L^p-L^q decay exponents
    run_check(&mut checks, "lp_lq_decay", || {
        let spec = GridSpec::new(1, 10.0, 70.0, 21, 141)?;
        let f = GridField::from_fn(spec, |c| {
            let nrm = koranyi_norm_coords(c);
            smooth_transition(nrm * nrm / 0.16)
        });
        let sup_fit = lp_lq_decay_fit(
            &f,
            1.0,
            f64::INFINITY,
            &[1.0, 2.0, 4.0, 7.0, 10.0],
            SemigroupBackend::KernelConvolution,
        )?;
        let times = [0.5, 1.0, 2.0, 3.5, 5.0];
        let l1_fit = lp_lq_decay_fit(&f, 1.0, 1.0, &times, SemigroupBackend::KernelConvolution)?;
        let l2_fit = lp_lq_decay_fit(&f, 1.0, 2.0, &times, SemigroupBackend::KernelConvolution)?;
        let ok = (sup_fit.fitted_slope + 2.0).abs() <= 0.15
            && l1_fit.fitted_slope.abs() <= 0.05
            && (l2_fit.fitted_slope + 1.0).abs() <= 0.15;
        Ok((
            ok,
            format!(
                "sup_slope={} l1_slope={} l2_slope={}",
                fmt_e(sup_fit.fitted_slope),
                fmt_e(l1_fit.fitted_slope),
                fmt_e(l2_fit.fitted_slope)
            ),
        ))
    });

    // product-integration weights telescope exactly
    run_check(&mut checks, "frac_weights_telescoping", || {
        let mut worst = 0.0f64;
        for &g in &[0.0, 0.3, 0.5, 0.9] {
            let scheme = FracScheme::new(g, 1e-3, 10_000)?;
            for k in [1usize, 100, 10_000] {
                let sum: f64 = (0..k).map(|j| scheme.weight(k, j)).sum();
                let exact = scheme.cumulative_exact(k);
                worst = worst.max((sum - exact).abs() / exact.max(1.0));
            }
            let w = singular_weights(g, 1e-3, 100)?;
            if w.iter().any(|&x| x <= 0.0) {
                return Ok((false, "nonpositive weight".to_string()));
            }
        }
        Ok((worst <= 1e-12, format!("worst_rel={}", fmt_e(worst))))
    });

    // right fractional derivative against the closed-form oracle, with the
    // first-order refinement ratio
    run_check(&mut checks, "frac_derivative_oracle", || {
        let horizon = 2.0;
        let sigma = 3.0;
        let sup_err = |steps: usize, a: f64| -> Result<f64> {
            let f = TimeSeries::from_fn(horizon / steps as f64, steps, |t| {
                (1.0 - t / horizon).powf(sigma)
            })?;
            let d = rl_derivative_right(&f, a)?;
            let mut sup = 0.0f64;
            for k in 0..=steps {
                let t = d.time(k);
                if t < 0.1 * horizon || t > 0.9 * horizon {
                    continue;
                }
                let exact = w1_exact(t, horizon, sigma, a, W1Kind::Alpha)?;
                sup = sup.max((d.values()[k] - exact).abs() / exact.abs());
            }
            Ok(sup)
        };
        let mut detail = String::new();
        let mut ok = true;
        for &a in &[0.3, 0.5, 0.7] {
            let coarse = sup_err(2048, a)?;
            let fine = sup_err(4096, a)?;
            let ratio = coarse / fine;
            ok &= fine <= 1e-2 && (1.6..=2.4).contains(&ratio);
            let _ = write!(detail, "a={a}:err={},ratio={} ", fmt_e(fine), fmt_e(ratio));
        }
        Ok((ok, detail.trim().to_string()))
    });

    // (I3) round-trip and the integration-by-parts identity
    run_check(&mut checks, "frac_roundtrip_and_parts", || {
        let steps = 4096;
        let f = TimeSeries::from_fn(1.0 / steps as f64, steps, |t| t)?;
        let i = rl_integral_left(&f, 0.5)?;
        let d = rl_derivative_left(&i, 0.5)?;
        let mut sup_abs = 0.0f64;
        for k in 0..=steps {
            let t = f.time(k);
            if t < 0.1 || t > 0.9 {
                continue;
            }
            sup_abs = sup_abs.max((d.values()[k] - t).abs());
        }
        let bump = TimeSeries::from_fn(1.0 / steps as f64, steps, |t| {
            (t * (1.0 - t) * 4.0).powi(3)
        })?;
        let defect = integration_by_parts_defect(&bump, &bump, 0.5)?;
        let dg = rl_derivative_left(&bump, 0.5)?;
        let scale: f64 = bump
            .values()
            .iter()
            .zip(dg.values())
            .map(|(a, b)| (a * b).abs())
            .fold(0.0, f64::max);
        let ok = sup_abs <= 1e-3 && defect <= 1e-3 * scale.max(1.0);
        Ok((
            ok,
            format!("roundtrip_abs={} parts_defect={} scale={}", fmt_e(sup_abs), fmt_e(defect), fmt_e(scale)),
        ))
    });

    // cutoff family: uniform constant across R
    run_check(&mut checks, "cutoff_lemma", || {
        let spec = GridSpec::new(1, 4.2, 16.8, 121, 141)?;
        let report = verify_cutoff(&[4.0, 8.0, 16.0], 2.0, &spec)?;
        let mut detail = String::new();
        for row in &report.rows {
            let _ = write!(detail, "R={}:c_hat={} ", row.r, fmt_e(row.c_hat));
        }
        let _ = write!(detail, "spread={}", fmt_e(report.spread));
        Ok((report.spread < 2.0, detail))
    });

    // moment weight: L Theta >= -2 eps (Q+2) Theta up to estimated FD error
    run_check(&mut checks, "theta_lemma", || {
        let coarse_m = 33;
        let spec = GridSpec::new(1, 3.0, 9.0, coarse_m, coarse_m)?;
        let fine = GridSpec::new(1, 3.0, 9.0, 2 * coarse_m - 1, 2 * coarse_m - 1)?;
        let eps = 1.0 / 12.0;
        let q_dim = 4.0;
        let theta_c = theta_field(&spec, 1.0, eps)?;
        let theta_f = theta_field(&fine, 1.0, eps)?;
        let lap_c = sub_laplacian(&theta_c)?;
        let lap_f = sub_laplacian(&theta_f)?;
        let bound = -2.0 * eps * (q_dim + 2.0);
        // fine-grid thetas are normalized on the same box, so the two
        // normalizations differ only at quadrature accuracy; rescale
        let ratio = theta_c.values()[0] / theta_f.values()[0];
        let mut worst_margin = f64::INFINITY;
        let mut ok = true;
        let mut sub = [0usize; MAX_AXES];
        for idx in 0..spec.len() {
            spec.decode(idx, &mut sub[..3]);
            if !spec.is_interior(&sub[..3], 1) {
                continue;
            }
            let fine_sub = [2 * sub[0], 2 * sub[1], 2 * sub[2]];
            let fidx = fine.index_of(&fine_sub);
            let lc = lap_c.values()[idx];
            let lf = lap_f.values()[fidx] * ratio;
            let est = (lc - lf).abs() + 1e-12;
            let rhs = bound * theta_c.values()[idx] - 5.0 * est;
            let margin = lc - rhs;
            worst_margin = worst_margin.min(margin);
            if margin < 0.0 {
                ok = false;
            }
        }
        Ok((ok, format!("worst_margin={}", fmt_e(worst_margin))))
    });

    // algebraic identity between the two forms of the dichotomy exponent
    {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let n = rng.gen_range(1usize..=6);
            let gamma = rng.gen_range(0.0..0.999);
            let r = exponents(n, gamma, 2.0, None).unwrap();
            let alt = (n as f64 + 2.0) / (n as f64 + gamma);
            worst = worst.max((r.p_gamma - alt).abs());
        }
        check(
            &mut checks,
            "exponent_identity",
            worst <= 1e-12,
            format!("worst_abs={}", fmt_e(worst)),
        );
    }

    // p above critical implies the scaling norm index exceeds 1
    {
        let mut ok = true;
        let mut count = 0;
        for _ in 0..100 {
            let n = rng.gen_range(1usize..=4);
            let gamma = rng.gen_range(0.05..0.95);
            let base = exponents(n, gamma, 2.0, None).unwrap();
            if base.p_c.is_finite() {
                let p = base.p_c + rng.gen_range(0.01..3.0);
                let r = exponents(n, gamma, p, None).unwrap();
                ok &= r.q_sc > 1.0;
                count += 1;
            }
        }
        check(
            &mut checks,
            "qsc_supercritical",
            ok && count > 0,
            format!("samples={count}"),
        );
    }

    VerifyReport {
        checks,
        seed,
    }
}
