//! Pointwise evaluation of the heat kernel on H^n.
//!
//! Fourier transform in tau turns the sub-Laplacian into a twisted harmonic
//! oscillator in the horizontal variables; the Mehler formula then gives the
//! closed λ-integral
//!
//! ```text
//! h_t(x, y, tau) = (2 pi^(n+1))^-1 *
//!     Int_R (lam / sinh(4 t lam))^n
//!           exp(-|z|^2 lam / tanh(4 t lam)) cos(lam tau) d lam
//! ```
//!
//! with `|z|^2 = |x|^2 + |y|^2`. The integrand is even in `lam` (odd part
//! cancels), so the integral is evaluated as a cosine transform over
//! `[0, lambda_max]`, which halves the work and makes the result real by
//! construction. At `lam = 0` the limits `lam/sinh(4 t lam) -> 1/(4t)` and
//! `lam/tanh(4 t lam) -> 1/(4t)` apply.
//!
//! This normalization is the one generated by the discrete sub-Laplacian in
//! [`crate::stencil`]: unit mass, the parabolic scaling law
//! `h_{r^2 t}(r x, r y, r^2 s) = r^-Q h_t(x, y, s)`, symmetry under group
//! inversion, and the convolution semigroup law all hold and are enforced
//! by the verification suite.

use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::exec;
use crate::fit::fit_line;
use crate::grid::{GridField, GridSpec, MAX_AXES};
use crate::point::{koranyi_norm_coords, GroupPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Uniform nodes on `[0, lambda_max]` exploiting evenness; spectrally
    /// accurate for this smooth, exponentially decaying integrand.
    Trapezoid,
    /// Gauss-Legendre on `[-lambda_max, lambda_max]`.
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Truncation of the lambda line. The tail is bounded by
    /// `exp(-4 n t lambda_max)`, so `4 t lambda_max >= 30` holds for the
    /// default tolerance.
    pub lambda_max: f64,
    pub lambda_points: usize,
    pub rule: QuadratureRule,
}

impl KernelQuadrature {
    /// Default rule for evaluation time `t`: `lambda_max = max(30/(4t), 7.5)`,
    /// 2048 trapezoid nodes.
    pub fn for_time(t: f64) -> Self {
        KernelQuadrature {
            lambda_max: (30.0 / (4.0 * t)).max(7.5),
            lambda_points: 2048,
            rule: QuadratureRule::Trapezoid,
        }
    }

    pub fn with_points(self, lambda_points: usize) -> Self {
        KernelQuadrature {
            lambda_points,
            ..self
        }
    }
}

/// Precomputed per-node factors shared by every spatial point.
struct KernelTables {
    /// node positions (for the cosine phase)
    nodes: Vec<f64>,
    /// quadrature weight times (lam/sinh(4 t lam))^n
    wa: Vec<f64>,
    /// lam / tanh(4 t lam)
    b: Vec<f64>,
    prefactor: f64,
}

fn sinh_ratio(lam: f64, four_t: f64) -> f64 {
    // lam / sinh(4 t lam), with the 1/(4t) limit at lam = 0
    let r = four_t * lam;
    if r.abs() < 1e-4 {
        1.0 / (four_t * (1.0 + r * r / 6.0 * (1.0 + r * r / 20.0)))
    } else {
        lam / r.sinh()
    }
}

fn tanh_ratio(lam: f64, four_t: f64) -> f64 {
    // lam / tanh(4 t lam), with the 1/(4t) limit at lam = 0
    let r = four_t * lam;
    if r.abs() < 1e-4 {
        (1.0 + r * r / 3.0 * (1.0 - r * r / 15.0)) / four_t
    } else {
        lam / r.tanh()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for k in 0..m.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_m(x) and P_m'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[k] = -x;
        nodes[m - 1 - k] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[k] = w;
        weights[m - 1 - k] = w;
    }
    (nodes, weights)
}

impl KernelTables {
    fn build(n: usize, t: f64, q: &KernelQuadrature) -> Result<Self> {
        if !(t > 0.0) {
            return Err(CoreError::NonpositiveTime(t));
        }
        if q.lambda_points < 2 || !(q.lambda_max > 0.0) {
            return Err(CoreError::InvalidParameter(
                "quadrature needs lambda_max > 0 and at least 2 nodes".into(),
            ));
        }
        let four_t = 4.0 * t;
        let m = q.lambda_points;
        let (nodes, weights): (Vec<f64>, Vec<f64>) = match q.rule {
            QuadratureRule::Trapezoid => {
                // cosine transform: 2 * Int_0^L, endpoints at half weight
                let h = q.lambda_max / (m - 1) as f64;
                let nodes = (0..m).map(|j| j as f64 * h).collect::<Vec<_>>();
                let weights = (0..m)
                    .map(|j| if j == 0 || j == m - 1 { h } else { 2.0 * h })
                    .collect();
                (nodes, weights)
            }
            QuadratureRule::GaussLegendre => {
                let (x, w) = gauss_legendre(m);
                (
                    x.iter().map(|v| v * q.lambda_max).collect(),
                    w.iter().map(|v| v * q.lambda_max).collect(),
                )
            }
        };
        let mut wa = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for (j, &lam) in nodes.iter().enumerate() {
            let a = sinh_ratio(lam, four_t).powi(n as i32);
            wa.push(weights[j] * a);
            b.push(tanh_ratio(lam, four_t));
        }
        let prefactor = 1.0 / (2.0 * PI.powi(n as i32 + 1));
        Ok(KernelTables {
            nodes,
            wa,
            b,
            prefactor,
        })
    }

    /// Kernel value at horizontal radius^2 `z_sq` and vertical coordinate `tau`.
    fn eval(&self, z_sq: f64, tau: f64) -> f64 {
        let mut acc = 0.0;
        let mut max_env = 0.0f64;
        for j in 0..self.nodes.len() {
            let env = self.wa[j] * (-z_sq * self.b[j]).exp();
            let e = env.abs();
            if e > max_env {
                max_env = e;
            } else if e < max_env * 1e-22 {
                // envelope is monotone past its peak; the rest is noise
                break;
            }
            acc += env * (self.nodes[j] * tau).cos();
        }
        self.prefactor * acc
    }
}

/// Heat-kernel value `h_t(eta)` by quadrature of the lambda integral.
pub fn kernel_value(eta: &GroupPoint, t: f64, q: &KernelQuadrature) -> Result<f64> {
    let tables = KernelTables::build(eta.dim(), t, q)?;
    let v = tables.eval(eta.horizontal_sq(), eta.tau);
    if !v.is_finite() {
        return Err(CoreError::NumericalFailure(format!(
            "kernel quadrature produced {v}"
        )));
    }
    Ok(v)
}

/// A kernel sampled on a grid, with tiny negative quadrature noise clamped
/// to zero and counted.
pub struct SampledKernel {
    pub field: GridField,
    /// Number of points whose raw value fell in [-1e-10, 0).
    pub clamped: usize,
}

/// Threshold below which a negative value is a genuine failure rather than
/// benign quadrature noise.
const CLAMP_FLOOR: f64 = -1e-10;

pub fn sample_kernel(t: f64, spec: &GridSpec, q: &KernelQuadrature) -> Result<SampledKernel> {
    let tables = KernelTables::build(spec.n(), t, q)?;
    let n = spec.n();
    let spec = *spec;
    let mut field = GridField::zeros(spec);
    exec::fill_indexed(field.values_mut(), |idx| {
        let mut coords = [0.0f64; MAX_AXES];
        spec.point_coords(idx, &mut coords);
        let mut z_sq = 0.0;
        for c in &coords[..2 * n] {
            z_sq += c * c;
        }
        tables.eval(z_sq, coords[2 * n])
    });
    let mut clamped = 0usize;
    for v in field.values_mut() {
        if !v.is_finite() {
            return Err(CoreError::NumericalFailure(
                "kernel sampling produced a non-finite value".into(),
            ));
        }
        if *v < 0.0 {
            if *v < CLAMP_FLOOR {
                return Err(CoreError::NumericalFailure(format!(
                    "kernel value {v} below the clamp floor"
                )));
            }
            *v = 0.0;
            clamped += 1;
        }
    }
    Ok(SampledKernel { field, clamped })
}

/// Max-norm of `h_t * h_s - h_{t+s}` sampled on `spec`, using the grid
/// convolution from [`crate::semigroup`].
pub fn semigroup_defect(t: f64, s: f64, spec: &GridSpec, q: &KernelQuadrature) -> Result<f64> {
    let kt = sample_kernel(t, spec, q)?;
    let ks = sample_kernel(s, spec, &KernelQuadrature::for_time(s).with_points(q.lambda_points))?;
    let kts = sample_kernel(
        t + s,
        spec,
        &KernelQuadrature::for_time(t + s).with_points(q.lambda_points),
    )?;
    let conv = crate::semigroup::heisenberg_convolve(&kt.field, &ks.field)?;
    let len = conv.len();
    let cv = conv.values();
    let dv = kts.field.values();
    Ok(exec::max_by(len, |i| (cv[i] - dv[i]).abs()))
}

/// Least-squares fit of the Gaussian envelope `h_t ~ t^{-Q/2} exp(-c |eta|^2 / t)`
/// in log space, with the extreme ratios kernel/envelope over the sample.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeFit {
    /// fitted decay constant c (in Koranyi distance squared over t)
    pub c: f64,
    /// smallest and largest ratio h_t / (t^{-Q/2} exp(-c |eta|^2/t))
    pub ratio_min: f64,
    pub ratio_max: f64,
}

pub fn gaussian_envelope_fit(field: &GridField, t: f64) -> Option<EnvelopeFit> {
    let spec = *field.spec();
    let q_half = spec.homogeneous_dim() as f64 / 2.0;
    let mut rho = Vec::new();
    let mut logv = Vec::new();
    let mut coords = [0.0f64; MAX_AXES];
    for idx in 0..spec.len() {
        let v = field.values()[idx];
        if v > 1e-280 {
            spec.point_coords(idx, &mut coords);
            let nrm = koranyi_norm_coords(&coords[..spec.axes()]);
            rho.push(nrm * nrm / t);
            logv.push(v.ln());
        }
    }
    let fit = fit_line(&rho, &logv)?;
    let c = -fit.slope;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..rho.len() {
        // log of ratio against the fitted-c envelope with amplitude t^{-Q/2}
        let lr = logv[i] + q_half * t.ln() + c * rho[i];
        lo = lo.min(lr);
        hi = hi.max(lr);
    }
    Some(EnvelopeFit {
        c,
        ratio_min: lo.exp(),
        ratio_max: hi.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{dilate, group_inverse};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn pt(x: f64, y: f64, tau: f64) -> GroupPoint {
        GroupPoint::new(vec![x], vec![y], tau).unwrap()
    }

    /// Independent 1-D check of the classical value Int_0^inf u/sinh u du = pi^2/4,
    /// which fixes the center value h_1(0) = 1/64 in closed form:
    /// (2 pi^2)^-1 * 2 * (1/16) * (pi^2/4).
    #[test]
    fn center_value_closed_form() {
        // Simpson on [h, 40] plus the analytic limit at 0 handled by the
        // integrand's series; fine enough at this step size.
        let m = 400_000;
        let h = 40.0 / m as f64;
        let f = |u: f64| {
            if u == 0.0 {
                1.0
            } else {
                u / u.sinh()
            }
        };
        let mut acc = f(0.0) + f(40.0);
        for j in 1..m {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(j as f64 * h);
        }
        let integral = acc * h / 3.0;
        assert_relative_eq!(integral, PI * PI / 4.0, max_relative = 1e-10);

        let q = KernelQuadrature::for_time(1.0);
        let v = kernel_value(&GroupPoint::identity(1), 1.0, &q).unwrap();
        assert_relative_eq!(v, 1.0 / 64.0, max_relative = 1e-8);
    }

    #[test]
    fn rejects_nonpositive_time() {
        let q = KernelQuadrature::for_time(1.0);
        assert!(kernel_value(&GroupPoint::identity(1), 0.0, &q).is_err());
        assert!(kernel_value(&GroupPoint::identity(1), -1.0, &q).is_err());
    }

    #[test]
    fn parabolic_scaling_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &t in &[0.25, 1.0] {
            for &r in &[0.5, 2.0] {
                for _ in 0..6 {
                    let eta = pt(
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-3.0..3.0),
                    );
                    let lhs = kernel_value(
                        &dilate(&eta, r).unwrap(),
                        r * r * t,
                        &KernelQuadrature::for_time(r * r * t),
                    )
                    .unwrap();
                    let rhs = r.powi(-4) // Q = 4 for n = 1
                        * kernel_value(&eta, t, &KernelQuadrature::for_time(t)).unwrap();
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn symmetric_under_group_inversion() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q = KernelQuadrature::for_time(0.7);
        for _ in 0..10 {
            let eta = pt(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-3.0..3.0),
            );
            let a = kernel_value(&eta, 0.7, &q).unwrap();
            let b = kernel_value(&group_inverse(&eta), 0.7, &q).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn mass_is_one_and_improves_with_box_size() {
        let t = 0.25;
        let q = KernelQuadrature::for_time(t);
        let mut errs = Vec::new();
        for (hxy, htau, m_xy, m_tau) in [(3.0, 6.0, 31, 41), (4.5, 10.0, 41, 61)] {
            let spec = GridSpec::new(1, hxy, htau, m_xy, m_tau).unwrap();
            let k = sample_kernel(t, &spec, &q).unwrap();
            errs.push((k.field.integral_trapezoid() - 1.0).abs());
        }
        assert!(errs[1] <= 1.2e-3, "mass error {} too large", errs[1]);
        assert!(errs[1] <= errs[0] + 1e-12, "error must shrink with the box");
    }

    #[test]
    fn sampling_is_nonnegative_after_clamp() {
        let spec = GridSpec::new(1, 4.0, 10.0, 25, 33).unwrap();
        let k = sample_kernel(0.5, &spec, &KernelQuadrature::for_time(0.5)).unwrap();
        assert!(k.field.min_value() >= 0.0);
        // clamp count is part of the report contract
        assert!(k.clamped <= k.field.len());
    }

    #[test]
    fn quadrature_convergence_past_the_knee() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t = 0.8;
        let base = KernelQuadrature::for_time(t);
        let fine = base.with_points(2 * base.lambda_points);
        for _ in 0..10 {
            let eta = pt(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-4.0..4.0),
            );
            let a = kernel_value(&eta, t, &base).unwrap();
            let b = kernel_value(&eta, t, &fine).unwrap();
            assert!(
                (a - b).abs() <= 1e-8 * b.abs().max(1e-12),
                "doubling nodes moved the value: {a} vs {b}"
            );
        }
    }

    #[test]
    fn gauss_legendre_agrees_with_trapezoid() {
        let t = 0.6;
        let trap = KernelQuadrature::for_time(t);
        let gl = KernelQuadrature {
            rule: QuadratureRule::GaussLegendre,
            ..trap
        };
        for eta in [pt(0.0, 0.0, 0.0), pt(0.8, -0.3, 1.1), pt(1.5, 1.5, -2.0)] {
            let a = kernel_value(&eta, t, &trap).unwrap();
            let b = kernel_value(&eta, t, &gl).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn envelope_fit_is_bounded_both_sides() {
        let spec = GridSpec::new(1, 3.0, 6.0, 25, 33).unwrap();
        let t = 0.5;
        let k = sample_kernel(t, &spec, &KernelQuadrature::for_time(t)).unwrap();
        let fit = gaussian_envelope_fit(&k.field, t).unwrap();
        assert!(fit.c > 0.0 && fit.c.is_finite());
        assert!(fit.ratio_min > 0.0);
        assert!(fit.ratio_max.is_finite());
        assert!(fit.ratio_min <= fit.ratio_max);
    }

    #[test]
    fn horizontal_gradient_l1_scales_like_inverse_sqrt_t() {
        // || grad_H h_t ||_1 * sqrt(t) should stay bounded across t
        let mut products = Vec::new();
        for &t in &[0.25f64, 0.5, 1.0, 2.0] {
            let s = t.sqrt();
            let spec = GridSpec::new(1, 7.0 * s, 14.0 * t, 29, 37).unwrap();
            let k = sample_kernel(t, &spec, &KernelQuadrature::for_time(t)).unwrap();
            let grad = crate::stencil::apply_vector_fields(&k.field).unwrap();
            let l1 = grad.horizontal_magnitude().integral_trapezoid();
            products.push(l1 * s);
        }
        let lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = products.iter().cloned().fold(0.0f64, f64::max);
        assert!(
            hi / lo < 2.0,
            "gradient L1 * sqrt(t) varies too much: {:?}",
            products
        );
    }
}
