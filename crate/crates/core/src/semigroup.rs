//! Group convolution on grids and the heat semigroup `S(t)`.
//!
//! Two interchangeable backends realize `S(t)`:
//!
//! * `KernelConvolution`: sample the heat kernel and convolve on the
//!   right, `S(t) f = f * h_t` (right convolution is what commutes with
//!   the left-invariant generator). The sampled kernel resolves its tau
//!   profile only when `h_tau` is a few times smaller than `4t`; below
//!   that the sampled kernel aliases and the backend loses accuracy.
//! * `FdStepping`: forward-Euler substeps `u <- u + dt L u` with the
//!   discrete sub-Laplacian (zero ghost values outside the box) and the
//!   substep count chosen from an explicit stability bound.
//!
//! The convolution `(f * g)(eta) = Int f(eta o xi^-1) g(xi) d xi` uses the
//! plain product-measure sum over the grid (Lebesgue measure is the Haar
//! measure here), interpolating `f` multilinearly at the off-grid points
//! `eta o xi^-1` with zero extension outside the box. Because the x/y parts
//! of `eta o xi^-1` are differences of grid coordinates, the interpolation
//! is nontrivial only along tau on odd-sized axes. Points where `|g|` is
//! below `1e-14 * max|g|` are skipped; the kernel's Gaussian decay makes
//! this truncation cheap and controlled.

use crate::error::{CoreError, Result};
use crate::exec;
use crate::fit::fit_line;
use crate::grid::{GridField, GridSpec, MAX_AXES};
use crate::kernel::{sample_kernel, KernelQuadrature};
use crate::stencil::{sub_laplacian_into, BoundaryMode};

/// Relative cutoff below which second-factor values are ignored.
const SUPPORT_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupBackend {
    KernelConvolution,
    FdStepping,
}

impl SemigroupBackend {
    pub fn name(&self) -> &'static str {
        match self {
            SemigroupBackend::KernelConvolution => "kernel",
            SemigroupBackend::FdStepping => "fd",
        }
    }
}

struct SupportPoint {
    coords: [f64; MAX_AXES],
    /// g value times the cell volume
    weight: f64,
}

/// Heisenberg group convolution of two fields on the same grid.
pub fn heisenberg_convolve(f: &GridField, g: &GridField) -> Result<GridField> {
    if f.spec() != g.spec() {
        return Err(CoreError::SpecMismatch);
    }
    let spec = *f.spec();
    let n = spec.n();
    let axes = spec.axes();
    let cellvol = spec.cell_volume();

    let gmax = g.sup_norm();
    let mut out = GridField::zeros(spec);
    if gmax == 0.0 {
        return Ok(out);
    }
    let cutoff = gmax * SUPPORT_CUTOFF;
    // support of g in linearization order
    let mut support: Vec<SupportPoint> = Vec::new();
    for (idx, &gv) in g.values().iter().enumerate() {
        if gv.abs() > cutoff {
            let mut coords = [0.0f64; MAX_AXES];
            spec.point_coords(idx, &mut coords);
            support.push(SupportPoint {
                coords,
                weight: gv * cellvol,
            });
        }
    }

    exec::fill_indexed(out.values_mut(), |idx| {
        let mut eta = [0.0f64; MAX_AXES];
        spec.point_coords(idx, &mut eta);
        let mut target = [0.0f64; MAX_AXES];
        let mut acc = 0.0;
        for s in &support {
            // eta o xi^{-1} = (x - x', y - y', tau - tau' + 2(x'.y - x.y'))
            let xi = &s.coords;
            let mut twist = 0.0;
            for i in 0..n {
                target[i] = eta[i] - xi[i];
                target[n + i] = eta[n + i] - xi[n + i];
                twist += xi[i] * eta[n + i] - eta[i] * xi[n + i];
            }
            target[2 * n] = eta[2 * n] - xi[2 * n] + 2.0 * twist;
            acc += s.weight * f.sample(&target[..axes]);
        }
        acc
    });
    Ok(out)
}

/// Largest forward-Euler step for which the explicit scheme with the
/// Eq.-style coefficients stays stable on this box. The tau coefficient
/// grows with the box radius, which makes this the main cost driver.
pub fn fd_stable_dt(spec: &GridSpec) -> f64 {
    let n = spec.n() as f64;
    let h_xy = spec.spacing_xy();
    let h_tau = spec.spacing_tau();
    let l = spec.half_width_xy();
    let max_horiz_sq = 2.0 * n * l * l;
    let denom = 4.0 * n / (h_xy * h_xy)
        + 8.0 * max_horiz_sq / (h_tau * h_tau)
        + 4.0 * n * l / (h_xy * h_tau);
    0.9 / denom
}

/// Substep count the fd backend uses to cover time `t`.
pub fn fd_substeps(spec: &GridSpec, t: f64) -> usize {
    if t <= 0.0 {
        return 0;
    }
    (t / fd_stable_dt(spec)).ceil().max(1.0) as usize
}

fn apply_fd(f: &GridField, t: f64) -> Result<GridField> {
    let spec = *f.spec();
    let m = fd_substeps(&spec, t);
    let dt = t / m as f64;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(CoreError::NumericalFailure(
            "stability bound unsatisfiable on this grid".into(),
        ));
    }
    let mut cur = f.clone();
    let mut lap = GridField::zeros(spec);
    for _ in 0..m {
        sub_laplacian_into(&cur, BoundaryMode::DirichletZero, &mut lap);
        exec::axpy(cur.values_mut(), dt, lap.values());
    }
    if !cur.all_finite() {
        return Err(CoreError::NumericalFailure(
            "fd stepping left the finite range".into(),
        ));
    }
    Ok(cur)
}

/// Applies the heat semigroup for time `t >= 0` with the chosen backend.
pub fn apply_semigroup(f: &GridField, t: f64, backend: SemigroupBackend) -> Result<GridField> {
    if t < 0.0 {
        return Err(CoreError::NonpositiveTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    match backend {
        SemigroupBackend::KernelConvolution => {
            // S(t) f = f * h_t: the kernel is the second factor, so the
            // support truncation prunes exactly where h_t is negligible,
            // and the flow commutes with left translations like the
            // generator does
            let k = sample_kernel(t, f.spec(), &KernelQuadrature::for_time(t))?;
            heisenberg_convolve(f, &k.field)
        }
        SemigroupBackend::FdStepping => apply_fd(f, t),
    }
}

/// Result of fitting `log ||S(t) f||_q` against `log t`.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub fitted_slope: f64,
    pub theoretical_slope: f64,
    pub slope_stderr: f64,
    pub norms: Vec<(f64, f64)>,
}

/// Fits the decay rate of `||S(t) f||_q` and returns it together with the
/// theoretical exponent `-(Q/2)(1/p - 1/q)`.
pub fn lp_lq_decay_fit(
    f: &GridField,
    p: f64,
    q: f64,
    times: &[f64],
    backend: SemigroupBackend,
) -> Result<DecayFit> {
    if !(1.0 <= p && p <= q) {
        return Err(CoreError::InvalidParameter(format!(
            "need 1 <= p <= q, got p={p}, q={q}"
        )));
    }
    if times.len() < 2 || times.windows(2).any(|w| w[0] >= w[1]) || times[0] <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "times must be positive and strictly increasing".into(),
        ));
    }
    if times[times.len() - 1] / times[0] < 10.0 * (1.0 - 1e-12) {
        return Err(CoreError::InvalidParameter(
            "times must span at least one decade".into(),
        ));
    }
    let mut xs = Vec::with_capacity(times.len());
    let mut ys = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let st = apply_semigroup(f, t, backend)?;
        let nrm = st.lq_norm(q);
        if !(nrm > 1e-300) {
            return Err(CoreError::BoxTooSmall);
        }
        norms.push((t, nrm));
        xs.push(t.ln());
        ys.push(nrm.ln());
    }
    let fit = fit_line(&xs, &ys).ok_or(CoreError::NumericalFailure("degenerate fit".into()))?;
    let q_h = f.spec().homogeneous_dim() as f64 / 2.0;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    Ok(DecayFit {
        fitted_slope: fit.slope,
        theoretical_slope: -q_h * (1.0 / p - inv_q),
        slope_stderr: fit.slope_stderr,
        norms,
    })
}
