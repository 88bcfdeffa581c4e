//! Finite-difference realizations of the left-invariant vector fields
//! `X_i = d/dx_i - 2 y_i d/dtau`, `Y_i = d/dy_i + 2 x_i d/dtau`,
//! `T = d/dtau`, and of the sub-Laplacian
//!
//! ```text
//! L f = Dx f + Dy f + 4 (|x|^2 + |y|^2) f_tt
//!       + 4 sum_i (x_i f_{y_i t} - y_i f_{x_i t})
//! ```
//!
//! Interior points use second-order central stencils; mixed derivatives use
//! the cross product of the two first-derivative stencils. Faces use either
//! one-sided second-order differences (for analyzing arbitrary fields) or a
//! ghost value of zero (for fields extended by zero outside the box, as in
//! the time stepper).

use crate::error::{CoreError, Result};
use crate::grid::{GridField, GridSpec, MAX_AXES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// One-sided differences at faces; right choice for smooth ambient fields.
    OneSided,
    /// The field is zero outside the box; central stencils with ghost zeros.
    DirichletZero,
}

#[derive(Clone, Copy)]
struct Stencil {
    offsets: [isize; 4],
    coeffs: [f64; 4],
    count: usize,
}

impl Stencil {
    const EMPTY: Stencil = Stencil {
        offsets: [0; 4],
        coeffs: [0.0; 4],
        count: 0,
    };
}

/// First derivative along one axis, divided by the spacing.
fn d1(i: usize, len: usize, h: f64, mode: BoundaryMode) -> Stencil {
    let mut s = Stencil::EMPTY;
    let mut push = |off: isize, c: f64| {
        s.offsets[s.count] = off;
        s.coeffs[s.count] = c / h;
        s.count += 1;
    };
    if i > 0 && i + 1 < len {
        push(-1, -0.5);
        push(1, 0.5);
    } else if i == 0 {
        match mode {
            BoundaryMode::OneSided => {
                push(0, -1.5);
                push(1, 2.0);
                push(2, -0.5);
            }
            BoundaryMode::DirichletZero => push(1, 0.5),
        }
    } else {
        match mode {
            BoundaryMode::OneSided => {
                push(0, 1.5);
                push(-1, -2.0);
                push(-2, 0.5);
            }
            BoundaryMode::DirichletZero => push(-1, -0.5),
        }
    }
    s
}

/// Second derivative along one axis, divided by the spacing squared.
fn d2(i: usize, len: usize, h: f64, mode: BoundaryMode) -> Stencil {
    let mut s = Stencil::EMPTY;
    let h2 = h * h;
    let mut push = |off: isize, c: f64| {
        s.offsets[s.count] = off;
        s.coeffs[s.count] = c / h2;
        s.count += 1;
    };
    if i > 0 && i + 1 < len {
        push(-1, 1.0);
        push(0, -2.0);
        push(1, 1.0);
    } else if i == 0 {
        match mode {
            BoundaryMode::OneSided => {
                if len >= 4 {
                    push(0, 2.0);
                    push(1, -5.0);
                    push(2, 4.0);
                    push(3, -1.0);
                } else {
                    push(0, 1.0);
                    push(1, -2.0);
                    push(2, 1.0);
                }
            }
            BoundaryMode::DirichletZero => {
                push(0, -2.0);
                push(1, 1.0);
            }
        }
    } else {
        match mode {
            BoundaryMode::OneSided => {
                if len >= 4 {
                    push(0, 2.0);
                    push(-1, -5.0);
                    push(-2, 4.0);
                    push(-3, -1.0);
                } else {
                    push(0, 1.0);
                    push(-1, -2.0);
                    push(-2, 1.0);
                }
            }
            BoundaryMode::DirichletZero => {
                push(0, -2.0);
                push(-1, 1.0);
            }
        }
    }
    s
}

fn strides(spec: &GridSpec) -> [usize; MAX_AXES] {
    let axes = spec.axes();
    let mut st = [0usize; MAX_AXES];
    st[axes - 1] = 1;
    for a in (0..axes - 1).rev() {
        st[a] = st[a + 1] * spec.axis_len(a + 1);
    }
    st
}

#[inline]
fn apply_1d(values: &[f64], idx: usize, stride: usize, s: &Stencil) -> f64 {
    let mut acc = 0.0;
    for k in 0..s.count {
        let j = (idx as isize + s.offsets[k] * stride as isize) as usize;
        acc += s.coeffs[k] * values[j];
    }
    acc
}

#[inline]
fn apply_cross(values: &[f64], idx: usize, sa: usize, a: &Stencil, sb: usize, b: &Stencil) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.count {
        let base = idx as isize + a.offsets[k] * sa as isize;
        let mut inner = 0.0;
        for l in 0..b.count {
            let j = (base + b.offsets[l] * sb as isize) as usize;
            inner += b.coeffs[l] * values[j];
        }
        acc += a.coeffs[k] * inner;
    }
    acc
}

/// The derivative fields `X_i f`, `Y_i f` (one per `i`) and `T f`.
pub struct FieldGradient {
    pub x: Vec<GridField>,
    pub y: Vec<GridField>,
    pub tau: GridField,
}

impl FieldGradient {
    /// Pointwise Euclidean length of the horizontal gradient (X_1..Y_n).
    pub fn horizontal_magnitude(&self) -> GridField {
        let spec = *self.x[0].spec();
        let mut out = GridField::zeros(spec);
        let n = self.x.len();
        let len = out.len();
        let mut acc = vec![0.0f64; len];
        for i in 0..n {
            let xv = self.x[i].values();
            let yv = self.y[i].values();
            for j in 0..len {
                acc[j] += xv[j] * xv[j] + yv[j] * yv[j];
            }
        }
        for (o, a) in out.values_mut().iter_mut().zip(acc) {
            *o = a.sqrt();
        }
        out
    }
}

/// Applies all vector fields with central differences (one-sided at faces).
pub fn apply_vector_fields(f: &GridField) -> Result<FieldGradient> {
    apply_vector_fields_mode(f, BoundaryMode::OneSided)
}

pub fn apply_vector_fields_mode(f: &GridField, mode: BoundaryMode) -> Result<FieldGradient> {
    if !f.all_finite() {
        return Err(CoreError::NumericalFailure(
            "vector fields need a finite field".into(),
        ));
    }
    let spec = *f.spec();
    let n = spec.n();
    let st = strides(&spec);
    let tau_axis = 2 * n;
    let values = f.values();

    let deriv = |field_axis: usize, twist_sign: f64, pair_axis: usize| -> GridField {
        // X_i = d/dx_i - 2 y_i d/dtau ; Y_i = d/dy_i + 2 x_i d/dtau
        let mut out = GridField::zeros(spec);
        crate::exec::fill_indexed(out.values_mut(), |idx| {
            let mut sub = [0usize; MAX_AXES];
            spec.decode(idx, &mut sub[..spec.axes()]);
            let s_main = d1(
                sub[field_axis],
                spec.axis_len(field_axis),
                spec.axis_spacing(field_axis),
                mode,
            );
            let s_tau = d1(
                sub[tau_axis],
                spec.axis_len(tau_axis),
                spec.axis_spacing(tau_axis),
                mode,
            );
            let pair_coord = spec.coord(pair_axis, sub[pair_axis]);
            apply_1d(values, idx, st[field_axis], &s_main)
                + twist_sign * 2.0 * pair_coord * apply_1d(values, idx, st[tau_axis], &s_tau)
        });
        out
    };

    let mut x_fields = Vec::with_capacity(n);
    let mut y_fields = Vec::with_capacity(n);
    for i in 0..n {
        x_fields.push(deriv(i, -1.0, n + i));
        y_fields.push(deriv(n + i, 1.0, i));
    }
    let mut tau_field = GridField::zeros(spec);
    crate::exec::fill_indexed(tau_field.values_mut(), |idx| {
        let mut sub = [0usize; MAX_AXES];
        spec.decode(idx, &mut sub[..spec.axes()]);
        let s_tau = d1(
            sub[tau_axis],
            spec.axis_len(tau_axis),
            spec.axis_spacing(tau_axis),
            mode,
        );
        apply_1d(values, idx, st[tau_axis], &s_tau)
    });
    Ok(FieldGradient {
        x: x_fields,
        y: y_fields,
        tau: tau_field,
    })
}

/// Discrete sub-Laplacian with one-sided stencils at faces.
pub fn sub_laplacian(f: &GridField) -> Result<GridField> {
    sub_laplacian_mode(f, BoundaryMode::OneSided)
}

pub fn sub_laplacian_mode(f: &GridField, mode: BoundaryMode) -> Result<GridField> {
    if !f.all_finite() {
        return Err(CoreError::NumericalFailure(
            "sub-Laplacian needs a finite field".into(),
        ));
    }
    let spec = *f.spec();
    let mut out = GridField::zeros(spec);
    sub_laplacian_into(f, mode, &mut out);
    Ok(out)
}

/// Core sweep, reusable without allocation by the time stepper.
pub(crate) fn sub_laplacian_into(f: &GridField, mode: BoundaryMode, out: &mut GridField) {
    let spec = *f.spec();
    let n = spec.n();
    let st = strides(&spec);
    let tau_axis = 2 * n;
    let values = f.values();
    let h_tau = spec.axis_spacing(tau_axis);
    let len_tau = spec.axis_len(tau_axis);

    crate::exec::fill_indexed(out.values_mut(), |idx| {
        let mut sub = [0usize; MAX_AXES];
        spec.decode(idx, &mut sub[..spec.axes()]);
        let s_tau1 = d1(sub[tau_axis], len_tau, h_tau, mode);
        let s_tau2 = d2(sub[tau_axis], len_tau, h_tau, mode);

        let mut acc = 0.0;
        let mut horiz_sq = 0.0;
        for i in 0..n {
            let (ax, ay) = (i, n + i);
            let xi = spec.coord(ax, sub[ax]);
            let yi = spec.coord(ay, sub[ay]);
            horiz_sq += xi * xi + yi * yi;

            let hx = spec.axis_spacing(ax);
            let hy = spec.axis_spacing(ay);
            let sx2 = d2(sub[ax], spec.axis_len(ax), hx, mode);
            let sy2 = d2(sub[ay], spec.axis_len(ay), hy, mode);
            acc += apply_1d(values, idx, st[ax], &sx2);
            acc += apply_1d(values, idx, st[ay], &sy2);

            let sx1 = d1(sub[ax], spec.axis_len(ax), hx, mode);
            let sy1 = d1(sub[ay], spec.axis_len(ay), hy, mode);
            let f_ytau = apply_cross(values, idx, st[ay], &sy1, st[tau_axis], &s_tau1);
            let f_xtau = apply_cross(values, idx, st[ax], &sx1, st[tau_axis], &s_tau1);
            acc += 4.0 * (xi * f_ytau - yi * f_xtau);
        }
        acc += 4.0 * horiz_sq * apply_1d(values, idx, st[tau_axis], &s_tau2);
        acc
    });
}
