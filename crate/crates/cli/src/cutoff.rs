//! The cut-off family `phi_R = Phi^l(|eta|_H^2 / R)` and the numerical
//! verification that `|L phi_R| <= (C/R) (phi_R^*)^{1/p}` with a constant
//! bounded uniformly in `R`.
//!
//! `Phi` is the canonical smooth nonincreasing transition (1 below 1/2,
//! 0 above 1), `l = 2 p'` with `p'` the Hoelder conjugate, and
//! `phi_R^* = (1_{[1/2,1]} Phi)^l (|eta|_H^2/R)` marks the transition
//! annulus. By parabolic scaling the continuum ratio is independent of `R`,
//! so the spread of the measured constants isolates the discretization
//! error.

use hheat_core::bump::smooth_transition;
use hheat_core::grid::{GridField, GridSpec, MAX_AXES};
use hheat_core::point::koranyi_norm_coords;
use hheat_core::stencil::sub_laplacian;
use hheat_core::{CoreError, Result};

/// Minimum number of grid cells across the transition annulus.
const MIN_CELLS_ACROSS: f64 = 8.0;

/// Points where `phi_R^*` is below this are excluded from the ratio.
const STAR_FLOOR: f64 = 1e-12;

pub fn phi_exponent(p: f64) -> f64 {
    2.0 * p / (p - 1.0)
}

/// Samples `phi_R` on the grid.
pub fn phi_r_field(spec: &GridSpec, r: f64, p: f64) -> GridField {
    let l = phi_exponent(p);
    GridField::from_fn(*spec, move |c| {
        let nrm = koranyi_norm_coords(c);
        smooth_transition(nrm * nrm / r).powf(l)
    })
}

/// Samples `phi_R^*` (the annulus-localized companion).
pub fn phi_r_star_field(spec: &GridSpec, r: f64, p: f64) -> GridField {
    let l = phi_exponent(p);
    GridField::from_fn(*spec, move |c| {
        let nrm = koranyi_norm_coords(c);
        let xi = nrm * nrm / r;
        if (0.5..=1.0).contains(&xi) {
            smooth_transition(xi).powf(l)
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CutoffRow {
    pub r: f64,
    /// smallest constant with `|L phi_R| <= (c/R)(phi_R^*)^{1/p}` on the grid
    pub c_hat: f64,
    /// residual `|L phi_R|` over the plateau region (xi <= 0.45); pure FD noise
    pub plateau_residual: f64,
    /// residual outside the support (xi >= 1.05)
    pub exterior_residual: f64,
}

#[derive(Debug, Clone)]
pub struct CutoffReport {
    pub p: f64,
    pub rows: Vec<CutoffRow>,
    /// max over pairs of c_hat ratios (>= 1)
    pub spread: f64,
}

pub fn verify_cutoff(r_values: &[f64], p: f64, spec: &GridSpec) -> Result<CutoffReport> {
    if !(p > 1.0) {
        return Err(CoreError::InvalidParameter("cutoff needs p > 1".into()));
    }
    if r_values.is_empty() {
        return Err(CoreError::InvalidParameter("need at least one R".into()));
    }
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        if !(r > 0.0) {
            return Err(CoreError::InvalidParameter("R must be positive".into()));
        }
        // the annulus 1/2 <= |eta|^2/R <= 1 must fit in the box ...
        let outer = r.sqrt();
        if spec.half_width_xy() < outer || spec.half_width_tau() < r {
            return Err(CoreError::InvalidGrid(format!(
                "box too small for R = {r}: need half widths >= ({outer}, {r})"
            )));
        }
        // ... and must be resolved by at least MIN_CELLS_ACROSS cells both
        // along the horizontal axes and along tau
        let width_xy = outer - (r / 2.0).sqrt();
        let cells_xy = width_xy / spec.spacing_xy();
        let cells_tau = (r / 2.0) / spec.spacing_tau();
        if cells_xy < MIN_CELLS_ACROSS || cells_tau < MIN_CELLS_ACROSS {
            return Err(CoreError::InvalidGrid(format!(
                "transition annulus for R = {r} under-resolved: {cells_xy:.1} cells in xy, \
                 {cells_tau:.1} in tau (need {MIN_CELLS_ACROSS})"
            )));
        }

        let phi = phi_r_field(spec, r, p);
        let star = phi_r_star_field(spec, r, p);
        let lap = sub_laplacian(&phi)?;
        let mut c_hat = 0.0f64;
        let mut plateau = 0.0f64;
        let mut exterior = 0.0f64;
        let mut sub = [0usize; MAX_AXES];
        let mut coords = [0.0f64; MAX_AXES];
        for idx in 0..spec.len() {
            spec.decode(idx, &mut sub[..spec.axes()]);
            if !spec.is_interior(&sub[..spec.axes()], 1) {
                continue;
            }
            spec.point_coords(idx, &mut coords);
            let nrm = koranyi_norm_coords(&coords[..spec.axes()]);
            let xi = nrm * nrm / r;
            let l_val = lap.values()[idx].abs();
            if xi <= 0.45 {
                plateau = plateau.max(l_val);
            } else if xi >= 1.05 {
                exterior = exterior.max(l_val);
            }
            let s = star.values()[idx];
            if s > STAR_FLOOR {
                c_hat = c_hat.max(r * l_val / s.powf(1.0 / p));
            }
        }
        rows.push(CutoffRow {
            r,
            c_hat,
            plateau_residual: plateau,
            exterior_residual: exterior,
        });
    }
    let mut spread = 1.0f64;
    for a in &rows {
        for b in &rows {
            if b.c_hat > 0.0 {
                spread = spread.max(a.c_hat / b.c_hat);
            }
        }
    }
    Ok(CutoffReport { p, rows, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adequate_spec() -> GridSpec {
        // covers R up to 16: |eta| <= 4, |tau| <= 16, resolving the R = 4
        // annulus (width ~ 0.59 in xy, 2 in tau)
        GridSpec::new(1, 4.2, 16.8, 121, 141).unwrap()
    }

    #[test]
    fn constants_are_bounded_across_r() {
        let report = verify_cutoff(&[4.0, 8.0, 16.0], 2.0, &adequate_spec()).unwrap();
        assert_eq!(report.rows.len(), 3);
        for row in &report.rows {
            assert!(row.c_hat.is_finite() && row.c_hat > 0.0);
        }
        assert!(
            report.spread < 2.0,
            "constants vary by {:.3} across R",
            report.spread
        );
    }

    #[test]
    fn plateau_and_exterior_are_silent() {
        let report = verify_cutoff(&[8.0], 2.0, &adequate_spec()).unwrap();
        let row = &report.rows[0];
        // inside the plateau phi == 1, outside the support phi == 0; the
        // stencil sees exactly constant fields there
        assert!(row.plateau_residual < 1e-9, "plateau {}", row.plateau_residual);
        assert!(row.exterior_residual < 1e-9, "exterior {}", row.exterior_residual);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let coarse = GridSpec::new(1, 4.2, 16.8, 21, 21).unwrap();
        assert!(verify_cutoff(&[4.0], 2.0, &coarse).is_err());
        // box too small for the requested R
        let small = GridSpec::new(1, 1.0, 1.0, 31, 31).unwrap();
        assert!(verify_cutoff(&[16.0], 2.0, &small).is_err());
    }
}
