//! Truncated uniform grids on H^n and scalar fields sampled on them.
//!
//! The group is truncated to the box `[-Lxy, Lxy]^{2n} x [-Ltau, Ltau]`,
//! sampled uniformly per axis. Fields are stored in a fixed linearization
//! order so binary dumps are portable:
//!
//! * axes are ordered `x_1, ..., x_n, y_1, ..., y_n, tau`;
//! * the index is row-major over that axis tuple, i.e. `x_1` varies
//!   slowest and `tau` fastest.
//!
//! All reductions (integrals, norms) run over this order with a fixed
//! pairwise tree, so repeated runs are bit-identical.
//!
//! # Binary dump format (`HHGF1`)
//!
//! Little-endian throughout:
//!
//! | bytes | content                                  |
//! |-------|------------------------------------------|
//! | 5     | magic `b"HHGF1"`                         |
//! | 8     | `n` as u64                               |
//! | 8     | points per x/y axis as u64               |
//! | 8     | points per tau axis as u64               |
//! | 8     | half width in x/y as f64                 |
//! | 8     | half width in tau as f64                 |
//! | 8*len | values in linearization order as f64     |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::exec;

/// Hard cap on the number of axes (2n+1); keeps interpolation scratch on
/// the stack. n up to 4 is far beyond desk scale already.
pub const MAX_AXES: usize = 9;

const MAGIC: &[u8; 5] = b"HHGF1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_width_xy: f64,
    half_width_tau: f64,
    points_per_xy_axis: usize,
    points_per_tau_axis: usize,
}

impl GridSpec {
    pub fn new(
        n: usize,
        half_width_xy: f64,
        half_width_tau: f64,
        points_per_xy_axis: usize,
        points_per_tau_axis: usize,
    ) -> Result<Self> {
        if n < 1 {
            return Err(CoreError::InvalidGrid("n must be >= 1".into()));
        }
        if 2 * n + 1 > MAX_AXES {
            return Err(CoreError::InvalidGrid(format!(
                "2n+1 = {} axes exceeds the supported maximum {MAX_AXES}",
                2 * n + 1
            )));
        }
        if !(half_width_xy > 0.0) || !(half_width_tau > 0.0) {
            return Err(CoreError::InvalidGrid("half widths must be positive".into()));
        }
        if points_per_xy_axis < 3 || points_per_tau_axis < 3 {
            return Err(CoreError::InvalidGrid(
                "need at least 3 points per axis".into(),
            ));
        }
        let spec = GridSpec {
            n,
            half_width_xy,
            half_width_tau,
            points_per_xy_axis,
            points_per_tau_axis,
        };
        // reject grids whose flat storage would overflow
        let mut total: usize = points_per_tau_axis;
        for _ in 0..2 * n {
            total = total
                .checked_mul(points_per_xy_axis)
                .ok_or_else(|| CoreError::InvalidGrid("grid too large".into()))?;
        }
        if total > (1usize << 33) {
            return Err(CoreError::InvalidGrid(format!("grid too large: {total} points")));
        }
        Ok(spec)
    }

    /// Box with the parabolic aspect `Ltau = Lxy^2` and equal point counts,
    /// matching how the dilation scales the two directions.
    pub fn parabolic(n: usize, half_width_xy: f64, points_per_axis: usize) -> Result<Self> {
        GridSpec::new(
            n,
            half_width_xy,
            half_width_xy * half_width_xy,
            points_per_axis,
            points_per_axis,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn homogeneous_dim(&self) -> usize {
        2 * self.n + 2
    }

    pub fn half_width_xy(&self) -> f64 {
        self.half_width_xy
    }

    pub fn half_width_tau(&self) -> f64 {
        self.half_width_tau
    }

    pub fn points_per_xy_axis(&self) -> usize {
        self.points_per_xy_axis
    }

    pub fn points_per_tau_axis(&self) -> usize {
        self.points_per_tau_axis
    }

    /// Number of axes, 2n + 1.
    pub fn axes(&self) -> usize {
        2 * self.n + 1
    }

    pub fn axis_len(&self, axis: usize) -> usize {
        if axis < 2 * self.n {
            self.points_per_xy_axis
        } else {
            self.points_per_tau_axis
        }
    }

    pub fn axis_half_width(&self, axis: usize) -> f64 {
        if axis < 2 * self.n {
            self.half_width_xy
        } else {
            self.half_width_tau
        }
    }

    pub fn axis_spacing(&self, axis: usize) -> f64 {
        2.0 * self.axis_half_width(axis) / (self.axis_len(axis) - 1) as f64
    }

    pub fn spacing_xy(&self) -> f64 {
        self.axis_spacing(0)
    }

    pub fn spacing_tau(&self) -> f64 {
        self.axis_spacing(2 * self.n)
    }

    pub fn len(&self) -> usize {
        let mut total = self.points_per_tau_axis;
        for _ in 0..2 * self.n {
            total *= self.points_per_xy_axis;
        }
        total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one grid cell (the quadrature measure for plain sums).
    pub fn cell_volume(&self) -> f64 {
        self.spacing_xy().powi(2 * self.n as i32) * self.spacing_tau()
    }

    pub fn coord(&self, axis: usize, idx: usize) -> f64 {
        -self.axis_half_width(axis) + idx as f64 * self.axis_spacing(axis)
    }

    /// Flat index of an axis-index tuple (tau fastest).
    pub fn index_of(&self, sub: &[usize]) -> usize {
        let mut idx = 0;
        for (axis, &s) in sub.iter().enumerate() {
            idx = idx * self.axis_len(axis) + s;
        }
        idx
    }

    /// Inverse of [`index_of`]; writes into `sub[..axes]`.
    pub fn decode(&self, mut idx: usize, sub: &mut [usize]) {
        for axis in (0..self.axes()).rev() {
            let len = self.axis_len(axis);
            sub[axis] = idx % len;
            idx /= len;
        }
    }

    /// Coordinates of the grid point with flat index `idx`.
    pub fn point_coords(&self, idx: usize, coords: &mut [f64]) {
        let mut sub = [0usize; MAX_AXES];
        self.decode(idx, &mut sub[..self.axes()]);
        for axis in 0..self.axes() {
            coords[axis] = self.coord(axis, sub[axis]);
        }
    }

    /// True if the point is strictly inside the box by at least `cells`
    /// cells on every axis.
    pub fn is_interior(&self, sub: &[usize], cells: usize) -> bool {
        (0..self.axes()).all(|a| sub[a] >= cells && sub[a] + cells < self.axis_len(a))
    }

    /// Trapezoid quadrature weight of a point: 1/2 per axis endpoint.
    pub fn trapezoid_weight(&self, sub: &[usize]) -> f64 {
        let mut w = 1.0;
        for axis in 0..self.axes() {
            if sub[axis] == 0 || sub[axis] + 1 == self.axis_len(axis) {
                w *= 0.5;
            }
        }
        w
    }
}

/// A scalar field sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
    /// Set when a solver run aborted and the values may contain non-finite
    /// entries on purpose (blow-up bookkeeping).
    pub overflowed: bool,
}

impl GridField {
    pub fn zeros(spec: GridSpec) -> Self {
        GridField {
            spec,
            values: vec![0.0; spec.len()],
            overflowed: false,
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        Ok(GridField {
            spec,
            values,
            overflowed: false,
        })
    }

    /// Samples `f(coords)` at every grid point (parallel).
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut field = GridField::zeros(spec);
        let axes = spec.axes();
        exec::fill_indexed(&mut field.values, |idx| {
            let mut coords = [0.0; MAX_AXES];
            spec.point_coords(idx, &mut coords);
            f(&coords[..axes])
        });
        field
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        exec::max_by(self.len(), |i| self.values[i].abs())
    }

    pub fn min_value(&self) -> f64 {
        -exec::max_by(self.len(), |i| -self.values[i])
    }

    pub fn max_value(&self) -> f64 {
        exec::max_by(self.len(), |i| self.values[i])
    }

    /// L^q norm with the trapezoid measure; `q = inf` gives the sup norm.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.sup_norm();
        }
        assert!(q >= 1.0, "lq_norm needs q >= 1");
        let vol = self.spec.cell_volume();
        let spec = self.spec;
        let sum = exec::pairwise_sum_by(self.len(), |i| {
            let mut sub = [0usize; MAX_AXES];
            spec.decode(i, &mut sub[..spec.axes()]);
            spec.trapezoid_weight(&sub[..spec.axes()]) * self.values[i].abs().powf(q)
        });
        (sum * vol).powf(1.0 / q)
    }

    /// Trapezoid-rule integral over the box.
    pub fn integral_trapezoid(&self) -> f64 {
        let vol = self.spec.cell_volume();
        let spec = self.spec;
        let sum = exec::pairwise_sum_by(self.len(), |i| {
            let mut sub = [0usize; MAX_AXES];
            spec.decode(i, &mut sub[..spec.axes()]);
            spec.trapezoid_weight(&sub[..spec.axes()]) * self.values[i]
        });
        sum * vol
    }

    /// Trapezoid-weighted integral of the product with another field.
    pub fn weighted_integral(&self, other: &GridField) -> Result<f64> {
        if self.spec != other.spec {
            return Err(CoreError::SpecMismatch);
        }
        let vol = self.spec.cell_volume();
        let spec = self.spec;
        let sum = exec::pairwise_sum_by(self.len(), |i| {
            let mut sub = [0usize; MAX_AXES];
            spec.decode(i, &mut sub[..spec.axes()]);
            spec.trapezoid_weight(&sub[..spec.axes()]) * self.values[i] * other.values[i]
        });
        Ok(sum * vol)
    }

    /// Multilinear interpolation at arbitrary coordinates, zero outside the box.
    pub fn sample(&self, coords: &[f64]) -> f64 {
        let spec = &self.spec;
        let axes = spec.axes();
        debug_assert_eq!(coords.len(), axes);
        let mut base = [0usize; MAX_AXES];
        let mut frac = [0.0f64; MAX_AXES];
        for a in 0..axes {
            let half = spec.axis_half_width(a);
            let h = spec.axis_spacing(a);
            let c = coords[a];
            if c < -half || c > half {
                return 0.0;
            }
            let mut cell = ((c + half) / h).floor() as isize;
            let max_cell = (spec.axis_len(a) - 2) as isize;
            if cell < 0 {
                cell = 0;
            } else if cell > max_cell {
                cell = max_cell;
            }
            base[a] = cell as usize;
            let mut t = ((c - spec.coord(a, base[a])) / h).clamp(0.0, 1.0);
            // snap targets that are on-grid up to rounding; makes the 0/1
            // weights exact so degenerate corners are skipped entirely
            if t < 1e-12 {
                t = 0.0;
            } else if t > 1.0 - 1e-12 {
                t = 1.0;
            }
            frac[a] = t;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << axes) {
            let mut w = 1.0;
            let mut sub = [0usize; MAX_AXES];
            for a in 0..axes {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    sub[a] = base[a] + 1;
                } else {
                    w *= 1.0 - frac[a];
                    sub[a] = base[a];
                }
            }
            if w != 0.0 {
                acc += w * self.values[spec.index_of(&sub[..axes])];
            }
        }
        acc
    }

    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        if self.overflowed {
            return Err(CoreError::NumericalFailure(
                "refusing to dump an overflowed field".into(),
            ));
        }
        w.write_all(MAGIC)?;
        w.write_all(&(self.spec.n as u64).to_le_bytes())?;
        w.write_all(&(self.spec.points_per_xy_axis as u64).to_le_bytes())?;
        w.write_all(&(self.spec.points_per_tau_axis as u64).to_le_bytes())?;
        w.write_all(&self.spec.half_width_xy.to_le_bytes())?;
        w.write_all(&self.spec.half_width_tau.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CoreError::BadDump("bad magic".into()));
        }
        let mut u = [0u8; 8];
        r.read_exact(&mut u)?;
        let n = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let m_xy = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let m_tau = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let half_xy = f64::from_le_bytes(u);
        r.read_exact(&mut u)?;
        let half_tau = f64::from_le_bytes(u);
        let spec = GridSpec::new(n, half_xy, half_tau, m_xy, m_tau)
            .map_err(|e| CoreError::BadDump(e.to_string()))?;
        let mut values = vec![0.0f64; spec.len()];
        for v in values.iter_mut() {
            r.read_exact(&mut u)?;
            *v = f64::from_le_bytes(u);
        }
        // trailing bytes mean the header lied about the shape
        let mut extra = [0u8; 1];
        match r.read(&mut extra)? {
            0 => {}
            _ => return Err(CoreError::BadDump("trailing bytes".into())),
        }
        GridField::from_values(spec, values)
    }

    pub fn write_dump_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }

    pub fn read_dump_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        GridField::read_dump(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(0, 1.0, 1.0, 5, 5).is_err());
        assert!(GridSpec::new(1, 0.0, 1.0, 5, 5).is_err());
        assert!(GridSpec::new(1, 1.0, 1.0, 2, 5).is_err());
        assert!(GridSpec::new(5, 1.0, 1.0, 3, 3).is_err()); // 11 axes > MAX_AXES
        let s = GridSpec::new(2, 1.0, 2.0, 5, 7).unwrap();
        assert_eq!(s.len(), 5usize.pow(4) * 7);
        assert_eq!(s.axes(), 5);
    }

    #[test]
    fn linearization_roundtrip_and_order() {
        let s = GridSpec::new(1, 1.0, 2.0, 4, 3).unwrap();
        // tau is the fastest axis
        assert_eq!(s.index_of(&[0, 0, 0]), 0);
        assert_eq!(s.index_of(&[0, 0, 1]), 1);
        assert_eq!(s.index_of(&[0, 1, 0]), 3);
        assert_eq!(s.index_of(&[1, 0, 0]), 12);
        let mut sub = [0usize; 3];
        for idx in 0..s.len() {
            s.decode(idx, &mut sub);
            assert_eq!(s.index_of(&sub), idx);
        }
    }

    #[test]
    fn spacing_and_coords() {
        let s = GridSpec::new(1, 2.0, 8.0, 5, 9).unwrap();
        assert_relative_eq!(s.spacing_xy(), 1.0);
        assert_relative_eq!(s.spacing_tau(), 2.0);
        assert_relative_eq!(s.coord(0, 0), -2.0);
        assert_relative_eq!(s.coord(0, 4), 2.0);
        assert_relative_eq!(s.coord(2, 4), 0.0);
    }

    #[test]
    fn trapezoid_integral_of_constant_is_box_volume() {
        let s = GridSpec::new(1, 1.0, 1.0, 9, 9).unwrap();
        let f = GridField::from_fn(s, |_| 1.0);
        let volume = 2.0f64.powi(3);
        assert_relative_eq!(f.integral_trapezoid(), volume, max_relative = 1e-12);
    }

    #[test]
    fn trapezoid_integral_is_exact_on_linear_fields() {
        let s = GridSpec::new(1, 1.0, 3.0, 7, 5).unwrap();
        let f = GridField::from_fn(s, |c| 1.0 + 0.5 * c[0] - 0.25 * c[1] + 0.125 * c[2]);
        assert_relative_eq!(f.integral_trapezoid(), 8.0 * 3.0, max_relative = 1e-12);
    }

    #[test]
    fn sample_reproduces_grid_values_and_interpolates_linear() {
        let s = GridSpec::new(1, 1.0, 2.0, 5, 5).unwrap();
        let lin = |c: &[f64]| 0.3 + 1.1 * c[0] - 0.7 * c[1] + 0.2 * c[2];
        let f = GridField::from_fn(s, lin);
        // exactly on grid
        assert_relative_eq!(f.sample(&[0.5, -0.5, 1.0]), lin(&[0.5, -0.5, 1.0]));
        // off grid: multilinear is exact on multilinear functions
        assert_relative_eq!(
            f.sample(&[0.31, -0.42, 0.77]),
            lin(&[0.31, -0.42, 0.77]),
            max_relative = 1e-12
        );
        // outside the box
        assert_eq!(f.sample(&[1.5, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn sup_and_min() {
        let s = GridSpec::new(1, 1.0, 1.0, 3, 3).unwrap();
        let f = GridField::from_fn(s, |c| c[0] - 0.25);
        assert_relative_eq!(f.sup_norm(), 1.25);
        assert_relative_eq!(f.min_value(), -1.25);
        assert_relative_eq!(f.max_value(), 0.75);
    }

    proptest! {
        // One round-trip property covers the dump format.
        #[test]
        fn dump_roundtrip(seed in 0u64..1000) {
            let s = GridSpec::new(1, 1.5, 2.25, 4, 5).unwrap();
            let f = GridField::from_fn(s, |c| {
                (seed as f64 * 0.01) + c[0] * 2.0 - c[1] + (c[2] * 0.5).sin()
            });
            let mut buf = Vec::new();
            f.write_dump(&mut buf).unwrap();
            let g = GridField::read_dump(buf.as_slice()).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
