//! Points of the Heisenberg group H^n and the basic group arithmetic.
//!
//! A point is written `(x, y, tau)` with `x, y` in R^n and `tau` scalar.
//! The group product is
//! `(x,y,t) . (x',y',t') = (x+x', y+y', t+t'+2(x.y' - x'.y))`,
//! the inverse is componentwise negation, and the parabolic dilation
//! `(x,y,t) -> (lx, ly, l^2 t)` is an automorphism. The homogeneous
//! (Koranyi) norm is `((|x|^2+|y|^2)^2 + tau^2)^(1/4)`.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, tau: f64) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(CoreError::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        Ok(GroupPoint { x, y, tau })
    }

    /// The group identity (all coordinates zero) in dimension `n`.
    pub fn identity(n: usize) -> Self {
        GroupPoint {
            x: vec![0.0; n],
            y: vec![0.0; n],
            tau: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Homogeneous dimension Q = 2n + 2 of the ambient group.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.dim() + 2
    }

    /// |x|^2 + |y|^2, the horizontal part of the norm.
    pub fn horizontal_sq(&self) -> f64 {
        let sx: f64 = self.x.iter().map(|v| v * v).sum();
        let sy: f64 = self.y.iter().map(|v| v * v).sum();
        sx + sy
    }
}

pub fn group_multiply(a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = a.dim();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut twist = 0.0;
    for i in 0..n {
        x.push(a.x[i] + b.x[i]);
        y.push(a.y[i] + b.y[i]);
        twist += a.x[i] * b.y[i] - b.x[i] * a.y[i];
    }
    Ok(GroupPoint {
        x,
        y,
        tau: a.tau + b.tau + 2.0 * twist,
    })
}

pub fn group_inverse(a: &GroupPoint) -> GroupPoint {
    GroupPoint {
        x: a.x.iter().map(|v| -v).collect(),
        y: a.y.iter().map(|v| -v).collect(),
        tau: -a.tau,
    }
}

pub fn dilate(a: &GroupPoint, lambda: f64) -> Result<GroupPoint> {
    if !(lambda > 0.0) {
        return Err(CoreError::NonpositiveDilation(lambda));
    }
    Ok(GroupPoint {
        x: a.x.iter().map(|v| lambda * v).collect(),
        y: a.y.iter().map(|v| lambda * v).collect(),
        tau: lambda * lambda * a.tau,
    })
}

pub fn koranyi_norm(a: &GroupPoint) -> f64 {
    let h = a.horizontal_sq();
    (h * h + a.tau * a.tau).powf(0.25)
}

/// Koranyi distance d(a, b) = |b^{-1} . a|.
pub fn koranyi_distance(a: &GroupPoint, b: &GroupPoint) -> Result<f64> {
    Ok(koranyi_norm(&group_multiply(&group_inverse(b), a)?))
}

/// Koranyi norm from raw coordinates, without building a `GroupPoint`.
/// `coords` is laid out `[x_1..x_n, y_1..y_n, tau]`.
#[inline]
pub(crate) fn koranyi_norm_coords(coords: &[f64]) -> f64 {
    let n = (coords.len() - 1) / 2;
    let mut h = 0.0;
    for c in &coords[..2 * n] {
        h += c * c;
    }
    let tau = coords[2 * n];
    (h * h + tau * tau).powf(0.25)
}
