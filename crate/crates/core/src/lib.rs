//! Numerical core for heat flow with a time-nonlocal (memory) nonlinearity
//! on the Heisenberg group H^n:
//!
//! ```text
//! u_t - L u = Int_0^t (t-s)^-gamma |u(s)|^(p-1) u(s) ds
//! ```
//!
//! where `L` is the sub-Laplacian. The crate provides the group arithmetic
//! and Koranyi geometry, grids over a truncated box, finite-difference
//! stencils for the left-invariant vector fields and `L`, pointwise heat
//! kernel evaluation via its lambda integral, the group convolution and two
//! interchangeable heat-semigroup backends, Riemann-Liouville fractional
//! calculus with product-integration weights, and the mild-form solver with
//! blow-up detection and runtime monitors.
//!
//! Everything is deterministic: bulk reductions use a fixed pairwise tree
//! over the documented grid linearization, so repeated runs (and both
//! execution modes) produce bit-identical results. Data-parallel loops run
//! on rayon when the default `parallel` feature is enabled; see
//! [`exec::with_sequential`] for the sequential escape hatch used in the
//! benchmarks.

pub mod bump;
pub mod error;
pub mod exec;
pub mod fit;
pub mod frac;
pub mod grid;
pub mod kernel;
pub mod point;
pub mod semigroup;
pub mod solver;
pub mod stencil;

pub use error::{CoreError, Result};
pub use grid::{GridField, GridSpec};
pub use point::{dilate, group_inverse, group_multiply, koranyi_norm, GroupPoint};
pub use solver::{solve, InitialData, InitialProfile, SolveConfig, SolveResult, SolveStatus};
