//! Deterministic numerical kernels shared by all other modules.
//!
//! - [`quadrature`] — adaptive Gauss–Kronrod integration over the real line
//!   and the positive half-line.
//! - [`optimize`] — derivative-free simplex and gradient-descent minimizers.
//! - [`linalg`] — small dense matrices, inverses and the symmetric
//!   eigendecomposition used by the null-spectrum machinery.
//! - [`special`] — error function, normal CDF/quantile, gamma and incomplete
//!   beta functions, Student-t and χ²(1) helpers.
//! - [`rng`] — counter-based splittable random streams for reproducible
//!   parallel simulation.
//! - [`fmath`] — `no_std` floating-point primitives (libm-backed).

pub mod fmath;
pub mod linalg;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use linalg::{symmetric_eigen, Mat};
pub use optimize::{minimize, Method, MinimizeResult, OptimizerSpec};
pub use quadrature::{integrate, Domain, QuadratureSpec};
pub use rng::RngStream;
