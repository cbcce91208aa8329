//! Pseudo-spectral laboratory for the dissipative-dispersive model family
//!
//! ```text
//! u_t + M u_t + M u + u_x + (u^q)_x = 0,      M = |d_x|^m  (Fourier multiplier)
//! ```
//!
//! on a periodic truncation of the real line. The crate provides:
//!
//! - spectral grids, transforms, multiplier operators and norm quadrature
//!   ([`grid`]);
//! - the generalized heat kernel `G_m`, Bessel-type kernels `K_m^j` and
//!   derivative kernels with closed-form `L^2` norms ([`kernels`]);
//! - the linear solution operators of the heat, BBM-Burgers and KdV-Burgers
//!   type equations, applied exactly in time ([`semigroup`]);
//! - moment-based large-time expansions of all three flows and their residual
//!   norms ([`expansion`]);
//! - two independent nonlinear solvers (Duhamel-Picard fixed point and
//!   integrating-factor time stepping) plus second-term asymptotic profiles
//!   ([`nonlinear`]);
//! - power-law exponent fitting and convolution-inequality checks
//!   ([`analysis`]);
//! - the acceptance checklist used by `verify-all` ([`verify`]).

pub mod analysis;
pub mod data;
pub mod error;
pub mod expansion;
pub mod grid;
pub mod kernels;
pub mod nonlinear;
pub mod quad;
pub mod semigroup;
pub mod verify;

pub use error::{Error, Result};
