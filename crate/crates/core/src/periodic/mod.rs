//! Periodic functions on the circle and the 2-torus.
//!
//! Functions are real trigonometric polynomials of period 1 in each
//! variable. Products and compositions are exact on coefficients where
//! possible; nonlinear operations go through a sampling grid and an FFT.

mod fft;
mod fn1d;
mod fn2d;
mod poly;
mod solve;
mod theta;

pub use fn1d::PeriodicFn1D;
pub use fn2d::{Jet2, PeriodicFn2D};
pub use poly::{PolyPeriodic, MAX_DEGREE};
pub use solve::{cohomological_residual, solve_cohomological, solve_directional, solve_exterior, RESONANCE_EPS};
pub use theta::{ext_gcd, gcd, ThetaSpec};
