//! Numerical toolkit for the real roots of Gaussian random orthogonal
//! polynomials `H_n(x) = sum_j xi_j p_j(x)` with i.i.d. standard Gaussian
//! coefficients.
//!
//! The crate computes, at desk scale, every object in the analysis
//! pipeline of that model:
//!
//! * [`orthopoly`] — orthonormal families (Chebyshev, Legendre, Jacobi,
//!   Gegenbauer), derivative evaluation, reproducing kernels
//!   `K_n^{(l,m)}`;
//! * [`correlations`] — normalized correlations of the rescaled process
//!   and their sinc-kernel bulk limits;
//! * [`kacrice`] — first/second root intensities and quadrature of the
//!   count mean and variance;
//! * [`chaos`] — Hermite chaos coefficients, the level kernels `f_q`,
//!   per-level variance contributions via the Mehler formula, and the
//!   contraction-decay diagnostic;
//! * [`montecarlo`] — reproducible parallel simulation with certified
//!   root counting, sample statistics, and a Kolmogorov-Smirnov
//!   normality test;
//! * [`quad`] — Gauss rules, adaptive panels, tanh-sinh, compensated
//!   summation.
//!
//! Everything is a pure function of its inputs; all randomness flows
//! through explicit 64-bit seeds.

pub mod chaos;
pub mod correlations;
pub mod error;
pub mod kacrice;
pub mod montecarlo;
pub mod orthopoly;
pub mod quad;

pub use error::{Error, Result};
pub use orthopoly::{FamilyKind, OrthonormalBasis};
