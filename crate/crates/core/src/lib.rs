//! Numerical toolkit for global approximation of Helmholtz–Yukawa and
//! Schrödinger solutions, Gross–Pitaevskii evolution, and vortex
//! reconnection analytics.

pub mod quadrature;
pub mod specfun;
pub mod grid;
pub mod helmholtz;
pub mod schrod_approx;
pub mod evolve;
pub mod vortex;
pub mod scenarios;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
