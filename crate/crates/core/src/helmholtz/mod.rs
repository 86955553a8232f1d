//! Global Runge approximation for `Δφ − τφ = 0` in three dimensions.
//!
//! The pipeline is: fundamental solution → discretised source-to-solution
//! operator between a source region `Y` and the target region `D` →
//! truncated SVD inversion → projection onto spherical modes on a ball,
//! giving an entire solution with explicit coefficients.

mod domain;
mod expansion;
mod fundamental;
mod norms;
mod source;

pub use domain::{Domain, QuadNodes};
pub use expansion::{
    radial_basis_all, spherical_truncate, spherical_truncate_source, SphericalExpansion,
    TruncationConfig,
};
pub use fundamental::{FundamentalSolution, TestBump, BETA_K, BETA_ZERO, BETA_Y};
pub use norms::{ball_norm, global_norms, stability_probe, GlobalNorms, StabilityReport};
pub use source::{
    helmholtz_residual, runge_approximate, Budgets, ErrorTarget, Resolution, RungeOptions,
    RungeReport, RungeResult, SourceOperator, TracePoint,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::QuadratureError;
use crate::specfun::SpecfunError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HelmholtzError {
    #[error("fundamental solution is singular at the origin")]
    AtOrigin,
    #[error("source region intersects the bounding ball of the target (gap {gap})")]
    Geometry { gap: f64 },
    #[error("input is not a solution: residual {residual:e} exceeds {allowed:e}")]
    NotASolution { residual: f64, allowed: f64 },
    #[error("requested error {requested:e} unreachable, best achieved {best:e}")]
    Unreachable { requested: f64, best: f64 },
    #[error("the triple seminorm collapses at τ = 0")]
    ZeroFrequencySeminorm,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Spectral parameter `τ` of `Δφ − τφ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency {
    pub tau: f64,
}

impl Frequency {
    pub fn new(tau: f64) -> Self {
        Self { tau }
    }

    /// `τ₊ = max(τ, 0)`.
    pub fn plus(self) -> f64 {
        self.tau.max(0.0)
    }

    /// `τ₋ = max(−τ, 0)`.
    pub fn minus(self) -> f64 {
        (-self.tau).max(0.0)
    }

    /// `⟨τ⟩ = (1 + τ²)^{1/2}`.
    pub fn bracket(self) -> f64 {
        (1.0 + self.tau * self.tau).sqrt()
    }

    /// Principal square root of `τ`, imaginary for `τ < 0`.
    pub fn sqrt(self) -> Complex64 {
        if self.tau >= 0.0 {
            Complex64::new(self.tau.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-self.tau).sqrt())
        }
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
