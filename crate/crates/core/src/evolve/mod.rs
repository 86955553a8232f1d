//! Free and nonlinear Schrödinger evolution on periodic boxes.
//!
//! The linear flow `e^{itΔ}` is the Fourier multiplier `e^{−i|k|²t}`. The
//! rescaled Gross–Pitaevskii equation `i∂ₜu + Δu + κ(1 − |u|²)u = 0` and the
//! defocusing cubic `i∂ₜu + Δu − κ|u|²u = 0` are advanced by Strang splitting
//! with exact phase rotations for the nonlinear half steps.

mod duhamel;
mod linear;
mod snapshot;
mod split;
mod torus;

pub use duhamel::{
    duhamel_residual, from_deviation, gauge_lift, rescale_field, rescale_gp, to_deviation,
    DuhamelReport,
};
pub use linear::{linear_propagate, LinearPropagator};
pub use snapshot::{read_snapshot, write_observables_csv, write_snapshot, SnapshotMeta};
pub use split::{
    energy, evolve, gl_energy, gp_step, Evolution, EvolutionConfig, Nonlinearity, Observable,
    Stepper,
};
pub use torus::{best_rational, torus_rationalize, RationalizedDatum, TorusConfig};

pub use crate::grid::{BoxSpec, ComplexField, Fft3, GridError};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("the spectral propagator needs a periodic box")]
    NotPeriodic,
    #[error("non-finite field value after step {step}")]
    NonFinite { step: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("common denominator {n} exceeds the limit {limit}; lower q_max")]
    DenominatorOverflow { n: u64, limit: u64 },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
