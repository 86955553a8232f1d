//! Approximation of local Schrödinger solutions on a spacetime cylinder by
//! free evolutions of Gaussian-damped entire data.
//!
//! Stages: discrete time Fourier transform of the samples, one Runge
//! approximation plus spherical truncation per frequency, assembly of
//! `v₁(x,t) = Σ_q Δτ e^{iτ_q t} ψ̂_q(x)`, and exact propagation of
//! `u_δ = v₁(·,0) e^{−δ|x|²}` mode by mode.

mod fourier;
mod pipeline;
mod samples;
mod stack;

pub use fourier::{time_fourier, FourierData, TailFit};
pub use pipeline::{
    build_schwartz_datum, DampedDatum, DeltaProbe, HkRequest, PipelineConfig, SchwartzReport,
    TowerBound,
};
pub use samples::{time_grid, SpacetimeSamples, MIN_TIME_SAMPLES};
pub use stack::{
    assemble_v1, damp_and_propagate, frequency_sweep, propagate_grid, propagate_mode_radial,
    FrequencyLayer, FrequencyStack, SkippedSlice, SlicePolicy, SweepConfig,
};

use thiserror::Error;

use crate::helmholtz::HelmholtzError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchrodError {
    #[error("time grid must be uniform with at least {min} samples, got {got}")]
    TimeGrid { min: usize, got: usize },
    #[error("samples are not a Schrödinger solution: relative residual {residual:e} exceeds {allowed:e}")]
    NotASolution { residual: f64, allowed: f64 },
    #[error("tail fit failed: {0}")]
    TailFit(String),
    #[error("frequency slice {index} (τ = {tau}): {source}")]
    Slice {
        index: usize,
        tau: f64,
        #[source]
        source: HelmholtzError,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Helmholtz(#[from] HelmholtzError),
}
