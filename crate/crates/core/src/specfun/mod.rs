//! Special functions: Bessel functions of real order, real spherical
//! harmonics and the radial energy integral.

pub mod bessel;
pub mod energy;
pub mod sphharm;

use thiserror::Error;

pub use bessel::{bessel, spherical_i_all, spherical_i_all_scaled, Bessel, BesselError, BesselKind};
pub use energy::{balodis_envelope, besseli_energy, EnergyIntegral};
pub use sphharm::{count_upto, indices_upto, sph_harm, sph_harm_all, SphericalIndex};

use crate::quadrature::QuadratureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("direction has norm {norm}, expected a unit vector")]
    NotUnit { norm: f64 },
    #[error("invalid spherical index l = {l}, m = {m}")]
    InvalidIndex { l: usize, m: i64 },
    #[error("{0}")]
    Parameter(String),
}
