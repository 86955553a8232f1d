//! The radial energy integral `ℐ_ν(α) = ∫₀^R r |I_ν(rα)|² dr` and the
//! piecewise envelope used to bound `J_ν` uniformly in the order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_i, bessel_j};
use super::SpecfunError;
use crate::quadrature::adaptive;

const REL_TOL: f64 = 1e-10;

/// Value of `ℐ_ν(α)` together with its inputs and quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyIntegral {
    pub nu: f64,
    pub alpha: Complex64,
    pub r_outer: f64,
    pub value: f64,
    pub abs_error: f64,
}

impl EnergyIntegral {
    /// `|α|² ℐ_ν(α)`, nondecreasing in `|α|`.
    pub fn scaled(&self) -> f64 {
        self.alpha.norm_sqr() * self.value
    }
}

/// `ℐ_ν(α)` for `α` on the positive real or positive imaginary axis.
pub fn besseli_energy(nu: f64, alpha: Complex64, r_outer: f64) -> Result<EnergyIntegral, SpecfunError> {
    if !(nu >= 0.5 && nu.is_finite()) {
        return Err(SpecfunError::Parameter(format!("order {nu} must be >= 1/2")));
    }
    if !(r_outer > 0.0 && r_outer <= 100.0) {
        return Err(SpecfunError::Parameter(format!(
            "outer radius {r_outer} must lie in (0, 100]"
        )));
    }
    let imaginary = alpha.re == 0.0 && alpha.im > 0.0;
    let real = alpha.im == 0.0 && alpha.re > 0.0;
    if !(imaginary || real) {
        return Err(SpecfunError::Parameter(format!(
            "α = {alpha} must be positive real or positive imaginary"
        )));
    }
    let a = alpha.norm();
    // |I_ν(i s)| = |J_ν(s)| on the imaginary axis.
    let integrand = |r: f64| {
        let v = if imaginary {
            bessel_j(nu, r * a)
        } else {
            bessel_i(nu, r * a)
        };
        v.map(|v| r * v * v).unwrap_or(f64::NAN)
    };
    let res = adaptive(integrand, 0.0, r_outer, REL_TOL, 0.0)?;
    Ok(EnergyIntegral {
        nu,
        alpha,
        r_outer,
        value: res.value,
        abs_error: res.abs_error,
    })
}

/// Piecewise envelope `f_ν(s)` with `|J_ν(s)| <= C f_ν(s)` uniformly in `ν >= 1`.
pub fn balodis_envelope(nu: f64, s: f64) -> f64 {
    let c = nu.cbrt();
    if s <= nu - c {
        1.0 / (nu - s)
    } else if s <= nu + c {
        1.0 / c
    } else {
        s.powf(-0.5) * (1.0 - nu / s).powf(-0.25)
    }
}
