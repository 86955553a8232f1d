use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{norm3, Frequency, HelmholtzError};
use crate::quadrature::{adaptive, SphereRule};
use crate::specfun::{bessel, BesselKind};

/// Normalisation of the `K_{1/2}` branch (`τ > 0`).
pub const BETA_K: f64 = -0.063_493_635_934_240_97; // −(2π)^{−3/2}
/// Normalisation of the `|x|^{−1}` branch (`τ = 0`).
pub const BETA_ZERO: f64 = -1.0 / (4.0 * PI);
/// Normalisation of the `Y_{1/2}` branch (`τ < 0`).
pub const BETA_Y: f64 = 0.099_735_570_100_358_17; // (π/2)^{1/2}/(4π)

/// `G_τ` with `ΔG_τ − τG_τ = δ₀` on ℝ³.
///
/// For `τ < 0` this is the standing-wave branch `−cos(√|τ| r)/(4πr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSolution {
    pub tau: Frequency,
}

impl FundamentalSolution {
    pub fn new(tau: Frequency) -> Self {
        Self { tau }
    }

    /// Normalisation constant of the active branch.
    pub fn beta(&self) -> f64 {
        match self.tau.tau {
            t if t > 0.0 => BETA_K,
            t if t < 0.0 => BETA_Y,
            _ => BETA_ZERO,
        }
    }

    /// `G_τ` as a function of `r = |x| > 0`.
    #[inline]
    pub fn radial(&self, r: f64) -> f64 {
        let t = self.tau.tau;
        let base = -1.0 / (4.0 * PI * r);
        if t > 0.0 {
            base * (-t.sqrt() * r).exp()
        } else if t < 0.0 {
            base * ((-t).sqrt() * r).cos()
        } else {
            base
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> Result<f64, HelmholtzError> {
        let r = norm3(x);
        if r == 0.0 {
            return Err(HelmholtzError::AtOrigin);
        }
        Ok(self.radial(r))
    }

    /// The same function written through the Bessel evaluators.
    pub fn eval_bessel(&self, x: [f64; 3]) -> Result<f64, HelmholtzError> {
        let r = norm3(x);
        if r == 0.0 {
            return Err(HelmholtzError::AtOrigin);
        }
        let t = self.tau.tau;
        let arg = |s: f64| Complex64::new(s * r, 0.0);
        Ok(if t > 0.0 {
            let k = bessel(BesselKind::K, 0.5, arg(t.sqrt())).map_err(crate::specfun::SpecfunError::from)?;
            BETA_K * t.powf(0.25) * k.re / r.sqrt()
        } else if t < 0.0 {
            let y = bessel(BesselKind::Y, 0.5, arg((-t).sqrt())).map_err(crate::specfun::SpecfunError::from)?;
            BETA_Y * (-t).powf(0.25) * y.re / r.sqrt()
        } else {
            BETA_ZERO / r
        })
    }

    /// `|x| e^{√τ₊|x|} |G_τ(x)|`, which stays bounded in three dimensions.
    pub fn decay_profile(&self, r: f64) -> f64 {
        r * (self.tau.plus().sqrt() * r).exp() * self.radial(r).abs()
    }
}

/// Smooth test function centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestBump {
    /// `exp(−|x − c|²/s²)`.
    Gaussian { center: [f64; 3], width: f64 },
    /// `exp(1 − 1/(1 − |x − c|²/a²))` inside the ball of radius `a`, zero outside.
    Compact { center: [f64; 3], radius: f64 },
}

impl TestBump {
    fn rho(c: [f64; 3], x: [f64; 3]) -> f64 {
        norm3([x[0] - c[0], x[1] - c[1], x[2] - c[2]])
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        match *self {
            TestBump::Gaussian { center, width } => (-(Self::rho(center, x) / width).powi(2)).exp(),
            TestBump::Compact { center, radius } => {
                let u = (Self::rho(center, x) / radius).powi(2);
                if u >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u)).exp()
                }
            }
        }
    }

    pub fn laplacian(&self, x: [f64; 3]) -> f64 {
        match *self {
            TestBump::Gaussian { center, width } => {
                let r = Self::rho(center, x);
                let s2 = width * width;
                self.value(x) * (4.0 * r * r / (s2 * s2) - 6.0 / s2)
            }
            TestBump::Compact { center, radius } => {
                let r = Self::rho(center, x);
                let a2 = radius * radius;
                let u = r * r / a2;
                if u >= 1.0 {
                    return 0.0;
                }
                let w = 1.0 - u;
                // φ = e^g, Δφ = φ (g'' + g'² + 2g'/r)
                let g1 = -2.0 * r / (a2 * w * w);
                let g2 = -2.0 / (a2 * w * w) - 8.0 * r * r / (a2 * a2 * w * w * w);
                let g1_over_r = -2.0 / (a2 * w * w);
                self.value(x) * (g2 + g1 * g1 + 2.0 * g1_over_r)
            }
        }
    }

    /// Radius beyond which the bump is negligible, measured from the origin.
    fn reach(&self) -> f64 {
        match *self {
            TestBump::Gaussian { center, width } => norm3(center) + 7.0 * width,
            TestBump::Compact { center, radius } => norm3(center) + radius,
        }
    }
}

impl FundamentalSolution {
    /// `∫ G_τ (Δφ − τφ) dx` in spherical coordinates about the origin,
    /// which equals `φ(0)` in the sense of distributions.
    pub fn distributional_pairing(&self, bump: &TestBump, rel_tol: f64) -> Result<f64, HelmholtzError> {
        let sphere = SphereRule::for_degree(48);
        let tau = self.tau.tau;
        let integrand = |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            let avg: f64 = sphere
                .points
                .iter()
                .zip(&sphere.weights)
                .map(|(w, &wt)| {
                    let x = [r * w[0], r * w[1], r * w[2]];
                    wt * (bump.laplacian(x) - tau * bump.value(x))
                })
                .sum();
            r * r * self.radial(r) * avg
        };
        let reach = bump.reach();
        Ok(adaptive(integrand, 0.0, reach, rel_tol, 1e-14)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_laplacians_match_finite_differences() {
        let bumps = [
            TestBump::Gaussian { center: [0.3, -0.2, 0.1], width: 0.7 },
            TestBump::Compact { center: [0.0; 3], radius: 1.5 },
        ];
        let x = [0.4, 0.25, -0.3];
        let h = 1e-3;
        for b in bumps {
            let mut fd = -6.0 * b.value(x);
            for a in 0..3 {
                let (mut p, mut m) = (x, x);
                p[a] += h;
                m[a] -= h;
                fd += b.value(p) + b.value(m);
            }
            fd /= h * h;
            assert!((fd - b.laplacian(x)).abs() < 1e-5 * b.laplacian(x).abs().max(1.0), "{b:?}");
        }
    }

    #[test]
    fn constants_match_closed_forms() {
        assert!((BETA_K + (2.0 * PI).powf(-1.5)).abs() < 1e-16);
        assert!((BETA_Y - (0.5 * PI).sqrt() / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn bessel_form_agrees_with_elementary_form() {
        for tau in [-25.0, -4.0, -0.3, 0.0, 0.7, 9.0, 25.0] {
            let g = FundamentalSolution::new(Frequency::new(tau));
            for x in [[0.1, 0.0, 0.0], [0.3, -1.2, 0.5], [2.0, 3.0, -4.0]] {
                let a = g.eval(x).unwrap();
                let b = g.eval_bessel(x).unwrap();
                assert!((a - b).abs() < 1e-13 * a.abs().max(1e-3), "tau={tau}");
            }
        }
    }

    #[test]
    fn yukawa_example() {
        let g = FundamentalSolution::new(Frequency::new(9.0));
        let r: f64 = 0.7;
        let expect = -(-3.0 * r).exp() / (4.0 * PI * r);
        assert!((g.eval([0.0, r, 0.0]).unwrap() - expect).abs() < 1e-16);
        assert!(matches!(g.eval([0.0; 3]), Err(HelmholtzError::AtOrigin)));
    }

    #[test]
    fn decay_profile_is_flat() {
        let g = FundamentalSolution::new(Frequency::new(4.0));
        for r in [1.0, 3.0, 10.0] {
            assert!((g.decay_profile(r) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        }
    }
}
