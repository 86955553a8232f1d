use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{norm3, Frequency, HelmholtzError, SourceOperator};
use crate::quadrature::{GaussLegendre, SphereRule};
use crate::specfun::{besseli_energy, count_upto, spherical_i_all, sph_harm_all, SphericalIndex};

/// Default cap on the truncation degree.
pub const MAX_DEGREE: usize = 20;

/// `Σ_{l<=l₀} Σ_m A_lm g_l(|x|) Y_lm(x/|x|)`, an entire solution of `Δψ = τψ`.
///
/// Radial basis `g_l(r) = r^{−1/2} I_{l+1/2}(r√τ)` for `τ ≠ 0` and `r^l` for
/// `τ = 0`; coefficients are stored in the flat `l² + l + m` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalExpansion {
    pub tau: Frequency,
    pub l0: usize,
    pub coeffs: Vec<Complex64>,
    /// Modes whose radial normalisation underflowed and were zeroed.
    #[serde(default)]
    pub flagged: Vec<SphericalIndex>,
}

/// `g_l(r)` for `l = 0..=l_max`.
pub fn radial_basis_all(tau: Frequency, l_max: usize, r: f64) -> Vec<Complex64> {
    if tau.tau == 0.0 {
        let mut out = Vec::with_capacity(l_max + 1);
        let mut p = 1.0;
        for _ in 0..=l_max {
            out.push(Complex64::new(p, 0.0));
            p *= r;
        }
        return out;
    }
    let k = tau.sqrt();
    // r^{-1/2} I_{l+1/2}(kr) = sqrt(2k/π) i_l(kr)
    let pref = (2.0 * k / PI).sqrt();
    spherical_i_all(l_max, k * r).into_iter().map(|v| pref * v).collect()
}

impl SphericalExpansion {
    pub fn zero(tau: Frequency, l0: usize) -> Self {
        Self {
            tau,
            l0,
            coeffs: vec![Complex64::new(0.0, 0.0); count_upto(l0)],
            flagged: Vec::new(),
        }
    }

    pub fn coeff(&self, idx: SphericalIndex) -> Complex64 {
        self.coeffs[idx.flat()]
    }

    pub fn set(&mut self, idx: SphericalIndex, v: Complex64) {
        self.coeffs[idx.flat()] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, _)| SphericalIndex::from_flat(k).l)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: [f64; 3]) -> Complex64 {
        let r = norm3(x);
        let lmax = self.effective_degree();
        let dir = if r > 0.0 {
            [x[0] / r, x[1] / r, x[2] / r]
        } else {
            [0.0, 0.0, 1.0]
        };
        let g = radial_basis_all(self.tau, lmax, r);
        let y = sph_harm_all(lmax, dir);
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..=lmax {
            let base = l * l + l;
            let mut s = Complex64::new(0.0, 0.0);
            for k in base - l..=base + l {
                s += self.coeffs[k] * y[k];
            }
            acc += s * g[l];
        }
        acc
    }

    pub fn eval_many(&self, xs: &[[f64; 3]]) -> Vec<Complex64> {
        xs.par_iter().map(|&x| self.eval(x)).collect()
    }

    /// Same expansion with all degrees above `l` dropped.
    pub fn truncated(&self, l: usize) -> Self {
        let l = l.min(self.l0);
        Self {
            tau: self.tau,
            l0: l,
            coeffs: self.coeffs[..count_upto(l)].to_vec(),
            flagged: self.flagged.iter().copied().filter(|i| i.l <= l).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    /// Radius `R″` of the projection ball.
    pub r_outer: f64,
    pub radial_nodes: usize,
    /// Extra sphere-rule degree beyond `l₀` to suppress aliasing.
    pub sphere_oversampling: usize,
    pub max_degree: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            r_outer: 1.25,
            radial_nodes: 32,
            sphere_oversampling: 16,
            max_degree: MAX_DEGREE,
        }
    }
}

/// Projects `w`, a solution on the ball of radius `R″`, onto degrees `<= l₀`.
///
/// `w_lm(r)` comes from sphere quadrature on Gauss–Legendre radial shells;
/// `A_lm = ∫ r² conj(g_l) w_lm dr / ℐ_{l+1/2}(√τ)`.
pub fn spherical_truncate<F>(
    w: F,
    tau: Frequency,
    l0: usize,
    cfg: &TruncationConfig,
) -> Result<SphericalExpansion, HelmholtzError>
where
    F: Fn([f64; 3]) -> Complex64 + Sync,
{
    if l0 > cfg.max_degree {
        return Err(HelmholtzError::Parameter(format!(
            "degree {l0} exceeds the configured maximum {}",
            cfg.max_degree
        )));
    }
    let rule = SphereRule::for_degree(l0 + cfg.sphere_oversampling);
    let shells = GaussLegendre::new(cfg.radial_nodes).on_interval(0.0, cfg.r_outer);
    let nharm = count_upto(l0);
    let ylm: Vec<Vec<f64>> = rule.points.par_iter().map(|&p| sph_harm_all(l0, p)).collect();

    // numerators Σ_r wr r² conj(g_l(r)) w_lm(r)
    let partial: Vec<Vec<Complex64>> = shells
        .par_iter()
        .map(|&(r, wr)| {
            let g = radial_basis_all(tau, l0, r);
            let mut wlm = vec![Complex64::new(0.0, 0.0); nharm];
            for (p, (dir, wd)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let v = w([r * dir[0], r * dir[1], r * dir[2]]) * *wd;
                for (acc, y) in wlm.iter_mut().zip(&ylm[p]) {
                    *acc += v * *y;
                }
            }
            wlm.iter()
                .enumerate()
                .map(|(k, c)| c * g[SphericalIndex::from_flat(k).l].conj() * (wr * r * r))
                .collect()
        })
        .collect();

    let mut out = SphericalExpansion::zero(tau, l0);
    for l in 0..=l0 {
        let denom = if tau.tau == 0.0 {
            cfg.r_outer.powi(2 * l as i32 + 3) / (2 * l + 3) as f64
        } else {
            besseli_energy(l as f64 + 0.5, tau.sqrt(), cfg.r_outer)?.value
        };
        for m in -(l as i64)..=l as i64 {
            let idx = SphericalIndex { l, m };
            let num: Complex64 = partial.iter().map(|row| row[idx.flat()]).sum();
            if denom < 1e-300 || !denom.is_finite() {
                out.flagged.push(idx);
            } else {
                out.set(idx, num / denom);
            }
        }
    }
    Ok(out)
}

/// [`spherical_truncate`] applied to `G_τ * F` of a Runge result.
pub fn spherical_truncate_source(
    op: &SourceOperator,
    source: &[Complex64],
    l0: usize,
    cfg: &TruncationConfig,
) -> Result<SphericalExpansion, HelmholtzError> {
    let (c, r) = op.target.bounding_ball();
    if norm3(c) > 1e-12 {
        return Err(HelmholtzError::Parameter(
            "spherical truncation expects a target centred at the origin".into(),
        ));
    }
    let gap = op.source.gap_to_ball([0.0; 3], cfg.r_outer);
    if gap <= 0.0 || cfg.r_outer < r {
        return Err(HelmholtzError::Parameter(format!(
            "projection radius {} must cover the target (radius {r}) and avoid the sources",
            cfg.r_outer
        )));
    }
    spherical_truncate(|x| op.field_at(source, x), op.tau, l0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel, BesselKind};

    #[test]
    fn basis_matches_bessel_form() {
        for tau in [-9.0, -1.0, 1.0, 4.0] {
            let t = Frequency::new(tau);
            for r in [0.2, 0.9, 1.7] {
                let g = radial_basis_all(t, 5, r);
                for (l, gl) in g.iter().enumerate() {
                    let i = bessel(BesselKind::I, l as f64 + 0.5, t.sqrt() * r).unwrap();
                    let expect = i / r.sqrt();
                    assert!((gl - expect).norm() < 1e-12 * expect.norm(), "tau={tau} l={l}");
                }
            }
        }
    }

    #[test]
    fn plant_and_recover() {
        let tau = Frequency::new(1.0);
        let mut planted = SphericalExpansion::zero(tau, 4);
        planted.set(SphericalIndex { l: 0, m: 0 }, Complex64::new(0.7, -0.2));
        let rec = spherical_truncate(|x| planted.eval(x), tau, 6, &TruncationConfig::default()).unwrap();
        for (k, c) in rec.coeffs.iter().enumerate() {
            if k == 0 {
                assert!((c - Complex64::new(0.7, -0.2)).norm() < 1e-8);
            } else {
                assert!(c.norm() < 1e-10, "mode {k}: {c}");
            }
        }
    }

    #[test]
    fn harmonic_polynomial_at_zero_frequency() {
        let tau = Frequency::new(0.0);
        // 2x - y + 3z in terms of r Y_1m with Y_1m = sqrt(3/4π) (y, z, x)
        let c = (4.0 * PI / 3.0).sqrt();
        let rec = spherical_truncate(
            |x| Complex64::new(2.0 * x[0] - x[1] + 3.0 * x[2], 0.0),
            tau,
            3,
            &TruncationConfig::default(),
        )
        .unwrap();
        let expect = [(1, -1, -1.0), (1, 0, 3.0), (1, 1, 2.0)];
        for (l, m, v) in expect {
            let a = rec.coeff(SphericalIndex { l, m });
            assert!((a.re - v * c).abs() < 1e-10 && a.im.abs() < 1e-12);
        }
        assert!(rec.coeff(SphericalIndex { l: 0, m: 0 }).norm() < 1e-12);
    }

    #[test]
    fn finite_at_origin() {
        let tau = Frequency::new(-2.0);
        let mut e = SphericalExpansion::zero(tau, 3);
        for c in e.coeffs.iter_mut() {
            *c = Complex64::new(1.0, 1.0);
        }
        let v = e.eval([0.0; 3]);
        assert!(v.re.is_finite() && v.im.is_finite());
    }
}
