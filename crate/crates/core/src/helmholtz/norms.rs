use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{radial_basis_all, Frequency, HelmholtzError, SphericalExpansion};
use crate::quadrature::{GaussLegendre, SphereRule};
use crate::specfun::{count_upto, SphericalIndex};

/// Per-degree `∫₀^R |g_l(r)|² r² e^{−2 c r} dr` by composite Gauss–Legendre.
fn radial_masses(tau: Frequency, lmax: usize, r_max: f64, decay: f64) -> Result<Vec<f64>, HelmholtzError> {
    let wavelength = 2.0 * std::f64::consts::PI / tau.tau.abs().sqrt().max(1.0);
    let panels = ((r_max / (0.1 * wavelength)).ceil() as usize).max(8);
    let gl = GaussLegendre::new(12);
    let width = r_max / panels as f64;
    let sums: Vec<Vec<f64>> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let mut acc = vec![0.0; lmax + 1];
            for (r, w) in gl.on_interval(p as f64 * width, (p + 1) as f64 * width) {
                let damp = (-decay * r).exp();
                for (l, g) in radial_basis_all(tau, lmax, r).into_iter().enumerate() {
                    let v = g.norm() * damp * r;
                    acc[l] += w * v * v;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; lmax + 1];
    for row in sums {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(HelmholtzError::Parameter(format!(
            "radial integral overflows at R = {r_max}"
        )));
    }
    Ok(out)
}

fn weighted_mass(psi: &SphericalExpansion, masses: &[f64]) -> f64 {
    psi.coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() * masses[SphericalIndex::from_flat(k).l])
        .sum()
}

/// `‖ψ‖_{L²(B_R)}` by orthonormality of the harmonics.
pub fn ball_norm(psi: &SphericalExpansion, radius: f64) -> Result<f64, HelmholtzError> {
    if psi.is_zero() {
        return Ok(0.0);
    }
    let m = radial_masses(psi.tau, psi.effective_degree(), radius, 0.0)?;
    Ok(weighted_mass(psi, &m).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalNorms {
    pub r_max: f64,
    /// `(R⁻¹ ∫_{B_R} |ψ|² e^{−2√τ₊|x|} dx)^{1/2}` at `R = R_max`.
    pub triple_seminorm: f64,
    /// `sup_{|x|<=R_max} ⟨x⟩ e^{−√τ₊|x|} |ψ(x)|`, sampled.
    pub weighted_sup: f64,
    /// Radius where the sampled supremum is attained.
    pub sup_radius: f64,
}

/// Finite-radius surrogates of the growth seminorm and the weighted sup norm.
pub fn global_norms(psi: &SphericalExpansion, r_max: f64) -> Result<GlobalNorms, HelmholtzError> {
    if psi.tau.tau == 0.0 {
        return Err(HelmholtzError::ZeroFrequencySeminorm);
    }
    if r_max < 10.0 {
        return Err(HelmholtzError::Parameter(format!("R_max = {r_max} must be at least 10")));
    }
    if psi.is_zero() {
        return Ok(GlobalNorms {
            r_max,
            triple_seminorm: 0.0,
            weighted_sup: 0.0,
            sup_radius: 0.0,
        });
    }
    let c = psi.tau.plus().sqrt();
    let lmax = psi.effective_degree();
    let m = radial_masses(psi.tau, lmax, r_max, c)?;
    let triple = (weighted_mass(psi, &m) / r_max).sqrt();

    let rule = SphereRule::for_degree(lmax + 4);
    let n_r = 400;
    let (sup, at) = (1..=n_r)
        .into_par_iter()
        .map(|i| {
            let r = r_max * i as f64 / n_r as f64;
            let weight = (1.0 + r * r).sqrt() * (-c * r).exp();
            let best = rule
                .points
                .iter()
                .map(|d| weight * psi.eval([r * d[0], r * d[1], r * d[2]]).norm())
                .fold(0.0, f64::max);
            (best, r)
        })
        .reduce(|| (0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(GlobalNorms {
        r_max,
        triple_seminorm: triple,
        weighted_sup: sup,
        sup_radius: at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub inner: f64,
    pub middle: f64,
    pub outer: f64,
    /// `‖φ‖_{B₁}^θ ‖φ‖_{B₃}^{1−θ}` at the fitted θ.
    pub interpolated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub tau: f64,
    pub radii: [f64; 3],
    pub theta: f64,
    pub constant: f64,
    pub rows: Vec<StabilityRow>,
    pub excluded_zero: usize,
    pub holds: bool,
}

/// Fits `‖φ‖_{B_{R₂}} <= C ‖φ‖_{B_{R₁}}^θ ‖φ‖_{B_{R₃}}^{1−θ}` over random solutions.
///
/// `extra` solutions are included alongside `trials` random expansions of
/// degree `<= l_rand`. θ is chosen on a grid to minimise the constant.
pub fn stability_probe(
    tau: Frequency,
    radii: [f64; 3],
    trials: usize,
    l_rand: usize,
    seed: u64,
    extra: &[SphericalExpansion],
) -> Result<StabilityReport, HelmholtzError> {
    if !(0.0 < radii[0] && radii[0] < radii[1] && radii[1] < radii[2]) {
        return Err(HelmholtzError::Parameter(format!("radii {radii:?} must increase")));
    }
    if trials == 0 && extra.is_empty() {
        return Err(HelmholtzError::Parameter("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sols: Vec<SphericalExpansion> = extra.to_vec();
    for _ in 0..trials {
        let mut e = SphericalExpansion::zero(tau, l_rand);
        for k in 0..count_upto(l_rand) {
            e.coeffs[k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        sols.push(e);
    }
    let mut norms = Vec::new();
    let mut excluded = 0;
    for s in &sols {
        let n = [ball_norm(s, radii[0])?, ball_norm(s, radii[1])?, ball_norm(s, radii[2])?];
        if n.contains(&0.0) {
            excluded += 1;
        } else {
            norms.push(n);
        }
    }
    let constant_at = |theta: f64| {
        norms
            .iter()
            .map(|n| n[1] / (n[0].powf(theta) * n[2].powf(1.0 - theta)))
            .fold(0.0, f64::max)
    };
    let (mut theta, mut constant) = (0.5, f64::INFINITY);
    for i in 1..100 {
        let th = i as f64 / 100.0;
        let c = constant_at(th);
        if c < constant {
            theta = th;
            constant = c;
        }
    }
    if norms.is_empty() {
        constant = 0.0;
    }
    let rows: Vec<StabilityRow> = norms
        .iter()
        .map(|n| StabilityRow {
            inner: n[0],
            middle: n[1],
            outer: n[2],
            interpolated: n[0].powf(theta) * n[2].powf(1.0 - theta),
        })
        .collect();
    let holds = rows
        .iter()
        .all(|r| r.middle <= constant * r.interpolated * (1.0 + 1e-12));
    Ok(StabilityReport {
        tau: tau.tau,
        radii,
        theta,
        constant,
        rows,
        excluded_zero: excluded,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_expansion_norms() {
        let z = SphericalExpansion::zero(Frequency::new(-1.0), 3);
        let n = global_norms(&z, 10.0).unwrap();
        assert_eq!((n.triple_seminorm, n.weighted_sup), (0.0, 0.0));
        assert!(matches!(
            global_norms(&SphericalExpansion::zero(Frequency::new(0.0), 1), 10.0),
            Err(HelmholtzError::ZeroFrequencySeminorm)
        ));
    }

    #[test]
    fn ball_norm_of_spherical_wave() {
        // sin r / r = sqrt(π/2)·... choose A_00 so ψ = sin r / r
        let tau = Frequency::new(-1.0);
        let mut e = SphericalExpansion::zero(tau, 0);
        let g0 = radial_basis_all(tau, 0, 1.0)[0];
        let target = 1f64.sin();
        let y00 = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        e.coeffs[0] = Complex64::new(target, 0.0) / (g0 * y00);
        let v = e.eval([0.0, 1.0, 0.0]);
        assert!((v.re - target).abs() < 1e-12 && v.im.abs() < 1e-12);
        // ∫_{B_R} sin²r/r² dx = 4π ∫ sin²r dr = 2π (R − sin 2R / 2)
        let r: f64 = 3.0;
        let expect = (2.0 * std::f64::consts::PI * (r - (2.0 * r).sin() / 2.0)).sqrt();
        assert!((ball_norm(&e, r).unwrap() - expect).abs() < 1e-10 * expect);
    }
}
