use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvolveError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusConfig {
    /// The frequency cube has side `J` and cells of side `1/J`.
    pub j: usize,
    pub q_max: u64,
    pub denominator_limit: u64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            j: 3,
            q_max: 16,
            denominator_limit: 10_000,
        }
    }
}

/// Best rational approximation `p/q` of `x` with `1 <= q <= q_max`.
///
/// Walks the continued fraction and compares the last convergent with the
/// best admissible semiconvergent.
pub fn best_rational(x: f64, q_max: u64) -> (i64, u64) {
    let q_max = q_max.max(1);
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1u64, 1i64, 0u64);
    let mut y = x;
    loop {
        let a = y.floor();
        let ai = a as i64;
        let q2 = ai as i128 * q1 as i128 + q0 as i128;
        if q2 > q_max as i128 || q2 < 0 {
            // largest semiconvergent that fits
            let k = if q1 == 0 { 0 } else { (q_max - q0) / q1 };
            let ps = k as i64 * p1 + p0;
            let qs = k * q1 + q0;
            let pick = if q1 == 0 {
                (ps, qs)
            } else if qs == 0 || (x - p1 as f64 / q1 as f64).abs() <= (x - ps as f64 / qs as f64).abs() {
                (p1, q1)
            } else {
                (ps, qs)
            };
            return pick;
        }
        let p2 = ai * p1 + p0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2 as u64);
        let frac = y - a;
        if frac.abs() < 1e-12 || (x - p1 as f64 / q1 as f64).abs() < 1e-15 * x.abs().max(1.0) {
            return (p1, q1);
        }
        y = 1.0 / frac;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Riemann sum of `v(x,t) = ∫ e^{iξ·x − i|ξ|²t} v̂₀(ξ) dξ` on rational nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalizedDatum {
    pub j: usize,
    /// Least common denominator `N` of all node coordinates.
    pub denominator: u64,
    /// Integer vectors `Nξ_j`.
    pub numerators: Vec<[i64; 3]>,
    /// `v̂₀(ξ_j)` times the cell volume `J^{−3}`.
    pub weights: Vec<Complex64>,
    /// Largest coordinate shift from the cell centres to the snapped nodes.
    pub snap_shift: f64,
}

impl RationalizedDatum {
    pub fn node(&self, k: usize) -> [f64; 3] {
        let n = self.denominator as f64;
        self.numerators[k].map(|p| p as f64 / n)
    }

    /// `v₁(x, t) = Σ_j w_j e^{iξ_j·x − i|ξ_j|²t}`.
    pub fn v1(&self, x: [f64; 3], t: f64) -> Complex64 {
        (0..self.weights.len())
            .map(|k| {
                let xi = self.node(k);
                let ph = xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2] - (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) * t;
                self.weights[k] * Complex64::from_polar(1.0, ph)
            })
            .sum()
    }

    /// `w(x, t) = v₁(Nx, N²t)`, a `2π`-periodic solution on the torus.
    pub fn torus_field(&self, x: [f64; 3], t: f64) -> Complex64 {
        self.numerators
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let k = p.map(|v| v as f64);
                // reduce each product mod 2π so shifted points hit identical phases
                let two_pi = 2.0 * std::f64::consts::PI;
                let sp: f64 = (0..3).map(|a| (k[a] * x[a]).rem_euclid(two_pi)).sum();
                let k2 = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) as f64;
                w * Complex64::from_polar(1.0, sp - k2 * t)
            })
            .sum()
    }

    /// `sup |v₁ − v|` over the given spacetime points.
    pub fn sup_error<F>(&self, exact: F, points: &[[f64; 3]], times: &[f64]) -> f64
    where
        F: Fn([f64; 3], f64) -> Complex64 + Sync,
    {
        points
            .par_iter()
            .map(|&x| {
                times
                    .iter()
                    .map(|&t| (self.v1(x, t) - exact(x, t)).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Midpoint Riemann sum over `[−J/2, J/2]³` with nodes snapped to rationals.
pub fn torus_rationalize<F>(vhat0: F, cfg: &TorusConfig) -> Result<RationalizedDatum, EvolveError>
where
    F: Fn([f64; 3]) -> Complex64,
{
    if cfg.j == 0 || cfg.q_max == 0 {
        return Err(EvolveError::Config("J and q_max must be at least 1".into()));
    }
    let j = cfg.j;
    let per_axis = j * j;
    let h = 1.0 / j as f64;
    let centre = |i: usize| -0.5 * j as f64 + (i as f64 + 0.5) * h;
    let snapped: Vec<(i64, u64)> = (0..per_axis).map(|i| best_rational(centre(i), cfg.q_max)).collect();
    let mut n: u64 = 1;
    for &(_, q) in &snapped {
        n = n / gcd(n, q) * q;
        if n > cfg.denominator_limit {
            return Err(EvolveError::DenominatorOverflow { n, limit: cfg.denominator_limit });
        }
    }
    let snap_shift = snapped
        .iter()
        .enumerate()
        .map(|(i, &(p, q))| (p as f64 / q as f64 - centre(i)).abs())
        .fold(0.0, f64::max);
    let axis: Vec<i64> = snapped.iter().map(|&(p, q)| p * (n / q) as i64).collect();
    let vol = h * h * h;
    let mut numerators = Vec::with_capacity(per_axis.pow(3));
    let mut weights = Vec::with_capacity(per_axis.pow(3));
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                let p = [a, b, c];
                let xi = p.map(|v| v as f64 / n as f64);
                numerators.push(p);
                weights.push(vhat0(xi) * vol);
            }
        }
    }
    Ok(RationalizedDatum {
        j,
        denominator: n,
        numerators,
        weights,
        snap_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rational_snapping() {
        assert_eq!(best_rational(0.5, 2), (1, 2));
        assert_eq!(best_rational(-0.75, 4), (-3, 4));
        assert_eq!(best_rational(3.0, 1), (3, 1));
        assert_eq!(best_rational(PI, 7), (22, 7));
        assert_eq!(best_rational(PI, 200), (355, 113));
        assert_eq!(best_rational(0.3, 2), (1, 2));
        assert_eq!(best_rational(1.0 / 3.0, 10), (1, 3));
    }

    #[test]
    fn integer_nodes_give_unit_denominator() {
        // J = 1: the single centre is the origin
        let d = torus_rationalize(|_| Complex64::new(1.0, 0.0), &TorusConfig { j: 1, q_max: 5, denominator_limit: 10 }).unwrap();
        assert_eq!(d.denominator, 1);
        assert_eq!(d.numerators, vec![[0, 0, 0]]);
        let x = [0.3, -0.2, 0.9];
        assert_eq!(d.v1(x, 0.4), d.torus_field(x, 0.4));
    }

    #[test]
    fn half_integer_nodes_are_periodic() {
        let d = torus_rationalize(|xi| Complex64::new((-xi[0] * xi[0]).exp(), xi[1]), &TorusConfig { j: 2, q_max: 4, denominator_limit: 100 }).unwrap();
        assert_eq!(d.denominator, 4);
        let x = [0.2, 0.4, -0.1];
        let w = d.torus_field(x, 0.05);
        for a in 0..3 {
            let mut y = x;
            y[a] += 2.0 * PI;
            assert!((d.torus_field(y, 0.05) - w).norm() < 1e-12);
        }
        let n = d.denominator as f64;
        let v = d.v1([x[0] * n, x[1] * n, x[2] * n], 0.05 * n * n);
        assert!((v - w).norm() < 1e-11);
    }

    #[test]
    fn overflow_is_reported() {
        let r = torus_rationalize(|_| Complex64::new(1.0, 0.0), &TorusConfig { j: 5, q_max: 10, denominator_limit: 3 });
        assert!(matches!(r, Err(EvolveError::DenominatorOverflow { .. })));
    }
}
