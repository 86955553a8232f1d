use num_complex::Complex64;
use rayon::prelude::*;

use super::SchrodError;
use crate::helmholtz::{Domain, QuadNodes};

/// Minimum number of time samples.
pub const MIN_TIME_SAMPLES: usize = 64;

/// Samples of a local solution on voxel nodes of `D` times a uniform time grid.
///
/// Times are cell-centred on `(−T, T)`: `t_n = −T + (n + 1/2) Δt`.
#[derive(Debug, Clone)]
pub struct SpacetimeSamples {
    pub domain: Domain,
    pub nodes: QuadNodes,
    pub half_width: f64,
    pub times: Vec<f64>,
    /// `values[n][i] = v(x_i, t_n)`.
    pub values: Vec<Vec<Complex64>>,
    /// Supplied tail bound `(M, σ)`, used when the fit fails.
    pub supplied_tail: Option<(f64, f64)>,
    /// Relative residual of `i∂_t v + Δv` measured at construction.
    pub residual: f64,
}

pub fn time_grid(half_width: f64, n: usize) -> Vec<f64> {
    let dt = 2.0 * half_width / n as f64;
    (0..n).map(|k| -half_width + (k as f64 + 0.5) * dt).collect()
}

impl SpacetimeSamples {
    /// Samples `v` and checks the discrete Schrödinger residual against `residual_tol`.
    pub fn from_fn<F>(
        domain: Domain,
        per_axis: usize,
        half_width: f64,
        n_times: usize,
        residual_tol: f64,
        v: F,
    ) -> Result<Self, SchrodError>
    where
        F: Fn([f64; 3], f64) -> Complex64 + Sync,
    {
        let nodes = domain.voxel_nodes(per_axis);
        let times = time_grid(half_width, n_times);
        let values: Vec<Vec<Complex64>> = times
            .par_iter()
            .map(|&t| nodes.points.iter().map(|&x| v(x, t)).collect())
            .collect();
        Self::from_values(domain, nodes, half_width, values, residual_tol)
    }

    pub fn from_values(
        domain: Domain,
        nodes: QuadNodes,
        half_width: f64,
        values: Vec<Vec<Complex64>>,
        residual_tol: f64,
    ) -> Result<Self, SchrodError> {
        let n = values.len();
        if n < MIN_TIME_SAMPLES {
            return Err(SchrodError::TimeGrid {
                min: MIN_TIME_SAMPLES,
                got: n,
            });
        }
        if !(half_width > 0.0) {
            return Err(SchrodError::Parameter(format!("T = {half_width} must be positive")));
        }
        if values.iter().any(|row| row.len() != nodes.len()) {
            return Err(SchrodError::Parameter("sample rows do not match the node count".into()));
        }
        let times = time_grid(half_width, n);
        let mut s = Self {
            domain,
            nodes,
            half_width,
            times,
            values,
            supplied_tail: None,
            residual: 0.0,
        };
        let (res, scale) = s.schrodinger_residual();
        s.residual = if scale > 0.0 { res / scale } else { 0.0 };
        if res > residual_tol * scale {
            return Err(SchrodError::NotASolution {
                residual: s.residual,
                allowed: residual_tol,
            });
        }
        Ok(s)
    }

    pub fn with_tail(mut self, m: f64, sigma: f64) -> Self {
        self.supplied_tail = Some((m, sigma));
        self
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.half_width / self.times.len() as f64
    }

    /// `‖v‖_{L²(D × (−T, T))}` by the product midpoint rule.
    pub fn norm(&self) -> f64 {
        let dt = self.dt();
        self.values
            .iter()
            .map(|row| self.nodes.l2(row).powi(2) * dt)
            .sum::<f64>()
            .sqrt()
    }

    /// `(‖i∂_t v + Δ_h v‖, ‖∂_t v‖ + ‖Δ_h v‖)` over interior nodes and times.
    pub fn schrodinger_residual(&self) -> (f64, f64) {
        let dt = self.dt();
        let nodes = &self.nodes;
        let mut res = 0.0;
        let mut a = 0.0;
        let mut b = 0.0;
        for n in 1..self.times.len() - 1 {
            for p in 0..nodes.len() {
                let mut lap = Complex64::new(0.0, 0.0);
                let mut full = true;
                for ax in 0..3 {
                    let mut d = [0i64; 3];
                    d[ax] = 1;
                    let f = nodes.neighbour(p, d);
                    d[ax] = -1;
                    let g = nodes.neighbour(p, d);
                    match (f, g) {
                        (Some(f), Some(g)) => {
                            lap += (self.values[n][f] + self.values[n][g] - 2.0 * self.values[n][p])
                                / (nodes.h[ax] * nodes.h[ax]);
                        }
                        _ => full = false,
                    }
                }
                if !full {
                    continue;
                }
                let dtv = (self.values[n + 1][p] - self.values[n - 1][p]) / (2.0 * dt);
                let w = nodes.weights[p];
                res += w * (Complex64::i() * dtv + lap).norm_sqr();
                a += w * dtv.norm_sqr();
                b += w * lap.norm_sqr();
            }
        }
        (res.sqrt(), a.sqrt() + b.sqrt())
    }
}
