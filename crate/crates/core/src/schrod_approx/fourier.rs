use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{SchrodError, SpacetimeSamples};
use crate::helmholtz::{helmholtz_residual, Domain, QuadNodes};

/// Fitted or supplied bound `∫_{|τ|>τ₀} ‖v̂‖²_D dτ <= M² ⟨τ₀⟩^{−σ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub m: f64,
    pub sigma: f64,
    /// True when `(M, σ)` came from the least-squares fit.
    pub fitted: bool,
    /// Why the fit was rejected, when it was.
    pub failure: Option<String>,
    /// `(τ₀, tail mass)` pairs used by the fit.
    pub points: Vec<(f64, f64)>,
}

/// Discrete time transform `v̂(x, τ_q) = (Δt/2π) Σ_n e^{−iτ_q t_n} v(x, t_n)`.
///
/// With `τ_q = 2πq/(NΔt)` the inverse is `v(x, t_n) = Σ_q Δτ e^{iτ_q t_n} v̂(x, τ_q)`.
#[derive(Debug, Clone)]
pub struct FourierData {
    pub domain: Domain,
    pub nodes: QuadNodes,
    pub half_width: f64,
    pub dtau: f64,
    /// Frequency indices in increasing order, `−N/2 <= q < N/2`.
    pub q: Vec<i64>,
    pub taus: Vec<f64>,
    /// `slices[j][i] = v̂(x_i, τ_j)`.
    pub slices: Vec<Vec<Complex64>>,
    /// `‖v̂(·, τ_j)‖_{L²(D)}`.
    pub slice_norms: Vec<f64>,
    /// Relative discrete residual of `Δv̂ − τ_j v̂`.
    pub slice_residuals: Vec<f64>,
    pub tail: TailFit,
    /// `‖v‖²_{L²(D×(−T,T))}` from the samples.
    pub sample_mass: f64,
}

impl FourierData {
    /// `2π Σ_q Δτ ‖v̂_q‖²`, equal to the sample mass by Parseval.
    pub fn spectral_mass(&self) -> f64 {
        2.0 * PI * self.dtau * self.slice_norms.iter().map(|n| n * n).sum::<f64>()
    }

    /// `Σ_{|τ_q| > τ₀} Δτ ‖v̂_q‖²`.
    pub fn tail_mass(&self, tau0: f64) -> f64 {
        self.taus
            .iter()
            .zip(&self.slice_norms)
            .filter(|(t, _)| t.abs() > tau0)
            .map(|(_, n)| self.dtau * n * n)
            .sum()
    }

    /// Index of the slice with the largest norm.
    pub fn dominant(&self) -> Option<usize> {
        self.slice_norms
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

fn japanese(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

fn fit_tail(data: &FourierData, supplied: Option<(f64, f64)>) -> TailFit {
    let total = data.tail_mass(-1.0);
    let n = data.q.len() as i64;
    let mut points = Vec::new();
    for q in (n / 4).max(1)..n / 2 {
        let tau0 = q as f64 * data.dtau;
        let t = data.tail_mass(tau0 * (1.0 - 1e-12));
        if t > 1e-28 * total && t > 0.0 {
            points.push((tau0, t));
        }
    }
    let fallback = |reason: String, points: Vec<(f64, f64)>| {
        let (m, sigma) = supplied.unwrap_or((total.sqrt(), 2.0));
        TailFit {
            m,
            sigma,
            fitted: false,
            failure: Some(reason),
            points,
        }
    };
    if total == 0.0 {
        return fallback("zero signal".into(), points);
    }
    if points.len() < 3 {
        return fallback(
            format!("only {} resolvable tail points; spectrum looks band-limited", points.len()),
            points,
        );
    }
    let xs: Vec<f64> = points.iter().map(|p| japanese(p.0).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sigma = -slope;
    if !sigma.is_finite() || sigma <= 0.0 {
        return fallback(format!("tail does not decay (fitted σ = {sigma})"), points);
    }
    // raise M so the bound holds at every resolved threshold
    let mut m2: f64 = total;
    for q in 1..n / 2 {
        let tau0 = q as f64 * data.dtau;
        m2 = m2.max(data.tail_mass(tau0 * (1.0 - 1e-12)) * japanese(tau0).powf(sigma));
    }
    TailFit {
        m: m2.sqrt(),
        sigma,
        fitted: true,
        failure: None,
        points,
    }
}

pub fn time_fourier(v: &SpacetimeSamples) -> FourierData {
    let n = v.times.len();
    let dt = v.dt();
    let dtau = 2.0 * PI / (n as f64 * dt);
    let t0 = v.times[0];
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let m = v.nodes.len();

    // per-node transforms, then transpose into slices
    let per_node: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut buf: Vec<Complex64> = v.values.iter().map(|row| row[i]).collect();
            fft.process(&mut buf);
            buf
        })
        .collect();
    let half = (n / 2) as i64;
    let q: Vec<i64> = (-half..n as i64 - half).collect();
    let taus: Vec<f64> = q.iter().map(|&q| q as f64 * dtau).collect();
    let slices: Vec<Vec<Complex64>> = q
        .par_iter()
        .zip(&taus)
        .map(|(&qq, &tau)| {
            let bin = qq.rem_euclid(n as i64) as usize;
            let phase = Complex64::from_polar(dt / (2.0 * PI), -tau * t0);
            per_node.iter().map(|row| row[bin] * phase).collect()
        })
        .collect();
    let slice_norms: Vec<f64> = slices.iter().map(|s| v.nodes.l2(s)).collect();
    let slice_residuals: Vec<f64> = slices
        .par_iter()
        .zip(&taus)
        .map(|(s, &tau)| {
            let (r, scale) = helmholtz_residual(&v.nodes, s, tau);
            if scale > 0.0 {
                r / scale
            } else {
                0.0
            }
        })
        .collect();
    let sample_mass = v.norm().powi(2);
    let mut data = FourierData {
        domain: v.domain,
        nodes: v.nodes.clone(),
        half_width: v.half_width,
        dtau,
        q,
        taus,
        slices,
        slice_norms,
        slice_residuals,
        tail: TailFit {
            m: 0.0,
            sigma: 0.0,
            fitted: false,
            failure: None,
            points: Vec::new(),
        },
        sample_mass,
    };
    data.tail = fit_tail(&data, v.supplied_tail);
    data
}

impl TailFit {
    /// Fails unless the fit succeeded; for callers that insist on a measured tail.
    pub fn require_fitted(&self) -> Result<(f64, f64), SchrodError> {
        if self.fitted {
            Ok((self.m, self.sigma))
        } else {
            Err(SchrodError::TailFit(
                self.failure.clone().unwrap_or_else(|| "not fitted".into()),
            ))
        }
    }
}
