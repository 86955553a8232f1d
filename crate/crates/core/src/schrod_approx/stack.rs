use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FourierData, SchrodError};
use crate::helmholtz::{
    norm3, runge_approximate, spherical_truncate_source, Domain, Frequency, HelmholtzError,
    RungeOptions, RungeReport, SourceOperator, SphericalExpansion, TruncationConfig,
};
use crate::specfun::{spherical_i_all_scaled, sph_harm_all};

/// What to do with a slice that fails its Helmholtz residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlicePolicy {
    #[default]
    Fail,
    /// Drop the slice and count its mass with the tail.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Source region; defaults to a ball of radius `0.3R` centred `3R` from `D` along `x₁`.
    pub source: Option<Domain>,
    pub source_per_axis: usize,
    pub l0: usize,
    /// Exponent `K` in `ε′ = ε^K`; `None` means `1 + 1/σ + 1/2`.
    pub k_exponent: Option<f64>,
    /// `c` in `τ_ε = c ε^{−2/σ}`.
    pub cutoff_constant: f64,
    pub max_slices: usize,
    /// Slices below this fraction of the largest slice norm are dropped.
    pub skip_below: f64,
    pub policy: SlicePolicy,
    /// Accept the best reachable error when `ε′` cannot be met.
    pub best_effort: bool,
    /// Projection radius as a multiple of the bounding radius of `D`.
    pub r_outer_factor: f64,
    pub runge: RungeOptions,
    pub truncation: TruncationConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            source: None,
            source_per_axis: 8,
            l0: 20,
            k_exponent: None,
            cutoff_constant: 1.0,
            max_slices: 512,
            skip_below: 1e-10,
            policy: SlicePolicy::Fail,
            best_effort: true,
            r_outer_factor: 1.25,
            runge: RungeOptions::default(),
            truncation: TruncationConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn default_source(domain: &Domain) -> Domain {
        let (c, r) = domain.bounding_ball();
        Domain::ball([c[0] + 3.0 * r, c[1], c[2]], 0.3 * r)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyLayer {
    pub q: i64,
    pub tau: f64,
    /// Quadrature weight in `τ`.
    pub weight: f64,
    pub expansion: SphericalExpansion,
    pub report: RungeReport,
    pub slice_norm: f64,
    /// `‖ψ̂_q − v̂_q‖_{L²(D)}` after truncation.
    pub slice_error: f64,
    /// True when `ε′` was out of reach and the best rank was used.
    pub best_effort: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedSlice {
    pub q: i64,
    pub tau: f64,
    pub norm: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyStack {
    pub layers: Vec<FrequencyLayer>,
    pub dtau: f64,
    pub tau_eps: f64,
    pub cutoff_constant: f64,
    pub eps: f64,
    pub eps_slice: f64,
    pub k_exponent: f64,
    pub sigma: f64,
    pub m: f64,
    /// `Σ Δτ ‖v̂_q‖²` over slices outside the stack.
    pub tail_mass: f64,
    pub skipped: Vec<SkippedSlice>,
    /// True when `max_slices` clipped the cutoff.
    pub capped: bool,
}

impl FrequencyStack {
    pub fn empty(dtau: f64) -> Self {
        Self {
            layers: Vec::new(),
            dtau,
            tau_eps: 0.0,
            cutoff_constant: 1.0,
            eps: 0.0,
            eps_slice: 0.0,
            k_exponent: 0.0,
            sigma: 0.0,
            m: 0.0,
            tail_mass: 0.0,
            skipped: Vec::new(),
            capped: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Largest degree carried by any layer.
    pub fn max_degree(&self) -> usize {
        self.layers.iter().map(|l| l.expansion.effective_degree()).max().unwrap_or(0)
    }

    /// `(2π tail + 2π Σ Δτ ‖ψ̂_q − v̂_q‖²)^{1/2}`, the discrete `‖v − v₁‖_{L²(D×(−T,T))}`.
    pub fn error_budget(&self) -> f64 {
        let inside: f64 = self.layers.iter().map(|l| l.weight * l.slice_error.powi(2)).sum();
        (2.0 * PI * (self.tail_mass + inside)).sqrt()
    }
}

fn build_layer(
    data: &FourierData,
    j: usize,
    source: &Domain,
    eps_slice: f64,
    interior: Option<&Domain>,
    cfg: &SweepConfig,
) -> Result<FrequencyLayer, HelmholtzError> {
    let tau = Frequency::new(data.taus[j]);
    let source_nodes = source.voxel_nodes(cfg.source_per_axis);
    let op = SourceOperator::from_nodes(
        data.domain,
        *source,
        tau,
        data.nodes.clone(),
        source_nodes,
    )?;
    let phi = &data.slices[j];
    let (result, best_effort) = match runge_approximate(&op, phi, eps_slice, interior, &cfg.runge) {
        Ok(r) => (r, false),
        Err(HelmholtzError::Unreachable { best, .. }) if cfg.best_effort => {
            let eps = (best * (1.0 + 1e-9)).max(f64::MIN_POSITIVE).min(1.0 - 1e-12);
            (runge_approximate(&op, phi, eps, interior, &cfg.runge)?, true)
        }
        Err(e) => return Err(e),
    };
    let (_, radius) = data.domain.bounding_ball();
    let mut tcfg = cfg.truncation;
    tcfg.r_outer = cfg.r_outer_factor * radius;
    let expansion = spherical_truncate_source(&op, &result.source, cfg.l0, &tcfg)?;
    let approx = expansion.eval_many(&data.nodes.points);
    let diff: Vec<Complex64> = approx.iter().zip(phi).map(|(a, b)| a - b).collect();
    Ok(FrequencyLayer {
        q: data.q[j],
        tau: tau.tau,
        weight: data.dtau,
        expansion,
        report: result.report,
        slice_norm: data.slice_norms[j],
        slice_error: data.nodes.l2(&diff),
        best_effort,
    })
}

/// One Runge approximation and spherical truncation per retained frequency.
pub fn frequency_sweep(
    data: &FourierData,
    eps: f64,
    interior: Option<&Domain>,
    cfg: &SweepConfig,
) -> Result<FrequencyStack, SchrodError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SchrodError::Parameter(format!("ε = {eps} must lie in (0, 1)")));
    }
    let sigma = data.tail.sigma;
    let k_exp = cfg.k_exponent.unwrap_or(1.0 + 1.0 / sigma + 0.5);
    if k_exp <= 1.0 + 1.0 / (2.0 * sigma) {
        return Err(SchrodError::Parameter(format!(
            "K = {k_exp} must exceed 1 + 1/(2σ) = {}",
            1.0 + 1.0 / (2.0 * sigma)
        )));
    }
    let eps_slice = eps.powf(k_exp);
    let tau_eps = cfg.cutoff_constant * eps.powf(-2.0 / sigma);
    let source = cfg.source.unwrap_or_else(|| SweepConfig::default_source(&data.domain));

    let mut inside: Vec<usize> = (0..data.taus.len()).filter(|&j| data.taus[j].abs() < tau_eps).collect();
    let mut capped = false;
    if inside.len() > cfg.max_slices {
        inside.sort_by(|&a, &b| data.taus[a].abs().total_cmp(&data.taus[b].abs()));
        inside.truncate(cfg.max_slices);
        inside.sort_unstable();
        capped = true;
    }
    let top = data.slice_norms.iter().copied().fold(0.0, f64::max);
    let mut skipped = Vec::new();
    let mut tail_mass = 0.0;
    let mut work = Vec::new();
    for j in 0..data.taus.len() {
        let norm = data.slice_norms[j];
        let reason = if !inside.contains(&j) {
            Some("outside the frequency cutoff".to_string())
        } else if norm == 0.0 || norm < cfg.skip_below * top {
            Some("negligible slice".to_string())
        } else {
            None
        };
        match reason {
            Some(reason) => {
                tail_mass += data.dtau * norm * norm;
                if norm > 0.0 {
                    skipped.push(SkippedSlice { q: data.q[j], tau: data.taus[j], norm, reason });
                }
            }
            None => work.push(j),
        }
    }

    let results: Vec<(usize, Result<FrequencyLayer, HelmholtzError>)> = work
        .par_iter()
        .map(|&j| (j, build_layer(data, j, &source, eps_slice, interior, cfg)))
        .collect();
    let mut layers = Vec::new();
    for (j, r) in results {
        match r {
            Ok(layer) => layers.push(layer),
            Err(e @ HelmholtzError::NotASolution { .. }) if cfg.policy == SlicePolicy::Skip => {
                let norm = data.slice_norms[j];
                tail_mass += data.dtau * norm * norm;
                skipped.push(SkippedSlice { q: data.q[j], tau: data.taus[j], norm, reason: e.to_string() });
            }
            Err(source) => {
                return Err(SchrodError::Slice { index: j, tau: data.taus[j], source });
            }
        }
    }
    Ok(FrequencyStack {
        layers,
        dtau: data.dtau,
        tau_eps,
        cutoff_constant: cfg.cutoff_constant,
        eps,
        eps_slice,
        k_exponent: k_exp,
        sigma,
        m: data.tail.m,
        tail_mass,
        skipped,
        capped,
    })
}

/// `v₁(x, t) = Σ_q w_q e^{iτ_q t} ψ̂_q(x)`.
pub fn assemble_v1(stack: &FrequencyStack, x: [f64; 3], t: f64) -> Complex64 {
    stack
        .layers
        .iter()
        .map(|l| l.weight * Complex64::from_polar(1.0, l.tau * t) * l.expansion.eval(x))
        .sum()
}

/// Radial factors of `e^{itΔ}[g_l(r) Y_lm e^{−δr²}] = R_l(r, t) Y_lm` for `l <= l_max`.
///
/// With `z = 1 + 4iδt` and `k = √τ`,
/// `R_l = √(2k/π) z^{−3/2} exp((−δr² + iτt)/z) i_l(kr/z)`; for `τ = 0` the
/// Bessel factor is replaced by `(r/z)^l`. At `δ = 0` this is `e^{iτt} g_l(r)`.
pub fn propagate_mode_radial(tau: Frequency, l_max: usize, delta: f64, r: f64, t: f64) -> Vec<Complex64> {
    let z = Complex64::new(1.0, 4.0 * delta * t);
    let zinv = 1.0 / z;
    let pre = zinv * zinv.sqrt();
    let expo = Complex64::new(-delta * r * r, tau.tau * t) * zinv;
    if tau.tau == 0.0 {
        let base = pre * expo.exp();
        let s = r * zinv;
        let mut out = Vec::with_capacity(l_max + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for _ in 0..=l_max {
            out.push(base * p);
            p *= s;
        }
        return out;
    }
    let k = tau.sqrt();
    let w = k * r * zinv;
    let base = pre * (2.0 * k / PI).sqrt() * (expo + w.re.abs()).exp();
    spherical_i_all_scaled(l_max, w).into_iter().map(|s| base * s).collect()
}

/// Per-layer angular sums `Σ_m A_lm Y_lm(x̂)` for `l = 0..=l_max`.
fn angular_sums(stack: &FrequencyStack, x: [f64; 3]) -> (f64, Vec<Vec<Complex64>>) {
    let r = norm3(x);
    let dir = if r > 0.0 { [x[0] / r, x[1] / r, x[2] / r] } else { [0.0, 0.0, 1.0] };
    let lmax = stack.max_degree();
    let y = sph_harm_all(lmax, dir);
    let sums = stack
        .layers
        .iter()
        .map(|layer| {
            let c = &layer.expansion.coeffs;
            (0..=lmax.min(layer.expansion.l0))
                .map(|l| {
                    let base = l * l + l;
                    (base - l..=base + l).map(|k| c[k] * y[k]).sum()
                })
                .collect()
        })
        .collect();
    (r, sums)
}

fn propagate_with_sums(stack: &FrequencyStack, r: f64, sums: &[Vec<Complex64>], delta: f64, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (layer, s) in stack.layers.iter().zip(sums) {
        if s.is_empty() {
            continue;
        }
        let radial = propagate_mode_radial(Frequency::new(layer.tau), s.len() - 1, delta, r, t);
        let v: Complex64 = radial.iter().zip(s).map(|(a, b)| a * b).sum();
        acc += layer.weight * v;
    }
    acc
}

/// `e^{itΔ}u_δ(x)` with `u_δ = v₁(·, 0) e^{−δ|x|²}`, summed mode by mode.
///
/// `t = 0` returns `u_δ(x)`. `|1 + 4iδt| >= 1` for real `t`, so there is no singular case.
pub fn damp_and_propagate(stack: &FrequencyStack, delta: f64, x: [f64; 3], t: f64) -> Complex64 {
    let (r, sums) = angular_sums(stack, x);
    propagate_with_sums(stack, r, &sums, delta, t)
}

/// Evaluates `e^{itΔ}u_δ` on all `(t, x)` pairs: `out[n][i]` at `times[n]`, `points[i]`.
pub fn propagate_grid(stack: &FrequencyStack, delta: f64, points: &[[f64; 3]], times: &[f64]) -> Vec<Vec<Complex64>> {
    let cols: Vec<Vec<Complex64>> = points
        .par_iter()
        .map(|&x| {
            let (r, sums) = angular_sums(stack, x);
            times.iter().map(|&t| propagate_with_sums(stack, r, &sums, delta, t)).collect()
        })
        .collect();
    (0..times.len())
        .map(|n| cols.iter().map(|c| c[n]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::SphericalIndex;

    fn one_layer(tau: f64, l: usize, m: i64, weight: f64) -> FrequencyStack {
        let mut e = SphericalExpansion::zero(Frequency::new(tau), l.max(2));
        e.set(SphericalIndex { l, m }, Complex64::new(0.7, -0.2));
        let mut s = FrequencyStack::empty(weight);
        s.layers.push(FrequencyLayer {
            q: 0,
            tau,
            weight,
            expansion: e,
            report: dummy_report(tau),
            slice_norm: 1.0,
            slice_error: 0.0,
            best_effort: false,
        });
        s
    }

    fn dummy_report(tau: f64) -> RungeReport {
        RungeReport {
            tau,
            eps: 0.1,
            target: Default::default(),
            alpha: 0.0,
            rank: 0,
            error_target: 0.0,
            error_interior: None,
            input_norm: 0.0,
            input_h1_norm: 0.0,
            source_norm: 0.0,
            source_bound_holds: true,
            pde_residual: 0.0,
            trace: vec![],
            curve: vec![],
            budgets: crate::helmholtz::Budgets::new(1.0, 0.1, Frequency::new(tau)),
            norm_surrogates: None,
        }
    }

    #[test]
    fn empty_stack_is_zero() {
        let s = FrequencyStack::empty(1.0);
        assert_eq!(assemble_v1(&s, [0.1, 0.2, 0.3], 0.4), Complex64::new(0.0, 0.0));
        assert_eq!(damp_and_propagate(&s, 0.5, [0.1, 0.2, 0.3], 0.4), Complex64::new(0.0, 0.0));
        assert_eq!(s.error_budget(), 0.0);
    }

    #[test]
    fn single_layer_assembly() {
        let s = one_layer(-3.0, 2, 1, 0.25);
        let x = [0.3, -0.4, 0.5];
        let t = 0.37;
        let expect = 0.25 * Complex64::from_polar(1.0, -3.0 * t) * s.layers[0].expansion.eval(x);
        assert!((assemble_v1(&s, x, t) - expect).norm() < 1e-15);
    }

    #[test]
    fn propagation_limits() {
        for tau in [-6.0, 0.0, 4.0] {
            let s = one_layer(tau, 3, -2, 1.0);
            let x = [0.9, 0.2, -1.1];
            let r2 = x.iter().map(|v| v * v).sum::<f64>();
            // t = 0 gives the damped datum
            let u0 = damp_and_propagate(&s, 0.3, x, 0.0);
            let expect = assemble_v1(&s, x, 0.0) * (-0.3 * r2).exp();
            assert!((u0 - expect).norm() < 1e-13 * expect.norm().max(1e-3), "tau={tau}");
            // δ = 0 gives the undamped evolution
            let w = damp_and_propagate(&s, 0.0, x, 0.8);
            let v = assemble_v1(&s, x, 0.8);
            assert!((w - v).norm() < 1e-13 * v.norm().max(1e-3), "tau={tau}");
        }
    }

    #[test]
    fn propagated_field_solves_schrodinger() {
        // central differences of i∂_t w + Δw at one point
        let s = one_layer(-5.0, 2, 0, 1.0);
        let (d, h, dt) = (0.2, 1e-3, 1e-4);
        let x = [0.4, -0.3, 0.6];
        let t = 0.3;
        let w = |x: [f64; 3], t: f64| damp_and_propagate(&s, d, x, t);
        let w0 = w(x, t);
        let mut lap = Complex64::new(0.0, 0.0);
        for a in 0..3 {
            let mut p = x;
            p[a] += h;
            let mut m = x;
            m[a] -= h;
            lap += (w(p, t) + w(m, t) - 2.0 * w0) / (h * h);
        }
        let dtw = (w(x, t + dt) - w(x, t - dt)) / (2.0 * dt);
        let res = (Complex64::i() * dtw + lap).norm();
        assert!(res < 1e-4 * (lap.norm() + dtw.norm()), "residual {res}");
    }
}
