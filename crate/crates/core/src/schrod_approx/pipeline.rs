use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stack::{propagate_grid, SkippedSlice};
use super::{
    damp_and_propagate, frequency_sweep, propagate_mode_radial, time_fourier, FrequencyStack,
    SchrodError, SpacetimeSamples, SweepConfig, TailFit,
};
use crate::grid::{BoxSpec, ComplexField, Fft3};
use crate::helmholtz::{Domain, Frequency};
use crate::quadrature::GaussLegendre;
use crate::specfun::SphericalIndex;

/// `u_δ = v₁(·, 0) e^{−δ|x|²}` together with its exact free evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DampedDatum {
    pub delta: f64,
    pub stack: FrequencyStack,
}

impl DampedDatum {
    pub fn new(stack: FrequencyStack, delta: f64, delta_max: f64) -> Result<Self, SchrodError> {
        if !(delta > 0.0 && delta <= delta_max) {
            return Err(SchrodError::Parameter(format!("δ = {delta} must lie in (0, {delta_max}]")));
        }
        Ok(Self { delta, stack })
    }

    pub fn initial(&self, x: [f64; 3]) -> Complex64 {
        damp_and_propagate(&self.stack, self.delta, x, 0.0)
    }

    /// `(e^{itΔ}u_δ)(x)`.
    pub fn eval(&self, x: [f64; 3], t: f64) -> Complex64 {
        damp_and_propagate(&self.stack, self.delta, x, t)
    }

    /// `out[n][i]` at `times[n]`, `points[i]`.
    pub fn eval_grid(&self, points: &[[f64; 3]], times: &[f64]) -> Vec<Vec<Complex64>> {
        propagate_grid(&self.stack, self.delta, points, times)
    }

    /// `‖u_δ‖_{L²(ℝ³)}` by radial quadrature out to where `e^{−δr²}` wins.
    ///
    /// Returns `(norm, resolved)`; `resolved` is false when the panel cap was hit.
    pub fn l2_norm(&self) -> (f64, bool) {
        let stack = &self.stack;
        if stack.is_empty() {
            return (0.0, true);
        }
        let d = self.delta;
        let kappa = stack
            .layers
            .iter()
            .map(|l| Frequency::new(l.tau).sqrt().re.abs())
            .fold(0.0, f64::max);
        let kmax = stack.layers.iter().map(|l| l.tau.abs().sqrt()).fold(0.0, f64::max);
        let r_cut = 1.2 * (2.0 * kappa + (4.0 * kappa * kappa + 640.0 * d).sqrt()) / (4.0 * d) + 1.0;
        let width = (2.0 / kmax.max(1e-12)).min(1.0).min(0.5 / d.sqrt());
        const MAX_PANELS: usize = 200_000;
        let wanted = (r_cut / width).ceil() as usize;
        let panels = wanted.clamp(4, MAX_PANELS);
        let h = r_cut / panels as f64;
        let gl = GaussLegendre::new(12);
        let lmax = stack.max_degree();
        let nharm = (lmax + 1) * (lmax + 1);
        let total: f64 = (0..panels)
            .into_par_iter()
            .map(|p| {
                let mut acc = 0.0;
                for (r, w) in gl.on_interval(p as f64 * h, (p + 1) as f64 * h) {
                    let mut modes = vec![Complex64::new(0.0, 0.0); nharm];
                    for layer in &stack.layers {
                        let e = &layer.expansion;
                        let deg = e.effective_degree().min(lmax);
                        let radial = propagate_mode_radial(Frequency::new(layer.tau), deg, d, r, 0.0);
                        for k in 0..(deg + 1) * (deg + 1) {
                            modes[k] += layer.weight * e.coeffs[k] * radial[SphericalIndex::from_flat(k).l];
                        }
                    }
                    acc += w * r * r * modes.iter().map(|c| c.norm_sqr()).sum::<f64>();
                }
                acc
            })
            .sum();
        (total.sqrt(), wanted <= MAX_PANELS)
    }

    /// Discrete `H^k` norm of `u_δ` sampled on a box, plus the largest boundary
    /// value relative to the interior maximum.
    pub fn hk_norm(&self, order: u32, spec: BoxSpec) -> (f64, f64) {
        let mut f = ComplexField::from_fn(spec, 0.0, |x| self.initial(x));
        let max = f.max_abs();
        let n = spec.n;
        let mut edge: f64 = 0.0;
        for ((i, j, k), v) in f.data.indexed_iter() {
            if i == 0 || j == 0 || k == 0 || i == n[0] - 1 || j == n[1] - 1 || k == n[2] - 1 {
                edge = edge.max(v.norm());
            }
        }
        let k2 = spec.k_squared();
        Fft3::for_box(&spec).forward(&mut f.data);
        let sum: f64 = f
            .data
            .iter()
            .zip(k2.iter())
            .map(|(c, k)| (1.0 + k).powi(order as i32) * c.norm_sqr())
            .sum();
        let norm = (spec.cell_volume() * sum / spec.len() as f64).sqrt();
        (norm, if max > 0.0 { edge / max } else { 0.0 })
    }
}

/// Request for a discrete `H^k` norm of the datum on a periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HkRequest {
    pub order: u32,
    pub grid: BoxSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub sweep: SweepConfig,
    pub delta0: f64,
    pub delta_max: f64,
    pub max_halvings: usize,
    /// Relative improvement below which the δ sweep stops.
    pub stall_tol: f64,
    pub hk: Option<HkRequest>,
    /// Stand-in for the unknown constant in the bound metadata.
    pub bound_constant: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sweep: SweepConfig::default(),
            delta0: 0.5,
            delta_max: 0.5,
            max_halvings: 20,
            stall_tol: 1e-3,
            hk: None,
            bound_constant: 1.0,
        }
    }
}

/// One step of the δ sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaProbe {
    pub delta: f64,
    pub error: f64,
    pub relative_error: f64,
    /// `max |w_δ − v₁|` over the evaluation nodes and times.
    pub damping_error: f64,
}

/// The bound `exp∘exp∘exp∘exp(C ε^{−1/σ}) · M`, kept as metadata only.
///
/// `levels[j]` is the `j`-fold exponential of the innermost argument, listed
/// until it overflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerBound {
    pub formula: String,
    pub constant: f64,
    pub innermost: f64,
    pub levels: Vec<f64>,
    pub overflows_at: Option<usize>,
    pub m: f64,
}

impl TowerBound {
    pub fn new(constant: f64, eps: f64, sigma: f64, m: f64) -> Self {
        let innermost = constant * eps.powf(-1.0 / sigma);
        let mut levels = vec![innermost];
        let mut overflows_at = None;
        for j in 1..=4 {
            let next = levels[j - 1].exp();
            if !next.is_finite() {
                overflows_at = Some(j);
                break;
            }
            levels.push(next);
        }
        Self {
            formula: "exp(exp(exp(exp(C eps^(-1/sigma))))) * M".into(),
            constant,
            innermost,
            levels,
            overflows_at,
            m,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchwartzReport {
    pub eps: f64,
    pub half_width: f64,
    /// `‖v‖` on the evaluation region.
    pub input_norm: f64,
    pub target_error: f64,
    pub error: f64,
    pub relative_error: f64,
    pub met: bool,
    pub delta: f64,
    /// `‖v − v₁‖` on the evaluation region, before damping.
    pub undamped_error: f64,
    pub stack_error_budget: f64,
    pub probes: Vec<DeltaProbe>,
    pub datum_l2_norm: f64,
    pub datum_norm_resolved: bool,
    /// `(k, ‖u_δ‖_{H^k}, boundary fraction)`.
    pub hk_norm: Option<(u32, f64, f64)>,
    pub tail: TailFit,
    pub tau_eps: f64,
    pub eps_slice: f64,
    pub k_exponent: f64,
    pub layers: usize,
    pub best_effort_layers: usize,
    pub skipped: Vec<SkippedSlice>,
    pub capped: bool,
    pub bound: TowerBound,
}

fn weighted_l2(rows: &[Vec<Complex64>], weights: &[f64], dt: f64) -> f64 {
    rows.iter()
        .map(|row| row.iter().zip(weights).map(|(v, w)| w * v.norm_sqr()).sum::<f64>() * dt)
        .sum::<f64>()
        .sqrt()
}

/// End to end: time transform, frequency sweep, δ sweep, norms.
///
/// The error is measured on `D` (or `D′ ⊂ D`) times the sample times, as
/// `‖v − w_δ‖ <= ε ‖v‖`. An unreachable target is reported, not raised.
pub fn build_schwartz_datum(
    v: &SpacetimeSamples,
    eps: f64,
    interior: Option<&Domain>,
    cfg: &PipelineConfig,
) -> Result<(DampedDatum, SchwartzReport), SchrodError> {
    if !(cfg.delta0 > 0.0 && cfg.delta0 <= cfg.delta_max) {
        return Err(SchrodError::Parameter(format!(
            "δ₀ = {} must lie in (0, {}]",
            cfg.delta0, cfg.delta_max
        )));
    }
    let data = time_fourier(v);
    let stack = frequency_sweep(&data, eps, interior, &cfg.sweep)?;

    let idx: Vec<usize> = match interior {
        Some(d) => v.nodes.subset(d),
        None => (0..v.nodes.len()).collect(),
    };
    let points: Vec<[f64; 3]> = idx.iter().map(|&i| v.nodes.points[i]).collect();
    let weights: Vec<f64> = idx.iter().map(|&i| v.nodes.weights[i]).collect();
    let truth: Vec<Vec<Complex64>> = v.values.iter().map(|row| idx.iter().map(|&i| row[i]).collect()).collect();
    let dt = v.dt();
    let input_norm = weighted_l2(&truth, &weights, dt);
    let target = eps * input_norm;
    let rel = |e: f64| if input_norm > 0.0 { e / input_norm } else { 0.0 };

    let diff_norm = |w: &[Vec<Complex64>]| {
        let d: Vec<Vec<Complex64>> = truth
            .iter()
            .zip(w)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        weighted_l2(&d, &weights, dt)
    };
    let v1 = propagate_grid(&stack, 0.0, &points, &v.times);
    let undamped = diff_norm(&v1);

    let mut probes: Vec<DeltaProbe> = Vec::new();
    let mut delta = cfg.delta0;
    for _ in 0..=cfg.max_halvings {
        let w = propagate_grid(&stack, delta, &points, &v.times);
        let err = diff_norm(&w);
        let damping = w
            .iter()
            .zip(&v1)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        let stalled = probes.last().is_some_and(|p| err >= p.error * (1.0 - cfg.stall_tol));
        probes.push(DeltaProbe {
            delta,
            error: err,
            relative_error: rel(err),
            damping_error: damping,
        });
        if err <= target || stalled {
            break;
        }
        delta *= 0.5;
    }
    let best = probes
        .iter()
        .min_by(|a, b| a.error.total_cmp(&b.error))
        .copied()
        .expect("at least one probe");

    let datum = DampedDatum::new(stack, best.delta, cfg.delta_max)?;
    let (datum_l2_norm, datum_norm_resolved) = datum.l2_norm();
    let hk_norm = cfg.hk.map(|req| {
        let (n, edge) = datum.hk_norm(req.order, req.grid);
        (req.order, n, edge)
    });
    let stack = &datum.stack;
    let report = SchwartzReport {
        eps,
        half_width: v.half_width,
        input_norm,
        target_error: target,
        error: best.error,
        relative_error: best.relative_error,
        met: best.error <= target,
        delta: best.delta,
        undamped_error: undamped,
        stack_error_budget: stack.error_budget(),
        probes,
        datum_l2_norm,
        datum_norm_resolved,
        hk_norm,
        tail: data.tail.clone(),
        tau_eps: stack.tau_eps,
        eps_slice: stack.eps_slice,
        k_exponent: stack.k_exponent,
        layers: stack.layers.len(),
        best_effort_layers: stack.layers.iter().filter(|l| l.best_effort).count(),
        skipped: stack.skipped.clone(),
        capped: stack.capped,
        bound: TowerBound::new(cfg.bound_constant, eps, data.tail.sigma, data.tail.m),
    };
    Ok((datum, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_bound_overflows_quickly() {
        let b = TowerBound::new(1.0, 0.05, 2.0, 1.0);
        assert!((b.innermost - 20f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.overflows_at, Some(3));
        assert_eq!(b.levels.len(), 3);
    }

    #[test]
    fn zero_input_gives_zero_datum() {
        let s = SpacetimeSamples::from_fn(Domain::unit_ball(), 6, 0.5, 64, 0.1, |_, _| Complex64::new(0.0, 0.0))
            .unwrap();
        let (datum, rep) = build_schwartz_datum(&s, 0.05, None, &PipelineConfig::default()).unwrap();
        assert!(datum.stack.is_empty());
        assert_eq!(rep.error, 0.0);
        assert_eq!(datum.l2_norm(), (0.0, true));
        assert_eq!(datum.eval([0.1, 0.2, 0.3], 0.4), Complex64::new(0.0, 0.0));
    }
}
