//! Closed-form Schrödinger solutions with quadratic polynomial parts whose
//! zero sets reconnect, collapse, or translate.
//!
//! A field `v = (p(x) + a t) + i (q(x) + b t)` with quadratic `p`, `q` solves
//! `i∂ₜv + Δv = 0` exactly when `Δp = b` and `Δq = −a`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{BoxSpec, ComplexField, GridError};
use crate::vortex::{
    component_timeline, detect_events, extract_zero_set, separation_series, EventConfig,
    EventKind, ExtractConfig, ReconnectionEvent, TimelineRow, VortexCurveSet,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown preset `{name}`; available: {list}", name = .0, list = PRESETS.join(", "))]
    UnknownPreset(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub const PRESETS: [&str; 4] = ["hyperbolic-exchange", "ring-death", "ring-birth", "moving-ring"];

/// `c + g·x + xᵀHx` with symmetric `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub c: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Quadratic {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let mut v = self.c;
        for i in 0..3 {
            v += self.g[i] * x[i];
            for j in 0..3 {
                v += self.h[i][j] * x[i] * x[j];
            }
        }
        v
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| self.g[i] + (0..3).map(|j| (self.h[i][j] + self.h[j][i]) * x[j]).sum::<f64>())
    }

    pub fn laplacian(&self) -> f64 {
        2.0 * (self.h[0][0] + self.h[1][1] + self.h[2][2])
    }

    fn diag(c: f64, g: [f64; 3], d: [f64; 3]) -> Self {
        Self {
            c,
            g,
            h: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]],
        }
    }
}

/// `v(x, t) = (re(x) + a t) + i (im(x) + b t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSolution {
    pub re: Quadratic,
    pub im: Quadratic,
    pub a: f64,
    pub b: f64,
}

impl QuadraticSolution {
    pub fn eval(&self, x: [f64; 3], t: f64) -> Complex64 {
        Complex64::new(self.re.eval(x) + self.a * t, self.im.eval(x) + self.b * t)
    }

    /// `i∂ₜv + Δv` from the stored coefficients; a constant in space and time.
    pub fn symbolic_residual(&self) -> Complex64 {
        Complex64::new(self.re.laplacian() - self.b, self.im.laplacian() + self.a)
    }

    /// Largest `|i∂ₜv + Δv|` with second-order central differences in space
    /// and time, over interior nodes and interior times.
    pub fn fd_residual(&self, spec: &BoxSpec, times: &[f64]) -> f64 {
        let h = spec.spacing();
        let n = spec.n;
        let mut worst: f64 = 0.0;
        for w in times.windows(3) {
            let (t0, t, t1) = (w[0], w[1], w[2]);
            let m = (1..n[0] - 1)
                .into_par_iter()
                .map(|i| {
                    let mut m: f64 = 0.0;
                    for j in 1..n[1] - 1 {
                        for k in 1..n[2] - 1 {
                            let x = spec.point(i, j, k);
                            let dt = (self.eval(x, t1) - self.eval(x, t0)) / (t1 - t0);
                            let mut lap = Complex64::new(0.0, 0.0);
                            for a in 0..3 {
                                let (mut xp, mut xm) = (x, x);
                                xp[a] += h[a];
                                xm[a] -= h[a];
                                lap += (self.eval(xp, t) - 2.0 * self.eval(x, t) + self.eval(xm, t)) / (h[a] * h[a]);
                            }
                            m = m.max((Complex64::i() * dt + lap).norm());
                        }
                    }
                    m
                })
                .reduce(|| 0.0, f64::max);
            worst = worst.max(m);
        }
        worst
    }

    /// Condition number of the 2×3 Jacobian `(∇Re v; ∇Im v)` at `x`.
    pub fn transversality(&self, x: [f64; 3]) -> f64 {
        let gr = self.re.gradient(x);
        let gi = self.im.gradient(x);
        let a: f64 = gr.iter().map(|v| v * v).sum();
        let c: f64 = gi.iter().map(|v| v * v).sum();
        let b: f64 = gr.iter().zip(&gi).map(|(u, v)| u * v).sum();
        // singular values squared are the eigenvalues of JJᵀ
        let tr = a + c;
        let disc = ((a - c).powi(2) + 4.0 * b * b).sqrt();
        let (l1, l2) = (0.5 * (tr + disc), 0.5 * (tr - disc));
        if l2 <= 0.0 {
            f64::INFINITY
        } else {
            (l1 / l2).sqrt()
        }
    }
}

/// Closed-form event data of a preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEvent {
    pub t_star: f64,
    pub kind: EventKind,
    /// Separation (or ring diameter) `C|t − T*|^p`.
    pub exponent: f64,
    pub prefactor: f64,
}

/// Suggested grid and snapshot times for analysing a preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPlan {
    pub length: f64,
    pub n: usize,
    pub t_start: f64,
    pub dt: f64,
    pub steps: usize,
}

impl RunPlan {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.t_start + k as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPreset {
    pub name: String,
    pub radius: Option<f64>,
    pub event: Option<AnalyticEvent>,
    /// Zero branches that the default analysis window excludes.
    pub far_field: String,
    pub plan: RunPlan,
}

impl ScenarioPreset {
    /// Closed-form separation or diameter at `t`, where the preset has one.
    pub fn analytic_separation(&self, t: f64) -> Option<f64> {
        let e = self.event?;
        let s = t - e.t_star;
        let alive = match e.kind {
            EventKind::Exchange => s != 0.0,
            EventKind::Death => s < 0.0,
            EventKind::Birth => s > 0.0,
            EventKind::Unclassified => false,
        };
        alive.then(|| e.prefactor * s.abs().powf(e.exponent))
    }
}

/// Builds a preset; `radius` applies to the ring presets and defaults to 0.5.
pub fn preset(name: &str, radius: Option<f64>) -> Result<(QuadraticSolution, ScenarioPreset), ScenarioError> {
    let r = radius.unwrap_or(0.5);
    let is_ring = name.contains("ring");
    if is_ring && !(r > 0.0 && r.is_finite()) {
        return Err(ScenarioError::Parameter(format!("R = {r} must be positive")));
    }
    let sqrt8 = 8f64.sqrt();
    let plan = |t_start: f64, dt: f64, steps: usize| RunPlan { length: 2.0, n: 64, t_start, dt, steps };
    let out = match name {
        "hyperbolic-exchange" => (
            QuadraticSolution {
                re: Quadratic::diag(0.0, [0.0; 3], [1.0, -1.0, 0.0]),
                im: Quadratic::diag(0.0, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]),
                a: 2.0,
                b: 0.0,
            },
            ScenarioPreset {
                name: name.into(),
                radius: None,
                event: Some(AnalyticEvent { t_star: 0.0, kind: EventKind::Exchange, exponent: 0.5, prefactor: sqrt8 }),
                far_field: "hyperbola branches on the sheet x3 = 1".into(),
                plan: plan(-0.2, 0.0125, 32),
            },
        ),
        "ring-death" => (
            // ring of radius √(−R² − 2t) on x3 = 2 − 2√(1 + t + R²/2)
            QuadraticSolution {
                re: Quadratic::diag(r * r, [0.0; 3], [1.0, 1.0, 0.0]),
                im: Quadratic::diag(2.0 * r * r, [0.0, 0.0, 4.0], [0.0, 0.0, -1.0]),
                a: 2.0,
                b: 4.0,
            },
            ScenarioPreset {
                name: name.into(),
                radius: Some(r),
                event: Some(AnalyticEvent { t_star: -0.5 * r * r, kind: EventKind::Death, exponent: 0.5, prefactor: sqrt8 }),
                far_field: "second ring on x3 = 2 + 2√(1 + t + R²/2)".into(),
                plan: plan(-0.5 * r * r - 0.275, 0.01, 50),
            },
        ),
        "ring-birth" => (
            // ring of radius √(R² + 2t) on the root of x3 + x3² + 4t near zero
            QuadraticSolution {
                re: Quadratic::diag(-r * r, [0.0; 3], [1.0, 1.0, 0.0]),
                im: Quadratic::diag(0.0, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
                a: -2.0,
                b: 4.0,
            },
            ScenarioPreset {
                name: name.into(),
                radius: Some(r),
                event: Some(AnalyticEvent { t_star: -0.5 * r * r, kind: EventKind::Birth, exponent: 0.5, prefactor: sqrt8 }),
                far_field: "second ring near x3 = −1; both rings merge in x3 at t = 1/16".into(),
                plan: plan(-0.5 * r * r - 0.175, 0.01, 30),
            },
        ),
        "moving-ring" => (
            QuadraticSolution {
                re: Quadratic::diag(-r * r, [0.0; 3], [1.0, 1.0, 0.0]),
                im: Quadratic::diag(0.0, [0.0, 0.0, 1.0], [0.0; 3]),
                a: 0.0,
                b: 4.0,
            },
            ScenarioPreset {
                name: name.into(),
                radius: Some(r),
                event: None,
                far_field: "none".into(),
                plan: plan(-0.1, 0.01, 20),
            },
        ),
        other => return Err(ScenarioError::UnknownPreset(other.into())),
    };
    Ok(out)
}

/// Exact samples of `v` at each time.
pub fn sample(sol: &QuadraticSolution, spec: &BoxSpec, times: &[f64]) -> Vec<ComplexField> {
    times.iter().map(|&t| ComplexField::from_fn(*spec, t, |x| sol.eval(x, t))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub sets: Vec<VortexCurveSet>,
    pub timeline: Vec<TimelineRow>,
    pub separations: Vec<(f64, f64)>,
    pub events: Vec<ReconnectionEvent>,
    /// Largest `|v|` of the exact solution at any extracted vertex.
    pub max_true_residual: f64,
}

/// Samples the plan's snapshots one at a time, extracts, and detects events.
pub fn run_scenario(
    sol: &QuadraticSolution,
    plan: &RunPlan,
    extract: &ExtractConfig,
    events: &EventConfig,
) -> Result<ScenarioOutcome, ScenarioError> {
    if plan.n < 4 || !(plan.length > 0.0) || !(plan.dt > 0.0) {
        return Err(ScenarioError::Parameter(format!("bad run plan {plan:?}")));
    }
    let spec = BoxSpec::new([plan.length; 3], [plan.n; 3], false)?;
    let sets: Vec<VortexCurveSet> = plan
        .times()
        .par_iter()
        .map(|&t| extract_zero_set(&ComplexField::from_fn(spec, t, |x| sol.eval(x, t)), extract))
        .collect();
    let max_true_residual = sets
        .iter()
        .flat_map(|s| s.components.iter().flat_map(move |c| c.vertices().map(move |v| sol.eval(v, s.t).norm())))
        .fold(0.0, f64::max);
    Ok(ScenarioOutcome {
        timeline: component_timeline(&sets),
        separations: separation_series(&sets),
        events: detect_events(&sets, events),
        max_true_residual,
        sets,
    })
}
