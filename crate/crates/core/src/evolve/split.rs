use ndarray::Zip;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EvolveError, LinearPropagator};
use crate::grid::ComplexField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `i∂ₜu + Δu + κ(1 − |u|²)u = 0`.
    #[default]
    GrossPitaevskii,
    /// `i∂ₜu + Δu − κ|u|²u = 0`.
    DefocusingCubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub kappa: f64,
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    pub dt: f64,
    /// Times at which snapshots are kept; each must be a multiple of `dt`.
    pub snapshot_times: Vec<f64>,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EvolveError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !self.kappa.is_finite() {
            return Err(EvolveError::Config("κ must be finite".into()));
        }
        let mut last = -1;
        for &t in &self.snapshot_times {
            let s = t / self.dt;
            if t < 0.0 || (s - s.round()).abs() > 1e-9 * s.abs().max(1.0) {
                return Err(EvolveError::Config(format!(
                    "snapshot time {t} is not a nonnegative multiple of dt = {}",
                    self.dt
                )));
            }
            let s = s.round() as i64;
            if s < last {
                return Err(EvolveError::Config("snapshot times must be sorted".into()));
            }
            last = s;
        }
        Ok(())
    }
}

/// Strang stepper with cached linear multiplier.
#[derive(Debug)]
pub struct Stepper {
    pub prop: LinearPropagator,
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    pub dt: f64,
}

impl Stepper {
    pub fn new(spec: crate::grid::BoxSpec, kappa: f64, nonlinearity: Nonlinearity, dt: f64) -> Result<Self, EvolveError> {
        Ok(Self {
            prop: LinearPropagator::new(spec)?,
            kappa,
            nonlinearity,
            dt,
        })
    }

    /// Exact flow of the nonlinear part over `h`; a pure phase rotation.
    pub fn nonlinear(&self, u: &mut ComplexField, h: f64) {
        if self.kappa == 0.0 {
            return;
        }
        let k = self.kappa;
        match self.nonlinearity {
            Nonlinearity::GrossPitaevskii => Zip::from(&mut u.data).par_for_each(|z| {
                *z *= Complex64::from_polar(1.0, k * (1.0 - z.norm_sqr()) * h);
            }),
            Nonlinearity::DefocusingCubic => Zip::from(&mut u.data).par_for_each(|z| {
                *z *= Complex64::from_polar(1.0, -k * z.norm_sqr() * h);
            }),
        }
    }

    /// One nonlinear–linear–nonlinear step.
    pub fn step(&self, u: &mut ComplexField) {
        self.nonlinear(u, 0.5 * self.dt);
        self.prop.apply(&mut u.data, self.dt);
        self.nonlinear(u, 0.5 * self.dt);
        u.t += self.dt;
    }
}

/// One Strang step of `cfg` from `u`.
pub fn gp_step(u: &ComplexField, cfg: &EvolutionConfig) -> Result<ComplexField, EvolveError> {
    cfg.validate()?;
    let s = Stepper::new(u.spec, cfg.kappa, cfg.nonlinearity, cfg.dt)?;
    let mut out = u.clone();
    s.step(&mut out);
    if !out.is_finite() {
        return Err(EvolveError::NonFinite { step: 1 });
    }
    Ok(out)
}

/// `∫ ½|∇u|² + (κ/4)(1 − |u|²)²`; the Ginzburg–Landau energy at `κ = 1`.
pub fn gl_energy(prop: &LinearPropagator, u: &ComplexField, kappa: f64) -> f64 {
    let pot: f64 = u.data.iter().map(|z| (1.0 - z.norm_sqr()).powi(2)).sum::<f64>() * u.spec.cell_volume();
    0.5 * prop.gradient_mass(u) + 0.25 * kappa * pot
}

/// Conserved energy of the configured equation.
///
/// The cubic variant uses `∫ ½|∇u|² + (κ/4)|u|⁴`.
pub fn energy(prop: &LinearPropagator, u: &ComplexField, kappa: f64, nl: Nonlinearity) -> f64 {
    match nl {
        Nonlinearity::GrossPitaevskii => gl_energy(prop, u, kappa),
        Nonlinearity::DefocusingCubic => {
            let pot: f64 = u.data.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * u.spec.cell_volume();
            0.5 * prop.gradient_mass(u) + 0.25 * kappa * pot
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub t: f64,
    pub mass: f64,
    /// Energy of the configured equation (Ginzburg–Landau for the default form).
    pub gl_energy: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<ComplexField>,
    pub observables: Vec<Observable>,
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// Advances `u0` to the last snapshot time, keeping the requested snapshots.
pub fn evolve(u0: &ComplexField, cfg: &EvolutionConfig) -> Result<Evolution, EvolveError> {
    cfg.validate()?;
    let stepper = Stepper::new(u0.spec, cfg.kappa, cfg.nonlinearity, cfg.dt)?;
    let mut warnings = Vec::new();
    let phase = cfg.dt * u0.spec.max_k_squared();
    if phase > std::f64::consts::PI {
        warnings.push(format!(
            "dt·max|k|² = {phase:.3} exceeds π; the highest modes are not phase resolved"
        ));
    }
    let targets: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|t| (t / cfg.dt).round() as usize)
        .collect();
    let mut u = u0.clone();
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut observables = Vec::with_capacity(targets.len());
    let mut step = 0;
    let record = |u: &ComplexField, snaps: &mut Vec<ComplexField>, obs: &mut Vec<Observable>| {
        obs.push(Observable {
            t: u.t,
            mass: u.mass(),
            gl_energy: energy(&stepper.prop, u, cfg.kappa, cfg.nonlinearity),
        });
        snaps.push(u.clone());
    };
    for &target in &targets {
        while step < target {
            stepper.step(&mut u);
            step += 1;
            if !u.is_finite() {
                return Err(EvolveError::NonFinite { step });
            }
        }
        // exact multiples of dt for the time stamps
        u.t = u0.t + step as f64 * cfg.dt;
        record(&u, &mut snapshots, &mut observables);
    }
    Ok(Evolution {
        snapshots,
        observables,
        steps: step,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::linear_propagate;
    use crate::grid::BoxSpec;
    use std::f64::consts::PI;

    fn cfg(kappa: f64, dt: f64, times: Vec<f64>) -> EvolutionConfig {
        EvolutionConfig {
            kappa,
            nonlinearity: Nonlinearity::GrossPitaevskii,
            dt,
            snapshot_times: times,
        }
    }

    #[test]
    fn constant_one_is_stationary() {
        let spec = BoxSpec::cubic(8.0, 16).unwrap();
        let u0 = ComplexField::constant(spec, Complex64::new(1.0, 0.0));
        let ev = evolve(&u0, &cfg(1.0, 0.01, vec![0.0, 0.05, 0.1])).unwrap();
        for s in &ev.snapshots {
            assert!(s.data.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        }
        assert!(ev.observables.iter().all(|o| o.gl_energy == 0.0));
    }

    #[test]
    fn plane_wave_dispersion() {
        let spec = BoxSpec::cubic(2.0 * PI, 16).unwrap();
        let (a, kappa, dt) = (0.8, 0.7, 1e-2);
        let xi = [1.0, 2.0, 0.0];
        let k2: f64 = xi.iter().map(|v| v * v).sum();
        let u0 = ComplexField::from_fn(spec, 0.0, |x| Complex64::from_polar(a, xi[0] * x[0] + xi[1] * x[1]));
        let u1 = gp_step(&u0, &cfg(kappa, dt, vec![])).unwrap();
        let omega = k2 - kappa * (1.0 - a * a);
        for (z1, z0) in u1.data.iter().zip(u0.data.iter()) {
            let phase = (z1 / z0).arg();
            assert!((phase + omega * dt).abs() < 1e-12);
            assert!((z1.norm() - a).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_limit_matches_propagator() {
        let spec = BoxSpec::cubic(10.0, 16).unwrap();
        let u0 = ComplexField::from_fn(spec, 0.0, |x| Complex64::new((-x[0] * x[0]).exp(), x[1] * (-x[1] * x[1]).exp()));
        let ev = evolve(&u0, &cfg(0.0, 0.01, vec![0.1])).unwrap();
        let mut expect = u0.clone();
        let p = LinearPropagator::new(spec).unwrap();
        for _ in 0..10 {
            p.apply(&mut expect.data, 0.01);
        }
        assert_eq!(ev.snapshots[0].data, expect.data);
        assert!(ev.snapshots[0].max_abs_diff(&linear_propagate(&u0, 0.1).unwrap()) < 1e-12);
    }

    #[test]
    fn rejects_off_grid_snapshot() {
        assert!(cfg(1.0, 0.01, vec![0.015]).validate().is_err());
        assert!(cfg(1.0, -0.01, vec![]).validate().is_err());
    }
}
