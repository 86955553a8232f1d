use ndarray::Zip;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EvolveError, LinearPropagator, Nonlinearity};
use crate::grid::{BoxSpec, ComplexField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub times: Vec<f64>,
    /// `‖ũ − (1 − w)‖_∞` (or `‖ũ − w‖_∞` for the cubic form) per snapshot.
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    /// `‖ũ − D[ũ]‖_∞` with `D` the trapezoid Duhamel formula, per snapshot.
    pub reconstruction_error: Vec<f64>,
    pub max_reconstruction_error: f64,
}

/// Compares nonlinear snapshots `u` with free evolutions `w` and checks the Duhamel formula.
///
/// For the Gross–Pitaevskii form `w` evolves the deviation `1 − ũ₀`; for
/// the cubic form it evolves `ũ₀` itself. Snapshots must share one grid and
/// be uniformly spaced in time for the reconstruction.
pub fn duhamel_residual(
    u: &[ComplexField],
    w: &[ComplexField],
    kappa: f64,
    nl: Nonlinearity,
) -> Result<DuhamelReport, EvolveError> {
    if u.len() != w.len() || u.is_empty() {
        return Err(EvolveError::Config(format!(
            "need matching nonempty snapshot lists, got {} and {}",
            u.len(),
            w.len()
        )));
    }
    for (a, b) in u.iter().zip(w) {
        a.check_same_grid(b)?;
        a.check_same_grid(&u[0])?;
        if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
            return Err(EvolveError::Config(format!("snapshot times differ: {} vs {}", a.t, b.t)));
        }
    }
    let deviation: Vec<f64> = u
        .iter()
        .zip(w)
        .map(|(a, b)| {
            let mut m: f64 = 0.0;
            Zip::from(&a.data).and(&b.data).for_each(|x, y| {
                let d = match nl {
                    Nonlinearity::GrossPitaevskii => x - (1.0 - y),
                    Nonlinearity::DefocusingCubic => x - y,
                };
                m = m.max(d.norm());
            });
            m
        })
        .collect();

    let prop = LinearPropagator::new(u[0].spec)?;
    let fft = prop.fft();
    let nonlin = |f: &ComplexField| {
        let mut n = f.data.clone();
        match nl {
            Nonlinearity::GrossPitaevskii => n.mapv_inplace(|z| Complex64::i() * kappa * (1.0 - z.norm_sqr()) * z),
            Nonlinearity::DefocusingCubic => n.mapv_inplace(|z| -Complex64::i() * kappa * z.norm_sqr() * z),
        }
        fft.forward(&mut n);
        n
    };
    let mut reconstruction_error = vec![0.0];
    if u.len() > 1 {
        let h = u[1].t - u[0].t;
        for k in 2..u.len() {
            if ((u[k].t - u[k - 1].t) - h).abs() > 1e-9 * h.abs() {
                return Err(EvolveError::Config("snapshots are not uniformly spaced".into()));
            }
        }
        let mut free = u[0].data.clone();
        fft.forward(&mut free);
        let mut integral = free.mapv(|_| Complex64::new(0.0, 0.0));
        let mut prev = nonlin(&u[0]);
        for k in 1..u.len() {
            let cur = nonlin(&u[k]);
            // I ← e^{ihΔ}(I + h/2 N_{k−1}) + h/2 N_k
            Zip::from(&mut integral).and(&prev).for_each(|i, p| *i += 0.5 * h * p);
            prop.apply_spectral(&mut integral, h);
            Zip::from(&mut integral).and(&cur).for_each(|i, c| *i += 0.5 * h * c);
            prop.apply_spectral(&mut free, h);
            let mut d = &free + &integral;
            fft.inverse(&mut d);
            let err = Zip::from(&d).and(&u[k].data).fold(0.0f64, |m, a, b| m.max((a - b).norm()));
            reconstruction_error.push(err);
            prev = cur;
        }
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(DuhamelReport {
        times: u.iter().map(|f| f.t).collect(),
        max_deviation: max(&deviation),
        max_reconstruction_error: max(&reconstruction_error),
        deviation,
        reconstruction_error,
    })
}

/// `u(x, t) = ũ(δ^{−1/2}x, t/δ)`.
pub fn rescale_gp<F>(inner: F, delta: f64) -> impl Fn([f64; 3], f64) -> Complex64
where
    F: Fn([f64; 3], f64) -> Complex64,
{
    let s = delta.sqrt();
    move |x, t| inner([x[0] / s, x[1] / s, x[2] / s], t / delta)
}

/// The same samples on the box dilated by `δ^{1/2}` at time `δt`.
pub fn rescale_field(u: &ComplexField, delta: f64) -> Result<ComplexField, EvolveError> {
    if !(delta > 0.0) {
        return Err(EvolveError::Config(format!("δ = {delta} must be positive")));
    }
    let s = delta.sqrt();
    let spec = BoxSpec::new(u.spec.length.map(|l| l * s), u.spec.n, u.spec.periodic)?;
    Ok(ComplexField {
        spec,
        t: u.t * delta,
        data: u.data.clone(),
    })
}

/// `u = δ^{1/2} e^{it} ũ`, mapping the cubic form to the Gross–Pitaevskii form.
pub fn gauge_lift(u: &[ComplexField], delta: f64) -> Result<Vec<ComplexField>, EvolveError> {
    if !(delta > 0.0) {
        return Err(EvolveError::Config(format!("δ = {delta} must be positive")));
    }
    let s = delta.sqrt();
    Ok(u.iter()
        .map(|f| {
            let c = Complex64::from_polar(s, f.t);
            ComplexField {
                spec: f.spec,
                t: f.t,
                data: f.data.mapv(|z| c * z),
            }
        })
        .collect())
}

/// `1 − u`, the decaying part of a field with background one.
pub fn to_deviation(u: &ComplexField) -> ComplexField {
    ComplexField {
        spec: u.spec,
        t: u.t,
        data: u.data.mapv(|z| 1.0 - z),
    }
}

pub fn from_deviation(w: &ComplexField) -> ComplexField {
    to_deviation(w)
}
