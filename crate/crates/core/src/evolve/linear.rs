use ndarray::{Array3, Zip};
use num_complex::Complex64;

use super::EvolveError;
use crate::grid::{BoxSpec, ComplexField, Fft3};

/// Cached FFT plans and `|k|²` for one box.
#[derive(Debug)]
pub struct LinearPropagator {
    pub spec: BoxSpec,
    fft: Fft3,
    k2: Array3<f64>,
}

impl LinearPropagator {
    pub fn new(spec: BoxSpec) -> Result<Self, EvolveError> {
        if !spec.periodic {
            return Err(EvolveError::NotPeriodic);
        }
        Ok(Self {
            spec,
            fft: Fft3::for_box(&spec),
            k2: spec.k_squared(),
        })
    }

    pub fn k_squared(&self) -> &Array3<f64> {
        &self.k2
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// Multiplies by `e^{−i|k|²t}` in place.
    pub fn apply(&self, data: &mut Array3<Complex64>, t: f64) {
        if t == 0.0 {
            return;
        }
        self.fft.forward(data);
        self.apply_spectral(data, t);
        self.fft.inverse(data);
    }

    /// The multiplier alone, on data already in Fourier space.
    pub fn apply_spectral(&self, hat: &mut Array3<Complex64>, t: f64) {
        Zip::from(hat).and(&self.k2).par_for_each(|z, &k| {
            *z *= Complex64::from_polar(1.0, -k * t);
        });
    }

    /// `‖∇u‖²` by Parseval.
    pub fn gradient_mass(&self, u: &ComplexField) -> f64 {
        let mut hat = u.data.clone();
        self.fft.forward(&mut hat);
        let s: f64 = hat.iter().zip(self.k2.iter()).map(|(z, k)| k * z.norm_sqr()).sum();
        s * self.spec.cell_volume() / self.spec.len() as f64
    }
}

/// `e^{itΔ}u₀` on the periodic box of `u₀`.
pub fn linear_propagate(u0: &ComplexField, t: f64) -> Result<ComplexField, EvolveError> {
    let p = LinearPropagator::new(u0.spec)?;
    let mut out = u0.clone();
    p.apply(&mut out.data, t);
    out.t = u0.t + t;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let spec = BoxSpec::cubic(2.0 * PI, 16).unwrap();
        let xi = [2.0, -1.0, 3.0];
        let f = |x: [f64; 3], t: f64| {
            let k2 = xi.iter().map(|v| v * v).sum::<f64>();
            Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2] - k2 * t)
        };
        let u0 = ComplexField::from_fn(spec, 0.0, |x| f(x, 0.0));
        let u = linear_propagate(&u0, 0.37).unwrap();
        let expect = ComplexField::from_fn(spec, 0.37, |x| f(x, 0.37));
        assert!(u.max_abs_diff(&expect) < 1e-12);
        assert_eq!(linear_propagate(&u0, 0.0).unwrap(), u0);
    }

    #[test]
    fn unitary_group() {
        let spec = BoxSpec::cubic(10.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut u0 = ComplexField::zeros(spec);
        u0.data.mapv_inplace(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = linear_propagate(&u0, 0.3).unwrap();
        assert!((a.l2_norm() - u0.l2_norm()).abs() < 1e-12 * u0.l2_norm());
        let b = linear_propagate(&linear_propagate(&u0, 0.1).unwrap(), 0.2).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let np = BoxSpec::new([1.0; 3], [16; 3], false).unwrap();
        assert!(matches!(linear_propagate(&ComplexField::zeros(np), 1.0), Err(EvolveError::NotPeriodic)));
    }
}
