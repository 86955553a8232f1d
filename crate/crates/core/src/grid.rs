//! Uniform periodic boxes, complex fields sampled on them, and 3D FFTs.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array3, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 16 points per axis and a power of two, got {0}")]
    BadSize(usize),
    #[error("box side must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("grid mismatch: {0}")]
    Mismatch(String),
}

/// Cell-centred uniform grid on `[-L/2, L/2]³`.
///
/// Node `i` on an axis sits at `-L/2 + (i + 1/2) h` with `h = L/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub length: [f64; 3],
    pub n: [usize; 3],
    #[serde(default = "default_true")]
    pub periodic: bool,
}

fn default_true() -> bool {
    true
}

impl BoxSpec {
    pub fn new(length: [f64; 3], n: [usize; 3], periodic: bool) -> Result<Self, GridError> {
        for &k in &n {
            if k < 16 || !k.is_power_of_two() {
                return Err(GridError::BadSize(k));
            }
        }
        for &l in &length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(GridError::BadLength(l));
            }
        }
        Ok(Self {
            length,
            n,
            periodic,
        })
    }

    pub fn cubic(length: f64, n: usize) -> Result<Self, GridError> {
        Self::new([length; 3], [n; 3], true)
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.length[a] / self.n[a] as f64)
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let h = self.length[axis] / self.n[axis] as f64;
        -0.5 * self.length[axis] + (i as f64 + 0.5) * h
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    /// Angular wavenumbers in FFT order along `axis`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.n[axis];
        let dk = 2.0 * PI / self.length[axis];
        (0..n)
            .map(|i| {
                let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    /// `|k|²` on the spectral grid.
    pub fn k_squared(&self) -> Array3<f64> {
        let kx = self.wavenumbers(0);
        let ky = self.wavenumbers(1);
        let kz = self.wavenumbers(2);
        Array3::from_shape_fn((self.n[0], self.n[1], self.n[2]), |(i, j, k)| {
            kx[i] * kx[i] + ky[j] * ky[j] + kz[k] * kz[k]
        })
    }

    pub fn max_k_squared(&self) -> f64 {
        (0..3)
            .map(|a| {
                let k = PI * self.n[a] as f64 / self.length[a];
                k * k
            })
            .sum()
    }
}

/// Complex scalar field on a [`BoxSpec`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub spec: BoxSpec,
    pub t: f64,
    pub data: Array3<Complex64>,
}

impl ComplexField {
    pub fn zeros(spec: BoxSpec) -> Self {
        Self::constant(spec, Complex64::new(0.0, 0.0))
    }

    pub fn constant(spec: BoxSpec, value: Complex64) -> Self {
        Self {
            spec,
            t: 0.0,
            data: Array3::from_elem((spec.n[0], spec.n[1], spec.n[2]), value),
        }
    }

    /// Samples `f(x)` at every node, in parallel over the first axis.
    pub fn from_fn<F>(spec: BoxSpec, t: f64, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64 + Sync,
    {
        let mut data = Array3::from_elem((spec.n[0], spec.n[1], spec.n[2]), Complex64::new(0.0, 0.0));
        data.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut plane)| {
                for ((j, k), v) in plane.indexed_iter_mut() {
                    *v = f(spec.point(i, j, k));
                }
            });
        Self { spec, t, data }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<(), GridError> {
        if self.spec != other.spec {
            return Err(GridError::Mismatch(format!(
                "{:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }

    /// `∫ |u|² dx` by the midpoint rule.
    pub fn mass(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spec.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        Zip::from(&self.data)
            .and(&other.data)
            .fold(0.0f64, |acc, a, b| acc.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Cached forward/inverse plans for 3D transforms of a fixed shape.
pub struct Fft3 {
    shape: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("shape", &self.shape).finish()
    }
}

impl Fft3 {
    pub fn new(shape: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = shape.map(|n| planner.plan_fft_forward(n));
        let inv = shape.map(|n| planner.plan_fft_inverse(n));
        Self { shape, fwd, inv }
    }

    pub fn for_box(spec: &BoxSpec) -> Self {
        Self::new(spec.n)
    }

    /// Unnormalised forward transform in place.
    pub fn forward(&self, data: &mut Array3<Complex64>) {
        self.run(data, &self.fwd);
    }

    /// Inverse transform in place, scaled by `1/N`.
    pub fn inverse(&self, data: &mut Array3<Complex64>) {
        self.run(data, &self.inv);
        let scale = 1.0 / (self.shape[0] * self.shape[1] * self.shape[2]) as f64;
        data.par_mapv_inplace(|z| z * scale);
    }

    fn run(&self, data: &mut Array3<Complex64>, plans: &[Arc<dyn Fft<f64>>; 3]) {
        assert_eq!(data.shape(), &self.shape[..], "FFT shape mismatch");
        // Axis 2 lanes are contiguous for standard layout.
        for axis in 0..3 {
            let plan = &plans[axis];
            let n = self.shape[axis];
            let outer = if axis == 0 { Axis(1) } else { Axis(0) };
            data.axis_iter_mut(outer).into_par_iter().for_each(|mut slab| {
                let lane_axis = if axis == 0 { Axis(0) } else { Axis(axis - 1) };
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                for mut lane in slab.lanes_mut(lane_axis) {
                    for (b, v) in buf.iter_mut().zip(lane.iter()) {
                        *b = *v;
                    }
                    plan.process_with_scratch(&mut buf, &mut scratch);
                    for (v, b) in lane.iter_mut().zip(&buf) {
                        *v = *b;
                    }
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(BoxSpec::cubic(1.0, 12).is_err());
        assert!(BoxSpec::cubic(1.0, 24).is_err());
        assert!(BoxSpec::cubic(-1.0, 16).is_err());
        assert!(BoxSpec::cubic(1.0, 16).is_ok());
    }

    #[test]
    fn nodes_are_cell_centred() {
        let b = BoxSpec::cubic(2.0, 16).unwrap();
        assert!((b.coord(0, 0) + 1.0 - 0.0625).abs() < 1e-15);
        assert!((b.coord(0, 15) - 1.0 + 0.0625).abs() < 1e-15);
        assert!((b.coord(0, 7) + b.coord(0, 8)).abs() < 1e-15);
    }

    #[test]
    fn fft_round_trip_and_plane_wave() {
        let b = BoxSpec::new([2.0 * PI, 4.0 * PI, 2.0 * PI], [16, 32, 16], true).unwrap();
        let mut f = ComplexField::from_fn(b, 0.0, |x| Complex64::new(0.0, 2.0 * x[0] - 0.5 * x[1] + 3.0 * x[2]).exp());
        let orig = f.data.clone();
        let fft = Fft3::for_box(&b);
        fft.forward(&mut f.data);
        // energy in exactly one mode
        let big = f.data.iter().filter(|z| z.norm() > 1e-8).count();
        assert_eq!(big, 1);
        let (idx, _) = f
            .data
            .indexed_iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let k = [b.wavenumbers(0)[idx.0], b.wavenumbers(1)[idx.1], b.wavenumbers(2)[idx.2]];
        assert!((k[0] - 2.0).abs() < 1e-12 && (k[1] + 0.5).abs() < 1e-12 && (k[2] - 3.0).abs() < 1e-12);
        fft.inverse(&mut f.data);
        let err = Zip::from(&f.data).and(&orig).fold(0.0f64, |a, x, y| a.max((x - y).norm()));
        assert!(err < 1e-13);
    }
}
