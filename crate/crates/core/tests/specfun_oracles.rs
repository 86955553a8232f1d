use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;
use vortexlab::specfun::{
    balodis_envelope, bessel, besseli_energy, sph_harm_all, BesselKind, SphericalIndex,
};

/// Ascending series with a cancellation-aware error bound.
fn series(nu: f64, x: f64, sign: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut biggest: f64 = 0.0;
    for k in 0..300 {
        let t = (sign * 0.25 * x * x).powi(k) / (gamma(k as f64 + 1.0) * gamma(nu + k as f64 + 1.0));
        if !t.is_finite() {
            break;
        }
        sum += t;
        biggest = biggest.max(t.abs());
        if k > 5 && t.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let lead = (0.5 * x).powf(nu);
    (lead * sum, lead * biggest)
}

fn real(kind: BesselKind, nu: f64, x: f64) -> f64 {
    let v = bessel(kind, nu, Complex64::new(x, 0.0)).unwrap();
    assert_eq!(v.im, 0.0);
    v.re
}

#[test]
fn first_kind_against_series() {
    for &nu in &[0.0, 0.5, 1.0, 2.3, 7.5, 20.0, 41.7, 60.0] {
        for &x in &[0.05, 0.7, 1.9, 2.1, 4.0, 7.3, 10.0] {
            for (kind, sign) in [(BesselKind::J, -1.0), (BesselKind::I, 1.0)] {
                let (s, scale) = series(nu, x, sign);
                let got = real(kind, nu, x);
                let tol = 1e-10 * s.abs() + 1e-13 * scale;
                assert!((got - s).abs() <= tol, "{kind:?} nu={nu} x={x}: {got} vs {s}");
            }
        }
    }
}

#[test]
fn large_argument_against_hankel_expansion() {
    for &nu in &[0.0, 0.5, 1.0, 2.5, 4.0] {
        for &x in &[60.0, 150.0, 800.0] {
            let mu = 4.0 * nu * nu;
            let (mut p, mut q) = (1.0, 0.0);
            let mut term = 1.0;
            for k in 1..12 {
                let kf = k as f64;
                term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
                if k % 2 == 1 {
                    q += if (k / 2) % 2 == 0 { term } else { -term };
                } else {
                    p += if (k / 2) % 2 == 1 { -term } else { term };
                }
            }
            let chi = x - (0.5 * nu + 0.25) * PI;
            let amp = (2.0 / (PI * x)).sqrt();
            let j = amp * (p * chi.cos() - q * chi.sin());
            let y = amp * (p * chi.sin() + q * chi.cos());
            let gj = real(BesselKind::J, nu, x);
            let gy = real(BesselKind::Y, nu, x);
            assert!((gj - j).abs() < 1e-10 * amp, "J nu={nu} x={x}");
            assert!((gy - y).abs() < 1e-10 * amp, "Y nu={nu} x={x}");
        }
    }
}

#[test]
fn second_kind_against_reflection_formulas() {
    for &nu in &[0.3, 1.5, 2.7, 5.25] {
        let s = (nu * PI).sin();
        for &x in &[0.2, 1.0, 2.5, 6.0] {
            let (jp, sp) = series(nu, x, -1.0);
            let (jm, sm) = series(-nu, x, -1.0);
            let y = (jp * (nu * PI).cos() - jm) / s;
            let gy = real(BesselKind::Y, nu, x);
            let tol = 1e-10 * y.abs() + 1e-13 * (sp + sm) / s.abs();
            assert!((gy - y).abs() <= tol, "Y nu={nu} x={x}: {gy} vs {y}");
        }
        for &x in &[0.2, 1.0, 2.5] {
            let (ip, _) = series(nu, x, 1.0);
            let (im, _) = series(-nu, x, 1.0);
            let k = 0.5 * PI * (im - ip) / s;
            let gk = real(BesselKind::K, nu, x);
            assert!((gk - k).abs() <= 1e-9 * k.abs(), "K nu={nu} x={x}: {gk} vs {k}");
        }
    }
}

#[test]
fn wronskian_of_modified_pair() {
    for &nu in &[0.0, 0.5, 1.0, 2.5] {
        for i in 0..60 {
            let x = 0.1 + (20.0 - 0.1) * i as f64 / 59.0;
            let w = real(BesselKind::I, nu, x) * real(BesselKind::K, nu + 1.0, x)
                + real(BesselKind::I, nu + 1.0, x) * real(BesselKind::K, nu, x);
            assert!((w * x - 1.0).abs() < 1e-9, "nu={nu} x={x}");
        }
    }
}

#[test]
fn imaginary_argument_identity() {
    for &nu in &[0.0, 0.5, 1.0, 3.7, 12.0, 60.0] {
        for &y in &[0.01, 0.9, 2.0, 5.5, 30.0] {
            let j = bessel(BesselKind::J, nu, Complex64::new(0.0, y)).unwrap();
            let i = real(BesselKind::I, nu, y);
            let expect = Complex64::from_polar(1.0, 0.5 * nu * PI) * i;
            assert!((j - expect).norm() <= 1e-14 * expect.norm() + 1e-300);
        }
    }
    // example value: J_1(2i) = i I_1(2)
    let (i1, _) = series(1.0, 2.0, 1.0);
    let j = bessel(BesselKind::J, 1.0, Complex64::new(0.0, 2.0)).unwrap();
    assert!(j.re.abs() < 1e-15 && (j.im - i1).abs() < 1e-12 * i1);
}

#[test]
fn half_order_modified_example() {
    let v = real(BesselKind::I, 0.5, 1.0);
    assert!((v - (2.0 / PI).sqrt() * 1f64.sinh()).abs() < 1e-14);
    assert!((v - 0.937_674).abs() < 1e-6);
}

#[test]
fn harmonic_sup_norm_grows_like_sqrt_multiplicity() {
    let l_max = 20;
    let mut sup = vec![0.0f64; l_max + 1];
    let n = 200;
    for i in 0..n {
        let ct = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..2 * n {
            let ph = PI * j as f64 / n as f64;
            let y = sph_harm_all(l_max, [st * ph.cos(), st * ph.sin(), ct]);
            for (k, v) in y.iter().enumerate() {
                let l = SphericalIndex::from_flat(k).l;
                sup[l] = sup[l].max(v.abs());
            }
        }
    }
    let c = (0..=l_max)
        .map(|l| sup[l] / ((2 * l + 1) as f64).sqrt())
        .fold(0.0, f64::max);
    // zonal harmonics peak at the poles with value sqrt((2l+1)/4π)
    assert!(c <= 1.0 / (4.0 * PI).sqrt() + 1e-9, "fitted constant {c}");
}

#[test]
fn energy_monotone_and_small_alpha_slope() {
    for &nu in &[0.5, 1.5, 3.5] {
        let mut prev = 0.0;
        for k in 0..20 {
            let a = 0.25 * 1.3f64.powi(k);
            let e = besseli_energy(nu, Complex64::new(a, 0.0), 1.0).unwrap();
            assert!(e.scaled() > prev);
            prev = e.scaled();
        }
        let lo = besseli_energy(nu, Complex64::new(1e-3, 0.0), 1.0).unwrap().value;
        let hi = besseli_energy(nu, Complex64::new(1e-2, 0.0), 1.0).unwrap().value;
        let slope = (hi / lo).log10();
        assert!((slope - 2.0 * nu).abs() < 0.05, "nu={nu} slope={slope}");
    }
}

#[test]
fn envelope_bounds_first_kind() {
    let mut c: f64 = 0.0;
    for &nu in &[1.0, 4.0, 16.0] {
        for i in 0..=2000 {
            let s = 4.0 * nu * i as f64 / 2000.0;
            let j = real(BesselKind::J, nu, s).abs();
            c = c.max(j / balodis_envelope(nu, s));
        }
    }
    assert!(c <= 2.0, "fitted constant {c}");
}
