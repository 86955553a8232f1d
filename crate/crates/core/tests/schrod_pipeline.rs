use std::f64::consts::PI;

use num_complex::Complex64;
use vortexlab::helmholtz::{Domain, Frequency, FundamentalSolution};
use vortexlab::scenarios::preset;
use vortexlab::schrod_approx::{build_schwartz_datum, time_fourier, PipelineConfig, SpacetimeSamples};

fn ground_truth(per_axis: usize) -> SpacetimeSamples {
    let tau0 = -2.0 * PI;
    let g = FundamentalSolution::new(Frequency::new(tau0));
    let x0 = [2.0, 0.0, 0.0];
    SpacetimeSamples::from_fn(Domain::unit_ball(), per_axis, 0.5, 64, 0.1, move |x, t| {
        let r = ((x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2) + (x[2] - x0[2]).powi(2)).sqrt();
        Complex64::from_polar(g.radial(r), tau0 * t)
    })
    .unwrap()
}

#[test]
fn single_mode_ground_truth() {
    let s = ground_truth(16);
    let (datum, rep) = build_schwartz_datum(&s, 0.05, None, &PipelineConfig::default()).unwrap();
    assert!(rep.met);
    assert!(rep.relative_error <= 0.05);
    assert_eq!(rep.layers, 1);
    // errors fall monotonically along the sweep
    assert!(rep.probes.windows(2).all(|w| w[1].error < w[0].error));
    let w = datum.eval([0.1, 0.2, -0.3], 0.25);
    let g = FundamentalSolution::new(Frequency::new(-2.0 * PI));
    let r = ((0.1f64 - 2.0).powi(2) + 0.04 + 0.09).sqrt();
    let v = Complex64::from_polar(g.radial(r), -2.0 * PI * 0.25);
    assert!((w - v).norm() < 0.1 * v.norm(), "{w} vs {v}");
}

#[test]
fn polynomial_time_dependence_concentrates_at_low_frequency() {
    let (sol, _) = preset("hyperbolic-exchange", None).unwrap();
    let s = SpacetimeSamples::from_fn(Domain::unit_ball(), 8, 0.5, 64, 1e-6, move |x, t| sol.eval(x, t)).unwrap();
    let f = time_fourier(&s);
    let q = f.q[f.dominant().unwrap()];
    assert!(q.abs() <= 1, "dominant bin {q}");
}
