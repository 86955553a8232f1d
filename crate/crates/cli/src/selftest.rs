//! Reduced invariant suite for installation checks.

use num_complex::Complex64;
use serde::Serialize;

use vortexlab::evolve::{
    evolve, gauge_lift, to_deviation, torus_rationalize, BoxSpec, ComplexField, EvolutionConfig,
    Nonlinearity, TorusConfig,
};
use vortexlab::helmholtz::{
    runge_approximate, stability_probe, Domain, Frequency, FundamentalSolution, Resolution,
    RungeOptions, SourceOperator, TestBump,
};
use vortexlab::scenarios::{preset, run_scenario, sample, PRESETS};
use vortexlab::specfun::besseli_energy;
use vortexlab::vortex::{zero_cell_indicator, EventConfig, EventKind, ExtractConfig};

use crate::config::SelftestRun;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check {
        name: name.into(),
        passed,
        detail,
    });
}

fn cfg(kappa: f64, dt: f64, steps: usize, records: usize) -> EvolutionConfig {
    EvolutionConfig {
        kappa,
        nonlinearity: Nonlinearity::GrossPitaevskii,
        dt,
        snapshot_times: (0..=records).map(|k| (k * steps / records) as f64 * dt).collect(),
    }
}

fn bump(spec: BoxSpec) -> ComplexField {
    ComplexField::from_fn(spec, 0.0, |x| {
        let g = 0.3 * (-(x[0] * x[0] + 0.5 * x[1] * x[1] + x[2] * x[2]) / 2.0).exp();
        Complex64::new(g, 0.5 * x[0] * g)
    })
}

pub fn run(opts: &SelftestRun, seed: u64) -> SelftestReport {
    let mut c = Vec::new();

    let mut worst: f64 = 0.0;
    for name in PRESETS {
        let (sol, _) = preset(name, None).expect("preset");
        worst = worst.max(sol.symbolic_residual().norm());
    }
    check(&mut c, "preset symbolic residuals", worst == 0.0, format!("max {worst:e}"));

    for tau in [-4.0, 0.0, 9.0] {
        let b = TestBump::Gaussian { center: [0.0; 3], width: 1.0 };
        let r = FundamentalSolution::new(Frequency::new(tau)).distributional_pairing(&b, 1e-10);
        let rel = r.map(|v| (v - 1.0).abs()).unwrap_or(f64::INFINITY);
        check(&mut c, &format!("distributional identity tau={tau}"), rel <= 1e-3, format!("relative error {rel:.2e}"));
    }

    let sweep: Vec<f64> = (0..20)
        .filter_map(|k| besseli_energy(1.5, Complex64::new(0.25 * 1.3f64.powi(k), 0.0), 1.0).ok())
        .map(|e| e.scaled())
        .collect();
    let mono = sweep.len() == 20 && sweep.windows(2).all(|w| w[1] > w[0]);
    check(&mut c, "energy integral monotone", mono, format!("{} points", sweep.len()));

    let tau = Frequency::new(1.0);
    let runge = SourceOperator::build(Domain::unit_ball(), Domain::ball([3.0, 0.0, 0.0], 0.3), tau, Resolution::default()).and_then(|op| {
        let g = FundamentalSolution::new(tau);
        let phi: Vec<Complex64> = op.target_nodes.points.iter().map(|x| Complex64::new(g.radial(((x[0] - 2.0).powi(2) + x[1] * x[1] + x[2] * x[2]).sqrt()), 0.0)).collect();
        runge_approximate(&op, &phi, 5e-3, None, &RungeOptions::default())
    });
    match runge {
        Ok(r) => {
            let rel = r.report.error_target;
            check(&mut c, "runge exterior source", rel <= 1e-2 && r.report.source_bound_holds, format!("relative error {rel:.2e}, rank {}", r.report.rank));
        }
        Err(e) => check(&mut c, "runge exterior source", false, e.to_string()),
    }
    match stability_probe(tau, [0.5, 0.75, 1.0], 8, 4, seed, &[]) {
        Ok(s) => check(&mut c, "seeded stability probe", s.holds, format!("theta {:.3}, C {:.3}", s.theta, s.constant)),
        Err(e) => check(&mut c, "seeded stability probe", false, e.to_string()),
    }

    let spec = BoxSpec::cubic(16.0, 16).expect("grid");
    let one = ComplexField::constant(spec, Complex64::new(1.0, 0.0));
    let ev = evolve(&one, &cfg(1.0, 0.01, 20, 4)).expect("evolve");
    let still = ev.snapshots.iter().all(|s| s.data.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    let zero_e = ev.observables.iter().all(|o| o.gl_energy == 0.0);
    check(&mut c, "u = 1 stationary", still && zero_e, "bitwise over 20 steps".into());

    let u0 = to_deviation(&bump(spec));
    let ev = evolve(&u0, &cfg(1.0, 1e-3, 20, 20)).expect("evolve");
    let m0 = ev.observables[0].mass;
    let dm = ev.observables.windows(2).map(|w| (w[1].mass - w[0].mass).abs() / m0).fold(0.0, f64::max);
    check(&mut c, "mass per step", dm <= 1e-10, format!("{dm:.2e}"));

    if opts.thorough {
        let spec = BoxSpec::cubic(16.0, 32).expect("grid");
        let u0 = to_deviation(&bump(spec));
        let end = |dt: f64| {
            let steps = (0.5 / dt).round() as usize;
            evolve(&u0, &cfg(1.0, dt, steps, 1)).expect("evolve").snapshots.pop().expect("snapshot")
        };
        let reference = end(1.0 / 1024.0);
        let e: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0].iter().map(|&dt| end(dt).max_abs_diff(&reference)).collect();
        let ok = e.windows(2).all(|w| (w[0] / w[1] - 4.0).abs() <= 0.5);
        check(&mut c, "Strang order", ok, format!("ratios {:.3} {:.3}", e[0] / e[1], e[1] / e[2]));
    }

    let (sol, p) = preset("hyperbolic-exchange", None).expect("preset");
    let fields = sample(&sol, &BoxSpec::new([2.0; 3], [32; 3], true).expect("grid"), &[-0.1, 0.0, 0.05]);
    let lifted = gauge_lift(&fields, 0.3).expect("lift");
    let same = fields.iter().zip(&lifted).all(|(a, b)| zero_cell_indicator(a) == zero_cell_indicator(b));
    check(&mut c, "gauge lift keeps zero cells", same, "3 snapshots".into());

    match run_scenario(&sol, &p.plan, &ExtractConfig::default(), &EventConfig::default()) {
        Ok(out) => {
            let e = out.events.first();
            let ok = out.events.len() == 1
                && e.is_some_and(|e| e.kind == EventKind::Exchange && e.t_star.abs() <= p.plan.dt && e.fit.is_some_and(|f| (f.exponent - 0.5).abs() <= 0.02));
            let detail = match e.and_then(|e| e.fit.map(|f| (e.t_star, f.exponent))) {
                Some((t, x)) => format!("T* {t:.2e}, exponent {x:.4}"),
                None => format!("{} events", out.events.len()),
            };
            check(&mut c, "exchange reconnection law", ok, detail);
        }
        Err(e) => check(&mut c, "exchange reconnection law", false, e.to_string()),
    }

    let vhat = |xi: [f64; 3]| Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])).exp(), 0.0);
    match torus_rationalize(vhat, &TorusConfig::default()) {
        Ok(d) => {
            let x = [0.37, -1.1, 2.9];
            let w = d.torus_field(x, 0.3);
            let per = (0..3).all(|a| {
                let mut y = x;
                y[a] += 2.0 * std::f64::consts::PI;
                (d.torus_field(y, 0.3) - w).norm() <= 1e-12 * w.norm().max(1.0)
            });
            check(&mut c, "torus periodicity", per, format!("N = {}", d.denominator));
        }
        Err(e) => check(&mut c, "torus periodicity", false, e.to_string()),
    }

    let failed = c.iter().filter(|x| !x.passed).count();
    SelftestReport {
        seed,
        passed: c.len() - failed,
        failed,
        checks: c,
    }
}
