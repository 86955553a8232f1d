use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use vortexlab::evolve::{
    evolve, read_snapshot, torus_rationalize, write_observables_csv, write_snapshot, BoxSpec,
    ComplexField, EvolutionConfig, EvolveError, TorusConfig,
};
use vortexlab::helmholtz::{
    runge_approximate, spherical_truncate_source, stability_probe, Frequency, FundamentalSolution,
    HelmholtzError, SourceOperator,
};
use vortexlab::scenarios::{preset, run_scenario, sample, ScenarioError, PRESETS};
use vortexlab::schrod_approx::{build_schwartz_datum, SchrodError, SpacetimeSamples, SweepConfig};
use vortexlab::vortex::{
    component_timeline, detect_events, extract_all, link_components, separation_series,
    write_curves_csv, write_events_json, write_separation_csv, write_timeline_csv, VortexCurveSet,
    VortexError,
};

use crate::config::{
    AnalyzeRun, EvolveRun, HelmholtzTruth, Initial, RungeRun, ScenarioRun, SchrodRun, SchrodTruth,
    TorusRun,
};
use crate::output::OutDir;
use crate::CliError;

impl From<HelmholtzError> for CliError {
    fn from(e: HelmholtzError) -> Self {
        match e {
            HelmholtzError::Parameter(m) => CliError::Config(m),
            HelmholtzError::Geometry { gap } => CliError::Config(format!("source region too close to the domain (gap {gap})")),
            other => CliError::numerical(other.to_string(), json!({})),
        }
    }
}

impl From<SchrodError> for CliError {
    fn from(e: SchrodError) -> Self {
        match e {
            SchrodError::Parameter(m) => CliError::Config(m),
            SchrodError::TimeGrid { .. } => CliError::Config(e.to_string()),
            SchrodError::Helmholtz(h) => h.into(),
            other => CliError::numerical(other.to_string(), json!({})),
        }
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::Config(_) | EvolveError::Grid(_) | EvolveError::NotPeriodic => CliError::Config(e.to_string()),
            EvolveError::Io(io) => CliError::Io(io.to_string()),
            EvolveError::NonFinite { step } => CliError::numerical(e.to_string(), json!({ "step": step })),
            other => CliError::numerical(other.to_string(), json!({})),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<VortexError> for CliError {
    fn from(e: VortexError) -> Self {
        match e {
            VortexError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::numerical(other.to_string(), json!({})),
        }
    }
}

fn status(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}

#[derive(Serialize)]
struct CutoffError {
    l0: usize,
    relative_error: f64,
}

pub fn helmholtz_runge(cfg: &RungeRun, seed: u64, out: &mut OutDir, quiet: bool) -> Result<(), CliError> {
    cfg.validate()?;
    let tau = Frequency::new(cfg.tau);
    let source = cfg.source.unwrap_or_else(|| SweepConfig::default_source(&cfg.domain));
    let op = SourceOperator::build(cfg.domain, source, tau, cfg.resolution)?;
    out.lap("operator");
    let g = FundamentalSolution::new(tau);
    let phi: Vec<Complex64> = match cfg.ground_truth {
        HelmholtzTruth::PointSource { position } => {
            if cfg.domain.contains(position) {
                return Err(CliError::Config("point source must lie outside the domain".into()));
            }
            op.target_nodes
                .points
                .iter()
                .map(|x| g.eval([x[0] - position[0], x[1] - position[1], x[2] - position[2]]).map(|v| Complex64::new(v, 0.0)))
                .collect::<Result<_, _>>()?
        }
        HelmholtzTruth::PlaneWave { direction } => {
            let n = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
            let k = (-cfg.tau).sqrt();
            op.target_nodes
                .points
                .iter()
                .map(|x| Complex64::from_polar(1.0, k * (0..3).map(|a| direction[a] * x[a]).sum::<f64>() / n))
                .collect()
        }
    };
    let r = runge_approximate(&op, &phi, cfg.eps, None, &cfg.runge)?;
    out.lap("runge");
    status(quiet, &format!("rank {} alpha {:.3e} error {:.3e}", r.report.rank, r.report.alpha, r.report.error_target));

    let phi_norm = op.target_nodes.l2(&phi);
    let mut cutoffs = Vec::new();
    for &l0 in &cfg.l0 {
        let e = spherical_truncate_source(&op, &r.source, l0, &cfg.truncation)?;
        let diff: Vec<Complex64> = e.eval_many(&op.target_nodes.points).iter().zip(&phi).map(|(a, b)| a - b).collect();
        cutoffs.push(CutoffError {
            l0,
            relative_error: op.target_nodes.l2(&diff) / phi_norm,
        });
    }
    out.lap("truncation");
    let stability = if cfg.stability_trials > 0 {
        Some(stability_probe(tau, [0.5, 0.75, 1.0], cfg.stability_trials, 6, seed, &[])?)
    } else {
        None
    };

    let mut csv = String::from("l0,relative_error\n");
    for c in &cutoffs {
        writeln!(csv, "{},{}", c.l0, c.relative_error).unwrap();
    }
    out.text("runge_error.csv", &csv)?;
    out.json(
        "runge_report.json",
        &json!({
            "report": r.report,
            "singular_values": op.sigma,
            "cutoffs": cutoffs,
            "stability": stability,
        }),
    )?;
    if !r.report.source_bound_holds {
        return Err(CliError::numerical(
            "discrete source norm exceeds |phi|_D / alpha".into(),
            json!({ "source_norm": r.report.source_norm, "bound": r.report.input_norm / r.report.alpha }),
        ));
    }
    Ok(())
}

pub fn schrod_approx(cfg: &SchrodRun, out: &mut OutDir, quiet: bool) -> Result<(), CliError> {
    cfg.validate()?;
    let samples = match &cfg.ground_truth {
        SchrodTruth::SingleMode { tau0, position } => {
            let g = FundamentalSolution::new(Frequency::new(*tau0));
            let (tau0, p) = (*tau0, *position);
            if cfg.domain.contains(p) {
                return Err(CliError::Config("mode centre must lie outside the domain".into()));
            }
            SpacetimeSamples::from_fn(cfg.domain, cfg.per_axis, cfg.half_width, cfg.n_times, cfg.residual_tol, move |x, t| {
                let r = ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + (x[2] - p[2]).powi(2)).sqrt();
                Complex64::from_polar(g.radial(r), tau0 * t)
            })?
        }
        SchrodTruth::Scenario { name, radius } => {
            let (sol, _) = preset(name, *radius)?;
            SpacetimeSamples::from_fn(cfg.domain, cfg.per_axis, cfg.half_width, cfg.n_times, cfg.residual_tol, move |x, t| sol.eval(x, t))?
        }
    };
    out.lap("sampling");
    let (_, rep) = build_schwartz_datum(&samples, cfg.eps, cfg.interior.as_ref(), &cfg.pipeline)?;
    out.lap("pipeline");
    status(quiet, &format!("relative error {:.4} at delta {} (target met: {})", rep.relative_error, rep.delta, rep.met));
    let mut csv = String::from("delta,error,relative_error,damping_error\n");
    for p in &rep.probes {
        writeln!(csv, "{},{},{},{}", p.delta, p.error, p.relative_error, p.damping_error).unwrap();
    }
    out.text("delta_sweep.csv", &csv)?;
    out.json("schrod_report.json", &rep)?;
    Ok(())
}

fn initial_field(cfg: &EvolveRun, seed: u64) -> Result<ComplexField, CliError> {
    let spec = || BoxSpec::cubic(cfg.length, cfg.n).map_err(|e| CliError::Config(e.to_string()));
    Ok(match &cfg.initial {
        Initial::Constant { value } => ComplexField::constant(spec()?, Complex64::new(value[0], value[1])),
        Initial::Bump { amplitude, width, center } => ComplexField::from_fn(spec()?, 0.0, |x| {
            let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
            let g = amplitude * (-r2 / (2.0 * width * width)).exp();
            Complex64::new(1.0 - g, -0.5 * g * (x[0] - center[0]))
        }),
        Initial::Noise { amplitude } => {
            let mut u = ComplexField::constant(spec()?, Complex64::new(1.0, 0.0));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for z in u.data.iter_mut() {
                *z += amplitude * Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            u
        }
        Initial::Snapshot { path } => read_snapshot(path).map_err(|e| match e {
            EvolveError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
            other => CliError::Config(format!("{}: {other}", path.display())),
        })?,
    })
}

pub fn gp_evolve(cfg: &EvolveRun, seed: u64, out: &mut OutDir, quiet: bool) -> Result<(), CliError> {
    cfg.validate()?;
    let u0 = initial_field(cfg, seed)?;
    let steps = cfg.steps();
    let records = cfg.records.min(steps.max(1));
    let mut ticks: Vec<usize> = (0..=records).map(|k| k * steps / records).collect();
    ticks.dedup();
    let ecfg = EvolutionConfig {
        kappa: cfg.kappa,
        nonlinearity: cfg.nonlinearity,
        dt: cfg.dt,
        snapshot_times: ticks.iter().map(|&k| k as f64 * cfg.dt).collect(),
    };
    let ev = evolve(&u0, &ecfg)?;
    out.lap("evolve");
    for w in &ev.warnings {
        status(quiet, &format!("warning: {w}"));
    }
    let obs_path = out.path("observables.csv")?;
    write_observables_csv(&obs_path, &ev.observables)?;
    let mut snaps = Vec::new();
    if cfg.write_snapshots {
        for (k, s) in ev.snapshots.iter().enumerate() {
            let name = format!("snapshots/snap_{k:04}.bin");
            let p = out.path(&name)?;
            write_snapshot(&p, s, serde_json::to_value(&ecfg).unwrap_or_default())?;
            snaps.push(name);
        }
        out.lap("snapshots");
    }
    let o = &ev.observables;
    let (m0, e0) = (o[0].mass, o[0].gl_energy);
    let mass_change = o.windows(2).map(|w| (w[1].mass - w[0].mass).abs()).fold(0.0, f64::max);
    let energy_drift = o.iter().map(|x| (x.gl_energy - e0).abs()).fold(0.0, f64::max);
    status(quiet, &format!("{} steps, max mass change {mass_change:.3e}, max energy drift {energy_drift:.3e}", ev.steps));
    out.json(
        "evolve_report.json",
        &json!({
            "steps": ev.steps,
            "initial_mass": m0,
            "initial_energy": e0,
            "max_mass_change_between_records": mass_change,
            "max_energy_drift": energy_drift,
            "warnings": ev.warnings,
            "snapshots": snaps,
        }),
    )?;
    Ok(())
}

fn write_analysis(sets: &[VortexCurveSet], events_cfg: &vortexlab::vortex::EventConfig, link_jump: f64, out: &mut OutDir) -> Result<serde_json::Value, CliError> {
    let timeline = component_timeline(sets);
    let seps = separation_series(sets);
    let events = detect_events(sets, events_cfg);
    let h = sets.iter().map(|s| s.h).fold(0.0, f64::max);
    let links = link_components(sets, link_jump * h);
    write_curves_csv(&out.path("curves.csv")?, sets)?;
    write_timeline_csv(&out.path("timeline.csv")?, &timeline)?;
    write_separation_csv(&out.path("separation.csv")?, &seps)?;
    write_events_json(&out.path("events.json")?, &events)?;
    Ok(json!({
        "snapshots": sets.len(),
        "events": events.len(),
        "tracks": links.tracks,
        "ambiguous_links": links.ambiguous,
        "degenerate_cells": sets.iter().map(|s| s.degenerate_cells).sum::<usize>(),
        "unrefined_vertices": sets.iter().map(|s| s.unrefined).sum::<usize>(),
        "max_vertex_residual": sets.iter().map(|s| s.max_residual).fold(0.0, f64::max),
    }))
}

pub fn vortex_analyze(cfg: &AnalyzeRun, out: &mut OutDir, quiet: bool) -> Result<(), CliError> {
    cfg.validate()?;
    let paths: Vec<PathBuf> = match &cfg.snapshot_dir {
        Some(dir) => {
            let rd = std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let mut v: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "bin"))
                .collect();
            v.sort();
            v
        }
        None => cfg.snapshots.clone(),
    };
    if paths.is_empty() {
        return Err(CliError::Config("no snapshot files found".into()));
    }
    let fields = paths
        .iter()
        .map(|p| {
            read_snapshot(p).map_err(|e| match e {
                EvolveError::Io(io) => CliError::Io(format!("{}: {io}", p.display())),
                other => CliError::Config(format!("{}: {other}", p.display())),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if fields.windows(2).any(|w| w[1].t < w[0].t) {
        return Err(CliError::Config("snapshots must be in time order".into()));
    }
    out.lap("read");
    let sets = extract_all(&fields, &cfg.extract);
    out.lap("extract");
    let summary = write_analysis(&sets, &cfg.events, cfg.link_jump, out)?;
    status(quiet, &format!("{summary}"));
    out.json("analysis.json", &summary)?;
    Ok(())
}

pub fn scenario_run(cfg: &ScenarioRun, out: &mut OutDir, quiet: bool) -> Result<(), CliError> {
    cfg.validate()?;
    let (sol, p) = preset(&cfg.preset, cfg.radius)?;
    let plan = cfg.plan.clone().unwrap_or_else(|| p.plan.clone());
    let outcome = run_scenario(&sol, &plan, &cfg.extract, &cfg.events)?;
    out.lap("extract");
    if cfg.write_snapshots {
        let spec = BoxSpec::new([plan.length; 3], [plan.n; 3], false).map_err(|e| CliError::Config(e.to_string()))?;
        for (k, t) in plan.times().into_iter().enumerate() {
            let f = &sample(&sol, &spec, &[t])[0];
            write_snapshot(&out.path(&format!("snapshots/snap_{k:04}.bin"))?, f, json!({ "preset": cfg.preset, "radius": cfg.radius }))?;
        }
        out.lap("snapshots");
    }
    let mut summary = write_analysis(&outcome.sets, &cfg.events, 4.0, out)?;
    let analytic: Vec<serde_json::Value> = outcome
        .separations
        .iter()
        .map(|&(t, d)| json!({ "t": t, "d": d, "exact": p.analytic_separation(t) }))
        .collect();
    let detected = outcome.events.first().map(|e| json!({ "t_star": e.t_star, "kind": e.kind, "fit": e.fit }));
    status(quiet, &format!("{}: {} event(s); first {}", cfg.preset, outcome.events.len(), detected.clone().unwrap_or_default()));
    summary["max_true_residual"] = json!(outcome.max_true_residual);
    out.json(
        "scenario.json",
        &json!({
            "preset": p,
            "plan": plan,
            "symbolic_residual": [sol.symbolic_residual().re, sol.symbolic_residual().im],
            "analytic_event": p.event,
            "detected_event": detected,
            "separation_vs_exact": analytic,
            "summary": summary,
        }),
    )?;
    Ok(())
}

pub fn torus_embed(cfg: &TorusRun, out: &mut OutDir, quiet: bool) -> Result<(), CliError> {
    cfg.validate()?;
    let a = cfg.gaussian_a;
    let vhat = move |xi: [f64; 3]| Complex64::new((-a * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2])).exp(), 0.0);
    let exact = move |x: [f64; 3], t: f64| {
        let z = Complex64::new(a, t);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        std::f64::consts::PI.powf(1.5) * z.powf(-1.5) * (-r2 / (4.0 * z)).exp()
    };
    let n = cfg.eval_points;
    let points: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let f = k as f64;
            let r = cfg.eval_radius * ((k % 4) as f64 + 1.0) / 4.0;
            let th = (1.0 - 2.0 * ((f * 0.618_034) % 1.0)).acos();
            let ph = 2.0 * std::f64::consts::PI * ((f * 0.414_214) % 1.0);
            [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
        })
        .collect();
    let mut rows = Vec::new();
    let mut csv = String::from("j,denominator,nodes,snap_shift,sup_error,periodicity_error\n");
    for &j in &cfg.j {
        let tc = TorusConfig {
            j,
            q_max: cfg.q_max,
            denominator_limit: cfg.denominator_limit,
        };
        let d = torus_rationalize(vhat, &tc)?;
        let sup = d.sup_error(exact, &points, &cfg.eval_times);
        let x = [0.37, -1.1, 2.9];
        let w = d.torus_field(x, 0.3);
        let per = (0..3)
            .map(|ax| {
                let mut y = x;
                y[ax] += 2.0 * std::f64::consts::PI;
                (d.torus_field(y, 0.3) - w).norm()
            })
            .fold(0.0, f64::max);
        writeln!(csv, "{j},{},{},{},{sup},{per}", d.denominator, d.weights.len(), d.snap_shift).unwrap();
        status(quiet, &format!("J = {j}: N = {}, sup error {sup:.3e}", d.denominator));
        rows.push(json!({
            "j": j,
            "denominator": d.denominator,
            "nodes": d.weights.len(),
            "snap_shift": d.snap_shift,
            "sup_error": sup,
            "periodicity_error": per,
            "numerators": d.numerators,
        }));
    }
    out.lap("torus");
    out.text("torus_error.csv", &csv)?;
    out.json("torus.json", &json!({ "gaussian_a": a, "runs": rows }))?;
    Ok(())
}

pub fn presets_listing() -> serde_json::Value {
    let list: Vec<serde_json::Value> = PRESETS
        .iter()
        .map(|name| {
            let (sol, p) = preset(name, None).expect("catalogue entries build");
            json!({ "name": name, "solution": sol, "preset": p })
        })
        .collect();
    json!(list)
}
