use vortexlab::grid::{BoxSpec, ComplexField};
use vortexlab::scenarios::{preset, run_scenario, sample};
use vortexlab::vortex::{
    component_timeline, extract_zero_set, EventConfig, EventKind, ExtractConfig, Window,
};

fn open_box(l: f64, n: usize) -> BoxSpec {
    BoxSpec::new([l; 3], [n; 3], false).unwrap()
}

#[test]
fn exchange_has_two_branches_before_the_event() {
    let (sol, _) = preset("hyperbolic-exchange", None).unwrap();
    let spec = open_box(2.0, 64);
    let u = &sample(&sol, &spec, &[-0.1])[0];
    let cfg = ExtractConfig {
        window: Some(Window { lo: [-0.8, -0.8, -0.4], hi: [0.8, 0.8, 0.4] }),
        ..Default::default()
    };
    let set = extract_zero_set(u, &cfg);
    assert_eq!(set.count(), 2);
    assert_eq!(set.unrefined, 0);
    for v in set.components.iter().flat_map(|c| c.vertices()) {
        assert!(sol.transversality(v) < 10.0, "{v:?}");
    }
}

#[test]
fn exchange_separation_matches_closed_form() {
    let (sol, p) = preset("hyperbolic-exchange", None).unwrap();
    let spec = open_box(2.0, 64);
    let h = spec.spacing()[0];
    for t in [0.1, 0.025, -0.05] {
        let set = extract_zero_set(&sample(&sol, &spec, &[t])[0], &ExtractConfig::default());
        assert_eq!(set.count(), 2);
        let d = set.min_separation(0, 1).unwrap();
        assert_eq!(d, set.min_separation(1, 0).unwrap());
        let exact = p.analytic_separation(t).unwrap();
        assert!((d - exact).abs() < 2.0 * h, "t = {t}: {d} vs {exact}");
    }
}

#[test]
fn exchange_events_and_fit() {
    let (sol, p) = preset("hyperbolic-exchange", None).unwrap();
    let out = run_scenario(&sol, &p.plan, &ExtractConfig::default(), &EventConfig::default()).unwrap();
    let counts: Vec<usize> = out.timeline.iter().map(|r| r.count).collect();
    let mid = counts.len() / 2;
    assert_eq!(counts[mid], 1, "{counts:?}");
    assert!(counts.iter().enumerate().all(|(i, &c)| i == mid || c == 2), "{counts:?}");
    assert_eq!(out.events.len(), 1);
    let e = &out.events[0];
    assert_eq!(e.kind, EventKind::Exchange);
    assert_ne!(e.parity_before, e.parity_after);
    let f = e.fit.unwrap();
    println!("T* = {}, p = {}, C = {}, residual = {}", e.t_star, f.exponent, f.prefactor, f.residual);
    assert!(e.t_star.abs() <= p.plan.dt);
    assert!((f.exponent - 0.5).abs() <= 0.02);
    assert!((f.prefactor / 8f64.sqrt() - 1.0).abs() <= 0.05);
}

#[test]
fn ring_death_and_birth() {
    for (name, kind, parity) in [("ring-death", EventKind::Death, (1, 0)), ("ring-birth", EventKind::Birth, (0, 1))] {
        let (sol, p) = preset(name, Some(0.5)).unwrap();
        let out = run_scenario(&sol, &p.plan, &ExtractConfig::default(), &EventConfig::default()).unwrap();
        let counts: Vec<usize> = out.timeline.iter().map(|r| r.count).collect();
        assert_eq!(out.events.len(), 1, "{name}: {counts:?}");
        let e = &out.events[0];
        println!("{name}: T* = {}, fit = {:?}", e.t_star, e.fit);
        assert_eq!(e.kind, kind);
        assert_eq!((e.parity_before, e.parity_after), parity);
        assert!((e.t_star + 0.125).abs() <= p.plan.dt, "{}", e.t_star);
    }
}

#[test]
fn moving_ring_is_a_closed_circle_without_events() {
    let (sol, p) = preset("moving-ring", Some(0.5)).unwrap();
    let spec = open_box(2.0, 64);
    let set = extract_zero_set(&sample(&sol, &spec, &[0.0])[0], &ExtractConfig::default());
    assert_eq!(set.count(), 1);
    let c = &set.components[0];
    assert!(c.is_closed());
    let len = c.length();
    assert!((len / (2.0 * std::f64::consts::PI * 0.5) - 1.0).abs() < 0.05, "{len}");
    for v in c.vertices() {
        assert!(v[2].abs() < 1e-9);
        assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 0.5).abs() < 0.5 * spec.spacing()[0]);
    }
    let out = run_scenario(&sol, &p.plan, &ExtractConfig::default(), &EventConfig::default()).unwrap();
    assert!(out.events.is_empty());
    assert!(out.timeline.iter().all(|r| r.count == 1));
}

#[test]
fn empty_field_has_no_vortices() {
    let spec = open_box(2.0, 16);
    let u = vec![ComplexField::constant(spec, 1.0.into()); 3];
    let sets: Vec<_> = u.iter().map(|f| extract_zero_set(f, &ExtractConfig::default())).collect();
    assert!(component_timeline(&sets).iter().all(|r| r.count == 0 && r.parity == 0));
}

#[test]
fn refinement_improves_with_resolution() {
    for name in ["hyperbolic-exchange", "moving-ring", "ring-death"] {
        let (sol, p) = preset(name, Some(0.5)).unwrap();
        let t = p.plan.t_start + 3.0 * p.plan.dt;
        let mut res = Vec::new();
        let mut counts = Vec::new();
        for n in [32, 64] {
            let set = extract_zero_set(&sample(&sol, &open_box(2.0, n), &[t])[0], &ExtractConfig::default());
            counts.push(set.count());
            res.push(set.components.iter().flat_map(|c| c.vertices()).map(|v| sol.eval(v, t).norm()).fold(0.0, f64::max));
        }
        println!("{name}: counts {counts:?}, true residual {res:?}");
        assert_eq!(counts[0], counts[1], "{name}");
        assert!(res[0] / res[1] >= 3.8, "{name}: {res:?}");
    }
}
