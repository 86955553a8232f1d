use serde::{Deserialize, Serialize};

use super::extract::VortexCurveSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub t: f64,
    pub count: usize,
    pub parity: u8,
}

/// Component count and its parity per snapshot.
pub fn component_timeline(sets: &[VortexCurveSet]) -> Vec<TimelineRow> {
    sets.iter()
        .map(|s| TimelineRow {
            t: s.t,
            count: s.count(),
            parity: (s.count() % 2) as u8,
        })
        .collect()
}

/// `(t, d)` for every snapshot with exactly two components.
pub fn separation_series(sets: &[VortexCurveSet]) -> Vec<(f64, f64)> {
    sets.iter()
        .filter(|s| s.count() == 2)
        .map(|s| (s.t, s.min_separation(0, 1).expect("two components")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Exchange,
    Birth,
    Death,
    Unclassified,
}

/// Least-squares fit of `log d = log C + p log|t − T*|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Range of `|t − T*|` used.
    pub window: [f64; 2],
    /// RMS residual in `log d`.
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconnectionEvent {
    pub t_star: f64,
    pub kind: EventKind,
    pub parity_before: u8,
    pub parity_after: u8,
    /// Parities of the runs before, during and after the event.
    pub parity_sequence: Vec<u8>,
    pub count_before: usize,
    pub count_after: usize,
    /// Times of the last snapshot before and the first after the event.
    pub bracket: [f64; 2],
    /// Excluded interval around the event.
    pub exclusion: [f64; 2],
    pub fit: Option<PowerFit>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventConfig {
    /// Snapshots required on each side of a candidate.
    pub min_side: usize,
    /// Snapshots excluded on each side of an event.
    pub exclusion_snapshots: usize,
    /// Longest dip that still counts as one exchange.
    pub max_dip: usize,
    /// Fit range for `|t − T*|`; the lower end defaults to `4h²`.
    pub fit_min: Option<f64>,
    pub fit_max: f64,
}

impl Default for EventConfig {
    fn default() -> Self {
        Self {
            min_side: 8,
            exclusion_snapshots: 3,
            max_dip: 3,
            fit_min: None,
            fit_max: 0.1,
        }
    }
}

/// Log-log least squares on points with `|t − T*|` inside `window`.
pub fn fit_power_law(data: &[(f64, f64)], t_star: f64, window: [f64; 2]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = data
        .iter()
        .filter_map(|&(t, d)| {
            let s = (t - t_star).abs();
            (s >= window[0] && s <= window[1] && d > 0.0).then(|| (s.ln(), d.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let rss: f64 = pts.iter().map(|q| (q.1 - c - p * q.0).powi(2)).sum();
    Some(PowerFit {
        exponent: p,
        prefactor: c.exp(),
        window,
        residual: (rss / n).sqrt(),
        points: pts.len(),
    })
}

/// `T*` in `[a, b]` minimising the fit residual: coarse scan, then golden section.
fn refine_t_star(data: &[(f64, f64)], a: f64, b: f64, window: [f64; 2]) -> Option<(f64, PowerFit)> {
    let cost = |t: f64| fit_power_law(data, t, window).map_or(f64::INFINITY, |f| f.residual);
    let scan = 64;
    let step = (b - a) / scan as f64;
    let mut best = (0.5 * (a + b), cost(0.5 * (a + b)));
    for i in 0..=scan {
        let t = a + i as f64 * step;
        let c = cost(t);
        if c < best.1 {
            best = (t, c);
        }
    }
    if !best.1.is_finite() {
        return None;
    }
    let (mut lo, mut hi) = ((best.0 - step).max(a), (best.0 + step).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    let cand = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let t = if cand.1 <= best.1 { cand.0 } else { best.0 };
    fit_power_law(data, t, window).map(|f| (t, f))
}

struct Run {
    count: usize,
    start: usize,
    end: usize,
}

fn runs(counts: &[usize]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.count == c => r.end = i,
            _ => out.push(Run { count: c, start: i, end: i }),
        }
    }
    out
}

fn smallest_diameter(s: &VortexCurveSet) -> Option<f64> {
    s.components.iter().map(|c| c.diameter()).min_by(|a, b| a.total_cmp(b))
}

/// Events at component-count changes, classified and fitted.
///
/// A short dip `c → c−1 → c` with `c ≥ 2` is one exchange, fitted on the
/// two-component separation. Other changes by one are births or deaths,
/// fitted on the diameter of the smallest component on the side where it
/// exists. Snapshots must be sorted by time.
pub fn detect_events(sets: &[VortexCurveSet], cfg: &EventConfig) -> Vec<ReconnectionEvent> {
    let times: Vec<f64> = sets.iter().map(|s| s.t).collect();
    let counts: Vec<usize> = sets.iter().map(|s| s.count()).collect();
    let runs = runs(&counts);
    let h = sets.iter().map(|s| s.h).fold(0.0, f64::max);
    let window = [cfg.fit_min.unwrap_or(4.0 * h * h), cfg.fit_max];
    let parity = |c: usize| (c % 2) as u8;
    let exclusion = |first_after: usize, last_before: usize| {
        let lo = last_before.saturating_sub(cfg.exclusion_snapshots);
        let hi = (first_after + cfg.exclusion_snapshots).min(times.len() - 1);
        [times[lo], times[hi]]
    };

    let mut events = Vec::new();
    let mut r = 0;
    while r + 1 < runs.len() {
        let (a, b) = (&runs[r], &runs[r + 1]);
        let dip = runs.get(r + 2).filter(|c| {
            c.count == a.count && b.count + 1 == a.count && a.count >= 2 && b.end - b.start < cfg.max_dip
        });
        if let Some(c) = dip {
            let before = a.end + 1;
            let after = times.len() - c.start;
            let bracket = [times[a.end], times[c.start]];
            let mut ev = ReconnectionEvent {
                t_star: 0.5 * (times[b.start] + times[b.end]),
                kind: EventKind::Exchange,
                parity_before: parity(a.count),
                parity_after: parity(b.count),
                parity_sequence: vec![parity(a.count), parity(b.count), parity(c.count)],
                count_before: a.count,
                count_after: c.count,
                bracket,
                exclusion: exclusion(c.start, a.end),
                fit: None,
                note: None,
            };
            if before < cfg.min_side || after < cfg.min_side {
                ev.kind = EventKind::Unclassified;
                ev.note = Some(format!("only {before} / {after} snapshots on each side"));
            } else if a.count == 2 {
                let data: Vec<(f64, f64)> = (a.start..=a.end)
                    .chain(c.start..=c.end)
                    .map(|i| (times[i], sets[i].min_separation(0, 1).expect("two components")))
                    .collect();
                match refine_t_star(&data, bracket[0], bracket[1], window) {
                    Some((t, f)) => {
                        ev.t_star = t;
                        ev.fit = Some(f);
                    }
                    None => ev.note = Some("too few points in the fit window".into()),
                }
            } else {
                ev.note = Some("separation fit needs exactly two components".into());
            }
            events.push(ev);
            r += 2;
            continue;
        }

        let bracket = [times[a.end], times[b.start]];
        let before = a.end + 1;
        let after = times.len() - b.start;
        let mut ev = ReconnectionEvent {
            t_star: 0.5 * (bracket[0] + bracket[1]),
            kind: if b.count > a.count { EventKind::Birth } else { EventKind::Death },
            parity_before: parity(a.count),
            parity_after: parity(b.count),
            parity_sequence: vec![parity(a.count), parity(b.count)],
            count_before: a.count,
            count_after: b.count,
            bracket,
            exclusion: exclusion(b.start, a.end),
            fit: None,
            note: None,
        };
        if a.count.abs_diff(b.count) != 1 {
            ev.kind = EventKind::Unclassified;
            ev.note = Some(format!("count jumps from {} to {}", a.count, b.count));
        } else if before < cfg.min_side || after < cfg.min_side {
            ev.kind = EventKind::Unclassified;
            ev.note = Some(format!("only {before} / {after} snapshots on each side"));
        } else {
            let side = if ev.kind == EventKind::Death { a.start..=a.end } else { b.start..=b.end };
            let data: Vec<(f64, f64)> =
                side.filter_map(|i| smallest_diameter(&sets[i]).map(|d| (times[i], d))).collect();
            match refine_t_star(&data, bracket[0], bracket[1], window) {
                Some((t, f)) => {
                    ev.t_star = t;
                    ev.fit = Some(f);
                }
                None => ev.note = Some("too few points in the fit window".into()),
            }
        }
        events.push(ev);
        r += 1;
    }
    events
}

/// Track labels from nearest-centroid matching between consecutive snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linking {
    /// `labels[n][c]` is the track of component `c` in snapshot `n`.
    pub labels: Vec<Vec<usize>>,
    pub tracks: usize,
    /// `(snapshot, component)` pairs whose match was not unique.
    pub ambiguous: Vec<(usize, usize)>,
}

/// Links components across snapshots; a component with no predecessor
/// within `max_jump`, or with several, starts a new track.
pub fn link_components(sets: &[VortexCurveSet], max_jump: f64) -> Linking {
    let mut labels: Vec<Vec<usize>> = Vec::with_capacity(sets.len());
    let mut ambiguous = Vec::new();
    let mut tracks = 0;
    for (n, s) in sets.iter().enumerate() {
        let cents: Vec<[f64; 3]> = s.components.iter().map(|c| c.centroid()).collect();
        let mut lab = Vec::with_capacity(cents.len());
        if n == 0 {
            for _ in &cents {
                lab.push(tracks);
                tracks += 1;
            }
        } else {
            let prev: Vec<[f64; 3]> = sets[n - 1].components.iter().map(|c| c.centroid()).collect();
            let near = |a: [f64; 3]| -> Vec<usize> {
                (0..prev.len())
                    .filter(|&j| super::geometry::distance(a, prev[j]) <= max_jump)
                    .collect()
            };
            for (c, &x) in cents.iter().enumerate() {
                let cand = near(x);
                // a predecessor claimed by several current components is ambiguous too
                let shared = cand.len() == 1
                    && cents.iter().enumerate().any(|(o, &y)| o != c && near(y).contains(&cand[0]));
                if cand.len() == 1 && !shared {
                    lab.push(labels[n - 1][cand[0]]);
                } else {
                    if !cand.is_empty() {
                        ambiguous.push((n, c));
                    }
                    lab.push(tracks);
                    tracks += 1;
                }
            }
        }
        labels.push(lab);
    }
    Linking { labels, tracks, ambiguous }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vortex::extract::{Component, Polyline, Window};

    fn set(t: f64, comps: Vec<Component>) -> VortexCurveSet {
        VortexCurveSet {
            t,
            tol: 1e-9,
            h: 0.01,
            window: Window::central([2.0; 3], 0.8),
            components: comps,
            degenerate_cells: 0,
            unrefined: 0,
            max_residual: 0.0,
        }
    }

    fn line(x: f64) -> Component {
        Component {
            polylines: vec![Polyline { points: vec![[x, 0.0, -0.5], [x, 0.0, 0.5]], closed: false }],
        }
    }

    #[test]
    fn power_law_fit_recovers_exact_law() {
        let data: Vec<(f64, f64)> = (1..40).map(|k| {
            let t = 0.3 + 0.005 * k as f64;
            (t, 1.7 * (t - 0.3).powf(0.5))
        }).collect();
        let f = fit_power_law(&data, 0.3, [0.0, 1.0]).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12);
        assert!((f.prefactor - 1.7).abs() < 1e-12);
        let (t, _) = refine_t_star(&data, 0.29, 0.31, [0.0, 1.0]).unwrap();
        assert!((t - 0.3).abs() < 1e-6, "{t}");
    }

    #[test]
    fn synthetic_exchange_and_death() {
        // two lines at distance 2√(2|t|), merged only at t = 0
        let mut sets = Vec::new();
        for k in -16..=16 {
            let t = k as f64 * 0.0125;
            let d = 2.0 * (2.0 * t.abs()).sqrt();
            sets.push(if k == 0 { set(t, vec![line(0.0)]) } else { set(t, vec![line(-0.5 * d), line(0.5 * d)]) });
        }
        let ev = detect_events(&sets, &EventConfig::default());
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::Exchange);
        assert_eq!(ev[0].parity_sequence, vec![0, 1, 0]);
        let f = ev[0].fit.unwrap();
        assert!(ev[0].t_star.abs() < 1e-6);
        assert!((f.exponent - 0.5).abs() < 1e-6);
        assert!((f.prefactor - 2.0 * 2f64.sqrt()).abs() < 1e-5);

        let tl = component_timeline(&sets);
        assert_eq!(tl[16].count, 1);
        assert_eq!(separation_series(&sets).len(), 32);

        // too few snapshots on one side
        let ev = detect_events(&sets[10..], &EventConfig::default());
        assert_eq!(ev[0].kind, EventKind::Unclassified);

        let deaths: Vec<VortexCurveSet> =
            (0..20).map(|k| set(k as f64, if k < 10 { vec![line(0.0)] } else { vec![] })).collect();
        let ev = detect_events(&deaths, &EventConfig::default());
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::Death);
        assert_eq!((ev[0].parity_before, ev[0].parity_after), (1, 0));
    }

    #[test]
    fn no_events_for_constant_topology() {
        let sets: Vec<VortexCurveSet> = (0..20).map(|k| set(k as f64, vec![line(0.01 * k as f64)])).collect();
        assert!(detect_events(&sets, &EventConfig::default()).is_empty());
        let l = link_components(&sets, 0.04);
        assert_eq!(l.tracks, 1);
        assert!(l.ambiguous.is_empty());
    }

    #[test]
    fn linking_flags_ambiguity() {
        let sets = vec![set(0.0, vec![line(0.0), line(0.02)]), set(1.0, vec![line(0.01)])];
        let l = link_components(&sets, 0.04);
        assert_eq!(l.labels[1], vec![2]);
        assert_eq!(l.ambiguous, vec![(1, 0)]);
        let sets = vec![set(0.0, vec![line(0.0)]), set(1.0, vec![line(-0.01), line(0.01)])];
        let l = link_components(&sets, 0.04);
        assert_eq!(l.labels[1], vec![1, 2]);
        assert_eq!(l.ambiguous.len(), 2);
    }
}
