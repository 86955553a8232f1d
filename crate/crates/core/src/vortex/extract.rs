use std::collections::HashMap;

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{distance, polyline_distance};
use super::VortexError;
use crate::grid::ComplexField;

/// Axis-aligned analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Window {
    /// The central `fraction` of a box centred at the origin.
    pub fn central(length: [f64; 3], fraction: f64) -> Self {
        let half = length.map(|l| 0.5 * l * fraction);
        Self {
            lo: half.map(|h| -h),
            hi: half,
        }
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        (0..3).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractConfig {
    /// Absolute `|u|` tolerance for refined vertices; `None` means `1e−9 · max|u|`.
    pub tol: Option<f64>,
    /// Explicit window; `None` means the central `window_fraction` of the box.
    pub window: Option<Window>,
    pub window_fraction: f64,
    /// Components closer than this many grid spacings are merged.
    pub merge_factor: f64,
    pub newton_iters: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            tol: None,
            window: None,
            window_fraction: 0.8,
            merge_factor: 2.0,
            newton_iters: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 3]>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let mut l: f64 = self.points.windows(2).map(|w| distance(w[0], w[1])).sum();
        if self.closed && self.points.len() > 2 {
            l += distance(self.points[self.points.len() - 1], self.points[0]);
        }
        l
    }
}

/// A connected piece of the zero set, possibly made of several polylines
/// closer than the merge radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub polylines: Vec<Polyline>,
}

impl Component {
    pub fn vertices(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.polylines.iter().flat_map(|p| p.points.iter().copied())
    }

    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }

    pub fn length(&self) -> f64 {
        self.polylines.iter().map(|p| p.length()).sum()
    }

    pub fn centroid(&self) -> [f64; 3] {
        let n = self.vertex_count().max(1) as f64;
        let mut c = [0.0; 3];
        for v in self.vertices() {
            for a in 0..3 {
                c[a] += v[a] / n;
            }
        }
        c
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let v: Vec<[f64; 3]> = self.vertices().collect();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(distance(v[i], v[j]));
            }
        }
        d
    }

    pub fn is_closed(&self) -> bool {
        self.polylines.len() == 1 && self.polylines[0].closed
    }
}

/// Distance between two components over all segment pairs.
pub fn component_distance(a: &Component, b: &Component) -> f64 {
    let mut best = f64::INFINITY;
    for p in &a.polylines {
        for q in &b.polylines {
            best = best.min(polyline_distance(&p.points, p.closed, &q.points, q.closed));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexCurveSet {
    pub t: f64,
    pub tol: f64,
    /// Largest grid spacing.
    pub h: f64,
    pub window: Window,
    pub components: Vec<Component>,
    /// Tetrahedra skipped because `∇Re u` and `∇Im u` were nearly parallel.
    pub degenerate_cells: usize,
    /// Vertices whose refined residual stayed above `tol`.
    pub unrefined: usize,
    pub max_residual: f64,
}

impl VortexCurveSet {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn min_separation(&self, a: usize, b: usize) -> Result<f64, VortexError> {
        let n = self.components.len();
        for &i in &[a, b] {
            if i >= n {
                return Err(VortexError::MissingComponent { index: i, count: n });
            }
        }
        Ok(component_distance(&self.components[a], &self.components[b]))
    }
}

/// Kuhn subdivision of the unit cube into six tetrahedra along the main diagonal.
const TETS: [[[usize; 3]; 4]; 6] = {
    const P: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = [[[0usize; 3]; 4]; 6];
    let mut t = 0;
    while t < 6 {
        let mut v = [0usize; 3];
        out[t][0] = v;
        let mut s = 0;
        while s < 3 {
            v[P[t][s]] = 1;
            out[t][s + 1] = v;
            s += 1;
        }
        t += 1;
    }
    out
};

#[inline]
fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

struct Grid<'a> {
    data: &'a Array3<Complex64>,
    n: [usize; 3],
    x0: [f64; 3],
    h: [f64; 3],
}

impl Grid<'_> {
    fn id(&self, i: [usize; 3]) -> u64 {
        ((i[0] * self.n[1] + i[1]) * self.n[2] + i[2]) as u64
    }

    fn unid(&self, id: u64) -> [usize; 3] {
        let id = id as usize;
        [id / (self.n[1] * self.n[2]), (id / self.n[2]) % self.n[1], id % self.n[2]]
    }

    fn pos(&self, i: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.x0[a] + i[a] as f64 * self.h[a])
    }

    fn val(&self, i: [usize; 3]) -> Complex64 {
        self.data[(i[0], i[1], i[2])]
    }

    /// Trilinear value and gradients of `Re u`, `Im u` at `p`.
    fn trilinear(&self, p: [f64; 3]) -> (Complex64, [f64; 3], [f64; 3]) {
        let mut c = [0usize; 3];
        let mut f = [0.0; 3];
        for a in 0..3 {
            let s = (p[a] - self.x0[a]) / self.h[a];
            let i = (s.floor().max(0.0) as usize).min(self.n[a] - 2);
            c[a] = i;
            f[a] = s - i as f64;
        }
        let mut v = Complex64::new(0.0, 0.0);
        let mut g = [Complex64::new(0.0, 0.0); 3];
        for corner in 0..8 {
            let o = [(corner >> 2) & 1, (corner >> 1) & 1, corner & 1];
            let w = [0, 1, 2].map(|a| if o[a] == 1 { f[a] } else { 1.0 - f[a] });
            let dw = [0, 1, 2].map(|a| if o[a] == 1 { 1.0 } else { -1.0 } / self.h[a]);
            let z = self.val([c[0] + o[0], c[1] + o[1], c[2] + o[2]]);
            v += z * (w[0] * w[1] * w[2]);
            g[0] += z * (dw[0] * w[1] * w[2]);
            g[1] += z * (w[0] * dw[1] * w[2]);
            g[2] += z * (w[0] * w[1] * dw[2]);
        }
        (v, g.map(|z| z.re), g.map(|z| z.im))
    }

    /// Minimal-norm Newton on `(Re u, Im u) = 0`, staying within `radius` of `p0`.
    fn refine(&self, p0: [f64; 3], iters: usize, tol: f64, radius: f64) -> ([f64; 3], f64) {
        let mut p = p0;
        let (mut v, mut gr, mut gi) = self.trilinear(p);
        let mut res = v.norm();
        for _ in 0..iters {
            if res < tol {
                break;
            }
            let a = gr.iter().map(|x| x * x).sum::<f64>();
            let b = gr.iter().zip(&gi).map(|(x, y)| x * y).sum::<f64>();
            let c = gi.iter().map(|x| x * x).sum::<f64>();
            let det = a * c - b * b;
            if !(det > 1e-300) {
                break;
            }
            // λ = (JJᵀ)⁻¹ f, step = −Jᵀλ
            let l0 = (c * v.re - b * v.im) / det;
            let l1 = (a * v.im - b * v.re) / det;
            let q = [0, 1, 2].map(|k| p[k] - (gr[k] * l0 + gi[k] * l1));
            if distance(q, p0) > radius {
                break;
            }
            let (nv, ngr, ngi) = self.trilinear(q);
            if nv.norm() >= res {
                break;
            }
            p = q;
            v = nv;
            gr = ngr;
            gi = ngi;
            res = v.norm();
        }
        (p, res)
    }
}

type FaceKey = [u64; 3];

/// Zero of the linear interpolant on a triangle, if the origin lies inside
/// the image triangle. Zero cross products count as positive, which keeps the
/// decision consistent for faces shared by two tetrahedra.
fn face_zero(g: &Grid, key: FaceKey) -> Option<[f64; 3]> {
    let ids = key.map(|k| g.unid(k));
    let [a, b, c] = ids.map(|i| g.val(i));
    let cab = cross(a, b);
    let cbc = cross(b, c);
    let cca = cross(c, a);
    let pos = |x: f64| x >= 0.0;
    if !(pos(cab) == pos(cbc) && pos(cbc) == pos(cca)) {
        return None;
    }
    let s = cab + cbc + cca;
    if s == 0.0 {
        return None;
    }
    let w = [cbc / s, cca / s, cab / s];
    let p = ids.map(|i| g.pos(i));
    Some([0, 1, 2].map(|k| w[0] * p[0][k] + w[1] * p[1][k] + w[2] * p[2][k]))
}

fn tet_degenerate(g: &Grid, verts: &[[usize; 3]; 4]) -> bool {
    // edge matrix is a permutation of unit steps scaled by h, so the
    // gradient is a finite difference along the path
    let mut gr = [0.0; 3];
    let mut gi = [0.0; 3];
    for s in 0..3 {
        let a = (0..3).find(|&k| verts[s + 1][k] != verts[s][k]).unwrap_or(0);
        let d = g.val(verts[s + 1]) - g.val(verts[s]);
        gr[a] = d.re / g.h[a];
        gi[a] = d.im / g.h[a];
    }
    let cx = [
        gr[1] * gi[2] - gr[2] * gi[1],
        gr[2] * gi[0] - gr[0] * gi[2],
        gr[0] * gi[1] - gr[1] * gi[0],
    ];
    let n = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    n(cx) <= 1e-8 * n(gr) * n(gi)
}

/// Zero set of `u` inside the analysis window as chained, refined polylines.
pub fn extract_zero_set(u: &ComplexField, cfg: &ExtractConfig) -> VortexCurveSet {
    let spec = u.spec;
    let n = spec.n;
    let h = spec.spacing();
    let x0 = spec.point(0, 0, 0);
    let g = Grid { data: &u.data, n, x0, h };
    let window = cfg.window.unwrap_or_else(|| Window::central(spec.length, cfg.window_fraction));
    let scale = u.max_abs();
    let tol = cfg.tol.unwrap_or(1e-9 * scale).max(f64::MIN_POSITIVE);
    let hmax = h.iter().copied().fold(0.0, f64::max);

    // cubes whose corners all lie in the window
    let range = |a: usize| -> (usize, usize) {
        let lo = ((window.lo[a] - x0[a]) / h[a]).ceil().max(0.0) as usize;
        let hi = (((window.hi[a] - x0[a]) / h[a]).floor() as i64).clamp(0, n[a] as i64 - 1) as usize;
        (lo, hi)
    };
    let (r0, r1, r2) = (range(0), range(1), range(2));

    let per_slab: Vec<(Vec<(FaceKey, FaceKey)>, usize)> = (r0.0..r0.1)
        .into_par_iter()
        .map(|i| {
            let mut edges = Vec::new();
            let mut degenerate = 0;
            for j in r1.0..r1.1 {
                for k in r2.0..r2.1 {
                    for tet in &TETS {
                        let verts = tet.map(|o| [i + o[0], j + o[1], k + o[2]]);
                        let ids = verts.map(|v| g.id(v));
                        let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]].map(|f| {
                            let mut key = f.map(|x| ids[x]);
                            key.sort_unstable();
                            key
                        });
                        let hit: Vec<FaceKey> = faces.into_iter().filter(|&f| face_zero(&g, f).is_some()).collect();
                        match hit.len() {
                            0 => {}
                            2 => {
                                if tet_degenerate(&g, &verts) {
                                    degenerate += 1;
                                } else {
                                    edges.push((hit[0], hit[1]));
                                }
                            }
                            _ => degenerate += 1,
                        }
                    }
                }
            }
            (edges, degenerate)
        })
        .collect();

    let mut index: HashMap<FaceKey, usize> = HashMap::new();
    let mut keys: Vec<FaceKey> = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut degenerate_cells = 0;
    let mut node = |k: FaceKey, keys: &mut Vec<FaceKey>, adj: &mut Vec<Vec<usize>>| -> usize {
        *index.entry(k).or_insert_with(|| {
            keys.push(k);
            adj.push(Vec::new());
            keys.len() - 1
        })
    };
    for (edges, d) in per_slab {
        degenerate_cells += d;
        for (a, b) in edges {
            let ia = node(a, &mut keys, &mut adj);
            let ib = node(b, &mut keys, &mut adj);
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
    }

    let refined: Vec<([f64; 3], f64)> = keys
        .par_iter()
        .map(|&k| {
            let p = face_zero(&g, k).expect("face was crossed");
            g.refine(p, cfg.newton_iters, tol, hmax)
        })
        .collect();
    let unrefined = refined.iter().filter(|r| r.1 >= tol).count();
    let max_residual = refined.iter().map(|r| r.1).fold(0.0, f64::max);

    // chain into polylines, open chains first
    let mut seen = vec![false; keys.len()];
    let mut polylines = Vec::new();
    let walk = |start: usize, seen: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut path = vec![start];
        seen[start] = true;
        let mut cur = start;
        let closed;
        loop {
            let next = adj[cur].iter().copied().find(|&x| !seen[x]);
            match next {
                Some(nx) => {
                    seen[nx] = true;
                    path.push(nx);
                    cur = nx;
                }
                None => {
                    closed = path.len() > 2 && adj[cur].contains(&start);
                    break;
                }
            }
        }
        (path, closed)
    };
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| (adj[i].len() != 1, keys[i]));
    for &s in &order {
        if !seen[s] {
            let (path, closed) = walk(s, &mut seen);
            polylines.push(Polyline {
                points: path.iter().map(|&i| refined[i].0).collect(),
                closed,
            });
        }
    }

    let components = merge_components(polylines, cfg.merge_factor * hmax);
    VortexCurveSet {
        t: u.t,
        tol,
        h: hmax,
        window,
        components,
        degenerate_cells,
        unrefined,
        max_residual,
    }
}

/// Groups polylines whose mutual distance is below `radius`.
fn merge_components(polylines: Vec<Polyline>, radius: f64) -> Vec<Component> {
    let n = polylines.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    let boxes: Vec<([f64; 3], [f64; 3])> = polylines
        .iter()
        .map(|p| {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for v in &p.points {
                for a in 0..3 {
                    lo[a] = lo[a].min(v[a]);
                    hi[a] = hi[a].max(v[a]);
                }
            }
            (lo, hi)
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (0..3)
                .map(|a| (boxes[i].0[a] - boxes[j].1[a]).max(boxes[j].0[a] - boxes[i].1[a]).max(0.0))
                .fold(0.0, f64::max);
            if gap >= radius {
                continue;
            }
            let (a, b) = (&polylines[i], &polylines[j]);
            if polyline_distance(&a.points, a.closed, &b.points, b.closed) < radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<(usize, Component)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (i, p) in polylines.into_iter().enumerate() {
        let r = find(&mut parent, i);
        let k = *slot.entry(r).or_insert_with(|| {
            groups.push((r, Component { polylines: Vec::new() }));
            groups.len() - 1
        });
        groups[k].1.polylines.push(p);
    }
    groups.into_iter().map(|g| g.1).collect()
}

/// Cubes whose piecewise-linear interpolant has a zero on some tetrahedron face.
///
/// Depends only on the signs of `Re a Im b − Im a Re b`, so it is invariant
/// under multiplying the field by a nonzero constant.
pub fn zero_cell_indicator(u: &ComplexField) -> Array3<bool> {
    let spec = u.spec;
    let n = spec.n;
    let g = Grid { data: &u.data, n, x0: spec.point(0, 0, 0), h: spec.spacing() };
    let mut out = Array3::from_elem((n[0] - 1, n[1] - 1, n[2] - 1), false);
    out.indexed_iter_mut().par_bridge().for_each(|((i, j, k), v)| {
        *v = TETS.iter().any(|tet| {
            let ids = tet.map(|o| g.id([i + o[0], j + o[1], k + o[2]]));
            [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]].iter().any(|f| {
                let mut key = f.map(|x| ids[x]);
                key.sort_unstable();
                face_zero(&g, key).is_some()
            })
        });
    });
    out
}
