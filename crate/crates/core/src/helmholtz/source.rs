use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dist, Domain, Frequency, FundamentalSolution, HelmholtzError, QuadNodes};

/// Cells per axis for the target and source voxel lattices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub target_per_axis: usize,
    pub source_per_axis: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            target_per_axis: 16,
            source_per_axis: 8,
        }
    }
}

/// Discretised `f ↦ (G_τ * f)|_D` with its weighted SVD.
///
/// With `A_ij = G(x_i − y_j) w_j`, the factorised matrix is
/// `W_D^{1/2} A W_Y^{−1/2} = U Σ Vᵀ`, so singular values are those of the
/// operator between the discrete `L²(Y)` and `L²(D)`.
#[derive(Debug, Clone)]
pub struct SourceOperator {
    pub tau: Frequency,
    pub target: Domain,
    pub source: Domain,
    pub target_nodes: QuadNodes,
    pub source_nodes: QuadNodes,
    /// `G(x_i − y_j)` without weights.
    pub kernel: DMatrix<f64>,
    pub sigma: Vec<f64>,
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
}

impl SourceOperator {
    pub fn build(
        target: Domain,
        source: Domain,
        tau: Frequency,
        res: Resolution,
    ) -> Result<Self, HelmholtzError> {
        target.validate()?;
        source.validate()?;
        if res.target_per_axis < 4 || res.source_per_axis < 4 {
            return Err(HelmholtzError::Parameter(
                "node counts must be at least 4 per axis".into(),
            ));
        }
        let (c, r) = target.bounding_ball();
        let gap = source.gap_to_ball(c, r);
        if gap <= 0.0 {
            return Err(HelmholtzError::Geometry { gap });
        }
        let target_nodes = target.voxel_nodes(res.target_per_axis);
        let source_nodes = source.voxel_nodes(res.source_per_axis);
        Self::from_nodes(target, source, tau, target_nodes, source_nodes)
    }

    /// Builds the operator from explicit node sets (e.g. a point mass).
    pub fn from_nodes(
        target: Domain,
        source: Domain,
        tau: Frequency,
        target_nodes: QuadNodes,
        source_nodes: QuadNodes,
    ) -> Result<Self, HelmholtzError> {
        let g = FundamentalSolution::new(tau);
        let m = target_nodes.len();
        let n = source_nodes.len();
        if m == 0 || n == 0 {
            return Err(HelmholtzError::Parameter("empty node set".into()));
        }
        let mut kernel = DMatrix::<f64>::zeros(m, n);
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let y = source_nodes.points[j];
                target_nodes
                    .points
                    .iter()
                    .map(|&x| g.radial(dist(x, y)))
                    .collect()
            })
            .collect();
        for (j, col) in cols.into_iter().enumerate() {
            kernel.column_mut(j).copy_from_slice(&col);
        }
        if kernel.iter().any(|v| !v.is_finite()) {
            return Err(HelmholtzError::Geometry { gap: 0.0 });
        }
        let sd: Vec<f64> = target_nodes.weights.iter().map(|w| w.sqrt()).collect();
        let sy: Vec<f64> = source_nodes.weights.iter().map(|w| w.sqrt()).collect();
        let weighted = DMatrix::from_fn(m, n, |i, j| sd[i] * kernel[(i, j)] * sy[j]);
        let svd = weighted.svd(true, true);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let u_raw = svd.u.expect("requested U");
        let v_raw = svd.v_t.expect("requested Vᵀ");
        let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
        let u = DMatrix::from_fn(m, order.len(), |i, k| u_raw[(i, order[k])]);
        let v_t = DMatrix::from_fn(order.len(), n, |k, j| v_raw[(order[k], j)]);
        Ok(Self {
            tau,
            target,
            source,
            target_nodes,
            source_nodes,
            kernel,
            sigma,
            u,
            v_t,
        })
    }

    /// `(A f)(x_i) = Σ_j G(x_i − y_j) w_j f_j`.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let wf: Vec<Complex64> = f
            .iter()
            .zip(&self.source_nodes.weights)
            .map(|(v, w)| v * *w)
            .collect();
        (0..self.kernel.nrows())
            .into_par_iter()
            .map(|i| {
                wf.iter()
                    .enumerate()
                    .map(|(j, v)| v * self.kernel[(i, j)])
                    .sum()
            })
            .collect()
    }

    /// `(A* g)(y_j) = Σ_i G(x_i − y_j) w_i g_i`.
    pub fn adjoint(&self, g: &[Complex64]) -> Vec<Complex64> {
        let wg: Vec<Complex64> = g
            .iter()
            .zip(&self.target_nodes.weights)
            .map(|(v, w)| v * *w)
            .collect();
        (0..self.kernel.ncols())
            .into_par_iter()
            .map(|j| {
                self.kernel
                    .column(j)
                    .iter()
                    .zip(&wg)
                    .map(|(k, v)| v * *k)
                    .sum()
            })
            .collect()
    }

    /// `(G_τ * F)(x)` for `x` outside the source region.
    pub fn field_at(&self, f: &[Complex64], x: [f64; 3]) -> Complex64 {
        let g = FundamentalSolution::new(self.tau);
        self.source_nodes
            .points
            .iter()
            .zip(&self.source_nodes.weights)
            .zip(f)
            .map(|((&y, &w), &v)| v * (w * g.radial(dist(x, y))))
            .sum()
    }

    pub fn inner_target(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        weighted_inner(&self.target_nodes.weights, a, b)
    }

    pub fn inner_source(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        weighted_inner(&self.source_nodes.weights, a, b)
    }
}

fn weighted_inner(w: &[f64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    w.iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| x * y.conj() * *w)
        .sum()
}

/// How the approximation error is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorTarget {
    /// `‖w − φ‖ <= ε ‖φ‖`.
    #[default]
    Relative,
    /// `‖w − φ‖ <= ε ‖φ‖^{1/2} ‖φ‖_{H¹}^{1/2}` with a finite-difference `H¹` norm.
    H1Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RungeOptions {
    pub target: ErrorTarget,
    /// Relative tolerance of the discrete PDE residual check on the input.
    pub residual_tol: f64,
    /// Stand-in constant `C` for the bound budgets.
    pub budget_constant: f64,
    pub max_bisection: usize,
}

impl Default for RungeOptions {
    fn default() -> Self {
        Self {
            target: ErrorTarget::Relative,
            residual_tol: 0.1,
            budget_constant: 1.0,
            max_bisection: 40,
        }
    }
}

/// One probe of the cutoff search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub rank: usize,
    pub alpha: f64,
    pub error: f64,
}

/// Bound budgets recorded as metadata; stored as natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub constant: f64,
    pub ln_n: f64,
    pub ln_n_tilde: f64,
}

impl Budgets {
    pub fn new(c: f64, eps: f64, tau: Frequency) -> Self {
        let br = tau.bracket();
        let em = (c * tau.minus().sqrt()).exp();
        Self {
            constant: c,
            ln_n: c * br.sqrt() * em / eps,
            ln_n_tilde: c * (br / eps).ln() + c * tau.minus().sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungeReport {
    pub tau: f64,
    pub eps: f64,
    pub target: ErrorTarget,
    pub alpha: f64,
    pub rank: usize,
    pub error_target: f64,
    pub error_interior: Option<f64>,
    pub input_norm: f64,
    pub input_h1_norm: f64,
    pub source_norm: f64,
    /// `‖F‖_Y · α <= ‖φ‖_D`.
    pub source_bound_holds: bool,
    pub pde_residual: f64,
    pub trace: Vec<TracePoint>,
    pub curve: Vec<TracePoint>,
    pub budgets: Budgets,
    pub norm_surrogates: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct RungeResult {
    /// Source density at the source nodes.
    pub source: Vec<Complex64>,
    /// `G_τ * F` at the target nodes.
    pub field: Vec<Complex64>,
    pub report: RungeReport,
}

/// Relative discrete residual of `Δφ − τφ` on nodes with a full 7-point stencil.
///
/// Returns `(‖Δ_hφ − τφ‖, ‖Δ_hφ‖ + |τ| ‖φ‖)` over those nodes.
pub fn helmholtz_residual(nodes: &QuadNodes, phi: &[Complex64], tau: f64) -> (f64, f64) {
    let mut res = 0.0;
    let mut lap_n = 0.0;
    let mut phi_n = 0.0;
    for p in 0..nodes.len() {
        let mut lap = Complex64::new(0.0, 0.0);
        let mut full = true;
        for a in 0..3 {
            let mut d = [0i64; 3];
            d[a] = 1;
            let fwd = nodes.neighbour(p, d);
            d[a] = -1;
            let bwd = nodes.neighbour(p, d);
            match (fwd, bwd) {
                (Some(f), Some(b)) => {
                    lap += (phi[f] + phi[b] - 2.0 * phi[p]) / (nodes.h[a] * nodes.h[a]);
                }
                _ => full = false,
            }
        }
        if !full {
            continue;
        }
        let w = nodes.weights[p];
        res += w * (lap - tau * phi[p]).norm_sqr();
        lap_n += w * lap.norm_sqr();
        phi_n += w * phi[p].norm_sqr();
    }
    (res.sqrt(), lap_n.sqrt() + tau.abs() * phi_n.sqrt())
}

/// Discrete `H¹` norm from one-sided differences.
fn h1_norm(nodes: &QuadNodes, phi: &[Complex64]) -> f64 {
    let mut grad = 0.0;
    for p in 0..nodes.len() {
        for a in 0..3 {
            let mut d = [0i64; 3];
            d[a] = 1;
            if let Some(q) = nodes.neighbour(p, d) {
                grad += nodes.weights[p] * ((phi[q] - phi[p]) / nodes.h[a]).norm_sqr();
            }
        }
    }
    (nodes.l2(phi).powi(2) + grad).sqrt()
}

/// Truncated-SVD approximation of `φ` on the target by `G_τ * F`, `F` on the source.
///
/// The cutoff is the largest `α` (smallest retained rank) reaching the
/// requested error on the target, or on `interior` when given.
pub fn runge_approximate(
    op: &SourceOperator,
    phi: &[Complex64],
    eps: f64,
    interior: Option<&Domain>,
    opts: &RungeOptions,
) -> Result<RungeResult, HelmholtzError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(HelmholtzError::Parameter(format!("ε = {eps} must lie in (0, 1)")));
    }
    let nodes = &op.target_nodes;
    if phi.len() != nodes.len() {
        return Err(HelmholtzError::Parameter(format!(
            "expected {} samples, got {}",
            nodes.len(),
            phi.len()
        )));
    }
    let (resid, scale) = helmholtz_residual(nodes, phi, op.tau.tau);
    if resid > opts.residual_tol * scale {
        return Err(HelmholtzError::NotASolution {
            residual: resid,
            allowed: opts.residual_tol * scale,
        });
    }
    let pde_residual = if scale > 0.0 { resid / scale } else { 0.0 };

    let m = nodes.len();
    let rmax = op.sigma.iter().take_while(|&&s| s > 0.0).count();
    let sd: Vec<f64> = nodes.weights.iter().map(|w| w.sqrt()).collect();
    let phi_w: Vec<Complex64> = phi.iter().zip(&sd).map(|(v, s)| v * *s).collect();
    let coeffs: Vec<Complex64> = (0..rmax)
        .into_par_iter()
        .map(|k| op.u.column(k).iter().zip(&phi_w).map(|(u, v)| v * *u).sum())
        .collect();

    let sub: Vec<usize> = match interior {
        Some(d) => nodes.subset(d),
        None => (0..m).collect(),
    };
    let phi_norm = nodes.l2(phi);
    let h1 = h1_norm(nodes, phi);
    let sub_norm = sub.iter().map(|&i| nodes.weights[i] * phi[i].norm_sqr()).sum::<f64>().sqrt();
    let scale_target = match opts.target {
        ErrorTarget::Relative => sub_norm,
        ErrorTarget::H1Scaled => (sub_norm * h1).sqrt(),
    };

    let alpha_for = |rank: usize| -> f64 {
        if rank == 0 {
            op.sigma.first().copied().unwrap_or(0.0)
        } else if rank < rmax {
            (op.sigma[rank - 1] * op.sigma[rank]).sqrt()
        } else {
            0.5 * op.sigma[rmax - 1]
        }
    };
    // error on the chosen subset with the first `rank` modes kept
    let error_on = |rank: usize, idx: &[usize]| -> f64 {
        idx.par_iter()
            .map(|&i| {
                let mut w = Complex64::new(0.0, 0.0);
                for k in 0..rank {
                    w += coeffs[k] * op.u[(i, k)];
                }
                (w - phi_w[i]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    };
    let rel = |e: f64| if scale_target > 0.0 { e / scale_target } else { 0.0 };

    // full curve on the whole target by orthogonality of U
    let total: f64 = phi_w.iter().map(|v| v.norm_sqr()).sum();
    let mut acc = 0.0;
    let mut curve = Vec::with_capacity(rmax + 1);
    let full_rel = |e2: f64| if phi_norm > 0.0 { e2.max(0.0).sqrt() / phi_norm } else { 0.0 };
    curve.push(TracePoint { rank: 0, alpha: alpha_for(0), error: full_rel(total) });
    for k in 0..rmax {
        acc += coeffs[k].norm_sqr();
        curve.push(TracePoint {
            rank: k + 1,
            alpha: alpha_for(k + 1),
            error: full_rel(total - acc),
        });
    }

    let mut trace = Vec::new();
    let probe = |rank: usize, trace: &mut Vec<TracePoint>| -> f64 {
        let e = rel(error_on(rank, &sub));
        trace.push(TracePoint { rank, alpha: alpha_for(rank), error: e });
        e
    };
    let rank = if phi_norm == 0.0 {
        trace.push(TracePoint { rank: 0, alpha: alpha_for(0), error: 0.0 });
        0
    } else {
        let best = probe(rmax, &mut trace);
        if best > eps {
            return Err(HelmholtzError::Unreachable { requested: eps, best });
        }
        let (mut lo, mut hi) = (0usize, rmax);
        let mut iters = 0;
        while hi - lo > 1 && iters < opts.max_bisection {
            let mid = (lo + hi) / 2;
            if probe(mid, &mut trace) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
            iters += 1;
        }
        if lo == 0 && probe(0, &mut trace) <= eps {
            0
        } else {
            hi
        }
    };

    let mut f_w = vec![Complex64::new(0.0, 0.0); op.source_nodes.len()];
    for k in 0..rank {
        let c = coeffs[k] / op.sigma[k];
        for (j, fj) in f_w.iter_mut().enumerate() {
            *fj += c * op.v_t[(k, j)];
        }
    }
    let source: Vec<Complex64> = f_w
        .iter()
        .zip(&op.source_nodes.weights)
        .map(|(v, w)| v / w.sqrt())
        .collect();
    let field = op.apply(&source);
    let source_norm = op.source_nodes.l2(&source);
    let alpha = alpha_for(rank);

    let diff: Vec<Complex64> = field.iter().zip(phi).map(|(a, b)| a - b).collect();
    let err_full = nodes.l2(&diff);
    let error_target = match opts.target {
        ErrorTarget::Relative if phi_norm > 0.0 => err_full / phi_norm,
        ErrorTarget::H1Scaled if phi_norm > 0.0 => err_full / (phi_norm * h1).sqrt(),
        _ => 0.0,
    };
    let error_interior = interior.map(|_| {
        let e = sub.iter().map(|&i| nodes.weights[i] * diff[i].norm_sqr()).sum::<f64>().sqrt();
        rel(e)
    });

    Ok(RungeResult {
        source,
        field,
        report: RungeReport {
            tau: op.tau.tau,
            eps,
            target: opts.target,
            alpha,
            rank,
            error_target,
            error_interior,
            input_norm: phi_norm,
            input_h1_norm: h1,
            source_norm,
            source_bound_holds: source_norm * alpha <= phi_norm * (1.0 + 1e-12),
            pde_residual,
            trace,
            curve,
            budgets: Budgets::new(opts.budget_constant, eps, op.tau),
            norm_surrogates: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_op(tau: f64) -> SourceOperator {
        SourceOperator::build(
            Domain::unit_ball(),
            Domain::ball([3.0, 0.0, 0.0], 0.3),
            Frequency::new(tau),
            Resolution { target_per_axis: 8, source_per_axis: 4 },
        )
        .unwrap()
    }

    #[test]
    fn geometry_error_when_overlapping() {
        let r = SourceOperator::build(
            Domain::unit_ball(),
            Domain::ball([1.1, 0.0, 0.0], 0.3),
            Frequency::new(1.0),
            Resolution::default(),
        );
        assert!(matches!(r, Err(HelmholtzError::Geometry { .. })));
    }

    #[test]
    fn point_mass_column_is_sampled_kernel() {
        let y0 = [2.5, 0.5, 0.0];
        let d = Domain::unit_ball();
        let op = SourceOperator::from_nodes(
            d,
            Domain::ball(y0, 0.1),
            Frequency::new(-4.0),
            d.voxel_nodes(6),
            QuadNodes::point_mass(y0, 1.0),
        )
        .unwrap();
        let col = op.apply(&[Complex64::new(1.0, 0.0)]);
        let g = FundamentalSolution::new(Frequency::new(-4.0));
        for (x, v) in op.target_nodes.points.iter().zip(&col) {
            let e = g.eval([x[0] - y0[0], x[1] - y0[1], x[2] - y0[2]]).unwrap();
            assert_eq!(v.re, e);
        }
    }

    #[test]
    fn singular_values_sorted_and_nonnegative() {
        let op = small_op(1.0);
        assert!(op.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(op.sigma.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn zero_input_gives_zero_source() {
        let op = small_op(-4.0);
        let phi = vec![Complex64::new(0.0, 0.0); op.target_nodes.len()];
        let r = runge_approximate(&op, &phi, 0.1, None, &RungeOptions::default()).unwrap();
        assert!(r.source.iter().all(|v| v.norm() == 0.0));
        assert_eq!(r.report.error_target, 0.0);
        assert!(r.report.source_bound_holds);
    }

    #[test]
    fn non_solution_rejected() {
        let op = small_op(-4.0);
        let phi: Vec<Complex64> = op
            .target_nodes
            .points
            .iter()
            .map(|x| Complex64::new(x[0] * x[0], 0.0))
            .collect();
        let r = runge_approximate(&op, &phi, 0.1, None, &RungeOptions::default());
        assert!(matches!(r, Err(HelmholtzError::NotASolution { .. })));
    }
}
