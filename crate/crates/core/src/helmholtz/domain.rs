use serde::{Deserialize, Serialize};

use super::{dist, HelmholtzError};

/// Axis-aligned box or ball in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Ball { center: [f64; 3], radius: f64 },
    Box { lo: [f64; 3], hi: [f64; 3] },
}

impl Domain {
    pub fn ball(center: [f64; 3], radius: f64) -> Self {
        Domain::Ball { center, radius }
    }

    pub fn unit_ball() -> Self {
        Self::ball([0.0; 3], 1.0)
    }

    pub fn validate(&self) -> Result<(), HelmholtzError> {
        let ok = match *self {
            Domain::Ball { radius, center } => radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite()),
            Domain::Box { lo, hi } => (0..3).all(|a| lo[a] < hi[a] && lo[a].is_finite() && hi[a].is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(HelmholtzError::Parameter(format!("degenerate domain {self:?}")))
        }
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        match *self {
            Domain::Ball { center, radius } => dist(x, center) < radius,
            Domain::Box { lo, hi } => (0..3).all(|a| x[a] > lo[a] && x[a] < hi[a]),
        }
    }

    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        match *self {
            Domain::Ball { center, radius } => (center.map(|c| c - radius), center.map(|c| c + radius)),
            Domain::Box { lo, hi } => (lo, hi),
        }
    }

    /// Smallest ball centred at the box/ball centre containing the domain.
    pub fn bounding_ball(&self) -> ([f64; 3], f64) {
        match *self {
            Domain::Ball { center, radius } => (center, radius),
            Domain::Box { lo, hi } => {
                let c = [0, 1, 2].map(|a| 0.5 * (lo[a] + hi[a]));
                (c, dist(c, hi))
            }
        }
    }

    /// Lower bound for the distance between the domain and a ball.
    pub fn gap_to_ball(&self, center: [f64; 3], radius: f64) -> f64 {
        match *self {
            Domain::Ball { center: c, radius: r } => dist(c, center) - r - radius,
            Domain::Box { lo, hi } => {
                let d2: f64 = (0..3)
                    .map(|a| {
                        let e = (lo[a] - center[a]).max(0.0).max(center[a] - hi[a]);
                        e * e
                    })
                    .sum();
                d2.sqrt() - radius
            }
        }
    }

    /// Domain shrunk by `margin` on every side.
    pub fn shrink(&self, margin: f64) -> Result<Self, HelmholtzError> {
        let d = match *self {
            Domain::Ball { center, radius } => Domain::Ball {
                center,
                radius: radius - margin,
            },
            Domain::Box { lo, hi } => Domain::Box {
                lo: lo.map(|v| v + margin),
                hi: hi.map(|v| v - margin),
            },
        };
        d.validate()?;
        Ok(d)
    }

    /// Midpoint-voxel quadrature with `n` cells per axis over the bounding box.
    pub fn voxel_nodes(&self, n: usize) -> QuadNodes {
        let (lo, hi) = self.bounding_box();
        let h = [0, 1, 2].map(|a| (hi[a] - lo[a]) / n as f64);
        let w = h[0] * h[1] * h[2];
        let mut points = Vec::new();
        let mut ijk = Vec::new();
        let mut lookup = vec![-1i64; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = [
                        lo[0] + (i as f64 + 0.5) * h[0],
                        lo[1] + (j as f64 + 0.5) * h[1],
                        lo[2] + (k as f64 + 0.5) * h[2],
                    ];
                    if self.contains(x) {
                        lookup[(i * n + j) * n + k] = points.len() as i64;
                        points.push(x);
                        ijk.push([i, j, k]);
                    }
                }
            }
        }
        let weights = vec![w; points.len()];
        QuadNodes {
            points,
            weights,
            h,
            dims: [n; 3],
            ijk,
            lookup,
        }
    }
}

/// Quadrature nodes on a voxel lattice, with neighbour lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadNodes {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub h: [f64; 3],
    pub dims: [usize; 3],
    pub ijk: Vec<[usize; 3]>,
    lookup: Vec<i64>,
}

impl QuadNodes {
    /// A single weighted point (not on a lattice).
    pub fn point_mass(x: [f64; 3], weight: f64) -> Self {
        Self {
            points: vec![x],
            weights: vec![weight],
            h: [0.0; 3],
            dims: [1; 3],
            ijk: vec![[0; 3]],
            lookup: vec![0],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the node at lattice offset `d` from node `p`, if present.
    pub fn neighbour(&self, p: usize, d: [i64; 3]) -> Option<usize> {
        let c = self.ijk[p];
        let mut q = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as i64 + d[a];
            if v < 0 || v >= self.dims[a] as i64 {
                return None;
            }
            q[a] = v as usize;
        }
        let id = self.lookup[(q[0] * self.dims[1] + q[1]) * self.dims[2] + q[2]];
        (id >= 0).then_some(id as usize)
    }

    /// Weighted `L²` norm of complex samples.
    pub fn l2(&self, v: &[num_complex::Complex64]) -> f64 {
        self.weights
            .iter()
            .zip(v)
            .map(|(w, z)| w * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Indices of nodes lying in `sub`.
    pub fn subset(&self, sub: &Domain) -> Vec<usize> {
        (0..self.len()).filter(|&i| sub.contains(self.points[i])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_converges() {
        let nodes = Domain::unit_ball().voxel_nodes(40);
        let vol: f64 = nodes.weights.iter().sum();
        assert!((vol - 4.0 * PI / 3.0).abs() < 0.02);
    }

    #[test]
    fn neighbours_and_gaps() {
        let nodes = Domain::Box { lo: [0.0; 3], hi: [1.0; 3] }.voxel_nodes(4);
        assert_eq!(nodes.len(), 64);
        let p = nodes.neighbour(0, [1, 0, 0]).unwrap();
        assert!((nodes.points[p][0] - 0.375).abs() < 1e-15);
        assert!(nodes.neighbour(0, [-1, 0, 0]).is_none());
        let gap = Domain::unit_ball().gap_to_ball([3.0, 0.0, 0.0], 0.3);
        assert!((gap - 1.7).abs() < 1e-15);
    }
}
