//! Real orthonormal spherical harmonics on S² (no Condon–Shortley phase).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpecfunError;

/// Degree/order pair of a real spherical harmonic, `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphericalIndex {
    pub l: usize,
    pub m: i64,
}

impl SphericalIndex {
    pub fn new(l: usize, m: i64) -> Result<Self, SpecfunError> {
        if m.unsigned_abs() as usize > l {
            return Err(SpecfunError::InvalidIndex { l, m });
        }
        Ok(Self { l, m })
    }

    /// Position in the flat `l² + l + m` ordering used by [`sph_harm_all`].
    pub fn flat(self) -> usize {
        ((self.l * self.l + self.l) as i64 + self.m) as usize
    }

    pub fn from_flat(k: usize) -> Self {
        let l = (k as f64).sqrt().floor() as usize;
        let l = if (l + 1) * (l + 1) <= k { l + 1 } else { l };
        Self {
            l,
            m: k as i64 - (l * l + l) as i64,
        }
    }

    /// Multiplicity `2l + 1` of degree `l` in three dimensions.
    pub fn multiplicity(l: usize) -> usize {
        2 * l + 1
    }
}

/// Number of harmonics with degree `<= l_max`.
pub fn count_upto(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Iterator over all indices with `l <= l_max` in flat order.
pub fn indices_upto(l_max: usize) -> impl Iterator<Item = SphericalIndex> {
    (0..=l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| SphericalIndex { l, m }))
}

fn check_unit(dir: [f64; 3]) -> Result<(), SpecfunError> {
    let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(SpecfunError::NotUnit { norm: n });
    }
    Ok(())
}

/// `Y_lm(direction)` for a unit vector.
pub fn sph_harm(idx: SphericalIndex, dir: [f64; 3]) -> Result<f64, SpecfunError> {
    check_unit(dir)?;
    if idx.m.unsigned_abs() as usize > idx.l {
        return Err(SpecfunError::InvalidIndex { l: idx.l, m: idx.m });
    }
    Ok(sph_harm_all(idx.l, dir)[idx.flat()])
}

/// All `Y_lm(direction)` with `l <= l_max`, indexed by `l² + l + m`.
///
/// The direction is assumed to be a unit vector.
pub fn sph_harm_all(l_max: usize, dir: [f64; 3]) -> Vec<f64> {
    let mut out = vec![0.0; count_upto(l_max)];
    let x = dir[2].clamp(-1.0, 1.0);
    let rho = dir[0].hypot(dir[1]);
    let (c1, s1) = if rho > 0.0 {
        (dir[0] / rho, dir[1] / rho)
    } else {
        (1.0, 0.0)
    };
    let s = rho.min(1.0);

    // cos(mφ), sin(mφ) by angle addition.
    let mut cosm = vec![1.0; l_max + 1];
    let mut sinm = vec![0.0; l_max + 1];
    for m in 1..=l_max {
        cosm[m] = cosm[m - 1] * c1 - sinm[m - 1] * s1;
        sinm[m] = sinm[m - 1] * c1 + cosm[m - 1] * s1;
    }

    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        let mut put = |l: usize, p: f64| {
            let base = l * l + l;
            if m == 0 {
                out[base] = p;
            } else {
                out[base + m] = std::f64::consts::SQRT_2 * p * cosm[m];
                out[base - m] = std::f64::consts::SQRT_2 * p * sinm[m];
            }
        };
        put(m, pmm);
        if m == l_max {
            break;
        }
        let mut p_prev = pmm;
        let mut p_cur = ((2 * m + 3) as f64).sqrt() * x * pmm;
        put(m + 1, p_cur);
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (x * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
            put(l, p_cur);
        }
    }
    out
}
