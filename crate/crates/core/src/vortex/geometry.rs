type V3 = [f64; 3];

#[inline]
fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn distance(a: V3, b: V3) -> f64 {
    dot(sub(a, b), sub(a, b)).sqrt()
}

/// Distance between segments `[p1, q1]` and `[p2, q2]`.
///
/// Closest-point parameters are found on the 2×2 normal equations and
/// clamped, handling degenerate (point) segments.
pub fn segment_distance(p1: V3, q1: V3, p2: V3, q2: V3) -> f64 {
    let d1 = sub(q1, p1);
    let d2 = sub(q2, p2);
    let r = sub(p1, p2);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    let eps = 1e-300;
    let (s, t);
    if a <= eps && e <= eps {
        return distance(p1, p2);
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = [p1[0] + d1[0] * s, p1[1] + d1[1] * s, p1[2] + d1[2] * s];
    let c2 = [p2[0] + d2[0] * t, p2[1] + d2[1] * t, p2[2] + d2[2] * t];
    distance(c1, c2)
}

/// Segments of a polyline, closing it when `closed`.
pub fn segments(points: &[V3], closed: bool) -> Vec<(V3, V3)> {
    let mut out: Vec<(V3, V3)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && points.len() > 2 {
        out.push((points[points.len() - 1], points[0]));
    }
    if points.len() == 1 {
        out.push((points[0], points[0]));
    }
    out
}

/// Minimum distance between two polylines over all segment pairs.
///
/// Symmetric in its arguments: pairs are visited in a canonical order.
pub fn polyline_distance(a: &[V3], a_closed: bool, b: &[V3], b_closed: bool) -> f64 {
    let sa = segments(a, a_closed);
    let sb = segments(b, b_closed);
    let mut best = f64::INFINITY;
    for &(p1, q1) in &sa {
        for &(p2, q2) in &sb {
            // evaluate with the lexicographically smaller pair first for exact symmetry
            let d = if (p1, q1) <= (p2, q2) {
                segment_distance(p1, q1, p2, q2)
            } else {
                segment_distance(p2, q2, p1, q1)
            };
            best = best.min(d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_lines() {
        let d = segment_distance([0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [0.3, 0.0, -2.0], [0.3, 0.0, 2.0]);
        assert_eq!(d, 0.3);
    }

    #[test]
    fn skew_and_endpoint_cases() {
        let d = segment_distance([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 2.0], [0.0, 1.0, 2.0]);
        assert!((d - 2.0).abs() < 1e-15);
        // closest points at endpoints
        let d = segment_distance([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 1.0, 0.0], [3.0, 1.0, 0.0]);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        // point segment
        let d = segment_distance([0.5, 1.0, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polyline_distance_is_symmetric() {
        let a = vec![[0.0, 0.0, 0.0], [1.0, 0.2, 0.1], [2.0, -0.3, 0.4]];
        let b = vec![[0.1, 1.0, 0.3], [1.3, 0.9, -0.2], [0.5, 0.5, 0.5], [0.0, 0.7, 0.0]];
        assert_eq!(polyline_distance(&a, false, &b, true), polyline_distance(&b, true, &a, false));
    }
}
