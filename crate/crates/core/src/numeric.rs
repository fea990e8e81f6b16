//! Small numerical helpers shared by the modules: grids, interpolation,
//! convex hulls, bracketed root finding, quadrature and log-log fits.

/// `n` equispaced points on `[a, b]`, both ends included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
            v[n - 1] = b;
            v
        }
    }
}

/// `n` geometrically spaced points on `[a, b]` (`0 < a < b`).
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut v: Vec<f64> = linspace(la, lb, n).into_iter().map(f64::exp).collect();
    if let Some(first) = v.first_mut() {
        *first = a;
    }
    if let Some(last) = v.last_mut() {
        *last = b;
    }
    v
}

/// Index `k` such that `xs[k] <= x < xs[k+1]`, clamped to `[0, len-2]`.
pub fn segment_index(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let k = xs.partition_point(|&t| t <= x);
    k.saturating_sub(1).min(xs.len() - 2)
}

/// Piecewise-linear interpolation through `(xs, ys)`; outside the knots the
/// end segments are extended linearly.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => ys[0],
        _ => {
            let k = segment_index(xs, x);
            let (x0, x1) = (xs[k], xs[k + 1]);
            let t = (x - x0) / (x1 - x0);
            ys[k] + t * (ys[k + 1] - ys[k])
        }
    }
}

/// Lower convex envelope of the points `(xs[i], ys[i])` (monotone chain).
/// `xs` must be strictly increasing. Returns the indices of the hull vertices.
pub fn lower_hull_indices(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // b lies on or above the chord a-i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Bisection for a nondecreasing `f` on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
/// Stops when the bracket is narrower than `tol` or after `max_iter` halvings.
pub fn bisect_increasing(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eight-point Gauss–Legendre rule on `[-1, 1]`: (nodes, weights).
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Gauss–Legendre quadrature of `f` over `[a, b]` (single panel).
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL8.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Least-squares fit of `log y = log c + q log x`; returns `(q, c)`.
/// Points with nonpositive coordinates are ignored.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let q = sxy / sxx;
    Some((q, (my - q * mx).exp()))
}

/// Volume of the unit ball in ℝᴺ.
pub fn unit_ball_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// `sign(x)·|x|^e` with fast paths for the exponents that show up most.
#[inline]
pub fn signed_pow(x: f64, e: f64) -> f64 {
    let a = x.abs();
    let m = if e == 1.0 {
        a
    } else if e == 2.0 {
        a * a
    } else if e == 3.0 {
        a * a * a
    } else if e == 0.5 {
        a.sqrt()
    } else if e == 1.5 {
        a * a.sqrt()
    } else if e == 4.0 {
        (a * a) * (a * a)
    } else if e == 0.0 {
        1.0
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(e)
    };
    if x < 0.0 {
        -m
    } else {
        m
    }
}

/// `|x|^e` with the same fast paths as [`signed_pow`].
#[inline]
pub fn abs_pow(x: f64, e: f64) -> f64 {
    signed_pow(x, e).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_drops_interior_points() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, 2.0, 1.0, 3.0];
        assert_eq!(lower_hull_indices(&xs, &ys), vec![0, 2, 3]);
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_15() {
        let v = gauss_legendre(|x| x.powi(15) + x.powi(4), 0.0, 2.0);
        let exact = 2f64.powi(16) / 16.0 + 2f64.powi(5) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn loglog_recovers_power() {
        let xs = geomspace(1.0, 100.0, 20);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(2.5)).collect();
        let (q, c) = loglog_fit(&xs, &ys).unwrap();
        assert!((q - 2.5).abs() < 1e-12 && (c - 3.0).abs() < 1e-10);
    }

    #[test]
    fn signed_pow_matches_powf() {
        for &e in &[0.5, 1.0, 2.0, 3.0, 1.7] {
            for &x in &[-2.3, -0.1, 0.0, 0.4, 5.0] {
                let r = (x as f64).abs().powf(e) * (x as f64).signum();
                let r = if x == 0.0 { 0.0 } else { r };
                assert!((signed_pow(x, e) - r).abs() < 1e-12);
            }
        }
    }
}
