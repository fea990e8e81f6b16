//! Discrete Legendre–Fenchel transforms.
//!
//! The one-dimensional transform takes the supremum over the knots of a
//! piecewise-linear function, which is the exact conjugate of that
//! interpolant. N-dimensional conjugates are computed axis by axis
//! (`sup_x sup_y = sup_y sup_x`), each pass being a family of 1-D transforms.

use super::{BoxGrid, Table1D, TableND, YoungFunction1D, YoungFunctionND};
use crate::error::{invalid, Error, Result};
use crate::numeric::{linspace, lower_hull_indices};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConjugateMethod {
    /// Supremum over every knot for every dual point, O(n·m).
    Direct,
    /// Walks the argmax monotonically along the convex hull, O(n + m).
    #[default]
    MonotoneArgmax,
}

#[derive(Clone, Copy, Debug)]
pub struct ConjugateOptions {
    pub method: ConjugateMethod,
    /// Number of primal samples used for closed-form functions.
    pub primal_points: usize,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        Self { method: ConjugateMethod::MonotoneArgmax, primal_points: 20_001 }
    }
}

/// `sup_j (xs_j · t − ys_j)` for every `t` in `ts` (nondecreasing, ≥ 0).
///
/// Fails with `DomainTooSmall` when some `t` exceeds the slope of the last
/// hull segment: the supremum of the underlying function is then attained
/// beyond the sampled range.
pub fn legendre_transform_points(
    xs: &[f64],
    ys: &[f64],
    ts: &[f64],
    method: ConjugateMethod,
) -> Result<Vec<f64>> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(invalid("primal samples must be nonempty and of equal length"));
    }
    if ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("dual grid must be nondecreasing"));
    }
    let hull = lower_hull_indices(xs, ys);
    let last_slope = if hull.len() >= 2 {
        let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
        (ys[b] - ys[a]) / (xs[b] - xs[a])
    } else {
        f64::NEG_INFINITY
    };
    if let Some(&t) = ts.last() {
        if t > last_slope + 1e-9 * last_slope.abs().max(1e-300) {
            return Err(Error::DomainTooSmall { dual: t, domain_end: xs[xs.len() - 1] });
        }
    }
    let out = match method {
        ConjugateMethod::Direct => ts
            .iter()
            .map(|&t| xs.iter().zip(ys).map(|(x, y)| x * t - y).fold(f64::NEG_INFINITY, f64::max))
            .collect(),
        ConjugateMethod::MonotoneArgmax => {
            let mut j = 0usize;
            ts.iter()
                .map(|&t| {
                    while j + 1 < hull.len() {
                        let (a, b) = (hull[j], hull[j + 1]);
                        if xs[b] * t - ys[b] >= xs[a] * t - ys[a] {
                            j += 1;
                        } else {
                            break;
                        }
                    }
                    let k = hull[j];
                    xs[k] * t - ys[k]
                })
                .collect()
        }
    };
    Ok(out)
}

/// Smallest power-of-two extent `S` such that every maximizer for dual
/// values up to `t_max` lies in `[0, S]` (checked through the secant slope on
/// `[S/2, S]`, a lower bound for `Φ'(S)` by convexity).
pub fn auto_primal_extent(phi: &YoungFunction1D, t_max: f64) -> Result<f64> {
    let secant = |s: f64| (phi.eval(s) - phi.eval(0.5 * s)) / (0.5 * s);
    let mut s = 1.0f64;
    if t_max <= 0.0 {
        return Ok(s);
    }
    while secant(s) < t_max {
        s *= 2.0;
        if s > 1e200 {
            return Err(Error::DomainTooSmall { dual: t_max, domain_end: s });
        }
    }
    while s > 1e-200 && secant(0.5 * s) >= t_max {
        s *= 0.5;
    }
    Ok(s)
}

fn normalized_dual_grid(dual_grid: &[f64]) -> Result<Vec<f64>> {
    if dual_grid.is_empty() {
        return Err(invalid("dual grid is empty"));
    }
    if dual_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("dual grid points must be finite and nonnegative"));
    }
    if dual_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("dual grid must be strictly increasing"));
    }
    let mut g = Vec::with_capacity(dual_grid.len() + 1);
    if dual_grid[0] > 0.0 {
        g.push(0.0);
    }
    g.extend_from_slice(dual_grid);
    Ok(g)
}

/// Tabulated conjugate of a one-dimensional Young function on `dual_grid`.
pub fn conjugate_1d(phi: &YoungFunction1D, dual_grid: &[f64]) -> Result<YoungFunction1D> {
    conjugate_1d_with(phi, dual_grid, &ConjugateOptions::default())
}

pub fn conjugate_1d_with(
    phi: &YoungFunction1D,
    dual_grid: &[f64],
    opts: &ConjugateOptions,
) -> Result<YoungFunction1D> {
    let ts = normalized_dual_grid(dual_grid)?;
    let vals = match phi {
        YoungFunction1D::Tabulated(t) => {
            let hull = Table1D::convexified(t.knots().to_vec(), t.values().to_vec())?;
            legendre_transform_points(hull.knots(), hull.values(), &ts, opts.method)?
        }
        _ => {
            let extent = auto_primal_extent(phi, *ts.last().unwrap())?;
            let xs = linspace(0.0, extent, opts.primal_points.max(3));
            let ys: Vec<f64> = xs.iter().map(|&x| phi.eval(x)).collect();
            legendre_transform_points(&xs, &ys, &ts, opts.method)?
        }
    };
    let vals: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
    Ok(YoungFunction1D::Tabulated(Table1D::with_tolerance(ts, vals, 1e-8)?))
}

/// Tabulated conjugate of an N-dimensional Young function on the orthant grid `dual`.
pub fn conjugate_nd(phi: &YoungFunctionND, dual: &BoxGrid) -> Result<YoungFunctionND> {
    conjugate_nd_with(phi, None, dual, &ConjugateOptions::default())
}

/// As [`conjugate_nd`], with an explicit primal sampling box for functions
/// that are neither separable nor tabulated.
pub fn conjugate_nd_with(
    phi: &YoungFunctionND,
    primal: Option<&BoxGrid>,
    dual: &BoxGrid,
    opts: &ConjugateOptions,
) -> Result<YoungFunctionND> {
    let d = phi.dim();
    if dual.dim() != d {
        return Err(invalid(format!("dual grid has dimension {}, function has {d}", dual.dim())));
    }
    if !phi.is_superlinear() {
        return Err(invalid("conjugation needs a superlinear Young function"));
    }

    if let (Some(components), None) = (phi.separable_components(), primal) {
        // Φ_•(η) = Σ (Υ_i)_•(η_i)
        let axis_conj: Vec<Vec<f64>> = components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let ts = dual.axis_nodes(i);
                let g = conjugate_1d_with(c, &ts, opts)?;
                Ok(ts.iter().map(|&t| g.eval(t)).collect())
            })
            .collect::<Result<_>>()?;
        let mut idx = vec![0; d];
        let values: Vec<f64> = (0..dual.len())
            .map(|flat| {
                dual.multi_index(flat, &mut idx);
                idx.iter().enumerate().map(|(i, k)| axis_conj[i][*k]).sum()
            })
            .collect();
        return Ok(YoungFunctionND::Tabulated(TableND::with_tolerance(dual.clone(), values, 1e-7)?));
    }

    let primal_grid = match (primal, phi) {
        (Some(g), _) => g.clone(),
        (None, YoungFunctionND::Tabulated(t)) => t.grid().clone(),
        (None, YoungFunctionND::ExpSum { p }) => {
            // ∂_iΦ(ξ) ≥ d/dx (e^{|x|^{p_i}} − 1) at x = ξ_i, so each axis can be bounded separately
            let extents = p
                .iter()
                .enumerate()
                .map(|(i, q)| ExpAxis(*q).extent(dual.extents[i]))
                .collect::<Result<Vec<f64>>>()?;
            let n = (opts.primal_points as f64).powf(1.0 / d as f64).ceil().max(65.0) as usize;
            BoxGrid::new(extents, vec![n; d])?
        }
        (None, _) => return Err(invalid("a primal box is required for this function")),
    };
    if primal_grid.dim() != d {
        return Err(invalid("primal grid dimension mismatch"));
    }

    let values = primal_grid
        .sample(phi)
        .into_iter()
        .map(|v| v.min(1e250))
        .collect::<Vec<_>>();
    let out = factorized_transform(&primal_grid, values, dual, opts.method)?;
    let out: Vec<f64> = out.into_iter().map(|v| v.max(0.0)).collect();
    Ok(YoungFunctionND::Tabulated(TableND::with_tolerance(dual.clone(), out, 1e-7)?))
}

struct ExpAxis(f64);

impl ExpAxis {
    fn slope(&self, x: f64) -> f64 {
        let q = self.0;
        (x.powf(q)).exp() * q * x.powf(q - 1.0)
    }

    fn extent(&self, t_max: f64) -> Result<f64> {
        let mut s = 1.0f64;
        while self.slope(s) < t_max {
            s *= 1.25;
            if s > 1e6 {
                return Err(Error::DomainTooSmall { dual: t_max, domain_end: s });
            }
        }
        Ok(s * 1.05)
    }
}

/// Axis-by-axis discrete conjugate: `H ← −L_axis(H)` for the last axis down
/// to the first, with the sign flipped back at the end.
fn factorized_transform(
    primal: &BoxGrid,
    mut values: Vec<f64>,
    dual: &BoxGrid,
    method: ConjugateMethod,
) -> Result<Vec<f64>> {
    let d = primal.dim();
    let mut shape = primal.shape.clone();
    let mut line = Vec::new();
    for axis in (0..d).rev() {
        let xs = primal.axis_nodes(axis);
        let ts = dual.axis_nodes(axis);
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let (n, m) = (shape[axis], ts.len());
        let mut next = vec![0.0; outer * m * inner];
        for o in 0..outer {
            for i in 0..inner {
                line.clear();
                line.extend((0..n).map(|k| values[o * n * inner + k * inner + i]));
                let conj = legendre_transform_points(&xs, &line, &ts, method)?;
                for (k, c) in conj.into_iter().enumerate() {
                    next[o * m * inner + k * inner + i] = -c;
                }
            }
        }
        shape[axis] = m;
        values = next;
    }
    Ok(values.into_iter().map(|v| -v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_self_conjugate() {
        let phi = YoungFunction1D::power_law(0.5, 2.0).unwrap();
        let ts = linspace(0.0, 5.0, 501);
        let c = conjugate_1d(&phi, &ts).unwrap();
        for &t in &ts {
            assert!((c.eval(t) - 0.5 * t * t).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn cubic_power_duality() {
        // (s³/3)_• = t^{3/2}/(3/2)
        let phi = YoungFunction1D::power_law(1.0 / 3.0, 3.0).unwrap();
        let ts = linspace(0.0, 4.0, 401);
        let c = conjugate_1d(&phi, &ts).unwrap();
        for &t in &ts {
            let exact = t.powf(1.5) / 1.5;
            assert!((c.eval(t) - exact).abs() < 1e-6 * exact.max(1.0), "t={t}");
        }
    }

    #[test]
    fn dual_beyond_last_slope_is_rejected() {
        let phi = YoungFunction1D::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert!(conjugate_1d(&phi, &[0.0, 1.0, 2.0]).is_ok());
        let err = conjugate_1d(&phi, &[0.0, 1.0, 2.5]).unwrap_err();
        assert!(matches!(err, Error::DomainTooSmall { .. }));
    }

    #[test]
    fn direct_and_monotone_agree() {
        let xs = linspace(0.0, 3.0, 301);
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(2.7) + 0.3 * x * x).collect();
        let ts = linspace(0.0, 10.0, 97);
        let a = legendre_transform_points(&xs, &ys, &ts, ConjugateMethod::Direct).unwrap();
        let b = legendre_transform_points(&xs, &ys, &ts, ConjugateMethod::MonotoneArgmax).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn separable_quadratic_in_2d() {
        let phi = YoungFunctionND::power_sum(vec![0.5, 0.5], vec![2.0, 2.0]).unwrap();
        let dual = BoxGrid::uniform(2, 3.0, 31).unwrap();
        let c = conjugate_nd(&phi, &dual).unwrap();
        for &(a, b) in &[(0.0, 0.0), (1.0, 2.0), (-2.5, 0.3), (3.0, -3.0)] {
            assert!((c.eval(&[a, b]) - 0.5 * (a * a + b * b)).abs() < 1e-3);
        }
    }

    #[test]
    fn factorized_transform_matches_separable_route() {
        let phi = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 4.0]).unwrap();
        let dual = BoxGrid::uniform(2, 2.0, 21).unwrap();
        let primal = BoxGrid::uniform(2, 2.0, 201).unwrap();
        let tab = YoungFunctionND::tabulated(primal.clone(), primal.sample(&phi)).unwrap();
        let a = conjugate_nd(&phi, &dual).unwrap();
        let b = conjugate_nd(&tab, &dual).unwrap();
        let mut x = [0.0; 2];
        for k in 0..dual.len() {
            dual.node(k, &mut x);
            assert!((a.eval(&x) - b.eval(&x)).abs() < 2e-3, "{x:?}");
        }
    }
}
