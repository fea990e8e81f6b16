//! Symmetric increasing rearrangement of tabulated N-dimensional functions and
//! the Klimov symmetrization `Φ_♦ = ((Φ_•)_★)_•`.
//!
//! Sublevel volumes are counted on orthant grids. A single box cannot
//! resolve both small and large levels of an anisotropic function, so the
//! pipeline runs on a family of nested boxes whose extents are matched to a
//! common level on every axis, and keeps for each level the finest box that
//! still contains the sublevel set.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{geomspace, interp_linear, loglog_fit, unit_ball_volume};
use crate::young::{
    conjugate_1d, conjugate_nd_with, BoxGrid, ConjugateOptions, Table1D, TableND, YoungFunction1D,
    YoungFunctionND,
};

/// Orthant weight (in cells) below which a sublevel set counts as unresolved.
const MIN_RESOLVED_CELLS: f64 = 1024.0;

/// Nondecreasing radial profile `r ↦ F_★(r)` tabulated up to the largest
/// radius whose sublevel set fits in the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    r: Vec<f64>,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != values.len() || r[0] != 0.0 {
            return Err(invalid("radial table needs at least two knots starting at r = 0"));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("radial table must be increasing"));
        }
        Ok(Self { r, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid_radius(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let a = r.abs();
        let valid = self.valid_radius();
        if a > valid * (1.0 + 1e-12) {
            return Err(Error::BoxTooSmall { requested: a, valid });
        }
        Ok(interp_linear(&self.r, &self.values, a))
    }

    /// Lower convex envelope as a one-dimensional Young function.
    pub fn convex_minorant(&self) -> Result<YoungFunction1D> {
        Ok(YoungFunction1D::Tabulated(Table1D::convexified(self.r.clone(), self.values.clone())?))
    }
}

/// Sublevel radii of one tabulated box.
struct LevelPoints {
    r: Vec<f64>,
    t: Vec<f64>,
    valid_level: f64,
    /// Index of the first point whose sublevel set is resolved.
    resolved_from: usize,
}

fn sublevel_radii(table: &TableND) -> LevelPoints {
    let grid = table.grid();
    let values = table.values();
    let d = grid.dim();
    let omega = unit_ball_volume(d);
    let cell: f64 = (0..d).map(|i| grid.step(i)).product::<f64>() * 2f64.powi(d as i32);
    let mut idx = vec![0; d];
    let weights: Vec<f64> = (0..values.len())
        .map(|k| {
            grid.multi_index(k, &mut idx);
            0.5f64.powi(idx.iter().filter(|i| **i == 0).count() as i32)
        })
        .collect();
    let valid_level = (0..values.len())
        .filter(|k| grid.on_outer_face(*k))
        .map(|k| values[k])
        .fold(f64::INFINITY, f64::min);

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));

    let mut r = vec![0.0];
    let mut t = vec![0.0];
    let mut resolved_from = None;
    let mut below = 0.0;
    let mut i = 0;
    while i < order.len() {
        let level = values[order[i]];
        if level > valid_level {
            break;
        }
        let mut group = 0.0;
        let mut j = i;
        while j < order.len() && values[order[j]] == level {
            group += weights[order[j]];
            j += 1;
        }
        if level > 0.0 {
            // ties sit on the level set and count half
            let volume = (below + 0.5 * group) * cell;
            r.push((volume / omega).powf(1.0 / d as f64));
            t.push(level);
            if resolved_from.is_none() && below + group >= MIN_RESOLVED_CELLS {
                resolved_from = Some(r.len() - 1);
            }
        }
        below += group;
        i = j;
    }
    LevelPoints { resolved_from: resolved_from.unwrap_or(r.len()), r, t, valid_level }
}

/// `F_★` of a tabulated function: the radial function whose sublevel sets
/// are balls of the same volume, known up to the first level that reaches the
/// box boundary.
pub fn symmetric_increasing_rearrangement_nd(f: &YoungFunctionND) -> Result<RadialTable> {
    let table = match f {
        YoungFunctionND::Tabulated(t) => t,
        _ => return Err(invalid("symmetric increasing rearrangement needs a tabulated function")),
    };
    let pts = sublevel_radii(table);
    RadialTable::new(pts.r, pts.t)
}

/// Finest scale wins at every level; scales are ordered coarse to fine.
fn merge_scales(scales: &[LevelPoints]) -> Result<RadialTable> {
    let last = scales.len() - 1;
    let mut r = vec![0.0];
    let mut t = vec![0.0];
    let mut push = |rr: f64, tt: f64| {
        if rr > *r.last().unwrap() && tt > *t.last().unwrap() {
            r.push(rr);
            t.push(tt);
        }
    };
    let fine = &scales[last];
    for k in fine.resolved_from..fine.r.len() {
        push(fine.r[k], fine.t[k]);
    }
    for k in (0..last).rev() {
        let floor = scales[k + 1].valid_level;
        for j in 0..scales[k].r.len() {
            if scales[k].t[j] > floor {
                push(scales[k].r[j], scales[k].t[j]);
            }
        }
    }
    RadialTable::new(r, t)
}

/// A function whose restriction to a box `Π[0, E_i]` can be tabulated, with
/// the extents chosen so that every axis reaches the same level.
trait LevelFamily {
    fn dim(&self) -> usize;
    fn axis_value(&self, axis: usize, x: f64) -> Result<f64>;
    fn table(&self, extents: Vec<f64>, nodes: usize) -> Result<TableND>;

    fn extents_for_level(&self, level: f64) -> Result<Vec<f64>> {
        (0..self.dim())
            .map(|i| {
                let mut hi = 1.0;
                while self.axis_value(i, hi)? < level {
                    hi *= 2.0;
                    if hi > 1e15 {
                        return Err(invalid("axis restriction does not reach the requested level"));
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.axis_value(i, mid)? < level {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi {
                        break;
                    }
                }
                Ok(hi)
            })
            .collect()
    }

    fn level_points(&self, level: f64, nodes: usize) -> Result<LevelPoints> {
        let table = self.table(self.extents_for_level(level)?, nodes)?;
        Ok(sublevel_radii(&table))
    }
}

struct Primal<'a>(&'a YoungFunctionND);

impl LevelFamily for Primal<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn axis_value(&self, axis: usize, x: f64) -> Result<f64> {
        let mut xi = vec![0.0; self.dim()];
        xi[axis] = x;
        Ok(self.0.eval(&xi))
    }

    fn table(&self, extents: Vec<f64>, nodes: usize) -> Result<TableND> {
        let grid = BoxGrid::new(extents, vec![nodes; self.dim()])?;
        let values = grid.sample(self.0);
        TableND::with_tolerance(grid, values, 1e-7)
    }
}

struct Dual<'a> {
    phi: &'a YoungFunctionND,
    primal: Option<&'a BoxGrid>,
    opts: ConjugateOptions,
}

impl LevelFamily for Dual<'_> {
    fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// Conjugate of the axis restriction, which is the axis restriction of
    /// the conjugate for coordinatewise even functions.
    fn axis_value(&self, axis: usize, y: f64) -> Result<f64> {
        let mut xi = vec![0.0; self.dim()];
        let mut a = |x: f64| {
            xi[axis] = x;
            self.phi.eval(&xi)
        };
        let mut hi = 1.0f64;
        while a(hi) < y * hi {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::DomainTooSmall { dual: y, domain_end: hi });
            }
        }
        // golden section on the concave function x ↦ yx − a(x)
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut up) = (0.0, hi);
        let mut x1 = up - g * (up - lo);
        let mut x2 = lo + g * (up - lo);
        let (mut f1, mut f2) = (y * x1 - a(x1), y * x2 - a(x2));
        for _ in 0..200 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (up - lo);
                f2 = y * x2 - a(x2);
            } else {
                up = x2;
                x2 = x1;
                f2 = f1;
                x1 = up - g * (up - lo);
                f1 = y * x1 - a(x1);
            }
            if up - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(f1.max(f2).max(0.0))
    }

    fn table(&self, extents: Vec<f64>, nodes: usize) -> Result<TableND> {
        let grid = BoxGrid::new(extents, vec![nodes; self.dim()])?;
        match conjugate_nd_with(self.phi, self.primal, &grid, &self.opts)? {
            YoungFunctionND::Tabulated(t) => Ok(t),
            _ => unreachable!("conjugation returns a table"),
        }
    }
}

/// Builds nested scales `level_k = top · ratio^{-k}` until `enough` holds or
/// `max_scales` is reached.
fn multiscale(
    family: &dyn LevelFamily,
    top: f64,
    ratio: f64,
    nodes: usize,
    max_scales: usize,
    enough: impl Fn(&RadialTable, &LevelPoints) -> bool,
) -> Result<(RadialTable, usize)> {
    let mut scales = vec![family.level_points(top, nodes)?];
    loop {
        let merged = merge_scales(&scales)?;
        if enough(&merged, scales.last().unwrap()) || scales.len() >= max_scales {
            return Ok((merged, scales.len()));
        }
        let level = top / ratio.powi(scales.len() as i32);
        scales.push(family.level_points(level, nodes)?);
    }
}

/// `Φ_★` of a closed-form or tabulated Young function on the radius range
/// `[r_min, r_max]`, using nested level-matched boxes.
pub fn rearrange_young_multiscale(
    phi: &YoungFunctionND,
    r_min: f64,
    r_max: f64,
    settings: &KlimovSettings,
) -> Result<RadialTable> {
    let family = Primal(phi);
    let d = phi.dim() as f64;
    // the sublevel set contains the cross-polytope through the axis points
    let inner_radius = |level: f64| -> Result<f64> {
        let e = family.extents_for_level(level)?;
        let vol = 2f64.powf(d) * e.iter().product::<f64>() / (1..=phi.dim()).product::<usize>() as f64;
        Ok((vol / unit_ball_volume(phi.dim())).powf(1.0 / d))
    };
    let mut top = 1.0;
    let mut guard = 0;
    while inner_radius(top)? < r_max {
        top *= 4.0;
        guard += 1;
        if guard > 200 {
            return Err(invalid("could not find a box containing the requested radius"));
        }
    }
    while inner_radius(top / 4.0)? >= r_max && guard < 400 {
        top /= 4.0;
        guard += 1;
    }
    let (table, _) = multiscale(&family, top, settings.level_ratio, settings.nodes, settings.max_scales, |_, fine| {
        fine.resolved_from < fine.r.len() && fine.r[fine.resolved_from] <= r_min
    })?;
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KlimovSettings {
    /// Nodes per axis on every scale.
    pub nodes: usize,
    /// Level ratio between consecutive nested boxes.
    pub level_ratio: f64,
    /// Smallest argument of Φ_♦ that should be resolved.
    pub s_min: f64,
    /// Largest argument of Φ_♦ required.
    pub s_max: f64,
    pub max_scales: usize,
    /// Number of geometric knots of the Φ_♦ table.
    pub grid_points: usize,
    /// Explicit knots for Φ_♦ (overrides the automatic grid).
    pub grid: Option<Vec<f64>>,
    /// Primal sampling box for functions that are neither separable nor tabulated.
    pub primal_box: Option<BoxGrid>,
    /// Also estimate the constants `K₁ ≤ K₂` against `Φ_★`.
    pub equivalence: bool,
}

impl Default for KlimovSettings {
    fn default() -> Self {
        Self {
            nodes: 512,
            level_ratio: 16.0,
            s_min: 1e-2,
            s_max: 10.0,
            max_scales: 16,
            grid_points: 401,
            grid: None,
            primal_box: None,
            equivalence: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KlimovResult {
    pub phi_diamond: YoungFunction1D,
    pub fitted_exponent: f64,
    pub fitted_coefficient: f64,
    /// The decade of arguments used for the fit.
    pub fit_range: (f64, f64),
    /// `(K₁, K₂)` when requested.
    pub equivalence: Option<(f64, f64)>,
    /// `(Φ_•)_★` as assembled from the scales.
    pub conjugate_rearranged: RadialTable,
    pub scales: usize,
}

/// Largest argument at which Φ_♦ is reliable: the minorant slope a little
/// inside the valid radius, away from lattice noise at the last levels.
fn top_slope(table: &RadialTable) -> Result<f64> {
    let minorant = table.convex_minorant()?;
    Ok(minorant.as_table().unwrap().slope_at(0.9 * table.valid_radius()))
}

/// Klimov symmetrization `Φ_♦(|ξ|) = Φ_{•★•}(ξ)`.
pub fn klimov(phi: &YoungFunctionND, settings: &KlimovSettings) -> Result<KlimovResult> {
    if !phi.is_superlinear() {
        return Err(invalid("Klimov symmetrization needs a superlinear Young function"));
    }
    if !(settings.s_min > 0.0 && settings.s_max > settings.s_min) {
        return Err(invalid("need 0 < s_min < s_max"));
    }
    if settings.nodes < 16 || !(settings.level_ratio > 1.0) || settings.max_scales == 0 {
        return Err(invalid("need at least 16 nodes, a level ratio above 1 and one scale"));
    }
    let family = Dual { phi, primal: settings.primal_box.as_ref(), opts: ConjugateOptions::default() };

    // top level: smallest (up to a factor) whose last slope reaches s_max
    let probe_nodes = 129;
    let slope_at = |level: f64| -> Result<f64> {
        let pts = family.level_points(level, probe_nodes)?;
        top_slope(&merge_scales(&[pts])?)
    };
    let target = settings.s_max;
    let mut lo = 1.0;
    let mut hi = 1.0;
    if slope_at(1.0)? < target {
        while slope_at(hi)? < target {
            lo = hi;
            hi *= 16.0;
            if hi > 1e200 {
                return Err(invalid("could not reach the requested s_max"));
            }
        }
    } else {
        while slope_at(lo)? >= target {
            hi = lo;
            lo /= 16.0;
            if lo < 1e-200 {
                return Err(invalid("could not resolve the requested s_max"));
            }
        }
    }
    for _ in 0..8 {
        let mid = (lo * hi).sqrt();
        if slope_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // margin for the finer production grid
    let top = hi * 2.0;

    let (merged, scales) = multiscale(&family, top, settings.level_ratio, settings.nodes, settings.max_scales, |m, fine| {
        floor_slope(m, fine).map_or(false, |s| s <= settings.s_min)
    })?;
    let minorant = merged.convex_minorant()?;
    let hull = minorant.as_table().unwrap();
    let s_hi = top_slope(&merged)?;
    // the chord from the origin to the first resolved level is not trusted
    let floor_r = merged.knots().get(1).copied().unwrap_or(0.0);
    let s_lo = hull.slope_at(2.0 * floor_r).max(1e-300);
    if !(s_hi > s_lo) {
        return Err(invalid("Klimov pipeline produced an empty argument range"));
    }

    let grid = match &settings.grid {
        Some(g) => {
            let mut g = g.clone();
            if g.first() != Some(&0.0) {
                g.insert(0, 0.0);
            }
            g
        }
        None => {
            let mut g = vec![0.0];
            g.extend(geomspace(s_lo, s_hi, settings.grid_points.max(3)));
            g
        }
    };
    let phi_diamond = conjugate_1d(&minorant, &grid)?;

    let positive: Vec<f64> = grid.iter().copied().filter(|s| *s > 0.0).collect();
    let (g_lo, g_hi) = (positive[0], *positive.last().unwrap());
    let center = (g_lo * g_hi).sqrt();
    let (f_lo, f_hi) = if g_hi / g_lo > 10.0 {
        (center / 10f64.sqrt(), center * 10f64.sqrt())
    } else {
        (g_lo, g_hi)
    };
    let fit_s: Vec<f64> = positive.iter().copied().filter(|s| *s >= f_lo && *s <= f_hi).collect();
    let fit_v: Vec<f64> = fit_s.iter().map(|&s| phi_diamond.eval(s)).collect();
    let (p_hat, lambda_hat) = loglog_fit(&fit_s, &fit_v).ok_or_else(|| invalid("too few points for the fit"))?;

    let equivalence = if settings.equivalence {
        let star = rearrange_young_multiscale(phi, f_lo / 4.0, 4.0 * f_hi, settings)?;
        Some(equivalence_constants(&star, &phi_diamond, &fit_s)?)
    } else {
        None
    };

    Ok(KlimovResult {
        phi_diamond,
        fitted_exponent: p_hat,
        fitted_coefficient: lambda_hat,
        fit_range: (f_lo, f_hi),
        equivalence,
        conjugate_rearranged: merged,
        scales,
    })
}

/// Slope of the merged minorant at the first resolved point of the finest scale.
fn floor_slope(merged: &RadialTable, fine: &LevelPoints) -> Option<f64> {
    if fine.resolved_from >= fine.r.len() {
        return None;
    }
    let minorant = merged.convex_minorant().ok()?;
    Some(minorant.as_table()?.slope_at(2.0 * fine.r[fine.resolved_from]))
}

/// `(K₁, K₂)` with `Φ_★(K₁ s) ≤ Φ_♦(s) ≤ Φ_★(K₂ s)` at every sample `s`.
pub fn equivalence_constants(
    phi_star: &RadialTable,
    phi_diamond: &YoungFunction1D,
    samples: &[f64],
) -> Result<(f64, f64)> {
    let samples: Vec<f64> = samples.iter().copied().filter(|s| *s > 0.0).collect();
    if samples.is_empty() {
        return Err(Error::RangeMismatch("no positive samples".into()));
    }
    let s_max = samples.iter().copied().fold(0.0, f64::max);
    if let Some(end) = phi_diamond.domain_end() {
        if s_max > end * (1.0 + 1e-12) {
            return Err(Error::RangeMismatch(format!("samples reach {s_max}, Φ_♦ is known up to {end}")));
        }
    }
    let k_hi = phi_star.valid_radius() / s_max;
    let k_lo = k_hi * 1e-9;
    let star = |x: f64| interp_linear(phi_star.knots(), phi_star.values(), x);
    let below = |k: f64| samples.iter().all(|&s| star(k * s) <= phi_diamond.eval(s));
    let above = |k: f64| samples.iter().all(|&s| phi_diamond.eval(s) <= star(k * s));
    if !below(k_lo) || !above(k_hi) {
        return Err(Error::RangeMismatch(format!(
            "Φ_★ is known up to r = {}, too short to bracket the constants",
            phi_star.valid_radius()
        )));
    }
    let log_bisect = |pred: &dyn Fn(f64) -> bool, mut lo: f64, mut hi: f64| {
        // pred(lo) holds, pred(hi) fails
        for _ in 0..200 {
            if hi / lo <= 1.0 + 1e-10 {
                break;
            }
            let mid = (lo * hi).sqrt();
            if pred(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    };
    let k1 = if below(k_hi) { k_hi } else { log_bisect(&below, k_lo, k_hi).0 };
    let k2 = if above(k_lo) { k_lo } else { log_bisect(&|k| !above(k), k_lo, k_hi).1 };
    Ok((k1, k2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tabulate(f: impl Fn(&[f64]) -> f64, extent: f64, nodes: usize) -> YoungFunctionND {
        let grid = BoxGrid::uniform(2, extent, nodes).unwrap();
        let mut x = vec![0.0; 2];
        let values = (0..grid.len())
            .map(|k| {
                grid.node(k, &mut x);
                f(&x)
            })
            .collect();
        YoungFunctionND::tabulated(grid, values).unwrap()
    }

    #[test]
    fn radial_function_is_unchanged() {
        let f = tabulate(|x| x[0] * x[0] + x[1] * x[1], 1.0, 401);
        let star = symmetric_increasing_rearrangement_nd(&f).unwrap();
        assert!(star.valid_radius() > 0.99);
        for &r in &[0.2, 0.5, 0.9] {
            assert!((star.eval(r).unwrap() - r * r).abs() < 5e-3 * r * r, "r={r}");
        }
        assert!(matches!(star.eval(1.2), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn ellipse_sublevels() {
        // |{ξ₁² + 4ξ₂² < t}| = πt/2, so F_★(r) = 2r²
        let f = tabulate(|x| x[0] * x[0] + 4.0 * x[1] * x[1], 1.0, 401);
        let star = symmetric_increasing_rearrangement_nd(&f).unwrap();
        for &r in &[0.2, 0.4, 0.6] {
            let v = star.eval(r).unwrap();
            assert!((v - 2.0 * r * r).abs() < 1e-2 * 2.0 * r * r, "r={r} v={v}");
        }
    }

    #[test]
    fn square_sublevels() {
        // |{max(|ξ₁|,|ξ₂|) < t}| = 4t², so F_★(r) = √π r / 2
        let f = tabulate(|x| x[0].abs().max(x[1].abs()), 1.0, 401);
        let star = symmetric_increasing_rearrangement_nd(&f).unwrap();
        let c = std::f64::consts::PI.sqrt() / 2.0;
        for &r in &[0.2, 0.5, 1.0] {
            let v = star.eval(r).unwrap();
            assert!((v - c * r).abs() < 1e-2 * c * r, "r={r} v={v}");
        }
    }

    #[test]
    fn scaled_pair_gives_equal_constants() {
        let r: Vec<f64> = (0..=400).map(|k| k as f64 * 0.05).collect();
        let star = RadialTable::new(r.clone(), r.iter().map(|x| x * x).collect()).unwrap();
        let diamond = YoungFunction1D::power_law(4.0, 2.0).unwrap();
        let samples: Vec<f64> = (1..=20).map(|k| k as f64 * 0.2).collect();
        let (k1, k2) = equivalence_constants(&star, &diamond, &samples).unwrap();
        assert!((k1 - 2.0).abs() < 1e-2 && (k2 - 2.0).abs() < 1e-2, "{k1} {k2}");
        assert!(k1 <= k2);
    }

    #[test]
    fn klimov_of_isotropic_quadratic() {
        let phi = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let settings = KlimovSettings { nodes: 257, s_min: 0.1, s_max: 10.0, ..Default::default() };
        let res = klimov(&phi, &settings).unwrap();
        assert!((res.fitted_exponent - 2.0).abs() < 0.02, "{}", res.fitted_exponent);
        assert!((res.fitted_coefficient - 1.0).abs() < 0.02, "{}", res.fitted_coefficient);
        let (k1, k2) = res.equivalence.unwrap();
        assert!(k1 <= k2 && (k1 - 1.0).abs() < 0.02 && (k2 - 1.0).abs() < 0.02, "{k1} {k2}");
    }
}
