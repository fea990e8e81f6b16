//! One- and N-dimensional Young functions.
//!
//! A Young function is even, convex, vanishes at the origin and grows to
//! `+∞`. Only the restriction to `s ≥ 0` (respectively the positive orthant)
//! is stored; evaluation reflects the argument.
//!
//! ```text
//! Φ_•(ξ') = sup { ξ·ξ' − Φ(ξ) }          Young conjugate
//! Θ(r)    = ∫₀^|r| Φ(s)/s ds              energy-space function
//! Ψ(s)    = Φ(s)/s                        slope ratio, inverted by the radial solver
//! ```

mod conjugate;
mod delta2;
mod derived;

pub use conjugate::{
    auto_primal_extent, conjugate_1d, conjugate_1d_with, conjugate_nd, conjugate_nd_with,
    legendre_transform_points, ConjugateMethod, ConjugateOptions,
};
pub use delta2::{delta2_classify, Delta2Outcome, Delta2Settings};
pub use derived::{
    embedding_class, psi_of, sobolev_conjugate, theta_of, DerivedKind, DerivedScalarFn,
    EmbeddingClass, EmbeddingReport, Psi,
};
pub(crate) use derived::psi_limit_at_zero;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{abs_pow, interp_linear, linspace, lower_hull_indices, segment_index};

/// Relative tolerance used when validating convexity of tabulated input.
pub const TOL_CONVEX_REL: f64 = 1e-9;
/// Absolute tolerance on `s` for the restricted inverse of Ψ.
pub const TOL_INV: f64 = 1e-10;

/// Anything that can be evaluated as an N-dimensional Young function.
pub trait YoungEval {
    fn dim(&self) -> usize;
    fn value(&self, xi: &[f64]) -> f64;
}

// ---------------------------------------------------------------------------
// Tabulated one-dimensional function
// ---------------------------------------------------------------------------

/// Knots `(s_j, Φ(s_j))` on `[0, s_max]`, interpolated linearly. Beyond the
/// last knot the last secant slope is used.
#[derive(Clone, Debug, PartialEq)]
pub struct Table1D {
    s: Vec<f64>,
    v: Vec<f64>,
    convexified: bool,
}

impl Table1D {
    /// Validated table: starts at `(0, 0)`, increasing knots, nonnegative,
    /// nondecreasing and convex within `TOL_CONVEX_REL`.
    pub fn new(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(s, v, TOL_CONVEX_REL)
    }

    pub fn with_tolerance(s: Vec<f64>, mut v: Vec<f64>, tol_rel: f64) -> Result<Self> {
        check_knots(&s, &v)?;
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let tol = tol_rel * scale;
        if v[0].abs() > tol {
            return Err(invalid(format!("tabulated function must vanish at 0, got {}", v[0])));
        }
        v[0] = 0.0;
        if let Some(x) = v.iter().find(|x| **x < -tol) {
            return Err(invalid(format!("tabulated function takes negative value {x}")));
        }
        let slopes: Vec<f64> = s.windows(2).zip(v.windows(2)).map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0])).collect();
        let max_slope = slopes.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        if let Some(k) = slopes.iter().position(|m| *m < -tol_rel * max_slope) {
            return Err(invalid(format!("tabulated function decreases on segment {k}")));
        }
        if let Some(k) = slopes.windows(2).position(|w| w[1] - w[0] < -tol_rel * max_slope) {
            return Err(invalid(format!("tabulated function is not convex at knot {}", k + 1)));
        }
        Ok(Self { s, v, convexified: false })
    }

    /// Replaces the data by its lower convex envelope before validation.
    /// Used for noisy input; the table remembers that it was adjusted.
    pub fn convexified(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_knots(&s, &v)?;
        let hull = lower_hull_indices(&s, &v);
        let adjusted = hull.len() != s.len();
        let hs: Vec<f64> = hull.iter().map(|&i| s[i]).collect();
        let mut hv: Vec<f64> = hull.iter().map(|&i| v[i]).collect();
        // the envelope can only lower values; keep exact zero at the origin
        hv[0] = hv[0].max(0.0);
        for x in hv.iter_mut() {
            *x = x.max(0.0);
        }
        let mut t = Self::with_tolerance(hs, hv, 1e-7)?;
        t.convexified = adjusted;
        Ok(t)
    }

    pub fn knots(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn was_convexified(&self) -> bool {
        self.convexified
    }

    pub fn last_slope(&self) -> f64 {
        let n = self.s.len();
        (self.v[n - 1] - self.v[n - 2]) / (self.s[n - 1] - self.s[n - 2])
    }

    /// Value at `x ≥ 0`.
    pub fn eval(&self, x: f64) -> f64 {
        interp_linear(&self.s, &self.v, x)
    }

    /// Slope of the segment containing `x` (right derivative).
    pub fn slope_at(&self, x: f64) -> f64 {
        let k = segment_index(&self.s, x);
        (self.v[k + 1] - self.v[k]) / (self.s[k + 1] - self.s[k])
    }
}

fn check_knots(s: &[f64], v: &[f64]) -> Result<()> {
    if s.len() != v.len() {
        return Err(invalid("knot and value arrays differ in length"));
    }
    if s.len() < 2 {
        return Err(invalid("a tabulated function needs at least two knots"));
    }
    if s[0] != 0.0 {
        return Err(invalid("the first knot must be s = 0"));
    }
    if s.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(invalid("tabulated data must be finite"));
    }
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("knots must be strictly increasing"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// One-dimensional Young functions
// ---------------------------------------------------------------------------

/// Even one-dimensional Young function, stored through its restriction to `s ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Young1DSpec", into = "Young1DSpec")]
pub enum YoungFunction1D {
    /// `Λ |s|^p`
    PowerLaw { coefficient: f64, exponent: f64 },
    /// `|s|^p (log(c + |s|))^α`
    PowerLog { p: f64, alpha: f64, shift: f64 },
    Tabulated(Table1D),
}

impl YoungFunction1D {
    pub fn power_law(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return Err(invalid(format!("power-law coefficient must be positive, got {coefficient}")));
        }
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(invalid(format!("power-law exponent must be >= 1, got {exponent}")));
        }
        Ok(Self::PowerLaw { coefficient, exponent })
    }

    /// Power-log family. The shift must make the function convex; this is
    /// checked on a verification grid and rejected otherwise.
    pub fn power_log(p: f64, alpha: f64, shift: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite() && alpha.is_finite()) {
            return Err(invalid("power-log needs p >= 1 and finite alpha"));
        }
        if p == 1.0 && alpha < 0.0 {
            return Err(invalid("power-log with p = 1 needs alpha >= 0"));
        }
        if !(shift > 1.0 && shift.is_finite()) {
            return Err(invalid(format!("power-log shift must exceed 1, got {shift}")));
        }
        let f = Self::PowerLog { p, alpha, shift };
        f.verify_sampled_convexity()?;
        Ok(f)
    }

    pub fn tabulated(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(Table1D::new(s, v)?))
    }

    /// Tabulated function built from the lower convex envelope of the data.
    pub fn tabulated_convexified(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(Table1D::convexified(s, v)?))
    }

    fn verify_sampled_convexity(&self) -> Result<()> {
        // dense near the origin, geometric in the tail
        let mut grid = linspace(0.0, 10.0, 2001);
        grid.extend(crate::numeric::geomspace(10.0, 1e8, 2000).into_iter().skip(1));
        let vals: Vec<f64> = grid.iter().map(|&s| self.eval(s)).collect();
        for k in 1..grid.len() - 1 {
            let (h0, h1) = (grid[k] - grid[k - 1], grid[k + 1] - grid[k]);
            let d2 = 2.0 * ((vals[k + 1] - vals[k]) / h1 - (vals[k] - vals[k - 1]) / h0) / (h0 + h1);
            let scale = vals[k].abs().max(1.0) / (grid[k] * grid[k]).max(1.0);
            if d2 < -1e-7 * scale {
                return Err(invalid(format!(
                    "function is not convex near s = {:.4} (second difference {d2:e}); increase the shift",
                    grid[k]
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        match self {
            Self::PowerLaw { coefficient, exponent } => coefficient * abs_pow(a, *exponent),
            Self::PowerLog { p, alpha, shift } => {
                if a == 0.0 {
                    0.0
                } else {
                    abs_pow(a, *p) * (shift + a).ln().powf(*alpha)
                }
            }
            Self::Tabulated(t) => t.eval(a),
        }
    }

    /// Derivative at `s ≥ 0` (right derivative for tabulated functions).
    pub fn slope(&self, s: f64) -> f64 {
        let a = s.abs();
        match self {
            Self::PowerLaw { coefficient, exponent } => {
                if *exponent == 1.0 {
                    *coefficient
                } else {
                    coefficient * exponent * abs_pow(a, exponent - 1.0)
                }
            }
            Self::PowerLog { p, alpha, shift } => {
                if a == 0.0 {
                    return if *p == 1.0 { shift.ln().powf(*alpha) } else { 0.0 };
                }
                let l = (shift + a).ln();
                p * a.powf(p - 1.0) * l.powf(*alpha) + a.powf(*p) * alpha * l.powf(alpha - 1.0) / (shift + a)
            }
            Self::Tabulated(t) => t.slope_at(a),
        }
    }

    /// End of the reliable domain: the last knot for tables, `None` otherwise.
    pub fn domain_end(&self) -> Option<f64> {
        match self {
            Self::Tabulated(t) => Some(t.end()),
            _ => None,
        }
    }

    pub fn as_table(&self) -> Option<&Table1D> {
        match self {
            Self::Tabulated(t) => Some(t),
            _ => None,
        }
    }

    /// Samples the function on `grid` (which must start at 0) as a table.
    pub fn tabulate(&self, grid: &[f64]) -> Result<Table1D> {
        let v: Vec<f64> = grid.iter().map(|&s| self.eval(s)).collect();
        Table1D::with_tolerance(grid.to_vec(), v, 1e-7)
    }

    /// `sup{s ≥ 0 : Φ(s) = 0}`.
    pub fn zero_threshold(&self) -> f64 {
        match self {
            Self::Tabulated(t) => {
                let vmax = t.values().last().copied().unwrap_or(0.0);
                let tiny = 1e-14 * vmax.abs();
                let k = t.values().iter().rposition(|v| *v <= tiny).unwrap_or(0);
                if k + 1 == t.len() {
                    t.end()
                } else {
                    t.knots()[k]
                }
            }
            _ => 0.0,
        }
    }
}

impl YoungEval for YoungFunction1D {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, xi: &[f64]) -> f64 {
        self.eval(xi[0])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum Young1DSpec {
    Power { coefficient: f64, exponent: f64 },
    PowerLog { p: f64, alpha: f64, shift: f64 },
    Tabulated { s: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<Young1DSpec> for YoungFunction1D {
    type Error = Error;
    fn try_from(spec: Young1DSpec) -> Result<Self> {
        match spec {
            Young1DSpec::Power { coefficient, exponent } => Self::power_law(coefficient, exponent),
            Young1DSpec::PowerLog { p, alpha, shift } => Self::power_log(p, alpha, shift),
            Young1DSpec::Tabulated { s, values } => Self::tabulated(s, values),
        }
    }
}

impl From<YoungFunction1D> for Young1DSpec {
    fn from(f: YoungFunction1D) -> Self {
        match f {
            YoungFunction1D::PowerLaw { coefficient, exponent } => Young1DSpec::Power { coefficient, exponent },
            YoungFunction1D::PowerLog { p, alpha, shift } => Young1DSpec::PowerLog { p, alpha, shift },
            YoungFunction1D::Tabulated(t) => Young1DSpec::Tabulated { s: t.s, values: t.v },
        }
    }
}

// ---------------------------------------------------------------------------
// N-dimensional tabulation grids
// ---------------------------------------------------------------------------

/// Uniform grid over the positive orthant `[0, extents_0] × … × [0, extents_{N-1}]`
/// of a box centered at the origin. Node `k` on axis `i` sits at
/// `k · extents_i / (shape_i − 1)`. Storage is row-major, last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub extents: Vec<f64>,
    pub shape: Vec<usize>,
}

impl BoxGrid {
    pub fn new(extents: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if extents.is_empty() || extents.len() != shape.len() {
            return Err(invalid("box grid needs matching, nonempty extents and shape"));
        }
        if extents.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("box extents must be positive"));
        }
        if shape.iter().any(|n| *n < 2) {
            return Err(invalid("box grid needs at least two nodes per axis"));
        }
        Ok(Self { extents, shape })
    }

    pub fn uniform(dim: usize, extent: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![extent; dim], vec![nodes; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.extents[axis] / (self.shape[axis] - 1) as f64
    }

    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        linspace(0.0, self.extents[axis], self.shape[axis])
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut st = vec![1; self.dim()];
        for i in (0..self.dim().saturating_sub(1)).rev() {
            st[i] = st[i + 1] * self.shape[i + 1];
        }
        st
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for i in (0..self.dim()).rev() {
            out[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
    }

    pub fn node(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim()];
        self.multi_index(flat, &mut idx);
        for i in 0..self.dim() {
            out[i] = idx[i] as f64 * self.step(i);
        }
    }

    /// True when the node lies on an outer face of the box.
    pub fn on_outer_face(&self, flat: usize) -> bool {
        let mut idx = vec![0; self.dim()];
        self.multi_index(flat, &mut idx);
        idx.iter().zip(&self.shape).any(|(k, n)| *k + 1 == *n)
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: &impl YoungEval) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        (0..self.len())
            .map(|k| {
                self.node(k, &mut x);
                f.value(&x)
            })
            .collect()
    }
}

/// Tabulated N-dimensional Young function on a [`BoxGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct TableND {
    grid: BoxGrid,
    values: Vec<f64>,
    superlinear: bool,
}

impl TableND {
    pub fn new(grid: BoxGrid, values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(grid, values, TOL_CONVEX_REL)
    }

    pub fn with_tolerance(grid: BoxGrid, mut values: Vec<f64>, tol_rel: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("value count does not match the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated values must be finite"));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        if values[0].abs() > tol_rel * scale {
            return Err(invalid("tabulated N-d function must vanish at the origin"));
        }
        values[0] = 0.0;
        let table = Self { grid, values, superlinear: false };
        table.check_line_convexity(tol_rel * scale)?;
        let superlinear = table.shell_superlinearity();
        Ok(Self { superlinear, ..table })
    }

    fn check_line_convexity(&self, tol: f64) -> Result<()> {
        let strides = self.grid.strides();
        let mut idx = vec![0; self.grid.dim()];
        for axis in 0..self.grid.dim() {
            let n = self.grid.shape[axis];
            let h = self.grid.step(axis);
            for flat in 0..self.values.len() {
                self.grid.multi_index(flat, &mut idx);
                if idx[axis] == 0 || idx[axis] + 1 == n {
                    continue;
                }
                let (a, b, c) = (
                    self.values[flat - strides[axis]],
                    self.values[flat],
                    self.values[flat + strides[axis]],
                );
                // reflected neighbour at the origin is handled by evenness: a == c there
                if a - 2.0 * b + c < -tol * (h * h).max(1.0) {
                    return Err(invalid(format!("tabulated N-d function is not convex along axis {axis}")));
                }
            }
        }
        Ok(())
    }

    /// Per-ray growth of Φ(ξ)/|ξ| between half radius and the outer shell.
    fn shell_superlinearity(&self) -> bool {
        let mut x = vec![0.0; self.grid.dim()];
        let mut half = vec![0.0; self.grid.dim()];
        for flat in 0..self.values.len() {
            if !self.grid.on_outer_face(flat) {
                continue;
            }
            self.grid.node(flat, &mut x);
            let r: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            for (h, t) in half.iter_mut().zip(&x) {
                *h = 0.5 * t;
            }
            let outer = self.values[flat] / r;
            let inner = self.eval(&half) / (0.5 * r);
            if !(outer > 1.05 * inner) {
                return false;
            }
        }
        true
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_superlinear(&self) -> bool {
        self.superlinear
    }

    /// Multilinear interpolation of `|ξ|` (componentwise) on the orthant grid;
    /// linear extension beyond the box.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let d = self.grid.dim();
        let strides = self.grid.strides();
        let mut base = 0usize;
        let mut frac = [0.0f64; 8];
        let mut frac_v;
        let frac_slice: &mut [f64] = if d <= 8 {
            &mut frac[..d]
        } else {
            frac_v = vec![0.0; d];
            &mut frac_v
        };
        for i in 0..d {
            let h = self.grid.step(i);
            let t = xi[i].abs() / h;
            let n = self.grid.shape[i];
            let k = (t.floor() as usize).min(n - 2);
            frac_slice[i] = t - k as f64;
            base += k * strides[i];
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut off = 0;
            for i in 0..d {
                if corner >> i & 1 == 1 {
                    w *= frac_slice[i];
                    off += strides[i];
                } else {
                    w *= 1.0 - frac_slice[i];
                }
            }
            if w != 0.0 {
                acc += w * self.values[base + off];
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// N-dimensional Young functions
// ---------------------------------------------------------------------------

/// Even N-dimensional Young function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "YoungNDSpec", into = "YoungNDSpec")]
pub enum YoungFunctionND {
    /// `Σ λ_i |ξ_i|^{p_i}`
    PowerSum { lambda: Vec<f64>, p: Vec<f64> },
    /// `Σ Υ_i(ξ_i)`
    Separable(Vec<YoungFunction1D>),
    /// `exp(Σ |ξ_i|^{p_i}) − 1`
    ExpSum { p: Vec<f64> },
    Tabulated(TableND),
}

impl YoungFunctionND {
    pub fn power_sum(lambda: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || lambda.len() != p.len() {
            return Err(invalid("power sum needs matching, nonempty lambda and p"));
        }
        if lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("power sum coefficients must be positive"));
        }
        if p.iter().any(|q| !(*q > 1.0 && q.is_finite())) {
            return Err(invalid("power sum exponents must exceed 1"));
        }
        Ok(Self::PowerSum { lambda, p })
    }

    pub fn separable(components: Vec<YoungFunction1D>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("separable function needs at least one component"));
        }
        Ok(Self::Separable(components))
    }

    pub fn exp_sum(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.iter().any(|q| !(*q >= 1.0 && q.is_finite())) {
            return Err(invalid("exponential sum exponents must be >= 1"));
        }
        Ok(Self::ExpSum { p })
    }

    pub fn tabulated(grid: BoxGrid, values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(TableND::new(grid, values)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::PowerSum { p, .. } | Self::ExpSum { p } => p.len(),
            Self::Separable(c) => c.len(),
            Self::Tabulated(t) => t.grid.dim(),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            Self::PowerSum { lambda, p } => xi
                .iter()
                .zip(lambda.iter().zip(p))
                .map(|(x, (l, q))| l * abs_pow(*x, *q))
                .sum(),
            Self::Separable(c) => xi.iter().zip(c).map(|(x, f)| f.eval(*x)).sum(),
            Self::ExpSum { p } => xi.iter().zip(p).map(|(x, q)| abs_pow(*x, *q)).sum::<f64>().exp_m1(),
            Self::Tabulated(t) => t.eval(xi),
        }
    }

    /// Superlinear growth at infinity: by construction for the closed forms,
    /// measured on the outer shell for tables.
    pub fn is_superlinear(&self) -> bool {
        match self {
            Self::Tabulated(t) => t.superlinear,
            Self::Separable(c) => c.iter().all(|f| match f {
                YoungFunction1D::PowerLaw { exponent, .. } => *exponent > 1.0,
                YoungFunction1D::PowerLog { p, alpha, .. } => *p > 1.0 || *alpha > 0.0,
                YoungFunction1D::Tabulated(_) => false,
            }),
            _ => true,
        }
    }

    /// One-dimensional components when the function is a sum of functions of
    /// single coordinates.
    pub fn separable_components(&self) -> Option<Vec<YoungFunction1D>> {
        match self {
            Self::PowerSum { lambda, p } => Some(
                lambda
                    .iter()
                    .zip(p)
                    .map(|(l, q)| YoungFunction1D::PowerLaw { coefficient: *l, exponent: *q })
                    .collect(),
            ),
            Self::Separable(c) => Some(c.clone()),
            _ => None,
        }
    }

    /// Central finite-difference gradient.
    pub fn gradient_fd(&self, xi: &[f64], h: f64) -> Vec<f64> {
        let mut x = xi.to_vec();
        (0..xi.len())
            .map(|i| {
                let step = h * xi[i].abs().max(1.0);
                x[i] = xi[i] + step;
                let up = self.eval(&x);
                x[i] = xi[i] - step;
                let dn = self.eval(&x);
                x[i] = xi[i];
                (up - dn) / (2.0 * step)
            })
            .collect()
    }
}

impl YoungEval for YoungFunctionND {
    fn dim(&self) -> usize {
        YoungFunctionND::dim(self)
    }
    fn value(&self, xi: &[f64]) -> f64 {
        self.eval(xi)
    }
}

/// `Φ(ξ) + Φ_•(ξ') − ξ·ξ'`, nonnegative by the Young inequality.
pub fn young_gap(phi: &impl YoungEval, phi_conj: &impl YoungEval, xi: &[f64], xi_prime: &[f64]) -> f64 {
    let dot: f64 = xi.iter().zip(xi_prime).map(|(a, b)| a * b).sum();
    phi.value(xi) + phi_conj.value(xi_prime) - dot
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum YoungNDSpec {
    PowerSum { lambda: Vec<f64>, p: Vec<f64> },
    Separable { components: Vec<YoungFunction1D> },
    ExpSum { p: Vec<f64> },
    Tabulated { extents: Vec<f64>, shape: Vec<usize>, values: Vec<f64> },
}

impl TryFrom<YoungNDSpec> for YoungFunctionND {
    type Error = Error;
    fn try_from(spec: YoungNDSpec) -> Result<Self> {
        match spec {
            YoungNDSpec::PowerSum { lambda, p } => Self::power_sum(lambda, p),
            YoungNDSpec::Separable { components } => Self::separable(components),
            YoungNDSpec::ExpSum { p } => Self::exp_sum(p),
            YoungNDSpec::Tabulated { extents, shape, values } => {
                Self::tabulated(BoxGrid::new(extents, shape)?, values)
            }
        }
    }
}

impl From<YoungFunctionND> for YoungNDSpec {
    fn from(f: YoungFunctionND) -> Self {
        match f {
            YoungFunctionND::PowerSum { lambda, p } => YoungNDSpec::PowerSum { lambda, p },
            YoungFunctionND::Separable(components) => YoungNDSpec::Separable { components },
            YoungFunctionND::ExpSum { p } => YoungNDSpec::ExpSum { p },
            YoungFunctionND::Tabulated(t) => YoungNDSpec::Tabulated {
                extents: t.grid.extents,
                shape: t.grid.shape,
                values: t.values,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rejects_nonconvex_data() {
        let err = Table1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn table_rejects_nonzero_origin() {
        assert!(Table1D::new(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn convexified_table_is_flagged() {
        let t = Table1D::convexified(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert!(t.was_convexified());
        assert_eq!(t.knots(), &[0.0, 2.0]);
    }

    #[test]
    fn table_extrapolates_with_last_secant() {
        let t = Table1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(t.eval(3.0), 5.0);
        assert_eq!(t.eval(1.5), 2.0);
    }

    #[test]
    fn evaluation_is_even() {
        let f = YoungFunction1D::power_log(2.0, 1.0, 3.0).unwrap();
        assert_eq!(f.eval(-2.5), f.eval(2.5));
        let g = YoungFunctionND::power_sum(vec![1.0, 2.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(g.eval(&[-1.0, 0.5]), g.eval(&[1.0, -0.5]));
        assert_eq!(g.eval(&[-1.0, 0.5]), 1.0 + 2.0 * 0.125);
    }

    #[test]
    fn power_log_needs_large_enough_shift() {
        // α < 0 makes the function concave near zero unless the shift is large
        assert!(YoungFunction1D::power_log(1.2, -2.0, 1.05).is_err());
        assert!(YoungFunction1D::power_log(2.0, 1.0, 3.0).is_ok());
    }

    #[test]
    fn tabulated_nd_interpolates_and_flags_superlinearity() {
        let grid = BoxGrid::uniform(2, 2.0, 21).unwrap();
        let quad = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let t = TableND::new(grid.clone(), grid.sample(&quad)).unwrap();
        assert!(t.is_superlinear());
        assert!((t.eval(&[-0.3, 0.7]) - 0.58).abs() < 0.011);
        let lin = YoungFunctionND::separable(vec![
            YoungFunction1D::power_law(1.0, 1.0).unwrap(),
            YoungFunction1D::power_law(1.0, 1.0).unwrap(),
        ])
        .unwrap();
        let t = TableND::new(grid.clone(), grid.sample(&lin)).unwrap();
        assert!(!t.is_superlinear());
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let f: YoungFunction1D = serde_json::from_str(r#"{"family":"power","coefficient":2,"exponent":3}"#).unwrap();
        assert_eq!(f, YoungFunction1D::PowerLaw { coefficient: 2.0, exponent: 3.0 });
        let back = serde_json::to_string(&f).unwrap();
        assert!(back.contains("\"family\":\"power\""));
        let g: YoungFunctionND =
            serde_json::from_str(r#"{"family":"power_sum","lambda":[1,1],"p":[2,4]}"#).unwrap();
        assert_eq!(g.dim(), 2);
        assert!(serde_json::from_str::<YoungFunctionND>(r#"{"family":"power_sum","lambda":[1],"p":[0.5]}"#).is_err());
        assert!(serde_json::from_str::<YoungFunction1D>(r#"{"family":"power","coefficient":1,"exponent":2,"x":1}"#).is_err());
        let sep: YoungFunctionND = serde_json::from_str(
            r#"{"family":"separable","components":[{"family":"power_log","p":2,"alpha":1,"shift":3},{"family":"tabulated","s":[0,1,2],"values":[0,1,3]}]}"#,
        )
        .unwrap();
        assert_eq!(sep.dim(), 2);
    }
}
