//! Functions derived from a one-dimensional Young function Φ: the ratio
//! Ψ(s) = Φ(s)/s and its restricted inverse, Θ(r) = ∫₀^r Ψ, the Sobolev
//! conjugate Φ_N = Φ ∘ H⁻¹, and the embedding dichotomy.

use super::{YoungFunction1D, TOL_INV};
use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect_increasing, gauss_legendre, geomspace, interp_linear, loglog_fit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivedKind {
    Theta,
    Psi,
    PsiInverse,
    SobolevConjugate,
    HFunction,
}

/// A derived scalar function tabulated on knots and interpolated linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedScalarFn {
    pub kind: DerivedKind,
    knots: Vec<f64>,
    values: Vec<f64>,
    /// `s₀` for the restricted inverse of Ψ.
    pub threshold: Option<f64>,
}

impl DerivedScalarFn {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        interp_linear(&self.knots, &self.values, x.abs())
    }

    /// The tabulated function as a Young function (Θ and Φ_N are convex).
    pub fn to_young(&self) -> Result<YoungFunction1D> {
        match self.kind {
            DerivedKind::Theta | DerivedKind::SobolevConjugate => {
                let t = super::Table1D::with_tolerance(self.knots.clone(), self.values.clone(), 1e-7)?;
                Ok(YoungFunction1D::Tabulated(t))
            }
            other => Err(invalid(format!("{other:?} is not a Young function"))),
        }
    }
}

/// Estimate of `lim_{s→0⁺} Φ(s)/s` relative to the scale of Ψ, or the exact
/// limit for closed forms.
pub(crate) fn psi_limit_at_zero(phi: &YoungFunction1D) -> (f64, bool) {
    match phi {
        YoungFunction1D::PowerLaw { coefficient, exponent } => {
            if *exponent > 1.0 {
                (0.0, true)
            } else {
                (*coefficient, false)
            }
        }
        YoungFunction1D::PowerLog { p, alpha, shift } => {
            if *p > 1.0 {
                (0.0, true)
            } else {
                (shift.ln().powf(*alpha), false)
            }
        }
        YoungFunction1D::Tabulated(t) => {
            let k = t.values().iter().position(|v| *v > 0.0);
            match k {
                None => (0.0, true),
                Some(k) => {
                    // first segment leaving zero: Φ/s there is at most its slope
                    let a = t.knots()[k - 1];
                    let b = t.knots()[k];
                    let slope = t.values()[k] / (b - a);
                    let limit = if a > 0.0 { 0.0 } else { slope };
                    let scale = t.values().last().unwrap() / t.end();
                    (limit, limit <= 1e-2 * scale)
                }
            }
        }
    }
}

/// `∫₀^{x} Φ(s)/s ds` for a tabulated Φ, exact for the piecewise-linear interpolant.
fn theta_table(phi: &super::Table1D, grid: &[f64]) -> Vec<f64> {
    let (s, v) = (phi.knots(), phi.values());
    let seg = |a: f64, fa: f64, m: f64, x: f64| -> f64 {
        // Φ(σ) = fa + m(σ − a) on [a, x]
        let c = fa - m * a;
        if a == 0.0 || c == 0.0 {
            m * (x - a)
        } else {
            m * (x - a) + c * (x / a).ln()
        }
    };
    let mut cum = vec![0.0; s.len()];
    for k in 0..s.len() - 1 {
        let m = (v[k + 1] - v[k]) / (s[k + 1] - s[k]);
        cum[k + 1] = cum[k] + seg(s[k], v[k], m, s[k + 1]);
    }
    grid.iter()
        .map(|&x| {
            let k = crate::numeric::segment_index(s, x);
            let m = (v[k + 1] - v[k]) / (s[k + 1] - s[k]);
            cum[k] + seg(s[k], v[k], m, x)
        })
        .collect()
}

/// Integral over `[0, x₁]` of an integrand behaving like a power near 0,
/// using the local exponent between `x₁/2` and `x₁`. Returns `(integral, exponent)`.
fn first_cell_power(g: impl Fn(f64) -> f64, x1: f64) -> (f64, f64) {
    let (ga, gb) = (g(0.5 * x1), g(x1));
    let a = if ga > 0.0 && gb > 0.0 { (gb / ga).ln() / std::f64::consts::LN_2 } else { 0.0 };
    if a <= -1.0 {
        (f64::INFINITY, a)
    } else {
        (gb * x1 / (1.0 + a), a)
    }
}

fn normalized_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() || grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(invalid("grid points must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    let mut g = Vec::with_capacity(grid.len() + 1);
    if grid[0] > 0.0 {
        g.push(0.0);
    }
    g.extend_from_slice(grid);
    Ok(g)
}

/// `Θ(r) = ∫₀^{|r|} Φ(s)/s ds` tabulated on `grid`.
pub fn theta_of(phi: &YoungFunction1D, grid: &[f64]) -> Result<DerivedScalarFn> {
    let (limit, ok) = psi_limit_at_zero(phi);
    if !ok {
        return Err(Error::NonIntegrableAtZero { limit });
    }
    let grid = normalized_grid(grid)?;
    let values = match phi {
        YoungFunction1D::Tabulated(t) => theta_table(t, &grid),
        _ => {
            let ratio = |s: f64| if s > 0.0 { phi.eval(s) / s } else { 0.0 };
            let mut acc = 0.0;
            let mut out = vec![0.0];
            for w in grid.windows(2) {
                let piece = if w[0] == 0.0 {
                    first_cell_power(ratio, w[1]).0
                } else {
                    gauss_legendre(ratio, w[0], w[1])
                };
                acc += piece;
                out.push(acc);
            }
            out
        }
    };
    Ok(DerivedScalarFn { kind: DerivedKind::Theta, knots: grid, values, threshold: None })
}

/// Ψ(s) = Φ(s)/s with its inverse restricted to `[s₀, ∞)`.
///
/// For tabulated Φ the knot ratios `Φ(s_j)/s_j` are interpolated linearly
/// (with Ψ(0) = 0), which keeps Ψ strictly increasing on `[s₀, s_max]`.
#[derive(Clone, Debug)]
pub struct Psi {
    phi: YoungFunction1D,
    s0: f64,
    ratios: Option<Vec<f64>>,
}

pub fn psi_of(phi: &YoungFunction1D) -> Psi {
    let ratios = phi.as_table().map(|t| {
        t.knots()
            .iter()
            .zip(t.values())
            .map(|(s, v)| if *s > 0.0 { v / s } else { 0.0 })
            .collect()
    });
    Psi { phi: phi.clone(), s0: phi.zero_threshold(), ratios }
}

impl Psi {
    pub fn parent(&self) -> &YoungFunction1D {
        &self.phi
    }

    /// `s₀ = sup{s ≥ 0 : Φ(s) = 0}`.
    pub fn threshold(&self) -> f64 {
        self.s0
    }

    pub fn value(&self, s: f64) -> f64 {
        let a = s.abs();
        match (&self.ratios, &self.phi) {
            (Some(r), YoungFunction1D::Tabulated(t)) if a <= t.end() => interp_linear(t.knots(), r, a),
            _ => {
                if a == 0.0 {
                    0.0
                } else {
                    self.phi.eval(a) / a
                }
            }
        }
    }

    /// Upper end of the invertible range in `s`, if bounded.
    pub fn upper(&self) -> Option<f64> {
        self.phi.domain_end()
    }

    /// Largest value Ψ takes on the invertible range (`+∞` for closed forms
    /// with superlinear growth).
    pub fn max_value(&self) -> f64 {
        match self.upper() {
            Some(end) => self.value(end),
            None => self.limit_estimate(),
        }
    }

    /// Numerical estimate of `lim_{r→∞} Ψ(r)`.
    pub fn limit_estimate(&self) -> f64 {
        match &self.phi {
            YoungFunction1D::PowerLaw { coefficient, exponent } => {
                if *exponent > 1.0 {
                    f64::INFINITY
                } else {
                    *coefficient
                }
            }
            YoungFunction1D::PowerLog { p, alpha, .. } => {
                if *p > 1.0 || *alpha > 0.0 {
                    f64::INFINITY
                } else {
                    self.value(1e15)
                }
            }
            YoungFunction1D::Tabulated(t) => self.value(t.end()),
        }
    }

    /// The unique `s ∈ [s₀, s_max]` with Ψ(s) = r, by bracketed bisection.
    pub fn inverse(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::OutOfRange { value: r, max: self.max_value() });
        }
        if r == 0.0 {
            return Ok(self.s0);
        }
        let hi = match self.upper() {
            Some(end) => {
                let top = self.value(end);
                if r > top * (1.0 + 1e-12) {
                    return Err(Error::OutOfRange { value: r, max: top });
                }
                if r >= top {
                    return Ok(end);
                }
                end
            }
            None => {
                let mut hi = self.s0.max(1.0);
                while self.value(hi) < r {
                    hi *= 2.0;
                    if hi > 1e15 {
                        return Err(Error::OutOfRange { value: r, max: self.value(1e15) });
                    }
                }
                hi
            }
        };
        match (&self.ratios, &self.phi) {
            (Some(q), YoungFunction1D::Tabulated(t)) => {
                // Ψ is linear between knots: bracket by bisection over the knots, then solve
                let j = q.partition_point(|v| *v < r);
                let s = t.knots();
                Ok(s[j - 1] + (r - q[j - 1]) / (q[j] - q[j - 1]) * (s[j] - s[j - 1]))
            }
            (_, YoungFunction1D::PowerLaw { coefficient, exponent }) if *exponent > 1.0 => {
                Ok((r / coefficient).powf(1.0 / (exponent - 1.0)))
            }
            _ => {
                let tol = TOL_INV.max(1e-15 * hi);
                Ok(bisect_increasing(|s| self.value(s) - r, self.s0, hi, tol, 200))
            }
        }
    }

    pub fn to_derived(&self, grid: &[f64]) -> DerivedScalarFn {
        DerivedScalarFn {
            kind: DerivedKind::Psi,
            knots: grid.to_vec(),
            values: grid.iter().map(|&s| self.value(s)).collect(),
            threshold: None,
        }
    }

    /// Ψ⁻¹ tabulated on a grid of values `r`.
    pub fn inverse_table(&self, r_grid: &[f64]) -> Result<DerivedScalarFn> {
        let values = r_grid.iter().map(|&r| self.inverse(r)).collect::<Result<Vec<_>>>()?;
        Ok(DerivedScalarFn {
            kind: DerivedKind::PsiInverse,
            knots: r_grid.to_vec(),
            values,
            threshold: Some(self.s0),
        })
    }
}

/// `(H, Φ_N)` with `H(r) = (∫₀^r (s/Φ(s))^{1/(N−1)} ds)^{1/N'}` on `grid` and
/// `Φ_N(H(r)) = Φ(r)`.
pub fn sobolev_conjugate(
    phi: &YoungFunction1D,
    dim: usize,
    grid: &[f64],
) -> Result<(DerivedScalarFn, DerivedScalarFn)> {
    if dim < 2 {
        return Err(invalid("the Sobolev conjugate needs N >= 2"));
    }
    let grid = normalized_grid(grid)?;
    if grid.len() < 2 {
        return Err(invalid("grid needs a positive node"));
    }
    let e = 1.0 / (dim as f64 - 1.0);
    let s0 = phi.zero_threshold();
    if s0 > 0.0 {
        return Err(Error::DivergentAtZero { local_exponent: f64::INFINITY });
    }
    let g = |s: f64| (s / phi.eval(s)).powf(e);
    let (first, a) = first_cell_power(g, grid[1]);
    if !first.is_finite() {
        return Err(Error::DivergentAtZero { local_exponent: 1.0 - a / e });
    }
    let mut cum = vec![0.0, first];
    for w in grid.windows(2).skip(1) {
        let last = *cum.last().unwrap();
        cum.push(last + gauss_legendre(g, w[0], w[1]));
    }
    let power = (dim as f64 - 1.0) / dim as f64;
    let h: Vec<f64> = cum.iter().map(|c| c.powf(power)).collect();
    let phi_vals: Vec<f64> = grid.iter().map(|&r| phi.eval(r)).collect();
    let h_fn = DerivedScalarFn { kind: DerivedKind::HFunction, knots: grid, values: h.clone(), threshold: None };
    let phi_n = DerivedScalarFn { kind: DerivedKind::SobolevConjugate, knots: h, values: phi_vals, threshold: None };
    Ok((h_fn, phi_n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingClass {
    /// `∫^∞ (s/Φ(s))^{1/(N−1)} ds < ∞`: solutions are essentially bounded.
    EssentiallyBounded,
    /// The tail integral diverges: integrability of `Φ_N(c u)`.
    OrliczEmbedding,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingReport {
    pub class: EmbeddingClass,
    pub fitted_exponent: f64,
    /// Ratio of successive doubling-range tail integrals, when the borderline
    /// test was needed.
    pub tail_ratio: Option<f64>,
}

/// Classifies the tail behaviour of Φ against the dimension.
pub fn embedding_class(phi: &YoungFunction1D, dim: usize) -> Result<EmbeddingReport> {
    if dim < 2 {
        return Err(invalid("embedding classification needs N >= 2"));
    }
    let (lo, hi) = match phi.domain_end() {
        Some(end) => {
            let first_pos = phi
                .as_table()
                .and_then(|t| t.knots().iter().zip(t.values()).find(|(_, v)| **v > 0.0).map(|(s, _)| *s))
                .unwrap_or(end);
            ((end / 100.0).max(first_pos), end)
        }
        None => (1e4, 1e6),
    };
    if !(hi > lo) {
        return Err(invalid("tail range is empty"));
    }
    let xs = geomspace(lo, hi, 60);
    let ys: Vec<f64> = xs.iter().map(|&s| phi.eval(s)).collect();
    let (q, _) = loglog_fit(&xs, &ys).ok_or_else(|| invalid("tail fit failed"))?;
    let n = dim as f64;
    let fit_tol = 0.05;
    if q > n + fit_tol {
        return Ok(EmbeddingReport { class: EmbeddingClass::EssentiallyBounded, fitted_exponent: q, tail_ratio: None });
    }
    if q < n - fit_tol {
        return Ok(EmbeddingReport { class: EmbeddingClass::OrliczEmbedding, fitted_exponent: q, tail_ratio: None });
    }
    // borderline: compare tail integrals over successive doubling ranges
    let e = 1.0 / (n - 1.0);
    let g = |s: f64| (s / phi.eval(s)).powf(e);
    let doublings = match phi.domain_end() {
        Some(_) => ((hi / lo).log2().floor() as usize).min(8),
        None => 6,
    };
    if doublings < 2 {
        return Ok(EmbeddingReport { class: EmbeddingClass::Inconclusive, fitted_exponent: q, tail_ratio: None });
    }
    let pieces: Vec<f64> = (0..doublings)
        .map(|k| {
            let a = lo * 2f64.powi(k as i32);
            gauss_legendre(g, a, 2.0 * a)
        })
        .collect();
    let ratio = pieces[doublings - 1] / pieces[doublings - 2];
    let class = if ratio >= 0.995 {
        EmbeddingClass::OrliczEmbedding
    } else if ratio <= 2f64.powf(-0.05) {
        EmbeddingClass::EssentiallyBounded
    } else {
        EmbeddingClass::Inconclusive
    };
    Ok(EmbeddingReport { class, fitted_exponent: q, tail_ratio: Some(ratio) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linspace;

    #[test]
    fn theta_of_quadratic() {
        let phi = YoungFunction1D::power_law(1.0, 2.0).unwrap();
        let th = theta_of(&phi, &linspace(0.0, 3.0, 31)).unwrap();
        for (r, v) in th.knots().iter().zip(th.values()) {
            assert!((v - r * r / 2.0).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn theta_of_power_p() {
        let phi = YoungFunction1D::power_law(1.0, 3.5).unwrap();
        let th = theta_of(&phi, &linspace(0.0, 2.0, 41)).unwrap();
        for (r, v) in th.knots().iter().zip(th.values()) {
            let exact = r.powf(3.5) / 3.5;
            assert!((v - exact).abs() < 1e-10 * exact.max(1.0), "r={r}");
        }
    }

    #[test]
    fn theta_rejects_linear_growth_at_zero() {
        let phi = YoungFunction1D::power_law(2.0, 1.0).unwrap();
        assert!(matches!(theta_of(&phi, &[0.0, 1.0]), Err(Error::NonIntegrableAtZero { .. })));
    }

    #[test]
    fn theta_of_table_is_dominated() {
        let s = linspace(0.0, 4.0, 81);
        let v: Vec<f64> = s.iter().map(|x| x.powf(2.5)).collect();
        let phi = YoungFunction1D::tabulated(s.clone(), v).unwrap();
        let th = theta_of(&phi, &s).unwrap();
        for (r, t) in th.knots().iter().zip(th.values()) {
            assert!(*t <= phi.eval(*r) + 1e-12);
        }
    }

    #[test]
    fn psi_inverse_of_cubic() {
        let phi = YoungFunction1D::power_law(1.0, 3.0).unwrap();
        let psi = psi_of(&phi);
        assert!((psi.value(3.0) - 9.0).abs() < 1e-12);
        assert!((psi.inverse(4.0).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(psi.inverse(0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_inverse_of_quadratic_is_identity() {
        let psi = psi_of(&YoungFunction1D::power_law(1.0, 2.0).unwrap());
        for &r in &[0.1, 1.0, 7.5, 123.0] {
            assert!((psi.inverse(r).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn psi_threshold_and_range() {
        let phi = YoungFunction1D::tabulated(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.0, 1.0, 3.0]).unwrap();
        let psi = psi_of(&phi);
        assert_eq!(psi.threshold(), 1.0);
        assert_eq!(psi.inverse(0.0).unwrap(), 1.0);
        assert!(matches!(psi.inverse(1.5), Err(Error::OutOfRange { .. })));
        let s = psi.inverse(0.75).unwrap();
        assert!((psi.value(s) - 0.75).abs() < 1e-9);
    }

    #[test]
    fn sobolev_conjugate_quadratic_three_dims() {
        // H(r) = (2√r)^{2/3}, Φ_N(t) = t⁶/16
        let phi = YoungFunction1D::power_law(1.0, 2.0).unwrap();
        let grid = linspace(0.0, 4.0, 401);
        let (h, phi_n) = sobolev_conjugate(&phi, 3, &grid).unwrap();
        for (r, v) in h.knots().iter().zip(h.values()).skip(1) {
            let exact = (2.0 * r.sqrt()).powf(2.0 / 3.0);
            assert!((v - exact).abs() < 1e-6 * exact, "r={r}");
        }
        for (t, v) in phi_n.knots().iter().zip(phi_n.values()).skip(1) {
            let exact = t.powi(6) / 16.0;
            assert!((v - exact).abs() < 1e-5 * exact, "t={t}");
        }
    }

    #[test]
    fn sobolev_conjugate_diverges_for_critical_growth() {
        let phi = YoungFunction1D::power_law(1.0, 2.0).unwrap();
        assert!(matches!(
            sobolev_conjugate(&phi, 2, &linspace(0.0, 1.0, 11)),
            Err(Error::DivergentAtZero { .. })
        ));
    }

    #[test]
    fn embedding_dichotomy_for_powers() {
        let class = |q: f64, n: usize| embedding_class(&YoungFunction1D::power_law(1.0, q).unwrap(), n).unwrap().class;
        assert_eq!(class(4.0, 2), EmbeddingClass::EssentiallyBounded);
        assert_eq!(class(1.5, 2), EmbeddingClass::OrliczEmbedding);
        assert_eq!(class(2.0, 2), EmbeddingClass::OrliczEmbedding);
        assert_eq!(class(3.0, 3), EmbeddingClass::OrliczEmbedding);
    }
}
