//! Concentration curves of both problems and the estimates between them:
//!
//! ```text
//! ‖(B − B̃)₊‖_∞ ≤ ‖(F − F̃)₊‖_∞
//! F ≤ F̃  ⇒  B ≤ B̃,  ∫ A(b(u)) ≤ ∫ A(b(v)),  ‖u‖_∞ ≤ ‖v‖_∞
//! ```

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::gauss_legendre;
use crate::radial_solver::{RadialSolution, ZeroOrderTerm};
use crate::symmetrize::{decreasing_rearrangement, GridFunction, Interpolation, Monotonicity, MonotoneCurve};
use crate::young::YoungFunction1D;

/// `s ↦ ∫₀^s g(curve)` with `g = b` when given and the identity otherwise.
/// Exact for step curves; for piecewise-linear curves `b` is applied at the knots.
pub fn concentration(curve: &MonotoneCurve, b: Option<&ZeroOrderTerm>) -> Result<MonotoneCurve> {
    if curve.monotonicity() != Monotonicity::NonIncreasing {
        return Err(invalid("concentrations are built from nonincreasing curves"));
    }
    let values: Vec<f64> = match b {
        Some(b) => curve.values().iter().map(|&t| b.b(t)).collect(),
        None => curve.values().to_vec(),
    };
    let mapped = MonotoneCurve::new(
        curve.knots().to_vec(),
        values,
        Monotonicity::NonIncreasing,
        curve.interpretation(),
        curve.interpolation(),
    )?;
    Ok(mapped.cumulative())
}

/// `F, B` of the anisotropic problem and `F̃, B̃` of the radial one on `[0, |Ω|]`.
#[derive(Clone, Debug)]
pub struct ConcentrationSet {
    pub f: MonotoneCurve,
    pub b: MonotoneCurve,
    pub f_tilde: MonotoneCurve,
    pub b_tilde: MonotoneCurve,
}

impl ConcentrationSet {
    pub fn new(f: MonotoneCurve, b: MonotoneCurve, f_tilde: MonotoneCurve, b_tilde: MonotoneCurve) -> Result<Self> {
        let m = f.end();
        for c in [&b, &f_tilde, &b_tilde] {
            if (c.end() - m).abs() > 1e-9 * m || c.knots()[0] != 0.0 {
                return Err(invalid("concentration curves must share the interval [0, |Ω|]"));
            }
        }
        Ok(Self { f, b, f_tilde, b_tilde })
    }

    /// Curves from the two solutions: `u` with datum `f` on the grid, and the
    /// radial solution with datum `f̃*`.
    pub fn from_solutions(
        u: &GridFunction,
        f: &GridFunction,
        b: &ZeroOrderTerm,
        v: &RadialSolution,
        f_tilde_star: &MonotoneCurve,
    ) -> Result<Self> {
        let u_star = decreasing_rearrangement(u);
        let f_star = decreasing_rearrangement(f);
        Self::new(
            concentration(&f_star, None)?,
            concentration(&u_star, Some(b))?,
            concentration(f_tilde_star, None)?,
            concentration(&v.v_star()?, Some(b))?,
        )
    }

    pub fn measure(&self) -> f64 {
        self.f.end()
    }

    /// Multiplies the anisotropic-side curves by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let sc = |c: &MonotoneCurve| {
            MonotoneCurve::new(
                c.knots().to_vec(),
                c.values().iter().map(|v| k * v).collect(),
                c.monotonicity(),
                c.interpretation(),
                c.interpolation(),
            )
        };
        Self::new(sc(&self.f)?, sc(&self.b)?, self.f_tilde.clone(), self.b_tilde.clone())
    }
}

/// `(s, a(s) − b(s))` on the union of the knots, which is exact for
/// piecewise-linear and step curves alike at the breakpoints.
pub fn difference_on_union(a: &MonotoneCurve, b: &MonotoneCurve) -> (Vec<f64>, Vec<f64>) {
    let mut s: Vec<f64> = a.knots().iter().chain(b.knots()).copied().collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let d = s.iter().map(|&x| a.eval(x) - b.eval(x)).collect();
    (s, d)
}

fn sup_positive(a: &MonotoneCurve, b: &MonotoneCurve) -> f64 {
    let mut worst = 0.0f64;
    let (_, d) = difference_on_union(a, b);
    for v in d {
        worst = worst.max(v);
    }
    // step curves also jump just before each knot
    if a.interpolation() == Interpolation::Step || b.interpolation() == Interpolation::Step {
        for &x in a.knots().iter().chain(b.knots()) {
            let y = x * (1.0 - 1e-15);
            worst = worst.max(a.eval(y) - b.eval(y));
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginCurve {
    pub s: Vec<f64>,
    pub b_minus_b_tilde: Vec<f64>,
    pub f_minus_f_tilde: Vec<f64>,
}

impl MarginCurve {
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("s,B_minus_B_tilde,F_minus_F_tilde\n");
        for k in 0..self.s.len() {
            out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", self.s[k], self.b_minus_b_tilde[k], self.f_minus_f_tilde[k]));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MassCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub b_below_b_tilde: bool,
    pub sup_b_minus_b_tilde: f64,
    pub masses: Vec<MassCheck>,
    pub u_sup: f64,
    pub v_sup: f64,
    pub linf_passed: bool,
}

impl CorollaryReport {
    pub fn passed(&self) -> bool {
        self.b_below_b_tilde && self.linf_passed && self.masses.iter().all(|m| m.passed)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CorollaryOutcome {
    /// `F ≤ F̃` failed, so the corollary does not apply.
    Skipped { sup_f_minus_f_tilde: f64 },
    Checked(CorollaryReport),
}

#[derive(Clone, Debug, Serialize)]
pub struct KVariantReport {
    pub k: f64,
    pub sup_kb_minus_b_tilde: f64,
    pub sup_kf_minus_f_tilde: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakerRelation {
    pub holds: bool,
    pub max_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshInfo {
    pub h: f64,
    pub h_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub sup_b_minus_b_tilde: f64,
    pub sup_f_minus_f_tilde: f64,
    pub tol_disc: f64,
    pub passed: bool,
    pub margin: MarginCurve,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corollary: Option<CorollaryOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_variant: Option<KVariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weaker_relation: Option<WeakerRelation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshInfo>,
}

/// Passes iff `sup(B − B̃)₊ ≤ sup(F − F̃)₊ + tol_disc`.
pub fn theorem_check(cs: &ConcentrationSet, tol_disc: f64) -> ComparisonReport {
    let sb = sup_positive(&cs.b, &cs.b_tilde);
    let sf = sup_positive(&cs.f, &cs.f_tilde);
    let mut s: Vec<f64> = [&cs.f, &cs.b, &cs.f_tilde, &cs.b_tilde].iter().flat_map(|c| c.knots().iter().copied()).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let margin = MarginCurve {
        b_minus_b_tilde: s.iter().map(|&x| cs.b.eval(x) - cs.b_tilde.eval(x)).collect(),
        f_minus_f_tilde: s.iter().map(|&x| cs.f.eval(x) - cs.f_tilde.eval(x)).collect(),
        s,
    };
    ComparisonReport {
        sup_b_minus_b_tilde: sb,
        sup_f_minus_f_tilde: sf,
        tol_disc,
        passed: sb <= sf + tol_disc,
        margin,
        corollary: None,
        k_variant: None,
        weaker_relation: None,
        mesh: None,
    }
}

/// Tolerances of the corollary checks; a check `lhs ≤ rhs` passes when
/// `lhs ≤ rhs + abs + rel·|rhs|`.
#[derive(Clone, Debug)]
pub struct CorollaryTolerances {
    pub concentration: f64,
    pub mass_rel: f64,
    pub mass_abs: f64,
    pub linf: f64,
}

/// `∫₀^{|Ω|} A(b(v*))` for piecewise-linear `v*`, by Gauss–Legendre per segment.
fn mass_linear(v: &MonotoneCurve, a: &YoungFunction1D, b: &ZeroOrderTerm) -> f64 {
    let (s, x) = (v.knots(), v.values());
    (0..s.len() - 1)
        .map(|k| {
            let (s0, s1, x0, x1) = (s[k], s[k + 1], x[k], x[k + 1]);
            gauss_legendre(|t| a.eval(b.b(x0 + (x1 - x0) * (t - s0) / (s1 - s0))), s0, s1)
        })
        .sum()
}

/// `∫₀^{|Ω|} A(b(u*))` for a step `u*`, exactly.
fn mass_step(u: &MonotoneCurve, a: &YoungFunction1D, b: &ZeroOrderTerm) -> f64 {
    let (s, x) = (u.knots(), u.values());
    (0..s.len() - 1).map(|k| a.eval(b.b(x[k])) * (s[k + 1] - s[k])).sum()
}

/// Checks `B ≤ B̃`, the mass inequalities for every `A` and `‖u‖_∞ ≤ ‖v‖_∞`,
/// provided `F ≤ F̃` holds within `tol.concentration`.
pub fn corollary_checks(
    cs: &ConcentrationSet,
    u: &GridFunction,
    v: &RadialSolution,
    a_list: &[(String, YoungFunction1D)],
    b: &ZeroOrderTerm,
    tol: &CorollaryTolerances,
) -> Result<CorollaryOutcome> {
    let sf = sup_positive(&cs.f, &cs.f_tilde);
    if sf > tol.concentration {
        return Ok(CorollaryOutcome::Skipped { sup_f_minus_f_tilde: sf });
    }
    let sb = sup_positive(&cs.b, &cs.b_tilde);
    let u_star = decreasing_rearrangement(u);
    let v_star = v.v_star()?;
    let masses = a_list
        .iter()
        .map(|(name, a)| {
            let lhs = mass_step(&u_star, a, b);
            let rhs = mass_linear(&v_star, a, b);
            MassCheck { name: name.clone(), lhs, rhs, passed: lhs <= rhs + tol.mass_abs + tol.mass_rel * rhs.abs() }
        })
        .collect();
    let (u_sup, v_sup) = (u.sup_abs(), v.sup_norm());
    Ok(CorollaryOutcome::Checked(CorollaryReport {
        b_below_b_tilde: sb <= tol.concentration,
        sup_b_minus_b_tilde: sb,
        masses,
        u_sup,
        v_sup,
        linf_passed: u_sup <= v_sup + tol.linf,
    }))
}

/// `sup(K B − B̃)₊ ≤ sup(K F − F̃)₊ + tol`.
pub fn k_variant_check(cs: &ConcentrationSet, k: f64, tol: f64) -> Result<KVariantReport> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid("K must be positive"));
    }
    let sc = cs.scaled(k)?;
    let sb = sup_positive(&sc.b, &sc.b_tilde);
    let sf = sup_positive(&sc.f, &sc.f_tilde);
    Ok(KVariantReport { k, sup_kb_minus_b_tilde: sb, sup_kf_minus_f_tilde: sf, passed: sb <= sf + tol })
}

/// Whether `ρ = b₁∘b₂⁻¹` is a contraction on the image of `samples` under
/// `b₂`; the defect is `max (|ρ(a) − ρ(b)| − |a − b|)₊` over sampled pairs.
pub fn weaker_relation_check(b1: &ZeroOrderTerm, b2: &ZeroOrderTerm, samples: &[f64], tol: f64) -> Result<WeakerRelation> {
    if b2.is_zero() {
        return Err(invalid("b₂ ≡ 0 has no inverse"));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&t| (b2.b(t), b1.b(t))).collect();
    Ok(contraction(&pts, tol))
}

/// The relation `b₁⁻¹ ≺ b₂⁻¹`: `ρ = b₁⁻¹∘b₂` sampled at `b₂⁻¹(y)` for `y` in `samples`.
pub fn inverse_weaker_relation_check(b1: &ZeroOrderTerm, b2: &ZeroOrderTerm, samples: &[f64], tol: f64) -> Result<WeakerRelation> {
    if b1.is_zero() || b2.is_zero() {
        return Err(invalid("b ≡ 0 has no inverse"));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&y| (b2.gamma(y), b1.gamma(y))).collect();
    Ok(contraction(&pts, tol))
}

fn contraction(pts: &[(f64, f64)], tol: f64) -> WeakerRelation {
    let mut defect = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i].1 - pts[j].1).abs() - (pts[i].0 - pts[j].0).abs();
            defect = defect.max(d);
        }
    }
    WeakerRelation { holds: defect <= tol, max_defect: defect }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetrize::Interpretation;
    use std::f64::consts::PI;

    fn step(knots: Vec<f64>, values: Vec<f64>) -> MonotoneCurve {
        MonotoneCurve::new(knots, values, Monotonicity::NonIncreasing, Interpretation::Rearrangement, Interpolation::Step).unwrap()
    }

    #[test]
    fn constant_gives_identity() {
        let c = concentration(&step(vec![0.0, PI], vec![1.0, 1.0]), None).unwrap();
        assert_eq!(c.eval(1.0), 1.0);
        assert_eq!(c.end(), PI);
    }

    #[test]
    fn torsion_concentration_with_linear_b() {
        let s = crate::numeric::linspace(0.0, PI, 2001);
        let v: Vec<f64> = s.iter().map(|x| (PI - x) / (4.0 * PI)).collect();
        let curve = MonotoneCurve::new(s, v, Monotonicity::NonIncreasing, Interpretation::Rearrangement, Interpolation::Linear).unwrap();
        let b = ZeroOrderTerm::linear(1.0).unwrap();
        let c = concentration(&curve, Some(&b)).unwrap();
        for &k in &[1usize, 600, 1500, 2000] {
            let x = c.knots()[k];
            assert!((c.eval(x) - (PI * x - x * x / 2.0) / (4.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_sides_pass_with_zero_margin() {
        let f = concentration(&step(vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 0.0]), None).unwrap();
        let b = concentration(&step(vec![0.0, 1.0, 2.0], vec![0.5, 0.1, 0.0]), None).unwrap();
        let cs = ConcentrationSet::new(f.clone(), b.clone(), f, b).unwrap();
        let r = theorem_check(&cs, 0.0);
        assert!(r.passed);
        assert_eq!(r.sup_b_minus_b_tilde, 0.0);
        let k = k_variant_check(&cs, 1.0, 0.0).unwrap();
        assert!(k.passed && k.sup_kb_minus_b_tilde == 0.0);
    }

    #[test]
    fn weaker_relation_examples() {
        let lin = ZeroOrderTerm::linear(1.0).unwrap();
        let half = ZeroOrderTerm::linear(0.5).unwrap();
        let cube = ZeroOrderTerm::power(1.0, 3.0).unwrap();
        let s = crate::numeric::linspace(-2.0, 2.0, 401);
        assert!(weaker_relation_check(&half, &lin, &s, 1e-12).unwrap().holds);
        assert_eq!(weaker_relation_check(&lin, &lin, &s, 0.0).unwrap().max_defect, 0.0);
        let w = weaker_relation_check(&lin, &cube, &s, 1e-12).unwrap();
        assert!(!w.holds && w.max_defect > 0.0);
        // ρ = ∛σ is a contraction for σ ≥ 1, ρ = σ³ is not near σ = 1
        assert!(inverse_weaker_relation_check(&cube, &lin, &linspace_pos(), 1e-12).unwrap().holds);
        assert!(inverse_weaker_relation_check(&lin, &cube, &[0.0, 0.5, 1.0], 1e-12).unwrap().max_defect > 0.0);
    }

    fn linspace_pos() -> Vec<f64> {
        crate::numeric::linspace(1.0, 8.0, 50)
    }
}
