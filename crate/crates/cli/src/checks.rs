//! Invariant checks run by `verify` and by the acceptance target.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use aniso_symm::numeric::{geomspace, linspace};
use aniso_symm::radial_solver::{solve, RadialProblem, SolveSettings, ZeroOrderTerm};
use aniso_symm::symmetrize::{
    klimov, polya_szego_gap, GridFunction, Interpolation, Interpretation, KlimovSettings, Monotonicity, MonotoneCurve,
};
use aniso_symm::young::{
    conjugate_1d, conjugate_nd, delta2_classify, psi_of, theta_of, young_gap, BoxGrid, YoungFunction1D,
    YoungFunctionND,
};
use aniso_symm::Result;

use crate::config::Suite;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    /// Measured quantity, compared against `bound` in the sense given by `detail`.
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, passed: bool, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self { suite, name: name.into(), passed, value, bound, detail: detail.into() }
    }
}

/// `Φ_♦` of `Σ |ξ_i|^{p_i}` in two dimensions.
pub fn power_sum_diamond(p: &[f64], s_max: f64) -> Result<YoungFunction1D> {
    let phi = YoungFunctionND::power_sum(vec![1.0; p.len()], p.to_vec())?;
    Ok(klimov(&phi, &KlimovSettings { s_max, equivalence: false, ..Default::default() })?.phi_diamond)
}

/// Largest `‖Φ•• − Φ‖_∞ / (2hL)` over random convex tables on `[0, 10]`.
pub fn fenchel_moreau(count: usize, seed: u64, perturbation: f64) -> Result<Check> {
    let h = 1e-3;
    let xs = linspace(0.0, 10.0, 10_001);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..count {
        let alpha = rng.gen_range(0.05..2.0);
        let kinks: Vec<(f64, f64)> = (0..rng.gen_range(0..20)).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..3.0))).collect();
        let phi = |s: f64| 0.5 * alpha * s * s + kinks.iter().map(|(d, w)| w * (s - d).max(0.0)).sum::<f64>();
        let ys: Vec<f64> = xs.iter().map(|&s| phi(s)).collect();
        let slope_end = alpha * 10.0 + kinks.iter().filter(|(d, _)| *d < 10.0).map(|(_, w)| w).sum::<f64>();
        // last secant slope of the table, which bounds the dual range
        let l = (ys[ys.len() - 1] - ys[ys.len() - 2]) / h;
        let table = YoungFunction1D::tabulated(xs.clone(), ys.clone())?;
        let conj = conjugate_1d(&table, &linspace(0.0, l, 10_001))?;
        // Φ•• is recoverable up to the last slope of the tabulated conjugate
        let x_max = conj.as_table().map(|t| t.last_slope()).unwrap_or(10.0);
        let back_grid: Vec<f64> = xs.iter().copied().filter(|x| *x > 0.0 && *x <= x_max).collect();
        let back = conjugate_1d(&conj, &back_grid)?;
        let err = back_grid
            .iter()
            .map(|&x| (back.eval(x) + perturbation - phi(x)).abs())
            .fold(0.0, f64::max);
        let ratio = err / (2.0 * h * slope_end.max(l));
        worst = worst.max(ratio);
        if ratio > 1.0 {
            failures += 1;
        }
    }
    Ok(Check::new(
        Suite::FenchelMoreau,
        "double conjugation",
        failures == 0,
        worst,
        1.0,
        format!("{count} random tables, worst ‖Φ•• − Φ‖/(2hL) = {worst:.3e}, {failures} failures"),
    ))
}

/// Young inequality `Φ(ξ) + Φ•(ξ') ≥ ξ·ξ'` for the discrete conjugate of `Σ|ξ_i|^{p_i}`.
pub fn young_gap_check(seed: u64) -> Result<Check> {
    let phi = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 4.0])?;
    let dual = BoxGrid::uniform(2, 8.0, 401)?;
    let conj = conjugate_nd(&phi, &dual)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..2000 {
        let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let xp = [rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)];
        let g = young_gap(&phi, &conj, &xi, &xp);
        let scale = 1.0 + (xi[0] * xp[0] + xi[1] * xp[1]).abs();
        worst = worst.min(g / scale);
    }
    let tol = 1e-9;
    Ok(Check::new(
        Suite::YoungGap,
        "Young inequality",
        worst >= -tol,
        worst,
        -tol,
        format!("smallest relative gap over 2000 random pairs: {worst:.3e}"),
    ))
}

/// Gaps of the Pólya–Szegő inequality per mesh for random smooth bumps on the
/// unit square, with `ε(h)` the largest deviation from the `h = 1/256` gap.
#[derive(Clone, Debug, Serialize)]
pub struct PolyaSzegoStudy {
    pub meshes: Vec<usize>,
    pub min_gap: Vec<f64>,
    pub eps: Vec<f64>,
    pub min_margin: f64,
    pub min_ratio: f64,
}

pub fn polya_szego_study(count: usize, seed: u64) -> Result<PolyaSzegoStudy> {
    let phi = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 4.0])?;
    let phi_d = power_sum_diamond(&[2.0, 4.0], 40.0)?;
    let meshes = [32usize, 64, 128, 256];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaps = vec![vec![0.0; count]; meshes.len()];
    for c in 0..count {
        let bumps: Vec<[f64; 4]> = (0..rng.gen_range(1..=3))
            .map(|_| [rng.gen_range(0.3..1.0), rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7), rng.gen_range(0.1..0.3)])
            .collect();
        let f = |x: &[f64]| {
            let cut = 16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
            cut * bumps.iter().map(|[a, cx, cy, w]| a * (-((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (w * w)).exp()).sum::<f64>()
        };
        for (m, &n) in meshes.iter().enumerate() {
            let u = GridFunction::square(2, vec![0.0, 0.0], 1.0, n)?.with_values(f);
            gaps[m][c] = polya_szego_gap(&u, &phi, &phi_d)?;
        }
    }
    let reference = &gaps[meshes.len() - 1];
    let coarse = meshes.len() - 1;
    let eps: Vec<f64> = (0..coarse)
        .map(|m| gaps[m].iter().zip(reference).map(|(g, r)| (g - r).abs()).fold(0.0, f64::max))
        .collect();
    let min_gap: Vec<f64> = (0..coarse).map(|m| gaps[m].iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let min_margin = (0..coarse)
        .map(|m| gaps[m].iter().map(|g| g + eps[m]).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    let min_ratio = eps.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    Ok(PolyaSzegoStudy { meshes: meshes[..coarse].to_vec(), min_gap, eps, min_margin, min_ratio })
}

pub fn polya_szego(count: usize, seed: u64) -> Result<Check> {
    let s = polya_szego_study(count, seed)?;
    Ok(Check::new(
        Suite::PolyaSzego,
        "gap refinement",
        s.min_margin >= 0.0 && s.min_ratio >= 1.5,
        s.min_ratio,
        1.5,
        format!("{count} bumps, ε(h) = {}, min gap + ε = {:.3e}, smallest ε reduction {:.2}", Fmt(&s.eps), s.min_margin, s.min_ratio),
    ))
}

struct Fmt<'a>(&'a [f64]);

impl std::fmt::Display for Fmt<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v:.3e}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Exponent pairs of the power-sum family used by the Δ₂ and Ψ checks.
pub const POWER_SUM_FAMILY: [[f64; 2]; 3] = [[2.0, 4.0], [1.5, 3.0], [2.0, 2.0]];

/// `Θ` is Δ₂ whenever `Φ_♦` is.
pub fn delta2_inheritance(family: &[(String, YoungFunction1D)]) -> Result<Vec<Check>> {
    family
        .iter()
        .map(|(name, phi_d)| {
            let end = phi_d.domain_end().unwrap_or(100.0);
            let knots: Vec<f64> = match phi_d.as_table() {
                Some(t) => t.knots().to_vec(),
                None => geomspace(1e-3, end, 400),
            };
            let theta = theta_of(phi_d, &knots)?.to_young()?;
            let probe = end / 2.0;
            let a = delta2_classify(phi_d, probe);
            let b = delta2_classify(&theta, probe);
            let passed = a.is_satisfied() && b.is_satisfied();
            Ok(Check::new(
                Suite::Delta2Inheritance,
                format!("Θ inherits Δ₂ ({name})"),
                passed,
                f64::from(u8::from(passed)),
                1.0,
                format!("Φ_♦: {a:?}; Θ: {b:?}"),
            ))
        })
        .collect()
}

/// `Φ_♦•(r) ≤ Φ_♦(Ψ_♦⁻¹(r))` and `Θ ≤ Φ_♦` at sampled points.
pub fn psi_inequalities(family: &[(String, YoungFunction1D)]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, phi_d) in family {
        let end = phi_d.domain_end().unwrap_or(100.0);
        let psi = psi_of(phi_d);
        let slope_end = phi_d.as_table().map(|t| t.last_slope()).unwrap_or_else(|| phi_d.slope(end));
        let r_max = psi.value(end).min(slope_end);
        let rs = geomspace(r_max * 1e-4, r_max, 300);
        let conj = conjugate_1d(phi_d, &rs)?;
        let mut worst = f64::INFINITY;
        for &r in &rs {
            let rhs = phi_d.eval(psi.inverse(r)?);
            worst = worst.min((rhs - conj.eval(r)) / rhs.max(1e-300));
        }
        out.push(Check::new(
            Suite::PsiInequality,
            format!("Φ_♦•(r) ≤ Φ_♦(Ψ_♦⁻¹(r)) ({name})"),
            worst >= -1e-9,
            worst,
            -1e-9,
            format!("smallest relative margin over 300 r: {worst:.3e}"),
        ));
        // below the first knot a table is linear and Θ = Φ_♦ there
        let start = phi_d.as_table().map(|t| t.knots()[1]).unwrap_or(end * 1e-4);
        let grid = geomspace(start, end, 300);
        let theta = theta_of(phi_d, &grid)?;
        let worst_t = grid
            .iter()
            .map(|&s| (phi_d.eval(s) - theta.eval(s)) / phi_d.eval(s).max(1e-300))
            .fold(f64::INFINITY, f64::min);
        out.push(Check::new(
            Suite::PsiInequality,
            format!("Θ ≤ Φ_♦ ({name})"),
            worst_t >= -1e-9,
            worst_t,
            -1e-9,
            format!("smallest relative margin over 300 s: {worst_t:.3e}"),
        ));
    }
    Ok(out)
}

/// Radial solve of `Φ(s) = s^q`, `b ≡ 0`, `f̃ ≡ 1` on the unit disk, with its
/// sup error against `exact` and the elapsed seconds.
pub fn torsion_error(q: f64, exact: impl Fn(f64) -> f64, perturbation: f64) -> Result<(f64, f64)> {
    let t = Instant::now();
    let measure = std::f64::consts::PI;
    let data = MonotoneCurve::new(
        vec![0.0, measure],
        vec![1.0, 1.0],
        Monotonicity::NonIncreasing,
        Interpretation::Rearrangement,
        Interpolation::Step,
    )?;
    let p = RadialProblem::new(2, measure, YoungFunction1D::power_law(1.0, q)?, ZeroOrderTerm::Zero, data)?;
    let sol = solve(&p, &SolveSettings { nodes: 10_000, ..Default::default() })?;
    let elapsed = t.elapsed().as_secs_f64();
    let err = sol.s.iter().zip(&sol.v).map(|(s, v)| (v + perturbation - exact(*s)).abs()).fold(0.0, f64::max);
    Ok((err, elapsed))
}

pub fn torsion_quadratic_exact(s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (pi - s) / (4.0 * pi)
}

/// `−v*' = (2√π)^{−3/2} s^{−1/4}` integrated from `s` to `π`.
pub fn torsion_cubic_exact(s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (2.0 * pi.sqrt()).powf(-1.5) * 4.0 / 3.0 * (pi.powf(0.75) - s.powf(0.75))
}

pub fn torsion(perturbation: f64) -> Result<Vec<Check>> {
    let (e2, t2) = torsion_error(2.0, torsion_quadratic_exact, perturbation)?;
    let (e3, _) = torsion_error(3.0, torsion_cubic_exact, perturbation)?;
    Ok(vec![
        Check::new(Suite::Torsion, "torsion Φ = s²", e2 < 1e-4, e2, 1e-4, format!("sup error {e2:.3e} in {t2:.3} s")),
        Check::new(Suite::Torsion, "p-torsion Φ = s³", e3 < 1e-3, e3, 1e-3, format!("sup error {e3:.3e}")),
    ])
}

/// The power-sum `Φ_♦` family shared by the Δ₂ and Ψ suites.
pub fn power_sum_family() -> Result<Vec<(String, YoungFunction1D)>> {
    POWER_SUM_FAMILY
        .iter()
        .map(|p| Ok((format!("p = ({}, {})", p[0], p[1]), power_sum_diamond(p, 10.0)?)))
        .collect()
}

pub fn run_suite(suite: Suite, cfg: &crate::config::VerifyConfig, family: &mut Option<Vec<(String, YoungFunction1D)>>) -> Result<Vec<Check>> {
    let mut family_ref = || -> Result<Vec<(String, YoungFunction1D)>> {
        if family.is_none() {
            *family = Some(power_sum_family()?);
        }
        Ok(family.clone().unwrap())
    };
    Ok(match suite {
        Suite::FenchelMoreau => vec![fenchel_moreau(cfg.fenchel_moreau_count, cfg.seed, cfg.perturbation)?],
        Suite::YoungGap => vec![young_gap_check(cfg.seed)?],
        Suite::PolyaSzego => vec![polya_szego(cfg.polya_szego_count, cfg.seed)?],
        Suite::Delta2Inheritance => delta2_inheritance(&family_ref()?)?,
        Suite::PsiInequality => psi_inequalities(&family_ref()?)?,
        Suite::Torsion => torsion(cfg.perturbation)?,
    })
}
