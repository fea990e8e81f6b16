//! The symmetrized radial problem on the ball Ω★, solved through its
//! one-dimensional form in the variable `s = ω_N |x|^N`:
//!
//! ```text
//! −v*'(s) = Ψ⁻¹((F̃(s) − B̃(s)) / c(s)) / c(s),   c(s) = N ω_N^{1/N} s^{1 − 1/N}
//! B̃(s) = ∫₀^s b(v*),  F̃(s) = ∫₀^s f̃*,  v*(|Ω|) = 0
//! ```

mod hypotheses;
mod zero_order;

pub use hypotheses::{check_hypotheses, HypothesisCheck, HypothesisReport};
pub use zero_order::ZeroOrderTerm;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{interp_linear, unit_ball_volume};
use crate::symmetrize::{Interpolation, Interpretation, Monotonicity, MonotoneCurve};
use crate::young::{psi_of, Psi, YoungFunction1D};

/// Radial problem data. `f_star` is the decreasing rearrangement of the
/// right-hand side on `[0, |Ω|]`.
#[derive(Clone, Debug)]
pub struct RadialProblem {
    dim: usize,
    measure: f64,
    phi: YoungFunction1D,
    psi: Psi,
    b: ZeroOrderTerm,
    f_star: MonotoneCurve,
}

impl RadialProblem {
    pub fn new(dim: usize, measure: f64, phi: YoungFunction1D, b: ZeroOrderTerm, f_star: MonotoneCurve) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("the radial problem needs N >= 2"));
        }
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(invalid("|Ω| must be positive and finite"));
        }
        if f_star.monotonicity() != Monotonicity::NonIncreasing {
            return Err(invalid("f̃* must be nonincreasing"));
        }
        let (s0, s1) = (f_star.knots()[0], f_star.end());
        if s0 != 0.0 || (s1 - measure).abs() > 1e-9 * measure {
            return Err(invalid(format!("f̃* must be given on [0, {measure}], found [{s0}, {s1}]")));
        }
        let psi = psi_of(&phi);
        Ok(Self { dim, measure, phi, psi, b, f_star })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn phi(&self) -> &YoungFunction1D {
        &self.phi
    }

    pub fn psi(&self) -> &Psi {
        &self.psi
    }

    pub fn b(&self) -> &ZeroOrderTerm {
        &self.b
    }

    pub fn f_star(&self) -> &MonotoneCurve {
        &self.f_star
    }

    /// Copy with a different zero-order term.
    pub fn with_b(&self, b: ZeroOrderTerm) -> Self {
        Self { b, ..self.clone() }
    }

    /// `c(s) = N ω_N^{1/N} s^{1/N'}`.
    pub fn c(&self, s: f64) -> f64 {
        let n = self.dim as f64;
        n * unit_ball_volume(self.dim).powf(1.0 / n) * s.powf(1.0 - 1.0 / n)
    }

    /// Radius of Ω★.
    pub fn radius(&self) -> f64 {
        (self.measure / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64)
    }
}

/// f̃* for a radial, nonincreasing profile `r ↦ f̃(r)` on Ω★, sampled on `n`
/// equal cells in `s` (cell-midpoint values).
pub fn radial_data(dim: usize, measure: f64, profile: impl Fn(f64) -> f64, n: usize) -> Result<MonotoneCurve> {
    if n == 0 {
        return Err(invalid("radial data needs at least one cell"));
    }
    let w = unit_ball_volume(dim);
    let r = |s: f64| (s / w).powf(1.0 / dim as f64);
    let h = measure / n as f64;
    let mut knots: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    knots[n] = measure;
    let mut values: Vec<f64> = (0..n).map(|k| profile(r((k as f64 + 0.5) * h))).collect();
    values.push(profile(r(measure)).min(values[n - 1]));
    MonotoneCurve::new(knots, values, Monotonicity::NonIncreasing, Interpretation::Rearrangement, Interpolation::Step)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGuess {
    Zero,
    Constant { value: f64 },
    /// Piecewise-linear `v*` through `(s, v)`.
    Profile { s: Vec<f64>, v: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSettings {
    /// Number of interior nodes in `s`.
    pub nodes: usize,
    /// Initial damping θ of the Picard update; halved when the residual grows.
    pub damping: f64,
    pub tol_fp: f64,
    pub max_iters: usize,
    /// Node `j` sits at `|Ω|·((j − ½)/n)^grading`; 1 is uniform.
    pub grading: f64,
    pub initial: InitialGuess,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self { nodes: 10_000, damping: 0.5, tol_fp: 1e-10, max_iters: 5000, grading: 1.0, initial: InitialGuess::Zero }
    }
}

/// Solution of the radial problem on the nodes `0 = s_0 < s_1 < … < s_{n+1} = |Ω|`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialSolution {
    pub dim: usize,
    pub measure: f64,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    /// `−v*'` at the nodes; the entry at `s = 0` is not defined and holds NaN.
    pub slope: Vec<f64>,
    pub b_conc: Vec<f64>,
    pub f_conc: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Nodes where `F̃ − B̃ < 0` had to be clamped in the final iterate.
    pub clamped: usize,
    /// Largest number of clamped nodes over all iterates.
    pub clamped_max: usize,
    pub final_damping: f64,
}

impl RadialSolution {
    pub fn v_star(&self) -> Result<MonotoneCurve> {
        MonotoneCurve::new(
            self.s.clone(),
            self.v.clone(),
            Monotonicity::NonIncreasing,
            Interpretation::Rearrangement,
            Interpolation::Linear,
        )
    }

    pub fn b_concentration(&self) -> Result<MonotoneCurve> {
        concentration_curve(&self.s, &self.b_conc)
    }

    pub fn f_concentration(&self) -> Result<MonotoneCurve> {
        concentration_curve(&self.s, &self.f_conc)
    }

    pub fn v_at(&self, s: f64) -> f64 {
        interp_linear(&self.s, &self.v, s.clamp(0.0, self.measure))
    }

    /// `r ↦ v(r) = v*(ω_N r^N)`, zero outside Ω★.
    pub fn radial_profile(&self, r: f64) -> f64 {
        let s = unit_ball_volume(self.dim) * r.abs().powi(self.dim as i32);
        if s >= self.measure {
            0.0
        } else {
            self.v_at(s)
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.v[0]
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("s,v_star,B_tilde,F_tilde\n");
        for k in 0..self.s.len() {
            out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", self.s[k], self.v[k], self.b_conc[k], self.f_conc[k]));
        }
        out
    }
}

fn concentration_curve(s: &[f64], v: &[f64]) -> Result<MonotoneCurve> {
    MonotoneCurve::new(s.to_vec(), v.to_vec(), Monotonicity::NonDecreasing, Interpretation::Concentration, Interpolation::Linear)
}

fn cumulative_trapezoid(s: &[f64], g: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    for k in 1..s.len() {
        out[k] = out[k - 1] + 0.5 * (g[k] + g[k - 1]) * (s[k] - s[k - 1]);
    }
    out
}

fn nodes(measure: f64, n: usize, grading: f64) -> Vec<f64> {
    let mut s = Vec::with_capacity(n + 2);
    s.push(0.0);
    s.extend((1..=n).map(|j| measure * ((j as f64 - 0.5) / n as f64).powf(grading)));
    s.push(measure);
    s
}

/// `∫₀^{s₁}` of a slope behaving like `A s^α`, with α read off the first two nodes.
fn first_cell(s1: f64, s2: f64, g1: f64, g2: f64) -> f64 {
    if !(g1 > 0.0 && g2 > 0.0) {
        return g1 * s1;
    }
    let alpha = ((g2 / g1).ln() / (s2 / s1).ln()).clamp(-0.95, 20.0);
    g1 * s1 / (1.0 + alpha)
}

struct Sweep {
    v: Vec<f64>,
    slope: Vec<f64>,
    clamped: usize,
}

fn sweep(p: &RadialProblem, s: &[f64], c: &[f64], f_conc: &[f64], b_conc: &[f64]) -> Result<Sweep> {
    let m = s.len();
    let mut slope = vec![f64::NAN; m];
    let mut clamped = 0;
    for j in 1..m {
        let mut g = f_conc[j] - b_conc[j];
        if g < 0.0 {
            clamped += 1;
            g = 0.0;
        }
        let x = p.psi.inverse(g / c[j]).map_err(|e| {
            Error::HypothesisViolation(format!("Ψ⁻¹ received an out-of-range value at s = {:.6e} ({e})", s[j]))
        })?;
        slope[j] = x / c[j];
    }
    let mut v = vec![0.0; m];
    for j in (1..m - 1).rev() {
        v[j] = v[j + 1] + 0.5 * (slope[j] + slope[j + 1]) * (s[j + 1] - s[j]);
    }
    v[0] = v[1] + first_cell(s[1], s[2], slope[1], slope[2]);
    Ok(Sweep { v, slope, clamped })
}

/// Damped Picard iteration on `B̃`. Refuses with `HypothesisViolation` when
/// [`check_hypotheses`] fails.
pub fn solve(p: &RadialProblem, settings: &SolveSettings) -> Result<RadialSolution> {
    let report = check_hypotheses(p);
    if !report.all_passed() {
        return Err(Error::HypothesisViolation(report.failure_summary()));
    }
    solve_unchecked(p, settings)
}

/// [`solve`] without the hypothesis gate.
pub fn solve_unchecked(p: &RadialProblem, settings: &SolveSettings) -> Result<RadialSolution> {
    if settings.nodes < 2 {
        return Err(invalid("the radial solver needs at least two nodes"));
    }
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(invalid("damping must lie in (0, 1]"));
    }
    if !(settings.grading >= 1.0 && settings.grading.is_finite()) {
        return Err(invalid("grading must be >= 1"));
    }
    let s = nodes(p.measure, settings.nodes, settings.grading);
    let c: Vec<f64> = s.iter().map(|&x| p.c(x)).collect();
    let f_conc = p.f_star.integrals_to(&s);
    let b_of = |v: &[f64]| -> Vec<f64> { v.iter().map(|&t| p.b.b(t)).collect() };

    let mut v: Vec<f64> = match &settings.initial {
        InitialGuess::Zero => vec![0.0; s.len()],
        InitialGuess::Constant { value } => vec![*value; s.len()],
        InitialGuess::Profile { s: ks, v: kv } => {
            if ks.len() < 2 || ks.len() != kv.len() {
                return Err(invalid("initial profile needs matching knots and values"));
            }
            s.iter().map(|&x| interp_linear(ks, kv, x)).collect()
        }
    };
    let mut b_conc = cumulative_trapezoid(&s, &b_of(&v));
    let mut theta = settings.damping;
    let mut prev = f64::INFINITY;
    let mut clamped_max = 0;
    for it in 1..=settings.max_iters {
        let sw = sweep(p, &s, &c, &f_conc, &b_conc)?;
        clamped_max = clamped_max.max(sw.clamped);
        let b_new = cumulative_trapezoid(&s, &b_of(&sw.v));
        let db = b_new.iter().zip(&b_conc).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dv = sw.v.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let res = db.max(dv);
        v = sw.v;
        if res < settings.tol_fp {
            return Ok(RadialSolution {
                dim: p.dim,
                measure: p.measure,
                s,
                v,
                slope: sw.slope,
                b_conc: b_new,
                f_conc,
                iterations: it,
                residual: res,
                clamped: sw.clamped,
                clamped_max,
                final_damping: theta,
            });
        }
        if res > prev {
            theta = (0.5 * theta).max(1.0 / 1024.0);
        }
        prev = res;
        for (b, n) in b_conc.iter_mut().zip(&b_new) {
            *b = (1.0 - theta) * *b + theta * n;
        }
    }
    Err(Error::NoConvergence { iterations: settings.max_iters, residual: prev })
}

/// Largest relative mismatch in
/// `c(s)·Ψ(|ṽ'| c(s)) = ∫₀^s (f̃* − b(ṽ))` over the interior nodes.
pub fn ode_residual(sol: &RadialSolution, p: &RadialProblem) -> f64 {
    let s = &sol.s;
    let m = s.len();
    let g: Vec<f64> = sol.v.iter().map(|&t| p.b.b(t)).collect();
    let b_conc = cumulative_trapezoid(s, &g);
    let scale = sol.f_conc.iter().zip(&b_conc).fold(0.0f64, |a, (f, b)| a.max((f - b).abs()));
    if scale == 0.0 {
        return sol.v.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    let mut worst = 0.0f64;
    for j in 2..m - 1 {
        let dv = (sol.v[j + 1] - sol.v[j - 1]) / (s[j + 1] - s[j - 1]);
        let rhs = sol.f_conc[j] - b_conc[j];
        let c = p.c(s[j]);
        let lhs = c * p.psi.value(dv.abs() * c);
        if dv == 0.0 && rhs.abs() <= 1e-14 * scale {
            continue;
        }
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-8 * scale));
    }
    worst
}

/// Largest deviation from 1 of `Ψ⁻¹((F̃ − B̃)/c) / (c·(−ṽ'))` over the interior
/// nodes where `ṽ` strictly decreases; equality holds for the exact radial solution.
pub fn jensen_defect(sol: &RadialSolution, p: &RadialProblem) -> Result<f64> {
    let s = &sol.s;
    let mut worst = 0.0f64;
    for j in 2..s.len() - 1 {
        let dv = (sol.v[j - 1] - sol.v[j + 1]) / (s[j + 1] - s[j - 1]);
        if dv <= 0.0 {
            continue;
        }
        let c = p.c(s[j]);
        let g = (sol.f_conc[j] - sol.b_conc[j]).max(0.0);
        let x = p.psi.inverse(g / c)?;
        worst = worst.max((x / (c * dv) - 1.0).abs());
    }
    Ok(worst)
}

/// Largest sup-distance between solutions started from zero, from the
/// `b ≡ 0` solution and from a constant well above both.
pub fn uniqueness_spread(p: &RadialProblem, settings: &SolveSettings) -> Result<f64> {
    let base = SolveSettings { initial: InitialGuess::Zero, ..settings.clone() };
    let free = solve(&p.with_b(ZeroOrderTerm::Zero), &base)?;
    let starts = [
        InitialGuess::Zero,
        InitialGuess::Profile { s: free.s.clone(), v: free.v.clone() },
        InitialGuess::Constant { value: 10.0 * free.sup_norm().max(1.0) },
    ];
    let sols = starts
        .into_iter()
        .map(|initial| solve(p, &SolveSettings { initial, ..settings.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let mut spread = 0.0f64;
    for a in 0..sols.len() {
        for b in a + 1..sols.len() {
            let d = sols[a].v.iter().zip(&sols[b].v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            spread = spread.max(d);
        }
    }
    Ok(spread)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk_problem(phi: YoungFunction1D, b: ZeroOrderTerm, f: f64) -> RadialProblem {
        let fs = radial_data(2, PI, |_| f, 1).unwrap();
        RadialProblem::new(2, PI, phi, b, fs).unwrap()
    }

    #[test]
    fn torsion_oracle() {
        let p = disk_problem(YoungFunction1D::power_law(1.0, 2.0).unwrap(), ZeroOrderTerm::Zero, 1.0);
        let sol = solve(&p, &SolveSettings::default()).unwrap();
        let err = sol.s.iter().zip(&sol.v).fold(0.0f64, |m, (s, v)| m.max((v - (PI - s) / (4.0 * PI)).abs()));
        assert!(err < 1e-10, "{err}");
        assert!((sol.radial_profile(0.5) - 0.75 / 4.0).abs() < 1e-10);
        assert!(ode_residual(&sol, &p) < 1e-8);
        assert!(jensen_defect(&sol, &p).unwrap() < 1e-8);
    }

    #[test]
    fn p_torsion_oracle() {
        let p = disk_problem(YoungFunction1D::power_law(1.0, 3.0).unwrap(), ZeroOrderTerm::Zero, 1.0);
        let sol = solve(&p, &SolveSettings::default()).unwrap();
        let k = (2.0 * PI.sqrt()).powf(-1.5) * 4.0 / 3.0;
        let err = sol.s.iter().zip(&sol.v).fold(0.0f64, |m, (s, v)| m.max((v - k * (PI.powf(0.75) - s.powf(0.75))).abs()));
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = disk_problem(YoungFunction1D::power_law(1.0, 2.0).unwrap(), ZeroOrderTerm::linear(1.0).unwrap(), 0.0);
        let sol = solve(&p, &SolveSettings::default()).unwrap();
        assert!(sol.v.iter().all(|v| *v == 0.0));
        assert_eq!(ode_residual(&sol, &p), 0.0);
    }

    #[test]
    fn absorption_lowers_the_solution_and_starts_agree() {
        let p = disk_problem(YoungFunction1D::power_law(1.0, 2.0).unwrap(), ZeroOrderTerm::power(1.0, 3.0).unwrap(), 20.0);
        let set = SolveSettings { nodes: 2000, ..Default::default() };
        let sol = solve(&p, &set).unwrap();
        assert!(sol.sup_norm() < 20.0 / (4.0 * PI) * PI);
        assert_eq!(sol.clamped, 0);
        assert!(ode_residual(&sol, &p) < 1e-2);
        assert!(uniqueness_spread(&p, &set).unwrap() < 10.0 * set.tol_fp);
    }

    #[test]
    fn perturbation_is_detected() {
        let p = disk_problem(YoungFunction1D::power_law(1.0, 2.0).unwrap(), ZeroOrderTerm::Zero, 1.0);
        let mut sol = solve(&p, &SolveSettings::default()).unwrap();
        for (s, v) in sol.s.iter().zip(sol.v.iter_mut()) {
            *v += 1e-2 * (-((s - 1.5) / 0.3).powi(2)).exp();
        }
        assert!(ode_residual(&sol, &p) > 1e-2);
    }
}
