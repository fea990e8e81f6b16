//! One comparison case: both solvers at every mesh and the resulting reports.

use rayon::prelude::*;
use serde::Serialize;

use aniso_symm::aniso_fd::{solve_fd, AnisoProblem};
use aniso_symm::comparison::{
    concentration, corollary_checks, inverse_weaker_relation_check, k_variant_check, theorem_check, ComparisonReport,
    ConcentrationSet, CorollaryOutcome, CorollaryTolerances, MeshInfo,
};
use aniso_symm::numeric::{geomspace, linspace};
use aniso_symm::radial_solver::{solve, uniqueness_spread, RadialProblem, RadialSolution};
use aniso_symm::symmetrize::{
    decreasing_rearrangement, equivalence_constants, rearrange_young_multiscale, GridFunction, KlimovSettings,
    MonotoneCurve,
};
use aniso_symm::young::{YoungFunction1D, YoungFunctionND};

use crate::config::{CaseConfig, PhiDiamondSpec};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct MeshOutcome {
    pub case: String,
    pub n: usize,
    pub tol_disc: f64,
    pub report: ComparisonReport,
    /// `sup(B − B̃)₊ ≤ tol_disc`, the corollary path of `F ≤ F̃`.
    pub b_below_b_tilde: bool,
    pub uniqueness_spread: Option<f64>,
    pub uniqueness_passed: Option<bool>,
    /// Set when the radial side uses its own zero-order term; pass flags are
    /// then informative only.
    pub generalized: bool,
    pub passed: bool,
    pub fd_sweeps: usize,
    pub fd_grad_norm: f64,
    pub radial_iterations: usize,
    pub seconds: f64,
}

#[derive(Serialize)]
pub struct CaseOutcome {
    pub case: String,
    pub fitted_k: Option<f64>,
    pub meshes: Vec<MeshOutcome>,
    #[serde(skip)]
    pub margins: Vec<(usize, aniso_symm::comparison::MarginCurve)>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.meshes.iter().all(|m| m.passed || m.generalized)
    }
}

struct StarSide {
    phi_star: YoungFunction1D,
    k: f64,
}

fn klimov_settings(spec: &PhiDiamondSpec) -> KlimovSettings {
    match spec {
        PhiDiamondSpec::Klimov { settings, .. } => settings.clone(),
        PhiDiamondSpec::Explicit { .. } => KlimovSettings::default(),
    }
}

fn star_side(case: &CaseConfig, phi: &YoungFunctionND, phi_d: &YoungFunction1D) -> Result<StarSide, CliError> {
    let settings = klimov_settings(&case.phi_diamond);
    let table = rearrange_young_multiscale(phi, settings.s_min, settings.s_max, &settings)?;
    let phi_star = table.convex_minorant()?;
    let k = match case.k_variant.as_ref().and_then(|k| k.k) {
        Some(k) => k,
        None => {
            let top = phi_d.domain_end().unwrap_or(settings.s_max).min(settings.s_max);
            equivalence_constants(&table, phi_d, &geomspace(settings.s_min.max(top * 1e-3), 0.5 * top, 60))?.0
        }
    };
    Ok(StarSide { phi_star, k })
}

fn scaled(curve: &MonotoneCurve, k: f64) -> aniso_symm::Result<MonotoneCurve> {
    MonotoneCurve::new(
        curve.knots().to_vec(),
        curve.values().iter().map(|v| k * v).collect(),
        curve.monotonicity(),
        curve.interpretation(),
        curve.interpolation(),
    )
}

/// Runs every mesh of `case` (in parallel) with `tol_disc = C·(h + h_s)`.
pub fn run_case(case: &CaseConfig, tol_constant: f64) -> Result<CaseOutcome, CliError> {
    if case.meshes.is_empty() {
        return Err(CliError::Config(format!("case {}: no meshes", case.name)));
    }
    if !(case.data_tilde_scale > 0.0) {
        return Err(CliError::Config(format!("case {}: data_tilde_scale must be positive", case.name)));
    }
    let phi = YoungFunctionND::power_sum(case.lambda.clone(), case.p.clone())?;
    let phi_d = case.phi_diamond.resolve(Some(&phi))?;
    let star = match case.k_variant {
        Some(_) => Some(star_side(case, &phi, &phi_d)?),
        None => None,
    };
    let results: Vec<Result<(MeshOutcome, aniso_symm::comparison::MarginCurve), CliError>> = case
        .meshes
        .par_iter()
        .map(|&n| run_mesh(case, n, tol_constant, &phi_d, star.as_ref()))
        .collect();
    let mut meshes = Vec::new();
    let mut margins = Vec::new();
    for r in results {
        let (m, margin) = r?;
        margins.push((m.n, margin));
        meshes.push(m);
    }
    Ok(CaseOutcome { case: case.name.clone(), fitted_k: star.map(|s| s.k), meshes, margins })
}

fn run_mesh(
    case: &CaseConfig,
    n: usize,
    tol_constant: f64,
    phi_d: &YoungFunction1D,
    star: Option<&StarSide>,
) -> Result<(MeshOutcome, aniso_symm::comparison::MarginCurve), CliError> {
    let t = std::time::Instant::now();
    let f: GridFunction = case.data.sample(&case.domain, n)?;
    let problem = AnisoProblem::new(f.clone(), case.lambda.clone(), case.p.clone(), case.b.clone())?;
    let sol = solve_fd(&problem, &case.fd)?;
    let f_star = decreasing_rearrangement(&f);
    let f_tilde = scaled(&f_star, case.data_tilde_scale)?;
    let b_tilde = case.b_tilde.clone().unwrap_or_else(|| case.b.clone());
    let rp = RadialProblem::new(f.dim(), f.measure(), phi_d.clone(), b_tilde.clone(), f_tilde.clone())?;
    let rs = solve(&rp, &case.radial)?;

    let h = f.h();
    let h_s = f.measure() / case.radial.nodes as f64;
    let tol = tol_constant * (h + h_s);
    let cs = sides(&sol.u, &f_star, &case.b, &rs, &f_tilde, &b_tilde)?;
    let mut report = theorem_check(&cs, tol);
    report.mesh = Some(MeshInfo { h, h_s });
    let masses: Vec<(String, YoungFunction1D)> = case.masses.iter().map(|m| (m.name.clone(), m.function.clone())).collect();
    let tols = CorollaryTolerances { concentration: tol, mass_rel: 0.0, mass_abs: tol, linf: tol };
    let corollary = corollary_checks(&cs, &sol.u, &rs, &masses, &case.b, &tols)?;
    let b_below = report.sup_b_minus_b_tilde <= tol;

    let mut passed = report.passed;
    if let CorollaryOutcome::Checked(c) = &corollary {
        passed &= c.passed();
    }
    report.corollary = Some(corollary);

    if let Some(star) = star {
        let rp_star = RadialProblem::new(f.dim(), f.measure(), star.phi_star.clone(), b_tilde.clone(), f_tilde.clone())?;
        let rs_star = solve(&rp_star, &case.radial)?;
        let cs_star = sides(&sol.u, &f_star, &case.b, &rs_star, &f_tilde, &b_tilde)?;
        let kv = k_variant_check(&cs_star, star.k, tol)?;
        passed &= kv.passed;
        report.k_variant = Some(kv);
    }
    if let (Some(bt), Some(range)) = (&case.b_tilde, &case.weaker_samples) {
        let ys = linspace(range.t_min, range.t_max, range.samples.max(2));
        report.weaker_relation = Some(inverse_weaker_relation_check(bt, &case.b, &ys, 1e-12)?);
    }
    let (spread, uniq_ok) = if case.uniqueness {
        let s = uniqueness_spread(&rp, &case.radial)?;
        let ok = s <= 10.0 * case.radial.tol_fp;
        passed &= ok;
        (Some(s), Some(ok))
    } else {
        (None, None)
    };
    let margin = report.margin.clone();
    let outcome = MeshOutcome {
        case: case.name.clone(),
        n,
        tol_disc: tol,
        report,
        b_below_b_tilde: b_below,
        uniqueness_spread: spread,
        uniqueness_passed: uniq_ok,
        generalized: case.b_tilde.is_some(),
        passed,
        fd_sweeps: sol.sweeps,
        fd_grad_norm: sol.grad_norm,
        radial_iterations: rs.iterations,
        seconds: t.elapsed().as_secs_f64(),
    };
    Ok((outcome, margin))
}

fn sides(
    u: &GridFunction,
    f_star: &MonotoneCurve,
    b: &aniso_symm::radial_solver::ZeroOrderTerm,
    v: &RadialSolution,
    f_tilde: &MonotoneCurve,
    b_tilde: &aniso_symm::radial_solver::ZeroOrderTerm,
) -> aniso_symm::Result<ConcentrationSet> {
    ConcentrationSet::new(
        concentration(f_star, None)?,
        concentration(&decreasing_rearrangement(u), Some(b))?,
        concentration(f_tilde, None)?,
        concentration(&v.v_star()?, Some(b_tilde))?,
    )
}
