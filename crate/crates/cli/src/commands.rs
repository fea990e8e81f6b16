use rayon::prelude::*;
use serde::Serialize;

use aniso_symm::aniso_fd::{solve_fd, AnisoProblem};
use aniso_symm::numeric::{bisect_increasing, geomspace, interp_linear};
use aniso_symm::radial_solver::{check_hypotheses, ode_residual, solve_unchecked, HypothesisReport, RadialProblem};
use aniso_symm::symmetrize::{klimov as klimov_pipeline, write_grid_function};
use aniso_symm::young::YoungFunction1D;

use crate::checks::{run_suite, Check};
use crate::compare::run_case;
use crate::config::{parse, CompareConfig, KlimovConfig, SolveAnisoConfig, SolveRadialConfig, VerifyConfig};
use crate::output::Output;
use crate::CliError;

#[derive(Serialize)]
struct KlimovDiagnostics {
    fitted_exponent: f64,
    fitted_coefficient: f64,
    fit_range: (f64, f64),
    k1: Option<f64>,
    k2: Option<f64>,
    scales: usize,
    product_inverse: Option<ProductInverseFit>,
}

/// `Φ_♦⁻¹(r) ≈ c·(Π Υ_i⁻¹(r))^{1/N}` over the fit decade.
#[derive(Serialize)]
pub struct ProductInverseFit {
    pub constant: f64,
    pub max_relative_deviation: f64,
    pub r_range: (f64, f64),
}

fn inverse_of(f: &YoungFunction1D, r: f64) -> f64 {
    let mut hi = 1.0;
    while f.eval(hi) < r && hi < 1e300 {
        hi *= 2.0;
    }
    bisect_increasing(|s| f.eval(s) - r, 0.0, hi, 1e-14 * hi, 200)
}

pub fn product_inverse_fit(phi_d: &YoungFunction1D, components: &[YoungFunction1D], s_range: (f64, f64)) -> Option<ProductInverseFit> {
    let t = phi_d.as_table()?;
    let (r_lo, r_hi) = (phi_d.eval(s_range.0), phi_d.eval(s_range.1));
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return None;
    }
    let n = components.len() as f64;
    let ratios: Vec<f64> = geomspace(r_lo, r_hi, 50)
        .into_iter()
        .map(|r| {
            let inv_d = interp_linear(t.values(), t.knots(), r);
            let prod: f64 = components.iter().map(|c| inverse_of(c, r).ln()).sum::<f64>() / n;
            inv_d / prod.exp()
        })
        .collect();
    let constant = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let max_relative_deviation = ratios.iter().map(|r| (r / constant - 1.0).abs()).fold(0.0, f64::max);
    Some(ProductInverseFit { constant, max_relative_deviation, r_range: (r_lo, r_hi) })
}

pub fn klimov(text: &str, out: &Output) -> Result<(), CliError> {
    let cfg: KlimovConfig = parse(text)?;
    let res = klimov_pipeline(&cfg.phi, &cfg.settings)?;
    let table = res.phi_diamond.as_table().ok_or_else(|| CliError::Numerics("Φ_♦ is not tabulated".into()))?;
    out.write_csv("phi_diamond.csv", |comments| {
        let mut s = String::new();
        for c in comments {
            s.push_str(&format!("# {c}\n"));
        }
        s.push_str("s,phi_diamond\n");
        for (x, y) in table.knots().iter().zip(table.values()) {
            s.push_str(&format!("{x:.17e},{y:.17e}\n"));
        }
        s
    })?;
    let product_inverse = cfg
        .phi
        .separable_components()
        .and_then(|c| product_inverse_fit(&res.phi_diamond, &c, res.fit_range));
    let diag = KlimovDiagnostics {
        fitted_exponent: res.fitted_exponent,
        fitted_coefficient: res.fitted_coefficient,
        fit_range: res.fit_range,
        k1: res.equivalence.map(|e| e.0),
        k2: res.equivalence.map(|e| e.1),
        scales: res.scales,
        product_inverse,
    };
    out.write_json("klimov.json", &diag)?;
    println!("p̂ = {:.6}, Λ̂ = {:.6}, scales = {}", diag.fitted_exponent, diag.fitted_coefficient, diag.scales);
    Ok(())
}

#[derive(Serialize)]
struct RadialSummary<'a> {
    hypotheses: &'a HypothesisReport,
    iterations: usize,
    residual: f64,
    sup_norm: f64,
    clamped: usize,
    ode_residual: f64,
}

pub fn solve_radial(text: &str, out: &Output) -> Result<(), CliError> {
    let cfg: SolveRadialConfig = parse(text)?;
    let phi_d = cfg.phi_diamond.resolve(None)?;
    let data = cfg.data.rearranged(cfg.dim, cfg.measure, cfg.data_cells)?;
    let p = RadialProblem::new(cfg.dim, cfg.measure, phi_d, cfg.b.clone(), data)?;
    let hyp = check_hypotheses(&p);
    if !hyp.all_passed() {
        out.write_json("hypotheses.json", &hyp)?;
        return Err(CliError::Hypothesis(hyp.failure_summary()));
    }
    let sol = solve_unchecked(&p, &cfg.settings)?;
    out.write_csv("radial.csv", |c| sol.to_csv(c))?;
    let summary = RadialSummary {
        hypotheses: &hyp,
        iterations: sol.iterations,
        residual: sol.residual,
        sup_norm: sol.sup_norm(),
        clamped: sol.clamped,
        ode_residual: ode_residual(&sol, &p),
    };
    out.write_json("radial.json", &summary)?;
    println!("v*(0) = {:.10e} after {} iterations (residual {:.2e})", summary.sup_norm, sol.iterations, sol.residual);
    Ok(())
}

#[derive(Serialize)]
struct AnisoSummary {
    energy: f64,
    grad_norm: f64,
    last_step: f64,
    sweeps: usize,
    energy_nonincreasing: bool,
    sup_norm: f64,
}

pub fn solve_aniso(text: &str, out: &Output) -> Result<(), CliError> {
    let cfg: SolveAnisoConfig = parse(text)?;
    let f = cfg.data.sample(&cfg.domain, cfg.n)?;
    let p = AnisoProblem::new(f, cfg.lambda.clone(), cfg.p.clone(), cfg.b.clone())?;
    let sol = solve_fd(&p, &cfg.settings)?;
    let mut buf = Vec::new();
    let sidecar = write_grid_function(&sol.u, &mut buf)?;
    let body = String::from_utf8(buf).map_err(|e| CliError::Numerics(e.to_string()))?;
    out.write_csv("u.csv", |comments| comments.iter().map(|c| format!("# {c}\n")).collect::<String>() + &body)?;
    out.write_json("u.sidecar.json", &sidecar)?;
    let summary = AnisoSummary {
        energy: sol.energy,
        grad_norm: sol.grad_norm,
        last_step: sol.last_step,
        sweeps: sol.sweeps,
        energy_nonincreasing: sol.energy_nonincreasing(),
        sup_norm: sol.u.sup_abs(),
    };
    out.write_json("aniso.json", &summary)?;
    println!("J = {:.10e}, sup u = {:.6e}, {} sweeps", summary.energy, summary.sup_norm, summary.sweeps);
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    case: String,
    n: usize,
    sup_b_minus_b_tilde: f64,
    sup_f_minus_f_tilde: f64,
    tol_disc: f64,
    passed: bool,
    generalized: bool,
}

pub fn compare(text: &str, out: &Output) -> Result<(), CliError> {
    let cfg: CompareConfig = parse(text)?;
    let outcomes: Vec<_> = cfg.cases.par_iter().map(|c| run_case(c, cfg.tol_constant)).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for case in &outcomes {
        for (m, (_, margin)) in case.meshes.iter().zip(&case.margins) {
            let stem = format!("{}_n{}", case.case, m.n);
            out.write_json(&format!("{stem}.json"), m)?;
            out.write_csv(&format!("{stem}_margin.csv"), |c| margin.to_csv(c))?;
            rows.push(CompareRow {
                case: m.case.clone(),
                n: m.n,
                sup_b_minus_b_tilde: m.report.sup_b_minus_b_tilde,
                sup_f_minus_f_tilde: m.report.sup_f_minus_f_tilde,
                tol_disc: m.tol_disc,
                passed: m.passed,
                generalized: m.generalized,
            });
        }
    }
    out.write_json("compare.json", &rows)?;
    for r in &rows {
        let verdict = if r.generalized { "INFO" } else if r.passed { "PASS" } else { "FAIL" };
        println!(
            "{:<24} n={:<5} sup(B−B̃)₊={:.3e} sup(F−F̃)₊={:.3e} tol={:.3e} {verdict}",
            r.case, r.n, r.sup_b_minus_b_tilde, r.sup_f_minus_f_tilde, r.tol_disc
        );
    }
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed && !r.generalized).map(|r| format!("{} n={}", r.case, r.n)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(failed.join(", ")))
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<Vec<Check>, CliError> {
    let mut family = None;
    let mut checks = Vec::new();
    for &suite in &cfg.suites {
        checks.extend(run_suite(suite, cfg, &mut family)?);
    }
    Ok(checks)
}

pub fn verify(text: &str, out: &Output) -> Result<(), CliError> {
    let cfg: VerifyConfig = parse(text)?;
    let checks = run_verify(&cfg)?;
    out.write_json("verify.json", &checks)?;
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{:<20} {:<36} {verdict}  {}", format!("{:?}", c.suite), c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failed} of {} checks failed", checks.len())))
    }
}
