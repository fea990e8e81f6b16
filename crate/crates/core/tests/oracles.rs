use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use aniso_symm::aniso_fd::{solve_fd, AnisoProblem, FdSettings};
use aniso_symm::comparison::{concentration, difference_on_union};
use aniso_symm::numeric::geomspace;
use aniso_symm::radial_solver::{solve, RadialProblem, SolveSettings, ZeroOrderTerm};
use aniso_symm::symmetrize::{decreasing_rearrangement, klimov, GridFunction, KlimovSettings};
use aniso_symm::young::{YoungFunction1D, YoungFunctionND};

/// Coefficient `c` of the conjugate `c·|y|^q` of `a·|x|^p`.
fn power_conjugate(a: f64, p: f64) -> (f64, f64) {
    let q = p / (p - 1.0);
    ((1.0 - 1.0 / p) * (p * a).powf(-(q - 1.0)), q)
}

/// Closed-form `Φ_♦(s) = Λ s^{p̂}` of `λ₁|ξ₁|^{p₁} + λ₂|ξ₂|^{p₂}` in two
/// dimensions: the dual sublevel sets are generalized superellipses of area
/// `4 Γ(1+1/q₁) Γ(1+1/q₂) / Γ(1+1/q₁+1/q₂) · Π (t/c_i)^{1/q_i}`.
fn power_sum_diamond(lambda: [f64; 2], p: [f64; 2]) -> (f64, f64) {
    let (c1, q1) = power_conjugate(lambda[0], p[0]);
    let (c2, q2) = power_conjugate(lambda[1], p[1]);
    let sigma = 1.0 / q1 + 1.0 / q2;
    let k = 4.0 * gamma(1.0 + 1.0 / q1) * gamma(1.0 + 1.0 / q2) / gamma(1.0 + sigma) * c1.powf(-1.0 / q1) * c2.powf(-1.0 / q2);
    // (Φ_•)_★(r) = M r^Q
    let big_q = 2.0 / sigma;
    let m = (PI / k).powf(1.0 / sigma);
    let (lam, p_hat) = power_conjugate(m, big_q);
    (lam, p_hat)
}

fn check_power_sum(lambda: [f64; 2], p: [f64; 2], rel_tol: f64) {
    let (lam, p_hat) = power_sum_diamond(lambda, p);
    let phi = YoungFunctionND::power_sum(lambda.to_vec(), p.to_vec()).unwrap();
    let res = klimov(&phi, &KlimovSettings { equivalence: false, ..Default::default() }).unwrap();
    assert!((res.fitted_exponent - p_hat).abs() < 1e-2 * p_hat, "{} vs {p_hat}", res.fitted_exponent);
    for s in geomspace(0.1, 1.0, 40) {
        let exact = lam * s.powf(p_hat);
        let got = res.phi_diamond.eval(s);
        assert!((got - exact).abs() <= rel_tol * exact, "s = {s}: {got} vs {exact}");
    }
}

#[test]
fn power_sum_24_matches_closed_form() {
    let (_, p_hat) = power_sum_diamond([1.0, 1.0], [2.0, 4.0]);
    assert!((p_hat - 8.0 / 3.0).abs() < 1e-12);
    check_power_sum([1.0, 1.0], [2.0, 4.0], 1e-2);
}

#[test]
fn weighted_power_sum_matches_closed_form() {
    check_power_sum([0.5, 2.0], [1.5, 3.0], 1e-2);
}

#[test]
fn isotropic_power_sum_is_unchanged() {
    let (lam, p_hat) = power_sum_diamond([1.0, 1.0], [2.0, 2.0]);
    assert!((p_hat - 2.0).abs() < 1e-12 && (lam - 1.0).abs() < 1e-12);
    check_power_sum([1.0, 1.0], [2.0, 2.0], 5e-3);
}

/// For the Laplacian with radial data on a disk both sides solve the same
/// problem, so u* and v* differ only by discretization.
#[test]
fn fd_and_radial_agree_for_radial_data() {
    let radius = 1.0 / PI.sqrt();
    let b = ZeroOrderTerm::linear(1.0).unwrap();
    let bump = |r: f64| 4.0 * (-16.0 * r * r).exp();
    let mut errors = Vec::new();
    for n in [32, 64] {
        let f = GridFunction::disk(2, vec![0.0, 0.0], radius, n).unwrap().with_values(|x| bump((x[0] * x[0] + x[1] * x[1]).sqrt()));
        let ap = AnisoProblem::new(f.clone(), vec![0.5, 0.5], vec![2.0, 2.0], b.clone()).unwrap();
        let u = solve_fd(&ap, &FdSettings::default()).unwrap().u;
        let f_star = decreasing_rearrangement(&f);
        let rp = RadialProblem::new(2, f.measure(), YoungFunction1D::power_law(1.0, 2.0).unwrap(), b.clone(), f_star).unwrap();
        let v = solve(&rp, &SolveSettings::default()).unwrap();
        let u_conc = concentration(&decreasing_rearrangement(&u), Some(&b)).unwrap();
        let v_conc = concentration(&v.v_star().unwrap(), Some(&b)).unwrap();
        let (_, d) = difference_on_union(&u_conc, &v_conc);
        errors.push(d.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        assert!((u.sup_abs() - v.sup_norm()).abs() < 0.05 * v.sup_norm());
    }
    assert!(errors[1] < 0.7 * errors[0], "{errors:?}");
}
