use serde::Serialize;

use super::RadialProblem;
use crate::numeric::{geomspace, linspace};
use crate::symmetrize::f_double_star;
use crate::young::{psi_limit_at_zero, YoungFunction1D};

/// One hypothesis with its measured margin (positive when satisfied).
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failure_summary(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn push(&mut self, name: &str, passed: bool, margin: f64, detail: String) {
        self.checks.push(HypothesisCheck { name: name.into(), passed, margin, detail });
    }
}

/// Exponent of Ψ over the last decade of the table, or the exact growth
/// exponent of Ψ for closed forms.
fn tail_exponent(phi: &YoungFunction1D) -> f64 {
    match phi {
        YoungFunction1D::PowerLaw { exponent, .. } => exponent - 1.0,
        YoungFunction1D::PowerLog { p, alpha, .. } => {
            if *p > 1.0 {
                p - 1.0
            } else if *alpha > 0.0 {
                f64::MIN_POSITIVE
            } else {
                0.0
            }
        }
        YoungFunction1D::Tabulated(t) => {
            let (a, b) = (t.end() / 10.0, t.end());
            let (pa, pb) = (phi.eval(a) / a, phi.eval(b) / b);
            if pa > 0.0 {
                (pb / pa).log10()
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Checks H★1–H★7 numerically.
///
/// H★3 holds by construction (Ω★ is the ball of measure `|Ω|`) and H★5 is
/// reported as satisfied because tabulated data are bounded on a set of
/// finite measure.
pub fn check_hypotheses(p: &RadialProblem) -> HypothesisReport {
    let mut r = HypothesisReport::default();
    let phi = &p.phi;

    let s0 = phi.zero_threshold();
    r.push("H★1 strictly increasing", s0 == 0.0, -s0, format!("Φ vanishes on [0, {s0:e}]"));
    let q = tail_exponent(phi);
    r.push("H★1 superlinear", q > 1e-2, q, format!("growth exponent of Φ(s)/s at the end of its range: {q:.4}"));
    let (lim0, ok0) = psi_limit_at_zero(phi);
    r.push("H★1 ratio vanishes at 0", ok0, -lim0, format!("lim Φ(s)/s at 0 ≈ {lim0:e}"));

    let probe = linspace(-10.0, 10.0, 2001);
    let dd = match &p.b {
        super::ZeroOrderTerm::Zero => 0.0,
        b => b.min_divided_difference(&probe),
    };
    let b_ok = p.b.is_zero() || (dd > 0.0 && p.b.b(0.0) == 0.0);
    let detail = if p.b.is_zero() { "b ≡ 0".to_string() } else { format!("smallest divided difference on [-10, 10]: {dd:e}") };
    r.push("H★2 b increasing", b_ok, dd, detail);

    r.push("H★3 ball", true, p.measure, format!("Ω★ has radius {:.6}", p.radius()));

    let fs = &p.f_star;
    let fmin = fs.values().iter().copied().fold(f64::INFINITY, f64::min);
    r.push("H★4 data", fmin >= 0.0, fmin, format!("min f̃* = {fmin:e}, nonincreasing by construction"));

    r.push("H★5 data class", true, f64::INFINITY, "bounded data on a set of finite measure".into());

    // sup of s^{1/N} f̃**(s) / (N ω^{1/N}) = F̃(s)/c(s)
    let mut s: Vec<f64> = geomspace(p.measure * 1e-8, p.measure, 4000);
    s.extend(fs.knots().iter().copied().filter(|x| *x > 0.0));
    s.sort_by(f64::total_cmp);
    let f_ds = f_double_star(fs).ok();
    let sup = match &f_ds {
        Some(fd) => s.iter().map(|&x| fd.eval(x) * x / p.c(x)).fold(0.0, f64::max),
        None => f64::INFINITY,
    };
    let limit = p.psi.limit_estimate();
    let h6 = sup < limit;
    r.push("H★6 Ψ range", h6, limit - sup, format!("sup s^(1/N) f̃**(s) / (N ω^(1/N)) = {sup:.6e}, lim Ψ ≈ {limit:.6e}"));

    let (integral, ok7) = if h6 {
        let n = 4000;
        let h = p.measure / n as f64;
        let mid: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) * h).collect();
        let mut acc = 0.0;
        let mut ok = true;
        for (x, f) in mid.iter().zip(fs.integrals_to(&mid)) {
            match p.psi.inverse(f / p.c(*x)) {
                Ok(t) => acc += phi.eval(t) * h,
                Err(_) => ok = false,
            }
        }
        (acc, ok && acc.is_finite())
    } else {
        (f64::INFINITY, false)
    };
    r.push("H★7 energy finite", ok7, if ok7 { integral } else { f64::NEG_INFINITY }, format!("∫ Φ(Ψ⁻¹(…)) ds = {integral:.6e}"));
    r
}
