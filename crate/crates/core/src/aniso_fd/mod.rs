//! Finite differences for the model anisotropic problem
//!
//! ```text
//! −Σ ∂_i(λ_i p_i |∂_i u|^{p_i−2} ∂_i u) + b(u) = f  in Ω,   u = 0 on ∂Ω
//! ```
//!
//! i.e. `a = ∇Φ` with `Φ(ξ) = Σ λ_i |ξ_i|^{p_i}`, solved as the minimizer of
//! `J(u) = Σ_cells [Φ(Du) + G(u) − f u] h^N` by nonlinear Gauss–Seidel.
//! Forward differences run over the grid extended by zero, which realizes the
//! Dirichlet condition on the cells outside the mask.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{abs_pow, signed_pow};
use crate::radial_solver::ZeroOrderTerm;
use crate::symmetrize::GridFunction;
use crate::young::YoungFunctionND;

mod newton;

/// Smallest exponent accepted by the solver.
pub const MIN_EXPONENT: f64 = 1.2;

#[derive(Clone, Debug)]
pub struct AnisoProblem {
    f: GridFunction,
    lambda: Vec<f64>,
    p: Vec<f64>,
    b: ZeroOrderTerm,
}

impl AnisoProblem {
    /// The grid and mask of `f` define Ω.
    pub fn new(f: GridFunction, lambda: Vec<f64>, p: Vec<f64>, b: ZeroOrderTerm) -> Result<Self> {
        let d = f.dim();
        if lambda.len() != d || p.len() != d {
            return Err(invalid(format!("λ and p need {d} entries")));
        }
        if lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("λ_i must be positive"));
        }
        if p.iter().any(|q| !(*q >= MIN_EXPONENT && q.is_finite())) {
            return Err(invalid(format!("exponents p_i must be at least {MIN_EXPONENT}")));
        }
        if f.masked_values().any(|v| v < 0.0) {
            return Err(invalid("f must be nonnegative"));
        }
        Ok(Self { f, lambda, p, b })
    }

    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn exponents(&self) -> &[f64] {
        &self.p
    }

    pub fn b(&self) -> &ZeroOrderTerm {
        &self.b
    }

    pub fn phi(&self) -> YoungFunctionND {
        YoungFunctionND::PowerSum { lambda: self.lambda.clone(), p: self.p.clone() }
    }

    /// Copy with other data on the same grid.
    pub fn with_f(&self, f: GridFunction) -> Result<Self> {
        if f.shape() != self.f.shape() || f.mask() != self.f.mask() {
            return Err(invalid("new data must live on the same grid and mask"));
        }
        Self::new(f, self.lambda.clone(), self.p.clone(), self.b.clone())
    }

    /// `min (a(ξ)·ξ − Φ(ξ))` over the samples; nonnegative means the
    /// ellipticity condition holds there.
    pub fn ellipticity_margin(&self, samples: &[Vec<f64>]) -> f64 {
        samples
            .iter()
            .map(|xi| {
                (0..xi.len())
                    .map(|i| self.lambda[i] * (self.p[i] - 1.0) * abs_pow(xi[i], self.p[i]))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn zero_grid(&self) -> GridFunction {
        self.f.clone().with_values(|_| 0.0)
    }
}

/// Cell ordering inside a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Lexicographic,
    RedBlack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSettings {
    /// Target for the sup-norm of the discrete energy gradient per unit cell measure.
    pub tol_grad: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor; `None` picks one from the grid size.
    pub omega: Option<f64>,
    /// Start from the interpolated solution on the grid with twice the spacing.
    pub nested: bool,
    pub ordering: Ordering,
    /// Sweeps between residual and energy evaluations.
    pub check_every: usize,
    /// Also stop once no cell moves by more than this in a sweep.
    pub tol_step: f64,
    /// Follow every sweep with a Newton correction.
    pub newton: bool,
}

impl Default for FdSettings {
    fn default() -> Self {
        Self { tol_grad: 1e-8, max_sweeps: 200_000, omega: None, nested: true, ordering: Ordering::Lexicographic, check_every: 1, tol_step: 1e-11, newton: true }
    }
}

#[derive(Clone, Debug)]
pub struct FDSolution {
    pub u: GridFunction,
    pub energy: f64,
    pub grad_norm: f64,
    /// Largest cell update in the last sweep.
    pub last_step: f64,
    /// Sweeps on the finest grid.
    pub sweeps: usize,
    /// Energy after every check, starting with the initial guess.
    pub energy_history: Vec<f64>,
}

impl FDSolution {
    pub fn energy_nonincreasing(&self) -> bool {
        self.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-300))
    }
}

/// Masked cells and their neighbors; index `len` stands for a zero value.
struct Stencil {
    cells: Vec<usize>,
    nbr: Vec<usize>,
    /// Neighbors as positions in `cells`, `usize::MAX` outside the mask.
    nci: Vec<usize>,
    dim: usize,
    zero: usize,
}

impl Stencil {
    fn new(g: &GridFunction) -> Self {
        let d = g.dim();
        let st = g.strides();
        let zero = g.len();
        let mut cells = Vec::new();
        let mut nbr = Vec::new();
        let mut m = vec![0; d];
        for k in 0..g.len() {
            if !g.mask()[k] {
                continue;
            }
            cells.push(k);
            g.multi_index(k, &mut m);
            for i in 0..d {
                let lo = if m[i] > 0 && g.mask()[k - st[i]] { k - st[i] } else { zero };
                let hi = if m[i] + 1 < g.shape()[i] && g.mask()[k + st[i]] { k + st[i] } else { zero };
                nbr.push(lo);
                nbr.push(hi);
            }
        }
        let mut pos = vec![usize::MAX; g.len() + 1];
        for (ci, &k) in cells.iter().enumerate() {
            pos[k] = ci;
        }
        let nci = nbr.iter().map(|&n| pos[n]).collect();
        Self { cells, nbr, nci, dim: d, zero }
    }

    fn neighbors(&self, c: usize) -> &[usize] {
        &self.nbr[2 * self.dim * c..2 * self.dim * (c + 1)]
    }
}

/// Per-axis constants: `μ_i = λ_i / h^{p_i}` and `κ_i = p_i μ_i`.
struct Coeffs {
    p: Vec<f64>,
    mu: Vec<f64>,
    kappa: Vec<f64>,
}

impl Coeffs {
    fn new(pr: &AnisoProblem) -> Self {
        let h = pr.f.h();
        let mu: Vec<f64> = pr.lambda.iter().zip(&pr.p).map(|(l, q)| l / h.powf(*q)).collect();
        let kappa = mu.iter().zip(&pr.p).map(|(m, q)| m * q).collect();
        Self { p: pr.p.clone(), mu, kappa }
    }
}

/// Derivative of the local energy in the cell value `t`.
#[inline]
fn local_grad(t: f64, nb: &[f64], c: &Coeffs, b: &ZeroOrderTerm, f: f64) -> f64 {
    let mut g = b.b(t) - f;
    for (i, pair) in nb.chunks_exact(2).enumerate() {
        let e = c.p[i] - 1.0;
        g += c.kappa[i] * (signed_pow(t - pair[0], e) + signed_pow(t - pair[1], e));
    }
    g
}

#[inline]
fn local_hessian(t: f64, nb: &[f64], c: &Coeffs, b: &ZeroOrderTerm) -> f64 {
    let mut g = b.derivative(t);
    for (i, pair) in nb.chunks_exact(2).enumerate() {
        let e = c.p[i] - 2.0;
        let (x, y) = ((t - pair[0]).abs(), (t - pair[1]).abs());
        let w = |a: f64| if a == 0.0 && e < 0.0 { f64::INFINITY } else { abs_pow(a, e) };
        g += c.kappa[i] * (c.p[i] - 1.0) * (w(x) + w(y));
    }
    g
}

#[inline]
fn local_energy(t: f64, nb: &[f64], c: &Coeffs, b: &ZeroOrderTerm, f: f64) -> f64 {
    let mut e = b.antiderivative(t) - f * t;
    for (i, pair) in nb.chunks_exact(2).enumerate() {
        e += c.mu[i] * (abs_pow(t - pair[0], c.p[i]) + abs_pow(t - pair[1], c.p[i]));
    }
    e
}

/// Minimizer of the local energy: safeguarded Newton inside a bracket that is
/// valid whenever `f ≥ 0`.
fn local_solve(t0: f64, nb: &[f64], c: &Coeffs, b: &ZeroOrderTerm, f: f64, tol: f64) -> f64 {
    let nmin = nb.iter().copied().fold(0.0f64, f64::min);
    let nmax = nb.iter().copied().fold(0.0f64, f64::max);
    let delta = if f > 0.0 { (f / (2.0 * c.kappa[0])).powf(1.0 / (c.p[0] - 1.0)) } else { 0.0 };
    let (mut lo, mut hi) = (nmin, nmax + delta);
    if hi <= lo {
        return lo;
    }
    let mut t = t0.clamp(lo, hi);
    let mut last = f64::INFINITY;
    let mut bisect_next = false;
    for _ in 0..100 {
        let g = local_grad(t, nb, c, b, f);
        if g.abs() <= tol {
            return t;
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let next = if bisect_next {
            mid
        } else {
            let tn = t - g / local_hessian(t, nb, c, b);
            if tn > lo && tn < hi {
                tn
            } else {
                mid
            }
        };
        bisect_next = g.abs() > 0.5 * last;
        last = g.abs();
        t = next;
    }
    t
}

/// `J(u) = Σ_cells [Σ_i λ_i |D_i u|^{p_i} + G(u) − f u] h^N`.
pub fn energy(u: &GridFunction, p: &AnisoProblem) -> f64 {
    let s = Stencil::new(u);
    let c = Coeffs::new(p);
    let mut vals = u.values().to_vec();
    vals.push(0.0);
    energy_vals(&s, &c, &vals, p) * u.cell_measure()
}

/// `J / h^N` on the padded value vector.
fn energy_vals(s: &Stencil, c: &Coeffs, vals: &[f64], p: &AnisoProblem) -> f64 {
    let mut acc = 0.0;
    for (ci, &k) in s.cells.iter().enumerate() {
        let t = vals[k];
        let nb = s.neighbors(ci);
        acc += p.b.antiderivative(t) - p.f.values()[k] * t;
        for i in 0..s.dim {
            // forward edge, plus the backward edge when the lower neighbor is outside
            acc += c.mu[i] * abs_pow(vals[nb[2 * i + 1]] - t, c.p[i]);
            if nb[2 * i] == s.zero {
                acc += c.mu[i] * abs_pow(t, c.p[i]);
            }
        }
    }
    acc
}

/// Sup-norm of `∂J/∂u_k / h^N` over the masked cells.
pub fn gradient_norm(u: &GridFunction, p: &AnisoProblem) -> f64 {
    let s = Stencil::new(u);
    let c = Coeffs::new(p);
    let mut vals = u.values().to_vec();
    vals.push(0.0);
    gradient_norm_with(&s, &c, &vals, p)
}

fn gradient_norm_with(s: &Stencil, c: &Coeffs, vals: &[f64], p: &AnisoProblem) -> f64 {
    let mut nb = vec![0.0; 2 * s.dim];
    let mut worst = 0.0f64;
    for (ci, &k) in s.cells.iter().enumerate() {
        for (slot, &n) in nb.iter_mut().zip(s.neighbors(ci)) {
            *slot = vals[n];
        }
        worst = worst.max(local_grad(vals[k], &nb, c, &p.b, p.f.values()[k]).abs());
    }
    worst
}

fn auto_omega(g: &GridFunction) -> f64 {
    let n = *g.shape().iter().max().unwrap() as f64;
    (2.0 / (1.0 + (std::f64::consts::PI / n).sin())).min(1.95)
}

/// Coarse problem on the grid with twice the spacing: a coarse cell is in the
/// mask when all its children are, and carries their mean datum.
fn coarsen(p: &AnisoProblem) -> Option<AnisoProblem> {
    let g = &p.f;
    if g.shape().iter().any(|n| n % 2 != 0 || *n < 16) {
        return None;
    }
    let d = g.dim();
    let shape: Vec<usize> = g.shape().iter().map(|n| n / 2).collect();
    let total: usize = shape.iter().product();
    let mut all = vec![true; total];
    let mut sum = vec![0.0; total];
    let mut m = vec![0; d];
    for k in 0..g.len() {
        g.multi_index(k, &mut m);
        let mut ck = 0;
        for i in 0..d {
            ck = ck * shape[i] + m[i] / 2;
        }
        all[ck] &= g.mask()[k];
        sum[ck] += g.values()[k];
    }
    let mut cg = GridFunction::explicit(g.lower().to_vec(), 2.0 * g.h(), shape, all).ok()?;
    let scale = 1.0 / (1 << d) as f64;
    cg.set_values(sum.into_iter().map(|v| v * scale).collect()).ok()?;
    AnisoProblem::new(cg, p.lambda.clone(), p.p.clone(), p.b.clone()).ok()
}

/// Multilinear interpolation of coarse cell-center values (zero outside the
/// coarse mask) at the fine cell centers.
fn prolong(coarse: &GridFunction, fine: &GridFunction) -> Vec<f64> {
    let d = fine.dim();
    let cst = coarse.strides();
    let mut x = vec![0.0; d];
    let mut out = vec![0.0; fine.len()];
    for k in 0..fine.len() {
        if !fine.mask()[k] {
            continue;
        }
        fine.center(k, &mut x);
        let mut base = vec![0i64; d];
        let mut w = vec![0.0; d];
        for i in 0..d {
            let q = (x[i] - coarse.lower()[i]) / coarse.h() - 0.5;
            base[i] = q.floor() as i64;
            w[i] = q - q.floor();
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut flat = 0usize;
            let mut inside = true;
            for i in 0..d {
                let bit = (corner >> i) & 1;
                let j = base[i] + bit as i64;
                weight *= if bit == 1 { w[i] } else { 1.0 - w[i] };
                if j < 0 || j >= coarse.shape()[i] as i64 {
                    inside = false;
                } else {
                    flat += j as usize * cst[i];
                }
            }
            if inside && coarse.mask()[flat] {
                acc += weight * coarse.values()[flat];
            }
        }
        out[k] = acc;
    }
    out
}

/// Minimizes `J` by nonlinear Gauss–Seidel with safeguarded over-relaxation:
/// every cell update lowers the local energy, so `J` never increases.
pub fn solve_fd(p: &AnisoProblem, settings: &FdSettings) -> Result<FDSolution> {
    let initial = if settings.nested {
        match coarsen(p) {
            Some(cp) => {
                let coarse = solve_fd(&cp, &FdSettings { tol_grad: settings.tol_grad * 1e2, ..settings.clone() })?;
                Some(prolong(&coarse.u, &p.f))
            }
            None => None,
        }
    } else {
        None
    };
    solve_from(p, settings, initial)
}

/// [`solve_fd`] from a given initial guess (zero when `None`).
pub fn solve_from(p: &AnisoProblem, settings: &FdSettings, initial: Option<Vec<f64>>) -> Result<FDSolution> {
    if !(settings.tol_grad > 0.0) || settings.check_every == 0 {
        return Err(invalid("tol_grad must be positive and check_every nonzero"));
    }
    let mut u = p.zero_grid();
    if let Some(v) = initial {
        u.set_values(v.into_iter().map(|x| x.max(0.0)).collect())?;
    }
    let s = Stencil::new(&u);
    let c = Coeffs::new(p);
    let f = p.f.values();
    let mut vals = u.values().to_vec();
    vals.push(0.0);
    let mut omega = settings.omega.unwrap_or_else(|| auto_omega(&u));
    if !(omega > 0.0 && omega < 2.0) {
        return Err(invalid("over-relaxation factor must lie in (0, 2)"));
    }
    let order: Vec<usize> = match settings.ordering {
        Ordering::Lexicographic => (0..s.cells.len()).collect(),
        Ordering::RedBlack => {
            let mut m = vec![0; s.dim];
            let color = |k: usize, m: &mut [usize]| {
                u.multi_index(k, m);
                m.iter().sum::<usize>() % 2
            };
            let mut o: Vec<usize> = (0..s.cells.len()).filter(|&ci| color(s.cells[ci], &mut m) == 0).collect();
            o.extend((0..s.cells.len()).filter(|&ci| color(s.cells[ci], &mut m) == 1));
            o
        }
    };
    let tol_local = 1e-3 * settings.tol_grad;
    let mut nb = vec![0.0; 2 * s.dim];
    let mut history = vec![energy_vals(&s, &c, &vals, p) * u.cell_measure()];
    let mut res = gradient_norm_with(&s, &c, &vals, p);
    let mut sweeps = 0;
    let mut step = f64::INFINITY;
    while res >= settings.tol_grad && step >= settings.tol_step {
        if sweeps >= settings.max_sweeps {
            return Err(Error::NoConvergence { iterations: sweeps, residual: res });
        }
        step = 0.0;
        for &ci in &order {
            let k = s.cells[ci];
            for (slot, &n) in nb.iter_mut().zip(s.neighbors(ci)) {
                *slot = vals[n];
            }
            let old = vals[k];
            let star = local_solve(old, &nb, &c, &p.b, f[k], tol_local);
            let mut new = star;
            if omega != 1.0 {
                let relaxed = (old + omega * (star - old)).max(star.min(0.0));
                if local_energy(relaxed, &nb, &c, &p.b, f[k]) <= local_energy(old, &nb, &c, &p.b, f[k]) {
                    new = relaxed;
                }
            }
            step = step.max((new - old).abs());
            vals[k] = new;
        }
        if settings.newton {
            step = step.max(newton::newton_step(&s, &c, &mut vals, p));
        }
        sweeps += 1;
        if sweeps % settings.check_every == 0 || step < settings.tol_step {
            let r = gradient_norm_with(&s, &c, &vals, p);
            if r > res && omega > 1.0 {
                omega = 1.0 + 0.5 * (omega - 1.0);
            }
            res = r;
            history.push(energy_vals(&s, &c, &vals, p) * u.cell_measure());
        }
    }
    vals.pop();
    u.set_values(vals)?;
    let energy = energy(&u, p);
    Ok(FDSolution { u, energy, grad_norm: res, last_step: step, sweeps, energy_history: history })
}

/// `max_φ |Σ a(Du)·Dφ h^N + Σ (b(u) − f) φ h^N|` over the trial functions,
/// each evaluated edge by edge.
pub fn weak_residual(sol: &FDSolution, p: &AnisoProblem, trials: &[GridFunction]) -> Result<f64> {
    let u = &sol.u;
    let s = Stencil::new(u);
    let c = Coeffs::new(p);
    let h = u.h();
    let mut uv = u.values().to_vec();
    uv.push(0.0);
    let mut worst = 0.0f64;
    for phi in trials {
        if phi.shape() != u.shape() {
            return Err(invalid("trial function lives on a different grid"));
        }
        if phi.values().iter().zip(u.mask()).any(|(v, m)| !m && *v != 0.0) {
            return Err(invalid("trial function must vanish outside the mask"));
        }
        let mut pv = phi.values().to_vec();
        pv.push(0.0);
        let mut acc = 0.0;
        for (ci, &k) in s.cells.iter().enumerate() {
            let nb = s.neighbors(ci);
            acc += (p.b.b(uv[k]) - p.f.values()[k]) * pv[k];
            for i in 0..s.dim {
                // a_i(D_i u) = λ_i p_i |D_i u|^{p_i−2} D_i u on the forward edge, and on the
                // backward edge when the lower neighbor is outside
                let flux = |du: f64| p.lambda[i] * p.p[i] * signed_pow(du, c.p[i] - 1.0);
                let up = nb[2 * i + 1];
                acc += flux((uv[up] - uv[k]) / h) * (pv[up] - pv[k]) / h;
                if nb[2 * i] == s.zero {
                    acc += flux(uv[k] / h) * pv[k] / h;
                }
            }
        }
        worst = worst.max((acc * u.cell_measure()).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(n: usize) -> GridFunction {
        GridFunction::disk(2, vec![0.0, 0.0], 1.0, n).unwrap()
    }

    #[test]
    fn single_bump_energy_counts_four_jumps() {
        let g = GridFunction::square(2, vec![0.0, 0.0], 1.0, 8).unwrap();
        let p = AnisoProblem::new(g.clone(), vec![1.0, 1.0], vec![2.0, 2.0], ZeroOrderTerm::Zero).unwrap();
        let mut v = vec![0.0; g.len()];
        v[3 * 8 + 4] = 1.0;
        let mut u = g.clone();
        u.set_values(v).unwrap();
        assert!((energy(&u, &p) - 4.0).abs() < 1e-12);
        assert_eq!(energy(&g, &p), 0.0);
    }

    #[test]
    fn torsion_on_disk() {
        let f = disk(64).with_values(|_| 1.0);
        let p = AnisoProblem::new(f, vec![0.5, 0.5], vec![2.0, 2.0], ZeroOrderTerm::Zero).unwrap();
        let sol = solve_fd(&p, &FdSettings::default()).unwrap();
        assert!(sol.energy_nonincreasing());
        let mut x = vec![0.0; 2];
        let mut err = 0.0f64;
        for k in 0..sol.u.len() {
            if sol.u.mask()[k] {
                sol.u.center(k, &mut x);
                err = err.max((sol.u.values()[k] - (1.0 - x[0] * x[0] - x[1] * x[1]) / 4.0).abs());
            }
        }
        assert!(err < 2.0 * sol.u.h(), "{err}");
        assert!(sol.u.masked_values().all(|v| v >= 0.0));
    }

    #[test]
    fn zero_data_gives_zero() {
        let f = disk(16).with_values(|_| 0.0);
        let p = AnisoProblem::new(f, vec![1.0, 1.0], vec![1.5, 3.0], ZeroOrderTerm::linear(1.0).unwrap()).unwrap();
        let sol = solve_fd(&p, &FdSettings::default()).unwrap();
        assert!(sol.u.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn weak_residual_vanishes_at_the_minimizer() {
        let g = GridFunction::square(2, vec![-0.5, -0.5], 1.0, 32).unwrap();
        let f = g.clone().with_values(|x| (-(x[0] * x[0] + x[1] * x[1]) * 8.0).exp());
        let p = AnisoProblem::new(f, vec![1.0, 1.0], vec![1.5, 3.0], ZeroOrderTerm::power(1.0, 3.0).unwrap()).unwrap();
        let set = FdSettings { tol_grad: 1e-9, ..Default::default() };
        let sol = solve_fd(&p, &set).unwrap();
        assert!(sol.energy_nonincreasing());
        let trials = vec![sol.u.clone(), g.clone(), g.clone().with_values(|x| (x[0] - 0.5) * (x[1] + 0.5))];
        let r = weak_residual(&sol, &p, &trials).unwrap();
        assert!(r < 1e-8, "{r}");
        assert_eq!(weak_residual(&sol, &p, &[g.clone()]).unwrap(), 0.0);
    }

    #[test]
    fn larger_data_give_larger_solutions() {
        let g = GridFunction::square(2, vec![-0.5, -0.5], 1.0, 32).unwrap();
        let f1 = g.clone().with_values(|x| 1.0 + x[0]);
        let f2 = g.clone().with_values(|x| 2.0 + x[0] + x[1] * x[1]);
        let p1 = AnisoProblem::new(f1, vec![1.0, 1.0], vec![2.0, 4.0], ZeroOrderTerm::linear(1.0).unwrap()).unwrap();
        let p2 = p1.with_f(f2).unwrap();
        let (u1, u2) = (solve_fd(&p1, &FdSettings::default()).unwrap(), solve_fd(&p2, &FdSettings::default()).unwrap());
        assert!(u1.u.values().iter().zip(u2.u.values()).all(|(a, b)| *a <= *b + 1e-12));
    }

    #[test]
    fn ellipticity_holds_for_exponents_above_one() {
        let g = disk(8).with_values(|_| 1.0);
        let p = AnisoProblem::new(g, vec![1.0, 2.0], vec![1.5, 3.0], ZeroOrderTerm::Zero).unwrap();
        let samples: Vec<Vec<f64>> = (0..100).map(|k| vec![(k as f64 * 0.37).sin() * 3.0, (k as f64 * 0.91).cos()]).collect();
        assert!(p.ellipticity_margin(&samples) >= 0.0);
        assert!(AnisoProblem::new(disk(8), vec![1.0, 1.0], vec![1.1, 2.0], ZeroOrderTerm::Zero).is_err());
    }
}
