//! Rearrangements of grid functions and Klimov symmetrization of
//! N-dimensional Young functions.
//!
//! ```text
//! μ_u(t) = |{x ∈ Ω : |u(x)| > t}|
//! u*(s)  = sup{t > 0 : μ_u(t) > s}          s ∈ [0, |Ω|]
//! u★(x)  = u*(ω_N |x|^N)
//! f**(s) = (1/s) ∫₀^s f*(r) dr
//! ```

mod curve;
mod grid;
mod io;
mod klimov;

pub use curve::{Interpolation, Interpretation, Monotonicity, MonotoneCurve};
pub use grid::{GridFunction, MaskKind};
pub use io::{read_grid_function, write_grid_function, GridSidecar};
pub use klimov::{
    equivalence_constants, klimov, rearrange_young_multiscale, symmetric_increasing_rearrangement_nd,
    KlimovResult, KlimovSettings, RadialTable,
};

use crate::error::{invalid, Result};
use crate::numeric::unit_ball_volume;
use crate::young::{YoungFunction1D, YoungFunctionND};

/// `μ_u` sampled on `t_grid` (right-continuous, nonincreasing).
pub fn distribution(u: &GridFunction, t_grid: &[f64]) -> Result<MonotoneCurve> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("t grid must be nonnegative and strictly increasing"));
    }
    let mut a: Vec<f64> = u.masked_values().map(f64::abs).collect();
    a.sort_by(f64::total_cmp);
    let m = u.cell_measure();
    let values = t_grid
        .iter()
        .map(|&t| (a.len() - a.partition_point(|v| *v <= t)) as f64 * m)
        .collect();
    MonotoneCurve::new(
        t_grid.to_vec(),
        values,
        Monotonicity::NonIncreasing,
        Interpretation::Distribution,
        Interpolation::Step,
    )
}

/// Sorted `|u|` over the masked cells, largest first; ties keep cell order.
fn sorted_magnitudes(u: &GridFunction) -> Vec<f64> {
    let mut a: Vec<f64> = u.masked_values().map(f64::abs).collect();
    // stable sort, so equal values keep their cell order
    a.sort_by(|x, y| y.total_cmp(x));
    a
}

/// Exact discrete rearrangement: the k-th largest `|u|` on
/// `[(k−1)h^N, k h^N)`, and 0 at `s = |Ω|`.
pub fn decreasing_rearrangement(u: &GridFunction) -> MonotoneCurve {
    let a = sorted_magnitudes(u);
    let m = u.cell_measure();
    let knots: Vec<f64> = (0..=a.len()).map(|k| k as f64 * m).collect();
    let mut values = a;
    values.push(0.0);
    MonotoneCurve::new(knots, values, Monotonicity::NonIncreasing, Interpretation::Rearrangement, Interpolation::Step)
        .expect("sorted magnitudes are monotone")
}

/// `f**` of a nonincreasing curve. The value at `s = 0` is `f*(0⁺)`.
pub fn f_double_star(f_star: &MonotoneCurve) -> Result<MonotoneCurve> {
    if f_star.monotonicity() != Monotonicity::NonIncreasing {
        return Err(invalid("f** needs a nonincreasing curve"));
    }
    let cum = f_star.cumulative();
    let s = cum.knots();
    let values: Vec<f64> = s
        .iter()
        .zip(cum.values())
        .map(|(&x, &c)| if x > 0.0 { c / x } else { f_star.values()[0] })
        .collect();
    MonotoneCurve::new(
        s.to_vec(),
        values,
        Monotonicity::NonIncreasing,
        Interpretation::DoubleStar,
        Interpolation::Linear,
    )
}

/// Symmetric decreasing rearrangement `u★(x) = u*(ω_N |x|^N)`.
#[derive(Clone, Debug)]
pub struct SymmetricRearrangement {
    dim: usize,
    h: f64,
    sorted: Vec<f64>,
    u_star: MonotoneCurve,
}

pub fn symmetric_rearrangement(u: &GridFunction) -> SymmetricRearrangement {
    SymmetricRearrangement {
        dim: u.dim(),
        h: u.h(),
        sorted: sorted_magnitudes(u),
        u_star: decreasing_rearrangement(u),
    }
}

impl SymmetricRearrangement {
    pub fn u_star(&self) -> &MonotoneCurve {
        &self.u_star
    }

    /// Radius of the centered ball Ω★ with `|Ω★| = |Ω|`.
    pub fn radius(&self) -> f64 {
        (self.measure() / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64)
    }

    pub fn measure(&self) -> f64 {
        self.sorted.len() as f64 * self.h.powi(self.dim as i32)
    }

    /// `u★` as a function of `|x|` (step profile).
    pub fn profile(&self, r: f64) -> f64 {
        self.u_star.eval(unit_ball_volume(self.dim) * r.abs().powi(self.dim as i32))
    }

    /// Continuous version of `u*` through the cell midpoints, falling
    /// linearly to 0 over the last cell.
    pub fn u_star_linear(&self, s: f64) -> f64 {
        let m = self.h.powi(self.dim as i32);
        let n = self.sorted.len();
        let x = s / m - 0.5;
        if x <= 0.0 {
            return self.sorted[0];
        }
        let k = x.floor() as usize;
        if k + 1 >= n {
            let last = self.sorted[n - 1];
            let t = (x - (n - 1) as f64).min(1.0).max(0.0) * 2.0;
            return (last * (1.0 - t)).max(0.0);
        }
        let t = x - k as f64;
        self.sorted[k] * (1.0 - t) + self.sorted[k + 1] * t
    }

    /// Grid version on a centered ball: the cells closest to the origin,
    /// as many as Ω has, receive the sorted values in order of distance.
    /// Exactly equimeasurable with `u`.
    pub fn resample(&self) -> GridFunction {
        let n_cells = self.sorted.len();
        let r = self.radius();
        let half = (r / self.h).ceil() as usize + 2;
        let shape = vec![2 * half; self.dim];
        let lower = vec![-(half as f64) * self.h; self.dim];
        let total: usize = shape.iter().product();
        let mut x = vec![0.0; self.dim];
        let center = |flat: usize, out: &mut [f64]| {
            let mut rem = flat;
            for i in (0..out.len()).rev() {
                out[i] = lower[i] + ((rem % shape[i]) as f64 + 0.5) * self.h;
                rem /= shape[i];
            }
        };
        let mut by_dist: Vec<(f64, usize)> = (0..total)
            .map(|k| {
                center(k, &mut x);
                (x.iter().map(|t| t * t).sum::<f64>(), k)
            })
            .collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut mask = vec![false; total];
        let mut values = vec![0.0; total];
        for (rank, (_, k)) in by_dist.iter().take(n_cells).enumerate() {
            mask[*k] = true;
            values[*k] = self.sorted[rank];
        }
        let mut g = GridFunction::explicit(lower.clone(), self.h, shape.clone(), mask).expect("nonempty ball mask");
        g.set_values(values).expect("finite rearranged values");
        g
    }
}

/// `∫Φ(∇u) − ∫Φ_♦(|∇u★|)`.
///
/// The left side uses forward differences of `u` extended by 0 outside the
/// mask. The right side integrates over shells of width `h` in `r`, with `u*`
/// read at `s = ω_N r^N` and differenced in `r`.
pub fn polya_szego_gap(u: &GridFunction, phi: &YoungFunctionND, phi_diamond: &YoungFunction1D) -> Result<f64> {
    if phi.dim() != u.dim() {
        return Err(invalid("Young function and grid dimensions differ"));
    }
    Ok(anisotropic_energy(u, phi) - radial_energy(u, phi_diamond))
}

/// `∫Φ(∇u) dx` with forward differences and zero extension.
pub fn anisotropic_energy(u: &GridFunction, phi: &YoungFunctionND) -> f64 {
    let d = u.dim();
    let h = u.h();
    let shape = u.shape().to_vec();
    // extended index range: one extra layer on the low side of every axis
    let ext: Vec<usize> = shape.iter().map(|n| n + 1).collect();
    let total: usize = ext.iter().product();
    let strides = u.strides();
    let value = |idx: &[isize]| -> f64 {
        if idx.iter().zip(&shape).any(|(k, n)| *k < 0 || *k >= *n as isize) {
            return 0.0;
        }
        let flat: usize = idx.iter().zip(&strides).map(|(k, s)| *k as usize * s).sum();
        u.values()[flat]
    };
    let mut idx = vec![0isize; d];
    let mut nb = vec![0isize; d];
    let mut grad = vec![0.0; d];
    let mut acc = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        for i in (0..d).rev() {
            idx[i] = (rem % ext[i]) as isize - 1;
            rem /= ext[i];
        }
        let here = value(&idx);
        let mut nonzero = here != 0.0;
        for i in 0..d {
            nb.copy_from_slice(&idx);
            nb[i] += 1;
            grad[i] = (value(&nb) - here) / h;
            nonzero |= grad[i] != 0.0;
        }
        if nonzero {
            acc += phi.eval(&grad);
        }
    }
    acc * u.cell_measure()
}

/// `∫_{Ω★} Φ_♦(|∇u★|) dx` on shells of width `h`.
pub fn radial_energy(u: &GridFunction, phi_diamond: &YoungFunction1D) -> f64 {
    let sym = symmetric_rearrangement(u);
    let d = u.dim();
    let h = u.h();
    let omega = unit_ball_volume(d);
    let r_max = sym.radius();
    let shells = (r_max / h).ceil() as usize + 1;
    let mut acc = 0.0;
    let mut prev = sym.u_star_linear(0.0);
    for j in 0..shells {
        let (r0, r1) = (j as f64 * h, (j + 1) as f64 * h);
        let next = sym.u_star_linear(omega * r1.powi(d as i32));
        let g = (prev - next) / h;
        acc += phi_diamond.eval(g) * omega * (r1.powi(d as i32) - r0.powi(d as i32));
        prev = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> GridFunction {
        GridFunction::square(2, vec![0.0, 0.0], 1.0, n).unwrap()
    }

    #[test]
    fn distribution_of_constant() {
        let u = unit_square(8).with_values(|_| 3.0);
        let mu = distribution(&u, &[0.0, 2.9, 3.0, 4.0]).unwrap();
        assert_eq!(mu.values(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn distribution_of_linear_function() {
        let n = 200;
        let u = unit_square(n).with_values(|x| x[0]);
        let ts: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let mu = distribution(&u, &ts).unwrap();
        for (t, m) in ts.iter().zip(mu.values()) {
            assert!((m - (1.0 - t)).abs() <= 1.0 / n as f64 + 1e-12, "t={t}");
        }
    }

    #[test]
    fn two_plateaus() {
        let u = unit_square(10).with_values(|x| if x[0] < 0.5 { 1.0 } else { 2.0 });
        let mu = distribution(&u, &[0.5, 1.5]).unwrap();
        assert!((mu.values()[0] - 1.0).abs() < 1e-12);
        assert!((mu.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rearrangement_of_linear_function_and_integral() {
        let n = 100;
        let u = unit_square(n).with_values(|x| x[0] - 0.3 * x[1]);
        let us = decreasing_rearrangement(&u);
        let total: f64 = u.masked_values().map(f64::abs).sum::<f64>() * u.cell_measure();
        assert!((us.integral() - total).abs() < 1e-12);
        let v = unit_square(n).with_values(|x| x[0]);
        let vs = decreasing_rearrangement(&v);
        for k in 0..=50 {
            let s = k as f64 / 50.0 * 0.999;
            assert!((vs.eval(s) - (1.0 - s)).abs() <= 1.0 / n as f64 + 1e-12);
        }
    }

    #[test]
    fn equimeasurability_is_exact() {
        let u = unit_square(30).with_values(|x| (7.0 * x[0]).sin() * (3.0 * x[1]).cos());
        let us = decreasing_rearrangement(&u);
        let mut ts: Vec<f64> = u.masked_values().map(f64::abs).collect();
        ts.push(0.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mu = distribution(&u, &ts).unwrap();
        for (t, m) in ts.iter().zip(mu.values()) {
            assert_eq!(us.level_measure(*t), *m);
        }
    }

    #[test]
    fn indicator_rearranges_to_centered_ball() {
        let u = unit_square(40).with_values(|x| if x[0] < 0.25 && x[1] > 0.5 { 1.0 } else { 0.0 });
        let sym = symmetric_rearrangement(&u);
        let m = 0.125f64;
        let rho = (m / std::f64::consts::PI).sqrt();
        assert_eq!(sym.profile(0.99 * rho), 1.0);
        assert_eq!(sym.profile(1.01 * rho), 0.0);
        let g = sym.resample();
        let mut a: Vec<f64> = g.masked_values().collect();
        let mut b: Vec<f64> = u.masked_values().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn double_star_of_linear_profile() {
        let s: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let v: Vec<f64> = s.iter().map(|x| 1.0 - x).collect();
        let f = MonotoneCurve::new(s.clone(), v, Monotonicity::NonIncreasing, Interpretation::Rearrangement, Interpolation::Linear)
            .unwrap();
        let ff = f_double_star(&f).unwrap();
        for (x, y) in s.iter().zip(ff.values()) {
            assert!((y - (1.0 - x / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn double_star_of_constant() {
        let u = unit_square(5).with_values(|_| 2.0);
        let ff = f_double_star(&decreasing_rearrangement(&u)).unwrap();
        assert!(ff.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn polya_szego_for_radial_cone_is_small() {
        let n = 200;
        let u = GridFunction::disk(2, vec![0.0, 0.0], 1.0, n)
            .unwrap()
            .with_values(|x| (1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt()).max(0.0));
        let phi = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        let phi_d = YoungFunction1D::power_law(1.0, 2.0).unwrap();
        let lhs = anisotropic_energy(&u, &phi);
        let gap = polya_szego_gap(&u, &phi, &phi_d).unwrap();
        let exact = std::f64::consts::PI;
        assert!((lhs - exact).abs() < 0.03 * exact, "lhs={lhs}");
        assert!(gap.abs() < 0.02 * exact, "gap={gap}");
    }
}
