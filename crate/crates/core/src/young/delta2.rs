//! Numerical Δ₂ classification: `Φ(2ξ) ≤ C Φ(ξ)` for large `|ξ|`.
//!
//! The sup of `Φ(2ξ)/Φ(ξ)` over a shell of directions is computed at radii
//! `probe · 2^{-k}`, `k = K…0`. A ratio that settles is reported as
//! satisfied; one that keeps growing across doublings as violated.

use super::YoungEval;

#[derive(Clone, Debug, PartialEq)]
pub enum Delta2Outcome {
    Satisfied { constant: f64 },
    Violated { ratios: Vec<f64> },
    Inconclusive { ratios: Vec<f64> },
}

impl Delta2Outcome {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Self::Satisfied { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Delta2Settings {
    /// Number of halvings below the probe radius.
    pub doublings: usize,
    /// Relative change per doubling under which the ratio counts as settled.
    pub tol: f64,
    /// Directions per orthant axis pair.
    pub directions: usize,
}

impl Default for Delta2Settings {
    fn default() -> Self {
        Self { doublings: 8, tol: 0.02, directions: 24 }
    }
}

fn shell_directions(dim: usize, m: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0]];
    }
    // lattice points of {0..m}^N projected to the sphere (positive orthant suffices by evenness)
    let per_axis = if dim == 2 { m } else { (m / dim).max(3) };
    let total = (per_axis + 1).pow(dim as u32);
    let mut dirs = Vec::new();
    for flat in 1..total {
        let mut k = flat;
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let c = k % (per_axis + 1);
                k /= per_axis + 1;
                c as f64
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        dirs.push(v.into_iter().map(|x| x / norm).collect());
    }
    dirs
}

pub fn delta2_classify(phi: &impl YoungEval, probe_radius: f64) -> Delta2Outcome {
    delta2_classify_with(phi, probe_radius, &Delta2Settings::default())
}

pub fn delta2_classify_with(phi: &impl YoungEval, probe_radius: f64, settings: &Delta2Settings) -> Delta2Outcome {
    let dirs = shell_directions(phi.dim(), settings.directions);
    let mut x = vec![0.0; phi.dim()];
    let mut x2 = vec![0.0; phi.dim()];
    let ratios: Vec<f64> = (0..=settings.doublings)
        .rev()
        .map(|k| {
            let r = probe_radius / 2f64.powi(k as i32);
            dirs.iter()
                .map(|d| {
                    for i in 0..d.len() {
                        x[i] = r * d[i];
                        x2[i] = 2.0 * r * d[i];
                    }
                    let base = phi.value(&x);
                    if base <= 0.0 {
                        f64::NAN
                    } else {
                        phi.value(&x2) / base
                    }
                })
                .filter(|v| !v.is_nan())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let n = ratios.len();
    if ratios.iter().any(|r| r.is_infinite() && *r > 0.0) {
        return Delta2Outcome::Violated { ratios };
    }
    if n < 4 || ratios.iter().any(|r| !r.is_finite()) {
        return Delta2Outcome::Inconclusive { ratios };
    }
    let changes: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    let tail = &changes[changes.len() - 3..];
    if tail.iter().all(|c| *c > settings.tol) {
        return Delta2Outcome::Violated { ratios };
    }
    if tail[1..].iter().all(|c| c.abs() <= settings.tol) {
        let constant = ratios[n - 3..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Delta2Outcome::Satisfied { constant };
    }
    Delta2Outcome::Inconclusive { ratios }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::{YoungFunction1D, YoungFunctionND};

    #[test]
    fn power_sum_ratio_is_two_to_max_exponent() {
        let phi = YoungFunctionND::power_sum(vec![1.0, 1.0], vec![2.0, 4.0]).unwrap();
        match delta2_classify(&phi, 100.0) {
            Delta2Outcome::Satisfied { constant } => assert!((constant - 16.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponential_sum_violates() {
        let phi = YoungFunctionND::exp_sum(vec![2.0, 2.0]).unwrap();
        assert!(matches!(delta2_classify(&phi, 4.0), Delta2Outcome::Violated { .. }));
    }

    #[test]
    fn power_log_satisfies() {
        let phi = YoungFunction1D::power_log(2.0, 1.0, 3.0).unwrap();
        assert!(delta2_classify(&phi, 1e3).is_satisfied());
    }

    #[test]
    fn quadratic_is_satisfied_at_any_scale() {
        let phi = YoungFunction1D::power_law(1.0, 2.0).unwrap();
        assert!(delta2_classify(&phi, 1e-3).is_satisfied());
    }
}
