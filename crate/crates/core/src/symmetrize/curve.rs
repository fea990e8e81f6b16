use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::interp_linear;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpretation {
    Distribution,
    Rearrangement,
    Concentration,
    DoubleStar,
}

/// How values between knots are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    /// Right-continuous: `values[k]` on `[knots[k], knots[k+1])`.
    Step,
    Linear,
}

/// Sampled monotone function, typically on `[0, |Ω|]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCurve {
    knots: Vec<f64>,
    values: Vec<f64>,
    monotonicity: Monotonicity,
    interpretation: Interpretation,
    interpolation: Interpolation,
}

impl MonotoneCurve {
    pub fn new(
        knots: Vec<f64>,
        values: Vec<f64>,
        monotonicity: Monotonicity,
        interpretation: Interpretation,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(invalid("curve needs matching, nonempty knots and values"));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("curve samples must be finite"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("curve knots must be strictly increasing"));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = 1e-12 * scale;
        let ok = match monotonicity {
            Monotonicity::NonIncreasing => values.windows(2).all(|w| w[1] <= w[0] + tol),
            Monotonicity::NonDecreasing => values.windows(2).all(|w| w[1] >= w[0] - tol),
        };
        if !ok {
            return Err(invalid(format!("{interpretation:?} curve violates {monotonicity:?}")));
        }
        Ok(Self { knots, values, monotonicity, interpretation, interpolation })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Value at `s`, held constant outside the knot range.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if s <= self.knots[0] {
            return self.values[0];
        }
        if s >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        match self.interpolation {
            Interpolation::Step => {
                let k = self.knots.partition_point(|&t| t <= s) - 1;
                self.values[k]
            }
            Interpolation::Linear => interp_linear(&self.knots, &self.values, s),
        }
    }

    /// `∫` over the knot range, exact for the interpolation kind.
    pub fn integral(&self) -> f64 {
        *self.cumulative_values().last().unwrap()
    }

    /// `∫` from the first knot to `s`, exact for the interpolation kind.
    /// Beyond the last knot the final value is held.
    pub fn integral_to(&self, s: f64) -> f64 {
        self.integrals_to(&[s])[0]
    }

    /// [`integral_to`](Self::integral_to) at many points, sharing one running sum.
    pub fn integrals_to(&self, points: &[f64]) -> Vec<f64> {
        let n = self.knots.len();
        let cum = self.cumulative_values();
        points
            .iter()
            .map(|&s| {
                if n == 1 || s <= self.knots[0] {
                    return 0.0;
                }
                if s >= self.knots[n - 1] {
                    return cum[n - 1] + self.values[n - 1] * (s - self.knots[n - 1]);
                }
                let k = self.knots.partition_point(|&t| t <= s) - 1;
                let ds = s - self.knots[k];
                cum[k]
                    + match self.interpolation {
                        Interpolation::Step => self.values[k] * ds,
                        Interpolation::Linear => 0.5 * (self.values[k] + self.eval(s)) * ds,
                    }
            })
            .collect()
    }

    fn cumulative_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.knots.len());
        let mut acc = 0.0;
        out.push(0.0);
        for k in 0..self.knots.len() - 1 {
            let ds = self.knots[k + 1] - self.knots[k];
            acc += match self.interpolation {
                Interpolation::Step => self.values[k] * ds,
                Interpolation::Linear => 0.5 * (self.values[k] + self.values[k + 1]) * ds,
            };
            out.push(acc);
        }
        out
    }

    /// `s ↦ ∫_{s₀}^s` of the curve, piecewise linear on the same knots.
    pub fn cumulative(&self) -> MonotoneCurve {
        let values = self.cumulative_values();
        // an integrand of either sign yields a valid running sum only when nonnegative
        let monotonicity = if self.values.iter().all(|v| *v >= 0.0) {
            Monotonicity::NonDecreasing
        } else {
            Monotonicity::NonIncreasing
        };
        Self {
            knots: self.knots.clone(),
            values,
            monotonicity,
            interpretation: Interpretation::Concentration,
            interpolation: Interpolation::Linear,
        }
    }

    /// Measure of `{s : value(s) > t}` over the knot range (step curves).
    pub fn level_measure(&self, t: f64) -> f64 {
        (0..self.knots.len() - 1)
            .filter(|&k| self.values[k] > t)
            .map(|k| self.knots[k + 1] - self.knots[k])
            .sum()
    }

    /// Largest second divided difference, useful to check concavity.
    pub fn max_second_difference(&self) -> f64 {
        let (s, v) = (&self.knots, &self.values);
        (1..s.len().saturating_sub(1))
            .map(|k| (v[k + 1] - v[k]) / (s[k + 1] - s[k]) - (v[k] - v[k - 1]) / (s[k] - s[k - 1]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&format!("# interpretation: {:?}\n", self.interpretation));
        out.push_str("s,value\n");
        for (s, v) in self.knots.iter().zip(&self.values) {
            out.push_str(&format!("{s:.17e},{v:.17e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_monotonicity() {
        let r = MonotoneCurve::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            Monotonicity::NonIncreasing,
            Interpretation::Rearrangement,
            Interpolation::Step,
        );
        assert!(r.is_err());
    }

    #[test]
    fn step_eval_is_right_continuous() {
        let c = MonotoneCurve::new(
            vec![0.0, 1.0, 2.0],
            vec![3.0, 1.0, 0.0],
            Monotonicity::NonIncreasing,
            Interpretation::Rearrangement,
            Interpolation::Step,
        )
        .unwrap();
        assert_eq!(c.eval(0.999), 3.0);
        assert_eq!(c.eval(1.0), 1.0);
        assert_eq!(c.integral(), 4.0);
        assert_eq!(c.integral_to(1.5), 3.5);
        let cum = c.cumulative();
        assert!(cum.max_second_difference() <= 0.0);
    }
}
