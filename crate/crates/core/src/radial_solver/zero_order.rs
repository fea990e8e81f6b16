use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{abs_pow, segment_index, signed_pow};

/// Continuous, strictly increasing zero-order term `b` with `b(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZeroOrderSpec", into = "ZeroOrderSpec")]
pub enum ZeroOrderTerm {
    /// `b ≡ 0`: the problem without absorption.
    Zero,
    /// `b(t) = slope·t`
    Linear { slope: f64 },
    /// `b(t) = coefficient·sign(t)|t|^exponent`
    Power { coefficient: f64, exponent: f64 },
    /// Piecewise linear through `(t, values)`, extended linearly past the ends.
    Tabulated { t: Vec<f64>, values: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ZeroOrderSpec {
    Zero,
    Linear {
        slope: f64,
    },
    Power {
        #[serde(default = "one")]
        coefficient: f64,
        exponent: f64,
    },
    Tabulated {
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl TryFrom<ZeroOrderSpec> for ZeroOrderTerm {
    type Error = Error;
    fn try_from(s: ZeroOrderSpec) -> Result<Self> {
        match s {
            ZeroOrderSpec::Zero => Ok(Self::Zero),
            ZeroOrderSpec::Linear { slope } => Self::linear(slope),
            ZeroOrderSpec::Power { coefficient, exponent } => Self::power(coefficient, exponent),
            ZeroOrderSpec::Tabulated { t, values } => Self::tabulated(t, values),
        }
    }
}

impl From<ZeroOrderTerm> for ZeroOrderSpec {
    fn from(b: ZeroOrderTerm) -> Self {
        match b {
            ZeroOrderTerm::Zero => Self::Zero,
            ZeroOrderTerm::Linear { slope } => Self::Linear { slope },
            ZeroOrderTerm::Power { coefficient, exponent } => Self::Power { coefficient, exponent },
            ZeroOrderTerm::Tabulated { t, values } => Self::Tabulated { t, values },
        }
    }
}

impl ZeroOrderTerm {
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(invalid(format!("linear b needs a positive slope, got {slope}")));
        }
        Ok(Self::Linear { slope })
    }

    pub fn power(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite() && exponent > 0.0 && exponent.is_finite()) {
            return Err(invalid("power b needs a positive coefficient and exponent"));
        }
        Ok(Self::Power { coefficient, exponent })
    }

    pub fn tabulated(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != values.len() {
            return Err(invalid("tabulated b needs at least two matching knots and values"));
        }
        if t.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(invalid("tabulated b must be finite"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated b must have strictly increasing knots and values"));
        }
        match t.iter().position(|x| *x == 0.0) {
            Some(k) if values[k] == 0.0 => Ok(Self::Tabulated { t, values }),
            _ => Err(invalid("tabulated b must pass through the origin at a knot")),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn b(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Linear { slope } => slope * t,
            Self::Power { coefficient, exponent } => coefficient * signed_pow(t, *exponent),
            Self::Tabulated { t: k, values } => {
                let j = segment_index(k, t);
                values[j] + (values[j + 1] - values[j]) / (k[j + 1] - k[j]) * (t - k[j])
            }
        }
    }

    /// γ = b⁻¹. For `b ≡ 0` there is no inverse and 0 is returned.
    pub fn gamma(&self, sigma: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Linear { slope } => sigma / slope,
            Self::Power { coefficient, exponent } => signed_pow(sigma / coefficient, 1.0 / exponent),
            Self::Tabulated { t, values } => {
                let j = segment_index(values, sigma);
                t[j] + (t[j + 1] - t[j]) / (values[j + 1] - values[j]) * (sigma - values[j])
            }
        }
    }

    /// Right derivative of `b` (infinite at 0 for power exponents below 1).
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Linear { slope } => *slope,
            Self::Power { coefficient, exponent } => {
                if *exponent == 1.0 {
                    *coefficient
                } else {
                    coefficient * exponent * abs_pow(t, exponent - 1.0)
                }
            }
            Self::Tabulated { t: k, values } => {
                let j = segment_index(k, t);
                (values[j + 1] - values[j]) / (k[j + 1] - k[j])
            }
        }
    }

    /// `G(t) = ∫₀^t b`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Linear { slope } => 0.5 * slope * t * t,
            Self::Power { coefficient, exponent } => coefficient * abs_pow(t, exponent + 1.0) / (exponent + 1.0),
            Self::Tabulated { t: k, .. } => {
                // trapezoid is exact on each linear piece
                let (lo, hi) = if t >= 0.0 { (0.0, t) } else { (t, 0.0) };
                let mut pts = vec![lo, hi];
                pts.extend(k.iter().copied().filter(|x| *x > lo && *x < hi));
                pts.sort_by(f64::total_cmp);
                let area: f64 = pts.windows(2).map(|w| 0.5 * (self.b(w[0]) + self.b(w[1])) * (w[1] - w[0])).sum();
                if t >= 0.0 {
                    area
                } else {
                    -area
                }
            }
        }
    }

    /// Smallest divided difference of `b` over `samples` (sorted internally).
    pub fn min_divided_difference(&self, samples: &[f64]) -> f64 {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.windows(2)
            .map(|w| (self.b(w[1]) - self.b(w[0])) / (w[1] - w[0]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_inverts_b() {
        let terms = [
            ZeroOrderTerm::linear(2.0).unwrap(),
            ZeroOrderTerm::power(1.0, 3.0).unwrap(),
            ZeroOrderTerm::tabulated(vec![-1.0, 0.0, 0.5, 2.0], vec![-3.0, 0.0, 0.2, 4.0]).unwrap(),
        ];
        for b in &terms {
            for i in -40..=40 {
                let t = i as f64 * 0.07;
                assert!((b.gamma(b.b(t)) - t).abs() < 1e-10, "{b:?} at {t}");
            }
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let b = ZeroOrderTerm::tabulated(vec![-1.0, 0.0, 0.5, 2.0], vec![-3.0, 0.0, 0.2, 4.0]).unwrap();
        for &t in &[-1.5, -0.3, 0.25, 1.0, 3.0] {
            let n = 20000;
            let h = t / n as f64;
            let q: f64 = (0..n).map(|k| b.b((k as f64 + 0.5) * h) * h).sum();
            assert!((b.antiderivative(t) - q).abs() < 1e-6, "{t}");
        }
        let p = ZeroOrderTerm::power(1.0, 3.0).unwrap();
        assert!((p.antiderivative(-2.0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ZeroOrderTerm::tabulated(vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
        assert!(ZeroOrderTerm::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let b: ZeroOrderTerm = serde_json::from_str(r#"{"kind":"power","exponent":3}"#).unwrap();
        assert_eq!(b, ZeroOrderTerm::Power { coefficient: 1.0, exponent: 3.0 });
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(serde_json::from_str::<ZeroOrderTerm>(&s).unwrap(), b);
        assert!(serde_json::from_str::<ZeroOrderTerm>(r#"{"kind":"linear","slope":-1}"#).is_err());
    }
}
