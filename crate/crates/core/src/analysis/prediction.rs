use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Policy;

/// Predicted tail coefficient of a queue length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TailCoefficient {
    Finite(f64),
    /// Exponentially decaying tail (every moment finite).
    Light,
}

impl TailCoefficient {
    pub fn finite(self) -> Option<f64> {
        match self {
            TailCoefficient::Finite(v) => Some(v),
            TailCoefficient::Light => None,
        }
    }
}

impl std::fmt::Display for TailCoefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailCoefficient::Finite(v) => write!(f, "{v}"),
            TailCoefficient::Light => f.write_str("light"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPrediction {
    pub policy: Policy,
    pub c_h: f64,
    pub q_l: TailCoefficient,
    pub q_h: TailCoefficient,
}

/// Asymptotic tail coefficients of `q_L` and `q_H` for heavy input index `c_h`.
pub fn predict_tail_coefficient(policy: &Policy, c_h: f64) -> Result<TailPrediction> {
    policy
        .validate()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    if !(c_h.is_finite() && c_h > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "C_H must exceed 1, got {c_h}"
        )));
    }
    let base = c_h - 1.0;
    let q_l = match *policy {
        Policy::PriorityH => TailCoefficient::Finite(base),
        Policy::PriorityL | Policy::LogMaxWeight => TailCoefficient::Light,
        Policy::MaxWeightAlpha { alpha_h, alpha_l } => {
            let ratio = alpha_l / alpha_h;
            TailCoefficient::Finite(if ratio <= 1.0 { base } else { ratio * base })
        }
    };
    Ok(TailPrediction {
        policy: *policy,
        c_h,
        q_l,
        q_h: TailCoefficient::Finite(base),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_l(policy: Policy) -> TailCoefficient {
        predict_tail_coefficient(&policy, 2.5).unwrap().q_l
    }

    #[test]
    fn max_weight_alpha_curve() {
        assert_eq!(
            q_l(Policy::max_weight(1.0, 0.5)),
            TailCoefficient::Finite(1.5)
        );
        assert_eq!(
            q_l(Policy::max_weight(1.0, 1.0)),
            TailCoefficient::Finite(1.5)
        );
        assert_eq!(
            q_l(Policy::max_weight(1.0, 2.0)),
            TailCoefficient::Finite(3.0)
        );
        assert_eq!(
            q_l(Policy::max_weight(0.5, 2.0)),
            TailCoefficient::Finite(6.0)
        );
    }

    #[test]
    fn other_policies() {
        assert_eq!(q_l(Policy::PriorityH), TailCoefficient::Finite(1.5));
        assert_eq!(q_l(Policy::PriorityL), TailCoefficient::Light);
        assert_eq!(q_l(Policy::LogMaxWeight), TailCoefficient::Light);
        for p in [Policy::PriorityH, Policy::PriorityL, Policy::LogMaxWeight] {
            assert_eq!(
                predict_tail_coefficient(&p, 2.5).unwrap().q_h,
                TailCoefficient::Finite(1.5)
            );
        }
    }

    #[test]
    fn continuous_at_ratio_one() {
        let below = q_l(Policy::max_weight(1.0, 1.0 - 1e-12)).finite().unwrap();
        let above = q_l(Policy::max_weight(1.0, 1.0 + 1e-12)).finite().unwrap();
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(predict_tail_coefficient(&Policy::max_weight(-1.0, 1.0), 2.5).is_err());
        assert!(predict_tail_coefficient(&Policy::PriorityH, 1.0).is_err());
    }
}
