use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two weights count as tied.
pub const TIE_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    ServeH,
    ServeL,
    Idle,
}

/// Scheduling rule for the single server.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    PriorityH,
    PriorityL,
    /// Serve the queue with the larger `q^alpha`; ties go to `L`.
    MaxWeightAlpha {
        alpha_h: f64,
        alpha_l: f64,
    },
    /// Serve `L` iff `q_L >= ln(1 + q_H)`.
    LogMaxWeight,
}

impl Policy {
    pub fn max_weight(alpha_h: f64, alpha_l: f64) -> Self {
        Policy::MaxWeightAlpha { alpha_h, alpha_l }
    }

    pub fn validate(&self) -> Result<()> {
        if let Policy::MaxWeightAlpha { alpha_h, alpha_l } = *self {
            for (name, a) in [("alpha_h", alpha_h), ("alpha_l", alpha_l)] {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::config(
                        format!("policy.{name}"),
                        format!("must be a positive finite number, got {a}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::PriorityH => "priority_h",
            Policy::PriorityL => "priority_l",
            Policy::MaxWeightAlpha { .. } => "max_weight_alpha",
            Policy::LogMaxWeight => "log_max_weight",
        }
    }

    /// `alpha_l / alpha_h` for max-weight-alpha.
    pub fn alpha_ratio(&self) -> Option<f64> {
        match *self {
            Policy::MaxWeightAlpha { alpha_h, alpha_l } => Some(alpha_l / alpha_h),
            _ => None,
        }
    }

    /// Whether the comparison rule favours `L` at these lengths. Defined for
    /// every pair, including empty queues; priority rules ignore the lengths.
    #[inline]
    pub fn light_wins(&self, q_h: u64, q_l: u64) -> bool {
        match *self {
            Policy::PriorityH => q_h == 0,
            Policy::PriorityL => true,
            Policy::MaxWeightAlpha { alpha_h, alpha_l } => {
                at_least(weight(alpha_l, q_l), weight(alpha_h, q_h))
            }
            Policy::LogMaxWeight => at_least(q_l as f64, (q_h as f64).ln_1p()),
        }
    }

    /// Non-idling decision on post-arrival lengths.
    #[inline]
    pub fn decide(&self, q_h: u64, q_l: u64) -> Decision {
        let light = self.light_wins(q_h, q_l);
        match (light, q_h > 0, q_l > 0) {
            (_, false, false) => Decision::Idle,
            (true, _, true) | (false, false, true) => Decision::ServeL,
            _ => Decision::ServeH,
        }
    }
}

#[inline]
fn weight(alpha: f64, q: u64) -> f64 {
    if q == 0 {
        f64::NEG_INFINITY
    } else {
        alpha * (q as f64).ln()
    }
}

/// `a >= b`, with near-equality inside `TIE_RTOL` counted as a tie.
#[inline]
fn at_least(a: f64, b: f64) -> bool {
    if a >= b {
        return true;
    }
    if !b.is_finite() || !a.is_finite() {
        return false;
    }
    b - a <= TIE_RTOL * a.abs().max(b.abs())
}

pub fn decide(policy: &Policy, q_h: u64, q_l: u64) -> Decision {
    policy.decide(q_h, q_l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Decision::*;

    #[test]
    fn max_weight_tie_goes_to_light() {
        assert_eq!(Policy::max_weight(1.0, 1.0).decide(5, 5), ServeL);
        assert_eq!(Policy::max_weight(1.0, 1.0).decide(1, 1), ServeL);
        assert_eq!(Policy::max_weight(2.0, 1.0).decide(4, 16), ServeL);
    }

    #[test]
    fn lmw_rule() {
        assert_eq!(Policy::LogMaxWeight.decide(100, 4), ServeH);
        assert_eq!(Policy::LogMaxWeight.decide(100, 5), ServeL);
        assert_eq!(Policy::LogMaxWeight.decide(3, 0), ServeH);
        assert_eq!(Policy::LogMaxWeight.decide(0, 2), ServeL);
    }

    #[test]
    fn max_weight_alpha_rule() {
        assert_eq!(Policy::max_weight(1.0, 2.0).decide(8, 3), ServeL);
        assert_eq!(Policy::max_weight(1.0, 2.0).decide(10, 3), ServeH);
    }

    #[test]
    fn priorities_and_idling() {
        for p in [
            Policy::PriorityH,
            Policy::PriorityL,
            Policy::max_weight(1.0, 1.0),
            Policy::LogMaxWeight,
        ] {
            assert_eq!(p.decide(0, 0), Idle);
            assert_eq!(p.decide(3, 0), ServeH);
            assert_eq!(p.decide(0, 3), ServeL);
        }
        assert_eq!(Policy::PriorityH.decide(1, 9), ServeH);
        assert_eq!(Policy::PriorityL.decide(9, 1), ServeL);
    }

    #[test]
    fn huge_queues_do_not_overflow() {
        let p = Policy::max_weight(1.0, 5.0);
        assert_eq!(p.decide(u64::MAX, 10_000), ServeL);
        assert_eq!(p.decide(u64::MAX, 6_000), ServeH);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(Policy::max_weight(0.0, 1.0).validate().is_err());
        assert!(Policy::max_weight(1.0, f64::NAN).validate().is_err());
        assert!(Policy::LogMaxWeight.validate().is_ok());
    }
}
