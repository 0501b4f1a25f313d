use crate::error::{Error, Result};
use crate::traffic::special::log_add_exp;
use crate::traffic::{ArrivalSpec, Family};

/// Log moment generating function `θ ↦ ln E[e^{θX}]` of a light arrival law.
///
/// Defined for every real θ up to `theta_max`; values at or beyond it are `+∞`.
#[derive(Clone, Debug)]
pub struct LogMgf {
    spec: ArrivalSpec,
    activity: f64,
    /// Supremum of the finiteness domain (may be `+∞`).
    pub theta_max: f64,
}

impl LogMgf {
    pub fn new(spec: &ArrivalSpec) -> Result<Self> {
        spec.validate()?;
        if !spec.is_light() {
            return Err(Error::spec(format!(
                "{} is heavy-tailed; its log-MGF is infinite for every θ > 0",
                spec.family_name()
            )));
        }
        let theta_max = match spec.family {
            Family::GeometricBatch { mean } if mean > 0.0 => (1.0 / mean).ln_1p(),
            _ => f64::INFINITY,
        };
        Ok(LogMgf {
            spec: spec.clone(),
            activity: spec.activity(),
            theta_max,
        })
    }

    pub fn spec(&self) -> &ArrivalSpec {
        &self.spec
    }

    pub fn mean(&self) -> f64 {
        self.spec.mean()
    }

    fn base(&self, theta: f64) -> f64 {
        match &self.spec.family {
            Family::Bernoulli { p } => {
                if *p >= 1.0 {
                    theta
                } else if *p <= 0.0 {
                    0.0
                } else {
                    log_add_exp((-p).ln_1p(), p.ln() + theta)
                }
            }
            Family::Poisson { lambda } => lambda * theta.exp_m1(),
            Family::GeometricBatch { mean } => {
                if *mean == 0.0 {
                    return 0.0;
                }
                if theta >= self.theta_max {
                    return f64::INFINITY;
                }
                // E[e^{θX}] = (1 - r) / (1 - r e^θ), r = m / (1 + m)
                let r = mean / (1.0 + mean);
                (-r).ln_1p() - (-(r.ln() + theta).exp()).ln_1p()
            }
            Family::Tabulated { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .fold(f64::NEG_INFINITY, |acc, (&v, &p)| {
                    log_add_exp(acc, p.ln() + theta * v as f64)
                }),
            _ => unreachable!("heavy families rejected in new"),
        }
    }

    /// `Λ(θ)`, extended-real.
    pub fn eval(&self, theta: f64) -> f64 {
        if theta >= self.theta_max {
            return f64::INFINITY;
        }
        let b = self.base(theta);
        if self.activity >= 1.0 {
            b
        } else if self.activity <= 0.0 {
            0.0
        } else {
            log_add_exp((-self.activity).ln_1p(), self.activity.ln() + b)
        }
    }

    /// `Λ'(θ)` by central differences (diagnostic use).
    pub fn derivative(&self, theta: f64) -> f64 {
        let h = 1e-6 * (1.0 + theta.abs());
        (self.eval(theta + h) - self.eval(theta - h)) / (2.0 * h)
    }
}

/// `Λ_L(θ)` for a light spec.
pub fn log_mgf(spec: &ArrivalSpec, theta: f64) -> Result<f64> {
    Ok(LogMgf::new(spec)?.eval(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::special::ksum;

    #[test]
    fn vanishes_at_zero() {
        for s in [
            ArrivalSpec::poisson(0.5),
            ArrivalSpec::bernoulli(0.3),
            ArrivalSpec::geometric(0.7),
            ArrivalSpec::tabulated(vec![0, 2], vec![0.5, 0.5]),
        ] {
            assert!(log_mgf(&s, 0.0).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn poisson_closed_form_matches_enumeration() {
        let s = ArrivalSpec::poisson(0.5);
        let v = log_mgf(&s, 1.0).unwrap();
        assert!((v - 0.5 * (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let direct = ksum((0..60).map(|n| s.pmf(n) * (n as f64).exp())).ln();
        assert!((v - direct).abs() < 1e-12);
        assert!((v - 0.8591).abs() < 1e-4);
    }

    #[test]
    fn geometric_boundary() {
        let s = ArrivalSpec::geometric(0.5);
        let m = LogMgf::new(&s).unwrap();
        assert!((m.theta_max - 3f64.ln()).abs() < 1e-15);
        assert_eq!(m.eval(3f64.ln()), f64::INFINITY);
        let direct = ksum((0..400).map(|n| s.pmf(n) * (0.5 * n as f64).exp())).ln();
        assert!((m.eval(0.5) - direct).abs() < 1e-12);
    }

    #[test]
    fn derivative_at_zero_is_mean() {
        for s in [
            ArrivalSpec::poisson(0.4),
            ArrivalSpec::bernoulli(0.3),
            ArrivalSpec::geometric(0.7),
            ArrivalSpec::bernoulli(1.0).with_rate(0.2),
        ] {
            let m = LogMgf::new(&s).unwrap();
            assert!((m.derivative(0.0) - s.mean()).abs() < 1e-8, "{s:?}");
        }
    }

    #[test]
    fn thinning_mixes_with_zero() {
        let s = ArrivalSpec::poisson(1.0).with_rate(0.25);
        let v = log_mgf(&s, 0.7).unwrap();
        let expect = (0.75 + 0.25 * (0.7f64.exp_m1()).exp()).ln();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn heavy_rejected() {
        assert!(log_mgf(&ArrivalSpec::discrete_pareto(2.5), 0.1).is_err());
    }
}
