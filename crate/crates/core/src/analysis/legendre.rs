use serde::{Deserialize, Serialize};

use super::mgf::LogMgf;
use crate::error::{Error, Result};
use crate::traffic::ArrivalSpec;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximise a concave (or unimodal) function on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if hi - lo <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Fenchel-Legendre transform `Λ*(x) = sup_θ (θx − Λ(θ))` of a light law.
pub fn legendre(spec: &ArrivalSpec, x: f64) -> Result<f64> {
    Ok(legendre_with(&LogMgf::new(spec)?, x))
}

pub(crate) fn legendre_with(mgf: &LogMgf, x: f64) -> f64 {
    let spec = mgf.spec();
    let min = spec.support_min() as f64;
    if x < min {
        return f64::INFINITY;
    }
    if let Some(max) = spec.support_max() {
        let max = max as f64;
        if x > max {
            return f64::INFINITY;
        }
        if x == max {
            return -spec.pmf(max as u64).ln();
        }
    }
    if x == min {
        return -spec.pmf(min as u64).ln();
    }
    let objective = |t: f64| {
        let l = mgf.eval(t);
        if l.is_finite() {
            t * x - l
        } else {
            f64::NEG_INFINITY
        }
    };
    let mean = mgf.mean();
    let (lo, hi) = if x >= mean {
        (0.0, expand(&objective, 1.0, mgf.theta_max))
    } else {
        (expand(&objective, -1.0, f64::INFINITY), 0.0)
    };
    let (_, v) = golden_max(objective, lo, hi, 1e-13);
    v.max(0.0)
}

/// Walk `t, 2t, 4t, ...` until the concave objective starts decreasing,
/// stopping short of `limit` (a finite upper domain edge).
fn expand(f: &impl Fn(f64) -> f64, start: f64, limit: f64) -> f64 {
    let mut prev = f(0.0);
    let mut t = start;
    for _ in 0..80 {
        if t >= limit {
            return limit * (1.0 - 1e-15);
        }
        let v = f(t);
        if v <= prev {
            return t;
        }
        prev = v;
        t *= 2.0;
    }
    t
}

/// Large-deviation exponent, which may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExponentValue {
    Finite(f64),
    Infinite,
}

impl ExponentValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExponentValue::Finite(v) => Some(v),
            ExponentValue::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn min_with(self, other: f64) -> f64 {
        self.as_f64().min(other)
    }
}

impl std::fmt::Display for ExponentValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExponentValue::Finite(v) => write!(f, "{v}"),
            ExponentValue::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMethod {
    SupForm,
    InfForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub value: ExponentValue,
    pub method: ExponentMethod,
    /// Final search interval (θ for the sup form, `a` for the inf form).
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

/// Both evaluations of the intrinsic exponent of a light input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicExponent {
    pub sup_form: ExponentResult,
    pub inf_form: ExponentResult,
}

impl IntrinsicExponent {
    pub fn value(&self) -> ExponentValue {
        self.sup_form.value
    }
}

/// Maximum allowed gap between the two forms.
pub const AGREEMENT_TOL: f64 = 1e-6;

/// `E_L = sup{θ : Λ(θ) − θ < 0}`, cross-checked against
/// `inf_{a>0} Λ*(1+a)/a`.
pub fn intrinsic_exponent(spec: &ArrivalSpec) -> Result<IntrinsicExponent> {
    let mgf = LogMgf::new(spec)?;
    if mgf.mean() >= 1.0 {
        return Err(Error::spec(format!(
            "mean {} >= 1: the light queue is unstable even with full priority",
            mgf.mean()
        )));
    }
    let sup_form = sup_form(&mgf);
    let inf_form = inf_form(&mgf);
    match (sup_form.value, inf_form.value) {
        (ExponentValue::Infinite, ExponentValue::Infinite) => {}
        (ExponentValue::Finite(a), ExponentValue::Finite(b)) if (a - b).abs() < AGREEMENT_TOL => {}
        (a, b) => {
            return Err(Error::MethodsDisagree {
                sup: a.as_f64(),
                inf: b.as_f64(),
            })
        }
    }
    Ok(IntrinsicExponent { sup_form, inf_form })
}

fn sup_form(mgf: &LogMgf) -> ExponentResult {
    let tol = 1e-12;
    let gap = |t: f64| mgf.eval(t) - t;
    let infinite = ExponentResult {
        value: ExponentValue::Infinite,
        method: ExponentMethod::SupForm,
        bracket: (0.0, f64::INFINITY),
        tolerance: tol,
    };
    // Λ(θ) − θ stays negative for all θ > 0 iff the law never exceeds one packet.
    if mgf.spec().support_max().is_some_and(|m| m <= 1) {
        return infinite;
    }
    let mut hi: f64 = 1e-9;
    while gap(hi) < 0.0 {
        hi *= 2.0;
        if hi >= mgf.theta_max {
            hi = mgf.theta_max;
            break;
        }
        if hi > 1e6 {
            return infinite;
        }
    }
    // Convex gap: bisect between its minimiser (negative side) and `hi`.
    let (mut lo, _) = golden_max(|t| -gap(t), 0.0, hi, 1e-12);
    while hi - lo > tol * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ExponentResult {
        value: ExponentValue::Finite(0.5 * (lo + hi)),
        method: ExponentMethod::SupForm,
        bracket: (lo, hi),
        tolerance: tol,
    }
}

fn inf_form(mgf: &LogMgf) -> ExponentResult {
    let tol = 1e-10;
    let a_max = match mgf.spec().support_max() {
        Some(m) if m <= 1 => {
            return ExponentResult {
                value: ExponentValue::Infinite,
                method: ExponentMethod::InfForm,
                bracket: (0.0, f64::INFINITY),
                tolerance: tol,
            }
        }
        Some(m) => (m - 1) as f64,
        None => 1e4,
    };
    let ratio = |a: f64| legendre_with(mgf, 1.0 + a) / a;
    // coarse log-grid scan, then golden refinement in ln a around the best cell
    let (lo_ln, hi_ln) = (1e-6f64.ln(), a_max.ln());
    let n = 240;
    let step = (hi_ln - lo_ln) / n as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = ratio((lo_ln + i as f64 * step).exp());
        if v < best.1 {
            best = (i, v);
        }
    }
    let cell_lo = lo_ln + best.0.saturating_sub(1) as f64 * step;
    let cell_hi = (lo_ln + (best.0 + 1) as f64 * step).min(hi_ln);
    let (_, neg) = golden_max(|u| -ratio(u.exp()), cell_lo, cell_hi, tol);
    let v = (-neg).min(best.1);
    ExponentResult {
        value: ExponentValue::Finite(v),
        method: ExponentMethod::InfForm,
        bracket: (cell_lo.exp(), cell_hi.exp()),
        tolerance: tol,
    }
}

/// `min(E_L, C_H − 1)`: the light-queue decay rate under log-max-weight.
pub fn lmw_exponent(spec_light: &ArrivalSpec, c_h: f64) -> Result<f64> {
    if !(c_h.is_finite() && c_h > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "C_H must exceed 1, got {c_h}"
        )));
    }
    Ok(intrinsic_exponent(spec_light)?.value().min_with(c_h - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(s: &ArrivalSpec) -> f64 {
        intrinsic_exponent(s).unwrap().value().finite().unwrap()
    }

    #[test]
    fn legendre_zero_at_mean() {
        for s in [
            ArrivalSpec::poisson(0.5),
            ArrivalSpec::geometric(0.3),
            ArrivalSpec::bernoulli(0.4),
        ] {
            assert!(legendre(&s, s.mean()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_legendre_closed_form() {
        let s = ArrivalSpec::poisson(0.5);
        for x in [0.1, 0.3, 0.9, 1.5, 4.0] {
            let closed = x * (x / 0.5f64).ln() - x + 0.5;
            assert!((legendre(&s, x).unwrap() - closed).abs() < 1e-10, "x={x}");
        }
        assert!((legendre(&s, 1.5).unwrap() - 0.6479).abs() < 1e-4);
    }

    #[test]
    fn bernoulli_boundaries() {
        let s = ArrivalSpec::bernoulli(0.3);
        assert_eq!(legendre(&s, 1.5).unwrap(), f64::INFINITY);
        assert!((legendre(&s, 1.0).unwrap() + 0.3f64.ln()).abs() < 1e-15);
        assert!((legendre(&s, 0.0).unwrap() + 0.7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_is_infinite() {
        let e = intrinsic_exponent(&ArrivalSpec::bernoulli(0.7)).unwrap();
        assert_eq!(e.sup_form.value, ExponentValue::Infinite);
        assert_eq!(e.inf_form.value, ExponentValue::Infinite);
    }

    #[test]
    fn known_exponents() {
        assert!((finite(&ArrivalSpec::geometric(0.5)) - 2f64.ln()).abs() < 1e-9);
        assert!((finite(&ArrivalSpec::poisson(0.5)) - 1.25643).abs() < 1e-5);
        assert!((finite(&ArrivalSpec::poisson(0.1)) - 3.615).abs() < 1e-3);
    }

    #[test]
    fn lmw_examples() {
        assert!((lmw_exponent(&ArrivalSpec::poisson(0.5), 2.5).unwrap() - 1.25643).abs() < 1e-5);
        assert_eq!(lmw_exponent(&ArrivalSpec::poisson(0.1), 2.5).unwrap(), 1.5);
        assert_eq!(
            lmw_exponent(&ArrivalSpec::bernoulli(0.5), 2.5).unwrap(),
            1.5
        );
        assert!(lmw_exponent(&ArrivalSpec::poisson(0.5), 1.0).is_err());
    }

    #[test]
    fn unstable_rejected() {
        assert!(intrinsic_exponent(&ArrivalSpec::poisson(1.0)).is_err());
    }

    #[test]
    fn tabulated_two_atoms() {
        // y = e^θ solves 0.4 y² − y + 0.6 = 0, roots 1 and 1.5
        let s = ArrivalSpec::tabulated(vec![0, 2], vec![0.6, 0.4]);
        assert!((finite(&s) - 1.5f64.ln()).abs() < 1e-9);
    }
}
