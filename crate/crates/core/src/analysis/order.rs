use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper order estimates above this are reported as effectively light.
pub const LIGHT_ORDER: f64 = 10.0;

/// Finite-window proxy for the lower and upper orders of a tail: the min and
/// max of `−ln F̄(x) / ln x` over the supplied points. Not a limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderDiagnostic {
    pub lower: f64,
    pub upper: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    pub effectively_light: bool,
}

/// `points` are `(x, F̄(x))` pairs with `x > 1`.
pub fn order_diagnostic(points: &[(f64, f64)]) -> Result<OrderDiagnostic> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "order diagnostic needs a non-empty window".into(),
        ));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut window = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, tail) in points {
        if x.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater)
            || tail.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        {
            return Err(Error::InvalidArgument(format!(
                "need x > 1 and a positive tail, got ({x}, {tail})"
            )));
        }
        let r = -tail.ln() / x.ln();
        lower = lower.min(r);
        upper = upper.max(r);
        window = (window.0.min(x), window.1.max(x));
    }
    Ok(OrderDiagnostic {
        lower,
        upper,
        window,
        n_points: points.len(),
        effectively_light: upper > LIGHT_ORDER,
    })
}

/// Evaluate `tail` on `n` log-spaced points of `[lo, hi]` and diagnose.
pub fn order_diagnostic_fn(
    tail: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<OrderDiagnostic> {
    if n == 0 || !(lo > 1.0 && hi >= lo) {
        return Err(Error::InvalidArgument(format!(
            "bad window [{lo}, {hi}] with {n} points"
        )));
    }
    let step = if n > 1 {
        (hi / lo).ln() / (n - 1) as f64
    } else {
        0.0
    };
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = lo * (i as f64 * step).exp();
            (x, tail(x))
        })
        .collect();
    order_diagnostic(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let d = order_diagnostic_fn(|x| x.powf(-1.5), 10.0, 1e6, 200).unwrap();
        assert!((d.lower - 1.5).abs() < 1e-6 && (d.upper - 1.5).abs() < 1e-6);
        assert!(!d.effectively_light);
    }

    #[test]
    fn log_corrected_power_law_approaches_index() {
        let f = |x: f64| x.powf(-1.5) * x.ln();
        let near = order_diagnostic_fn(f, 10.0, 1e3, 50).unwrap();
        let far = order_diagnostic_fn(f, 1e6, 1e9, 50).unwrap();
        assert!(near.lower < 1.5 && far.lower < 1.5);
        assert!(far.lower > near.lower);
        assert!(1.5 - far.upper < 1.5 - near.upper);
    }

    #[test]
    fn exponential_flagged_light() {
        let d = order_diagnostic_fn(|x| (-x).exp(), 10.0, 100.0, 50).unwrap();
        assert!(d.upper > 10.0);
        assert!(d.effectively_light);
        assert!((d.lower - 10.0 / 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn empty_window_rejected() {
        assert!(order_diagnostic(&[]).is_err());
    }
}
