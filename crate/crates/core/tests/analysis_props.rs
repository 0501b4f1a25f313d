use proptest::prelude::*;

use hqsim::analysis::{intrinsic_exponent, legendre, lmw_exponent, log_mgf, ExponentValue};
use hqsim::traffic::ArrivalSpec;

fn family(kind: u8, mean: f64) -> ArrivalSpec {
    match kind {
        0 => ArrivalSpec::poisson(mean),
        1 => ArrivalSpec::bernoulli(mean),
        _ => ArrivalSpec::geometric(mean),
    }
}

#[test]
fn exponent_is_nonincreasing_in_load() {
    for kind in 0..3 {
        let values: Vec<f64> = (1..=9)
            .map(|i| {
                match intrinsic_exponent(&family(kind, i as f64 / 10.0))
                    .unwrap()
                    .value()
                {
                    ExponentValue::Finite(v) => v,
                    ExponentValue::Infinite => f64::INFINITY,
                }
            })
            .collect();
        assert!(
            values.windows(2).all(|w| w[1] <= w[0]),
            "family {kind}: {values:?}"
        );
    }
}

#[test]
fn lmw_never_exceeds_the_heavy_rate() {
    assert_eq!(
        lmw_exponent(&ArrivalSpec::bernoulli(0.5), 2.5).unwrap(),
        1.5
    );
    for i in 1..=9 {
        let r = lmw_exponent(&ArrivalSpec::poisson(i as f64 / 10.0), 2.5).unwrap();
        assert!(r.is_finite() && r > 0.0 && r <= 1.5);
    }
}

#[test]
fn exponent_root_solves_the_defining_equation() {
    for lambda in [0.2, 0.5, 0.8] {
        let spec = ArrivalSpec::poisson(lambda);
        let e = intrinsic_exponent(&spec).unwrap().value().as_f64();
        assert!((log_mgf(&spec, e).unwrap() - e).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn rate_function_is_nonnegative_convex_and_zero_at_mean(kind in 0u8..3, mean in 0.05f64..0.95) {
        let spec = family(kind, mean);
        prop_assert!(legendre(&spec, mean).unwrap().abs() < 1e-9);
        let grid: Vec<f64> = (1..40).map(|i| i as f64 * 0.05).collect();
        let vals: Vec<f64> = grid.iter().map(|&x| legendre(&spec, x).unwrap()).collect();
        for (v, x) in vals.iter().zip(&grid) {
            prop_assert!(*v >= -1e-12, "negative at {}", x);
        }
        for w in vals.windows(3) {
            if w.iter().all(|v| v.is_finite()) {
                prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-7);
            }
        }
    }
}
