use hqsim::oracle::{
    joint2_max_gap, random_sum_trend, renewal_enumeration, row_sum, stationarity_residual,
    stationary_distribution, ChainOptions,
};
use hqsim::sim::Policy;
use hqsim::traffic::{ArrivalSpec, RenewalTables, RngStream};

#[test]
fn random_sum_ratio_tends_to_one() {
    let grid = [50, 100, 200, 400, 800];
    let rows = random_sum_trend(
        1.5,
        &ArrivalSpec::poisson(1.0),
        &grid,
        10_000_000,
        RngStream::new(8, 0),
    )
    .unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last.b, 800);
    assert!((0.8..=1.2).contains(&last.ratio), "ratio {}", last.ratio);
}

#[test]
fn deterministic_summand_gives_exact_ratio() {
    let x = ArrivalSpec::tabulated(vec![2], vec![1.0]);
    let rows = random_sum_trend(1.5, &x, &[10, 40, 100], 200_000, RngStream::new(1, 0)).unwrap();
    for r in rows {
        assert_eq!(r.ratio, 1.0, "b = {}", r.b);
    }
}

#[test]
fn renewal_enumeration_examples() {
    let uniform3 = [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
    let t = RenewalTables::new(&uniform3).unwrap();
    let e = renewal_enumeration(&uniform3, 10_000_000).unwrap();
    assert!(e.max_deviation(&t) < 1e-3);
    assert!(joint2_max_gap(&t) < 1e-15);

    let four = [0.0, 0.0, 0.0, 0.0, 1.0];
    let e = renewal_enumeration(&four, 10_000).unwrap();
    for l in 0..4 {
        assert!((e.age[l] - 0.25).abs() < 1e-3, "age {l}: {}", e.age[l]);
    }
}

#[test]
fn chain_law_is_a_fixed_point() {
    let light = ArrivalSpec::tabulated(vec![0, 1, 2], vec![0.6, 0.3, 0.1]);
    let heavy = ArrivalSpec::tabulated(vec![0, 3], vec![0.9, 0.1]);
    for policy in [
        Policy::PriorityH,
        Policy::PriorityL,
        Policy::max_weight(1.0, 2.0),
        Policy::LogMaxWeight,
    ] {
        let law =
            stationary_distribution(&light, &heavy, &policy, ChainOptions::default()).unwrap();
        assert!(stationarity_residual(&law, &light, &heavy, &policy).unwrap() < 1e-10);
        assert!((law.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((row_sum(&light, &heavy, &policy, 40, 7, 3).unwrap() - 1.0).abs() < 1e-12);
        // the heavy queue is served in a fraction lambda_H of slots only under priority-H
        if policy == Policy::PriorityH {
            assert!((law.busy_h() - 0.3).abs() < 1e-9);
        }
        let busy = 1.0 - law.prob(0, 0);
        assert!((busy - 0.8).abs() < 1e-9, "{}: {busy}", policy.name());
    }
}
