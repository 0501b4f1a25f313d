//! Deliberately broken rules must be caught by exactly the checks aimed at them.

use hqsim::harness::{busy_identity_check, run_validation, tie_check};
use hqsim::sim::{Decision, Policy, Rule};
use hqsim::traffic::ArrivalSpec;

/// Plain max-weight with ties handed to the heavy queue.
struct TiesToHeavy;

impl Rule for TiesToHeavy {
    fn light_wins(&self, q_h: u64, q_l: u64) -> bool {
        q_l > q_h
    }
}

/// Max-weight whose light weight is taken from `q_L + 1`.
struct OffByOne;

impl Rule for OffByOne {
    fn light_wins(&self, q_h: u64, q_l: u64) -> bool {
        q_l + 1 >= q_h
    }
}

/// Wraps a rule so the server idles whenever the comparison picks an empty queue.
struct IdleIfWinnerEmpty<R>(R);

impl<R: Rule> Rule for IdleIfWinnerEmpty<R> {
    fn light_wins(&self, q_h: u64, q_l: u64) -> bool {
        self.0.light_wins(q_h, q_l)
    }

    fn decide(&self, q_h: u64, q_l: u64) -> Decision {
        match (self.light_wins(q_h, q_l), q_h > 0, q_l > 0) {
            (true, _, true) => Decision::ServeL,
            (false, true, _) => Decision::ServeH,
            _ => Decision::Idle,
        }
    }
}

fn loads() -> (ArrivalSpec, ArrivalSpec) {
    (
        ArrivalSpec::poisson(0.3),
        ArrivalSpec::heavy_pareto(2.5, 0.4),
    )
}

#[test]
fn reference_rules_pass_every_check() {
    let (l, h) = loads();
    assert!(tie_check(&Policy::max_weight(1.0, 1.0)).passed);
    assert!(busy_identity_check(&Policy::max_weight(1.0, 2.0), &l, &h, 1_000_000, 5).passed);
    assert!(busy_identity_check(&OffByOne, &l, &h, 1_000_000, 5).passed);
    assert!(run_validation().iter().all(|c| c.passed));
}

#[test]
fn ties_to_heavy_fail_only_the_tie_check() {
    let (l, h) = loads();
    assert!(!tie_check(&TiesToHeavy).passed);
    assert!(busy_identity_check(&TiesToHeavy, &l, &h, 1_000_000, 5).passed);
}

#[test]
fn winner_empty_idling_is_invisible_to_max_weight() {
    // an empty queue has weight zero, so it only wins when both are empty
    for policy in [
        Policy::max_weight(1.0, 2.0),
        Policy::max_weight(3.0, 1.0),
        Policy::LogMaxWeight,
    ] {
        let idling = IdleIfWinnerEmpty(policy);
        for q_h in 0..200 {
            for q_l in 0..200 {
                assert_eq!(idling.decide(q_h, q_l), policy.decide(q_h, q_l));
            }
        }
    }
}

#[test]
fn idling_when_the_winner_is_empty_fails_work_conservation() {
    let (l, h) = loads();
    let c = busy_identity_check(&IdleIfWinnerEmpty(OffByOne), &l, &h, 1_000_000, 5);
    assert!(!c.passed, "{}", c.detail);
    let c = busy_identity_check(&IdleIfWinnerEmpty(Policy::PriorityL), &l, &h, 1_000_000, 5);
    assert!(!c.passed, "{}", c.detail);
    assert!(tie_check(&IdleIfWinnerEmpty(Policy::max_weight(1.0, 1.0))).passed);
}
