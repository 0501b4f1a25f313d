use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::run_experiment;
use crate::analysis::{
    intrinsic_exponent, lmw_exponent, predict_tail_coefficient, ExponentValue, TailCoefficient,
};
use crate::error::{Error, Result};
use crate::oracle::{
    joint2_max_gap, renewal_enumeration, stationary_distribution, tv_distance, ChainOptions,
};
use crate::sim::{
    run_coupled, run_replication, Decision, Policy, ReplicationStreams, Rule, RunParams,
};
use crate::traffic::{ArrivalSpec, RenewalTables};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    /// The property of the model that the check exercises.
    pub anchor: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, anchor: &str, outcome: Result<(bool, String)>) -> ValidationCheck {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    ValidationCheck {
        name: name.into(),
        anchor: anchor.into(),
        passed,
        detail,
    }
}

/// Finite-support laws of the positive part of a burst, used by the renewal checks.
pub fn renewal_laws() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 1.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.25, 0.25, 0.25, 0.25],
        vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5],
        vec![0.0, 0.6, 0.2, 0.1, 0.05, 0.03, 0.02],
    ]
}

fn renewal_identities() -> Result<(bool, String)> {
    let mut worst_sum: f64 = 0.0;
    let mut worst_joint: f64 = 0.0;
    for pmf in renewal_laws() {
        let t = RenewalTables::new(&pmf)?;
        let total = |v: &[f64]| v.iter().sum::<f64>();
        worst_sum = worst_sum
            .max((total(&t.pmf_residual) - 1.0).abs())
            .max((total(&t.pmf_age) - 1.0).abs())
            .max((total(&t.pmf_duration) - 1.0).abs());
        worst_joint = worst_joint.max(joint2_max_gap(&t));
    }
    Ok((
        worst_sum < 1e-12 && worst_joint < 1e-12,
        format!("normalisation gap {worst_sum:.2e}, joint-law gap {worst_joint:.2e}"),
    ))
}

fn renewal_time_average(horizon: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for pmf in renewal_laws() {
        let t = RenewalTables::new(&pmf)?;
        worst = worst.max(renewal_enumeration(&pmf, horizon)?.max_deviation(&t));
    }
    Ok((
        worst < 1e-3,
        format!("max deviation {worst:.2e} at horizon {horizon}"),
    ))
}

fn exponent_forms() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for spec in [
            ArrivalSpec::poisson(lambda),
            ArrivalSpec::bernoulli(lambda),
            ArrivalSpec::geometric(lambda),
        ] {
            let e = intrinsic_exponent(&spec)?;
            if let (ExponentValue::Finite(a), ExponentValue::Finite(b)) =
                (e.sup_form.value, e.inf_form.value)
            {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let g = intrinsic_exponent(&ArrivalSpec::geometric(0.5))?
        .value()
        .as_f64();
    let gap = (g - std::f64::consts::LN_2).abs();
    Ok((
        worst < 1e-6 && gap < 1e-6,
        format!("max sup/inf gap {worst:.2e}; geometric(0.5) gives {g:.9} vs ln 2"),
    ))
}

fn predictions() -> Result<(bool, String)> {
    let mut ok = true;
    let mut got = Vec::new();
    for (ratio, want) in [(0.5, 1.5), (1.0, 1.5), (2.0, 3.0), (4.0, 6.0)] {
        let p = predict_tail_coefficient(&Policy::max_weight(1.0, ratio), 2.5)?;
        ok &= p.q_l == TailCoefficient::Finite(want);
        got.push(format!("{ratio}:{}", p.q_l));
    }
    ok &= predict_tail_coefficient(&Policy::PriorityH, 2.5)?.q_l == TailCoefficient::Finite(1.5);
    ok &= predict_tail_coefficient(&Policy::PriorityL, 2.5)?.q_l == TailCoefficient::Light;
    let mid = lmw_exponent(&ArrivalSpec::poisson(0.5), 2.5)?;
    let low = lmw_exponent(&ArrivalSpec::poisson(0.1), 2.5)?;
    ok &= (mid - 1.25643).abs() < 1e-4 && (low - 1.5).abs() < 1e-12;
    Ok((
        ok,
        format!(
            "max-weight q_L coefficients {}; log-max-weight rates {mid:.5}, {low}",
            got.join(" ")
        ),
    ))
}

/// Ties between equal weights must go to the light queue.
pub fn tie_check<R: Rule + ?Sized>(rule: &R) -> ValidationCheck {
    let cases = [(5u64, 5u64), (1, 1), (40, 40)];
    let ok = cases
        .iter()
        .all(|&(h, l)| rule.decide(h, l) == Decision::ServeL);
    check(
        "tie rule",
        "equal max-weight weights are broken in favour of the light queue",
        Ok((ok, format!("decisions at {cases:?}"))),
    )
}

/// Under a non-idling rule, the post-arrival probability that the system is
/// non-empty equals the total load.
pub fn busy_identity_check<R: Rule + ?Sized>(
    rule: &R,
    light: &ArrivalSpec,
    heavy: &ArrivalSpec,
    slots: u64,
    seed: u64,
) -> ValidationCheck {
    let outcome = (|| {
        let params = RunParams {
            light: light.clone(),
            heavy: heavy.clone(),
            n_slots: slots,
            burn_in: slots / 10,
            track_hol: false,
            coupled: false,
        };
        let stats = run_replication(rule, &params, ReplicationStreams::new(seed, 0))?;
        let busy = stats.hist_total.busy_fraction();
        let load = light.mean() + heavy.mean();
        let tol = 0.01;
        Ok((
            (busy - load).abs() < tol && stats.idle_while_busy == 0,
            format!(
                "P(q_H+q_L>0) = {busy:.4} vs load {load}; {} idle slots with work",
                stats.idle_while_busy
            ),
        ))
    })();
    check(
        "work conservation",
        "a non-idling server's busy fraction equals the offered load",
        outcome,
    )
}

/// Bounded-support configuration used by the oracle agreement check.
pub fn bounded_pair() -> (ArrivalSpec, ArrivalSpec) {
    (
        ArrivalSpec::bernoulli(0.3),
        ArrivalSpec::tabulated(vec![0, 2, 4], vec![0.85, 0.1, 0.05]),
    )
}

fn oracle_agreement(slots: u64) -> Result<(bool, String)> {
    let (light, heavy) = bounded_pair();
    let mut worst: f64 = 0.0;
    for policy in [
        Policy::PriorityH,
        Policy::max_weight(1.0, 1.0),
        Policy::LogMaxWeight,
    ] {
        let law = stationary_distribution(
            &light,
            &heavy,
            &policy,
            ChainOptions {
                cap: 80,
                ..ChainOptions::default()
            },
        )?;
        let params = RunParams {
            light: light.clone(),
            heavy: heavy.clone(),
            n_slots: slots,
            burn_in: slots / 10,
            track_hol: false,
            coupled: false,
        };
        let stats = run_replication(&policy, &params, ReplicationStreams::new(7, 0))?;
        worst = worst
            .max(tv_distance(&law.marginal_h, &stats.hist_h))
            .max(tv_distance(&law.marginal_l, &stats.hist_l));
    }
    Ok((
        worst < 0.01,
        format!("max total variation {worst:.4} over 3 policies"),
    ))
}

fn dominance(slots: u64) -> Result<(bool, String)> {
    let params = RunParams {
        light: ArrivalSpec::poisson(0.3),
        heavy: ArrivalSpec::heavy_pareto(2.5, 0.3),
        n_slots: slots,
        burn_in: 0,
        track_hol: false,
        coupled: true,
    };
    let mut total = 0;
    for policy in [
        Policy::max_weight(1.0, 1.0),
        Policy::max_weight(1.0, 2.0),
        Policy::LogMaxWeight,
    ] {
        match run_coupled(&policy, &params, ReplicationStreams::new(11, 0)) {
            Ok(s) => total += s.dominance_violations,
            Err(Error::DominanceViolated { count, .. }) => total += count,
            Err(e) => return Err(e),
        }
    }
    Ok((total == 0, format!("{total} violations over 3 policies")))
}

fn base_config(slots: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        ArrivalSpec::poisson(0.3),
        ArrivalSpec::heavy_pareto(2.5, 0.3),
        Policy::max_weight(1.0, 1.0),
    );
    cfg.n_slots = slots;
    cfg.seed = 3;
    cfg
}

fn determinism(slots: u64) -> Result<(bool, String)> {
    let mut cfg = base_config(slots);
    cfg.replications = 2;
    let a = run_experiment(&cfg)?;
    let b = run_experiment(&cfg)?;
    let same = serde_json::to_string(&a)? == serde_json::to_string(&b)?;
    Ok((
        same && a.conserves_packets(),
        format!(
            "identical reruns: {same}; packets conserved: {}",
            a.conserves_packets()
        ),
    ))
}

fn heavy_priority_busy(slots: u64) -> Result<(bool, String)> {
    let mut cfg = base_config(slots);
    cfg.policy = Policy::PriorityH;
    let s = run_experiment(&cfg)?;
    let got = s.busy_fraction_h();
    Ok((
        (got - 0.3).abs() < 0.01,
        format!("P(q_H>0) = {got:.4} vs lambda_H = 0.3"),
    ))
}

fn stability_rejection() -> Result<(bool, String)> {
    let cfg = ExperimentConfig::new(
        ArrivalSpec::poisson(0.6),
        ArrivalSpec::heavy_pareto(2.5, 0.5),
        Policy::LogMaxWeight,
    );
    match cfg.validate() {
        Err(e) => {
            let msg = e.to_string();
            Ok((msg.contains("input rate does not overwhelm"), msg))
        }
        Ok(()) => Ok((false, "overloaded config accepted".into())),
    }
}

fn config_round_trip() -> Result<(bool, String)> {
    let mut cfg = base_config(12345);
    cfg.burn_in = Some(77);
    cfg.coupled = true;
    let text = cfg.render();
    let back = ExperimentConfig::parse(&text)?;
    Ok((
        back == cfg && back.render() == text,
        format!("{} bytes", text.len()),
    ))
}

/// Run the fast validation suite.
pub fn run_validation() -> Vec<ValidationCheck> {
    let (light, heavy) = (
        ArrivalSpec::poisson(0.3),
        ArrivalSpec::heavy_pareto(2.5, 0.4),
    );
    vec![
        check(
            "renewal identities",
            "residual, age and joint laws of a stationary renewal process",
            renewal_identities(),
        ),
        check(
            "renewal time average",
            "time averages of a renewal process converge to the stationary tables",
            renewal_time_average(200_000),
        ),
        check(
            "intrinsic exponent",
            "supremum and infimum forms of the light queue's exponent agree",
            exponent_forms(),
        ),
        check(
            "tail predictions",
            "tail coefficients of q_L under priority, max-weight and log-max-weight",
            predictions(),
        ),
        tie_check(&Policy::max_weight(1.0, 1.0)),
        busy_identity_check(&Policy::max_weight(1.0, 2.0), &light, &heavy, 1_000_000, 5),
        check(
            "oracle agreement",
            "simulated marginals match the truncated Markov chain",
            oracle_agreement(2_000_000),
        ),
        check(
            "comparison dominance",
            "the heavy-first comparison system never holds fewer heavy packets",
            dominance(1_000_000),
        ),
        check(
            "heavy priority busy fraction",
            "under heavy priority the heavy queue is non-empty a fraction lambda_H of slots",
            heavy_priority_busy(1_000_000),
        ),
        check(
            "determinism",
            "a seed fixes every replication",
            determinism(200_000),
        ),
        check(
            "stability rejection",
            "configs whose load reaches the service rate are rejected",
            stability_rejection(),
        ),
        check(
            "config round trip",
            "rendered configs parse back unchanged",
            config_round_trip(),
        ),
    ]
}

pub fn render_report(checks: &[ValidationCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        out += &format!("{tag} {} [{}]: {}\n", c.name, c.anchor, c.detail);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    out += &format!("{passed}/{} checks passed\n", checks.len());
    out
}
