use serde::{Deserialize, Serialize};

use super::policy::{Decision, Policy};
use super::state::{CoupledState, Rule, SystemState};
use crate::error::{Error, Result};
use crate::estimators::CcdfHistogram;
use crate::traffic::{ArrivalSampler, ArrivalSpec, RngStream};

/// Default burn-in: 10% of the run, at most one million slots.
pub fn default_burn_in(n_slots: u64) -> u64 {
    (n_slots / 10).min(1_000_000)
}

/// Everything one replication needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunParams {
    pub light: ArrivalSpec,
    pub heavy: ArrivalSpec,
    pub n_slots: u64,
    pub burn_in: u64,
    /// Record head-of-line residual/age of the heavy queue.
    pub track_hol: bool,
    /// Run the comparison system alongside.
    pub coupled: bool,
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        self.light.validate()?;
        self.heavy.validate()?;
        let total = self.light.mean() + self.heavy.mean();
        if total >= 1.0 {
            return Err(Error::Unstable { total });
        }
        if self.n_slots == 0 {
            return Err(Error::config("run.slots", "must be at least 1"));
        }
        if self.burn_in >= self.n_slots {
            return Err(Error::config(
                "run.burn_in",
                format!(
                    "burn-in {} must be below the slot count {}",
                    self.burn_in, self.n_slots
                ),
            ));
        }
        Ok(())
    }
}

/// Counters for one half of the measured period.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HalfStats {
    pub slots: u64,
    pub busy_h: u64,
    pub busy_l: u64,
    pub sum_q_h: u128,
    pub sum_q_l: u128,
}

impl HalfStats {
    fn merge(&mut self, o: &HalfStats) {
        self.slots += o.slots;
        self.busy_h += o.busy_h;
        self.busy_l += o.busy_l;
        self.sum_q_h += o.sum_q_h;
        self.sum_q_l += o.sum_q_l;
    }

    pub fn busy_fraction_h(&self) -> f64 {
        ratio(self.busy_h, self.slots)
    }

    pub fn busy_fraction_l(&self) -> f64 {
        ratio(self.busy_l, self.slots)
    }

    pub fn mean_q_h(&self) -> f64 {
        ratio_wide(self.sum_q_h, self.slots)
    }

    pub fn mean_q_l(&self) -> f64 {
        ratio_wide(self.sum_q_l, self.slots)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn ratio_wide(a: u128, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Raw outcome of one or more merged replications. Queue lengths are
/// sampled once per measured slot, after arrivals and before service.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub replications: u64,
    pub measured_slots: u64,
    pub hist_h: CcdfHistogram,
    pub hist_l: CcdfHistogram,
    pub hist_total: CcdfHistogram,
    pub halves: [HalfStats; 2],
    /// Slots (measured) in which a non-empty system was left idle.
    pub idle_while_busy: u64,
    /// Whole-run conservation counters.
    pub arrivals: [u64; 2],
    pub departures: [u64; 2],
    pub final_backlog: [u64; 2],
    /// Heavy head-of-line residual and age over measured slots with `q_H > 0`.
    pub hol_residual: Option<CcdfHistogram>,
    pub hol_age: Option<CcdfHistogram>,
    pub fict_hist_h: Option<CcdfHistogram>,
    pub fict_hist_l: Option<CcdfHistogram>,
    pub dominance_violations: u64,
    pub first_violation: Option<u64>,
}

impl RunStats {
    fn new(track_hol: bool, coupled: bool) -> Self {
        RunStats {
            replications: 1,
            measured_slots: 0,
            hist_h: CcdfHistogram::new(),
            hist_l: CcdfHistogram::new(),
            hist_total: CcdfHistogram::new(),
            halves: Default::default(),
            idle_while_busy: 0,
            arrivals: [0; 2],
            departures: [0; 2],
            final_backlog: [0; 2],
            hol_residual: track_hol.then(CcdfHistogram::new),
            hol_age: track_hol.then(CcdfHistogram::new),
            fict_hist_h: coupled.then(CcdfHistogram::new),
            fict_hist_l: coupled.then(CcdfHistogram::new),
            dominance_violations: 0,
            first_violation: None,
        }
    }

    /// Busy fraction `P̂{q_H > 0}` over the whole measured period.
    pub fn busy_fraction_h(&self) -> f64 {
        self.hist_h.busy_fraction()
    }

    pub fn busy_fraction_l(&self) -> f64 {
        self.hist_l.busy_fraction()
    }

    pub fn mean_q_h(&self) -> f64 {
        let s: u128 = self.halves.iter().map(|h| h.sum_q_h).sum();
        ratio_wide(s, self.measured_slots)
    }

    pub fn mean_q_l(&self) -> f64 {
        let s: u128 = self.halves.iter().map(|h| h.sum_q_l).sum();
        ratio_wide(s, self.measured_slots)
    }

    /// Arrivals minus departures equals the final backlog, per queue.
    pub fn conserves_packets(&self) -> bool {
        (0..2).all(|i| self.arrivals[i] == self.departures[i] + self.final_backlog[i])
    }

    /// Fold another replication in; order-independent.
    pub fn merge(&mut self, o: &RunStats) -> Result<()> {
        self.replications += o.replications;
        self.measured_slots += o.measured_slots;
        self.hist_h.merge(&o.hist_h)?;
        self.hist_l.merge(&o.hist_l)?;
        self.hist_total.merge(&o.hist_total)?;
        for (a, b) in self.halves.iter_mut().zip(&o.halves) {
            a.merge(b);
        }
        self.idle_while_busy += o.idle_while_busy;
        for i in 0..2 {
            self.arrivals[i] += o.arrivals[i];
            self.departures[i] += o.departures[i];
            self.final_backlog[i] += o.final_backlog[i];
        }
        merge_opt(&mut self.hol_residual, &o.hol_residual)?;
        merge_opt(&mut self.hol_age, &o.hol_age)?;
        merge_opt(&mut self.fict_hist_h, &o.fict_hist_h)?;
        merge_opt(&mut self.fict_hist_l, &o.fict_hist_l)?;
        self.dominance_violations += o.dominance_violations;
        self.first_violation = match (self.first_violation, o.first_violation) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok(())
    }
}

fn merge_opt(a: &mut Option<CcdfHistogram>, b: &Option<CcdfHistogram>) -> Result<()> {
    match (a.as_mut(), b) {
        (Some(x), Some(y)) => x.merge(y),
        (None, None) => Ok(()),
        _ => Err(Error::InvalidArgument(
            "merging runs with different recorders".into(),
        )),
    }
}

/// Independent random streams for one replication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicationStreams {
    pub heavy: RngStream,
    pub light: RngStream,
}

impl ReplicationStreams {
    pub fn new(seed: u64, replication: u64) -> Self {
        let [heavy, light, _] = RngStream::replication(seed, replication);
        ReplicationStreams { heavy, light }
    }
}

/// Simulate one replication under `rule`.
pub fn run_replication<R: Rule + ?Sized>(
    rule: &R,
    params: &RunParams,
    streams: ReplicationStreams,
) -> Result<RunStats> {
    params.validate()?;
    let heavy = ArrivalSampler::new(&params.heavy)?;
    let light = ArrivalSampler::new(&params.light)?;
    let mut rng_h = streams.heavy.rng();
    let mut rng_l = streams.light.rng();
    let mut stats = RunStats::new(params.track_hol, params.coupled);
    let midpoint = params.burn_in + (params.n_slots - params.burn_in) / 2;

    let mut coupled = CoupledState::new();
    if params.track_hol {
        coupled.original = SystemState::with_hol();
    }

    for t in 0..params.n_slots {
        let h = heavy.sample(&mut rng_h);
        let l = light.sample(&mut rng_l);
        stats.arrivals[0] += h;
        stats.arrivals[1] += l;
        coupled.arrive(h, l)?;
        let (q_h, q_l) = (coupled.original.q_h, coupled.original.q_l);

        if t >= params.burn_in {
            stats.measured_slots += 1;
            stats.hist_h.record(q_h);
            stats.hist_l.record(q_l);
            stats.hist_total.record(q_h.saturating_add(q_l));
            let half = &mut stats.halves[usize::from(t >= midpoint)];
            half.slots += 1;
            half.busy_h += u64::from(q_h > 0);
            half.busy_l += u64::from(q_l > 0);
            half.sum_q_h += u128::from(q_h);
            half.sum_q_l += u128::from(q_l);
            if q_h > 0 {
                if let (Some(hol), Some(r), Some(a)) = (
                    &coupled.original.hol,
                    &mut stats.hol_residual,
                    &mut stats.hol_age,
                ) {
                    r.record(hol.residual());
                    a.record(hol.age());
                }
            }
            if let (Some(fh), Some(fl)) = (&mut stats.fict_hist_h, &mut stats.fict_hist_l) {
                fh.record(coupled.fictitious.q_h);
                fl.record(coupled.fictitious.q_l);
            }
        }

        let d = if params.coupled {
            coupled.serve(rule)
        } else {
            let d = rule.decide(q_h, q_l);
            coupled.original.serve(d);
            d
        };
        match d {
            Decision::ServeH if q_h > 0 => stats.departures[0] += 1,
            Decision::ServeL if q_l > 0 => stats.departures[1] += 1,
            _ => {
                if t >= params.burn_in && q_h + q_l > 0 {
                    stats.idle_while_busy += 1;
                }
            }
        }
    }
    stats.final_backlog = [coupled.original.q_h, coupled.original.q_l];
    stats.dominance_violations = coupled.violations;
    stats.first_violation = coupled.first_violation;
    Ok(stats)
}

/// Coupled run; any dominance violation is a hard error.
pub fn run_coupled(
    policy: &Policy,
    params: &RunParams,
    streams: ReplicationStreams,
) -> Result<RunStats> {
    match policy {
        Policy::MaxWeightAlpha { .. } | Policy::LogMaxWeight => {}
        _ => {
            return Err(Error::InvalidArgument(
                "the comparison system is defined for max-weight-alpha and log-max-weight".into(),
            ))
        }
    }
    let params = RunParams {
        coupled: true,
        ..params.clone()
    };
    let stats = run_replication(policy, &params, streams)?;
    if stats.dominance_violations > 0 {
        return Err(Error::DominanceViolated {
            count: stats.dominance_violations,
            first_slot: stats.first_violation.unwrap_or(0),
        });
    }
    Ok(stats)
}
