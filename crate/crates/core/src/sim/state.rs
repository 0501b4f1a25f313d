use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::policy::{Decision, Policy};
use crate::error::{Error, Result};

/// Scheduling rule as seen by the state machine. `Policy` is the production
/// implementation; tests substitute deliberately broken rules.
pub trait Rule {
    /// Comparison outcome on post-arrival lengths (may favour an empty queue).
    fn light_wins(&self, q_h: u64, q_l: u64) -> bool;

    /// Final decision; the default serves the other queue when the winner is empty.
    #[inline]
    fn decide(&self, q_h: u64, q_l: u64) -> Decision {
        let light = self.light_wins(q_h, q_l);
        match (light, q_h > 0, q_l > 0) {
            (_, false, false) => Decision::Idle,
            (true, _, true) | (false, false, true) => Decision::ServeL,
            _ => Decision::ServeH,
        }
    }
}

impl Rule for Policy {
    #[inline]
    fn light_wins(&self, q_h: u64, q_l: u64) -> bool {
        Policy::light_wins(self, q_h, q_l)
    }

    #[inline]
    fn decide(&self, q_h: u64, q_l: u64) -> Decision {
        Policy::decide(self, q_h, q_l)
    }
}

/// FIFO burst bookkeeping for the heavy queue: the burst at the head of line
/// has `residual` packets left and has had `age` of them served.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolTracker {
    waiting: VecDeque<u64>,
    residual: u64,
    age: u64,
}

impl HolTracker {
    #[inline]
    fn arrive(&mut self, burst: u64) {
        if burst == 0 {
            return;
        }
        if self.residual == 0 {
            self.residual = burst;
            self.age = 0;
        } else {
            self.waiting.push_back(burst);
        }
    }

    #[inline]
    fn serve(&mut self) {
        debug_assert!(self.residual > 0);
        self.residual -= 1;
        self.age += 1;
        if self.residual == 0 {
            self.age = 0;
            if let Some(next) = self.waiting.pop_front() {
                self.residual = next;
            }
        }
    }

    pub fn residual(&self) -> u64 {
        self.residual
    }

    pub fn age(&self) -> u64 {
        self.age
    }

    /// Packets held across all tracked bursts.
    pub fn backlog(&self) -> u64 {
        self.residual + self.waiting.iter().sum::<u64>()
    }
}

/// One two-queue system. Each slot runs arrivals, then the decision on the
/// post-arrival lengths, then at most one departure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemState {
    pub q_h: u64,
    pub q_l: u64,
    pub slot: u64,
    pub hol: Option<HolTracker>,
}

impl SystemState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_hol() -> Self {
        SystemState {
            hol: Some(HolTracker::default()),
            ..Self::default()
        }
    }

    pub fn hol_residual(&self) -> Option<u64> {
        self.hol.as_ref().map(HolTracker::residual)
    }

    pub fn hol_age(&self) -> Option<u64> {
        self.hol.as_ref().map(HolTracker::age)
    }

    #[inline]
    pub fn arrive(&mut self, h: u64, l: u64) -> Result<()> {
        self.q_h = self
            .q_h
            .checked_add(h)
            .ok_or(Error::CounterOverflow { slot: self.slot })?;
        self.q_l = self
            .q_l
            .checked_add(l)
            .ok_or(Error::CounterOverflow { slot: self.slot })?;
        if let Some(hol) = &mut self.hol {
            hol.arrive(h);
        }
        Ok(())
    }

    /// Apply a decision and close the slot. Serving an empty queue is a no-op.
    #[inline]
    pub fn serve(&mut self, d: Decision) {
        match d {
            Decision::ServeH if self.q_h > 0 => {
                self.q_h -= 1;
                if let Some(hol) = &mut self.hol {
                    hol.serve();
                }
            }
            Decision::ServeL if self.q_l > 0 => self.q_l -= 1,
            _ => {}
        }
        self.slot += 1;
    }

    /// Full slot: arrivals, decision, service.
    #[inline]
    pub fn step<R: Rule + ?Sized>(&mut self, rule: &R, h: u64, l: u64) -> Result<Decision> {
        self.arrive(h, l)?;
        let d = rule.decide(self.q_h, self.q_l);
        self.serve(d);
        Ok(d)
    }
}

/// The comparison system: `H̃` is served every slot it is non-empty and `L̃`
/// is served iff the rule favours it, on the same arrivals as the original.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FictitiousState {
    pub q_h: u64,
    pub q_l: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledState {
    pub original: SystemState,
    pub fictitious: FictitiousState,
    pub violations: u64,
    pub first_violation: Option<u64>,
}

impl Default for CoupledState {
    fn default() -> Self {
        Self::new()
    }
}

impl CoupledState {
    pub fn new() -> Self {
        CoupledState {
            original: SystemState::new(),
            fictitious: FictitiousState::default(),
            violations: 0,
            first_violation: None,
        }
    }

    /// Arrivals for both systems.
    #[inline]
    pub fn arrive(&mut self, h: u64, l: u64) -> Result<()> {
        self.original.arrive(h, l)?;
        // the fictitious queues never exceed the original ones
        self.fictitious.q_h += h;
        self.fictitious.q_l += l;
        Ok(())
    }

    /// Service for both systems, then the dominance check.
    #[inline]
    pub fn serve<R: Rule + ?Sized>(&mut self, rule: &R) -> Decision {
        let d = rule.decide(self.original.q_h, self.original.q_l);
        let f = &mut self.fictitious;
        let serve_l = f.q_l > 0 && rule.light_wins(f.q_h, f.q_l);
        if f.q_h > 0 {
            f.q_h -= 1;
        }
        if serve_l {
            f.q_l -= 1;
        }
        let slot = self.original.slot;
        self.original.serve(d);
        if self.fictitious.q_l > self.original.q_l {
            self.violations += 1;
            self.first_violation.get_or_insert(slot);
        }
        d
    }

    #[inline]
    pub fn step_with<R: Rule + ?Sized>(&mut self, rule: &R, h: u64, l: u64) -> Result<Decision> {
        self.arrive(h, l)?;
        Ok(self.serve(rule))
    }

    pub fn step(&mut self, policy: &Policy, h: u64, l: u64) -> Result<Decision> {
        self.step_with(policy, h, l)
    }
}
