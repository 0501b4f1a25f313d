//! Slot-level state machine of the two-queue system, its scheduling
//! policies, and the coupled comparison system.
//!
//! Within a slot, arrivals come first, the policy then compares the
//! post-arrival lengths, and finally one packet departs from the chosen
//! queue. Queue-length statistics are sampled after arrivals, before
//! service, so `P̂{q_H > 0}` is the fraction of slots in which `H` is served.

mod policy;
mod run;
mod state;

pub use policy::{decide, Decision, Policy, TIE_RTOL};
pub use run::{
    default_burn_in, run_coupled, run_replication, HalfStats, ReplicationStreams, RunParams,
    RunStats,
};
pub use state::{CoupledState, FictitiousState, HolTracker, Rule, SystemState};
