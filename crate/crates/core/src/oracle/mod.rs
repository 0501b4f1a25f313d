//! Brute-force ground truth: stationary laws of truncated chains, exact
//! renewal enumeration, and a Monte Carlo random-sum check.

mod chain;
mod random_sum;
mod renewal;

pub use chain::{
    row_sum, stationarity_residual, stationary_distribution, tv_distance, ChainOptions,
    StationaryLaw,
};
pub use random_sum::{random_sum_trend, RandomSumRow, MIN_TAIL_COUNT};
pub use renewal::{joint2_max_gap, renewal_enumeration, RenewalEnumeration};
