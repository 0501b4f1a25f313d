//! Arrival laws, random streams and renewal tables.

mod renewal;
mod sampler;
mod spec;
pub mod special;

pub use renewal::{positive_part, PositivePart, RenewalTables};
pub use sampler::{sample_arrivals, ArrivalSampler, RngStream};
pub use spec::{ArrivalSpec, Family, TailClass};
