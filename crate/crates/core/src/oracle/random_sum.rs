use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::{ArrivalSampler, ArrivalSpec, Family, RngStream};

/// Smallest count of `N > b/μ` accepted at the largest grid point.
pub const MIN_TAIL_COUNT: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSumRow {
    pub b: u64,
    pub p_sum: f64,
    /// Empirical `P{N > b/μ}` from the same draws.
    pub p_n: f64,
    /// Exact `P{N > b/μ}`.
    pub p_n_exact: f64,
    /// `p_sum / p_n` (common random numbers).
    pub ratio: f64,
    pub ratio_exact: f64,
    pub n_tail_count: u64,
}

/// Monte Carlo check that `P{S_N > b} / P{N > b/μ} → 1` for
/// `S_N = X_1 + … + X_N`, `P{N > n} = (1 + n)^{-nu}` and light `X` of mean `μ`.
pub fn random_sum_trend(
    nu: f64,
    x: &ArrivalSpec,
    b_grid: &[u64],
    replicates: u64,
    stream: RngStream,
) -> Result<Vec<RandomSumRow>> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail index must be positive, got {nu}"
        )));
    }
    if !x.is_light() {
        return Err(Error::spec("summands must be light-tailed"));
    }
    let mu = x.mean();
    if mu <= 0.0 {
        return Err(Error::spec("summands need a positive mean"));
    }
    if b_grid.is_empty() || replicates == 0 {
        return Err(Error::InvalidArgument(
            "need a non-empty grid and replicates".into(),
        ));
    }
    let poisson = match x.family {
        Family::Poisson { lambda } if x.rate.is_none() => Some(lambda),
        _ => None,
    };
    let sampler = ArrivalSampler::new(x)?;
    let n_sampler = ArrivalSampler::new(&ArrivalSpec::discrete_pareto(nu))?;
    let mut rng = stream.rng();
    let thresholds: Vec<u64> = b_grid
        .iter()
        .map(|&b| (b as f64 / mu).floor() as u64)
        .collect();
    let mut sum_counts = vec![0u64; b_grid.len()];
    let mut n_counts = vec![0u64; b_grid.len()];
    for _ in 0..replicates {
        let n = n_sampler.sample(&mut rng);
        let s = match poisson {
            Some(lambda) => Poisson::new(lambda * n as f64)
                .map(|d| d.sample(&mut rng) as u64)
                .unwrap_or(0),
            None => sum_of(&sampler, n, &mut rng),
        };
        for i in 0..b_grid.len() {
            sum_counts[i] += u64::from(s > b_grid[i]);
            n_counts[i] += u64::from(n > thresholds[i]);
        }
    }
    let deepest = *n_counts.last().unwrap();
    if deepest < MIN_TAIL_COUNT {
        return Err(Error::WindowTooThin {
            points: deepest as usize,
            needed: MIN_TAIL_COUNT as usize,
            achieved_depth: deepest as f64 / replicates as f64,
        });
    }
    let r = replicates as f64;
    Ok(b_grid
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let p_sum = sum_counts[i] as f64 / r;
            let p_n = n_counts[i] as f64 / r;
            let p_n_exact = (1.0 + thresholds[i] as f64).powf(-nu);
            RandomSumRow {
                b,
                p_sum,
                p_n,
                p_n_exact,
                ratio: if p_n > 0.0 { p_sum / p_n } else { f64::NAN },
                ratio_exact: p_sum / p_n_exact,
                n_tail_count: n_counts[i],
            }
        })
        .collect())
}

fn sum_of<R: Rng + ?Sized>(sampler: &ArrivalSampler, n: u64, rng: &mut R) -> u64 {
    let mut s = 0u64;
    for _ in 0..n {
        s = s.saturating_add(sampler.sample(rng));
    }
    s
}
