use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson, Zeta};
use serde::{Deserialize, Serialize};

use super::spec::{ArrivalSpec, Family};
use crate::error::{Error, Result};

/// A reproducible random stream: ChaCha8 keyed by `seed`, with `stream_id`
/// selecting one of 2^64 independent keystreams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream ids for replication `rep`: heavy input, light input, auxiliary.
    pub fn replication(seed: u64, rep: u64) -> [RngStream; 3] {
        [0, 1, 2].map(|k| RngStream::new(seed, rep * 4 + k))
    }
}

#[derive(Clone, Debug)]
enum Draw {
    Zero,
    Bernoulli(f64),
    Poisson(Poisson<f64>),
    Geometric(Geometric),
    /// Lomax inversion: `floor(scale (U^(-1/index) - 1)) + 1`.
    Pareto {
        inv_index: f64,
        scale: f64,
    },
    Zeta(Zeta<f64>),
    Table {
        values: Vec<u64>,
        index: WeightedIndex<f64>,
    },
    /// Inversion by search on the log-CCDF.
    Search(Box<ArrivalSpec>),
}

/// Per-slot sampler compiled from an [`ArrivalSpec`].
#[derive(Clone, Debug)]
pub struct ArrivalSampler {
    activity: f64,
    draw: Draw,
}

const SAT: f64 = (1u64 << 62) as f64;

fn saturating_u64(x: f64) -> u64 {
    if x >= SAT {
        1 << 62
    } else {
        x as u64
    }
}

impl ArrivalSampler {
    pub fn new(spec: &ArrivalSpec) -> Result<Self> {
        spec.validate()?;
        let draw = match &spec.family {
            Family::Bernoulli { p } => Draw::Bernoulli(*p),
            Family::Poisson { lambda } => {
                if *lambda == 0.0 {
                    Draw::Zero
                } else {
                    Draw::Poisson(Poisson::new(*lambda).map_err(|e| Error::spec(e.to_string()))?)
                }
            }
            Family::GeometricBatch { mean } => {
                if *mean == 0.0 {
                    Draw::Zero
                } else {
                    // failures before the first success, success prob 1/(1+mean)
                    Draw::Geometric(
                        Geometric::new(1.0 / (1.0 + mean))
                            .map_err(|e| Error::spec(e.to_string()))?,
                    )
                }
            }
            Family::DiscretePareto { index, scale } => Draw::Pareto {
                inv_index: 1.0 / index,
                scale: *scale,
            },
            Family::Zeta { index } => {
                Draw::Zeta(Zeta::new(index + 1.0).map_err(|e| Error::spec(e.to_string()))?)
            }
            Family::Tabulated { values, probs } => Draw::Table {
                values: values.clone(),
                index: WeightedIndex::new(probs).map_err(|e| Error::spec(e.to_string()))?,
            },
            Family::SlowVaryModulated { .. } => Draw::Search(Box::new(ArrivalSpec {
                family: spec.family.clone(),
                rate: None,
            })),
        };
        Ok(ArrivalSampler {
            activity: spec.activity(),
            draw,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.activity < 1.0 && !rng.random_bool(self.activity) {
            return 0;
        }
        match &self.draw {
            Draw::Zero => 0,
            Draw::Bernoulli(p) => u64::from(rng.random_bool(*p)),
            Draw::Poisson(d) => d.sample(rng) as u64,
            Draw::Geometric(d) => d.sample(rng),
            Draw::Pareto { inv_index, scale } => {
                // U in (0, 1]
                let u = 1.0 - rng.random::<f64>();
                let y = scale * (u.powf(-inv_index) - 1.0);
                saturating_u64(y.floor()).saturating_add(1)
            }
            Draw::Zeta(d) => saturating_u64(d.sample(rng)),
            Draw::Table { values, index } => values[index.sample(rng)],
            Draw::Search(spec) => {
                let ln_u = (1.0 - rng.random::<f64>()).ln();
                search_ccdf(spec, ln_u)
            }
        }
    }
}

/// Smallest `n` with `ln P{X > n} < ln_u`.
fn search_ccdf(spec: &ArrivalSpec, ln_u: f64) -> u64 {
    if spec.ln_base_ccdf(0) < ln_u {
        return 0;
    }
    let mut hi = 1u64;
    while spec.ln_base_ccdf(hi) >= ln_u {
        if hi >= 1 << 61 {
            return hi;
        }
        hi *= 2;
    }
    let mut lo = hi / 2; // ccdf(lo) >= ln_u
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if spec.ln_base_ccdf(mid) >= ln_u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `n_slots` i.i.d. draws from `spec` using the keystream `rng`.
pub fn sample_arrivals(spec: &ArrivalSpec, rng: RngStream, n_slots: usize) -> Result<Vec<u64>> {
    if n_slots == 0 {
        return Err(Error::InvalidArgument("n_slots must be >= 1".into()));
    }
    let sampler = ArrivalSampler::new(spec)?;
    let mut r = rng.rng();
    Ok((0..n_slots).map(|_| sampler.sample(&mut r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[u64]) -> f64 {
        xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn bernoulli_zero_is_all_zeros() {
        let xs = sample_arrivals(&ArrivalSpec::bernoulli(0.0), RngStream::new(1, 0), 100).unwrap();
        assert!(xs.iter().all(|&x| x == 0));
    }

    #[test]
    fn poisson_mean_within_four_sigma() {
        // sd of the mean: sqrt(0.5 / 1e6) = 7.07e-4; 4 sigma ~ 0.0028
        let xs =
            sample_arrivals(&ArrivalSpec::poisson(0.5), RngStream::new(7, 3), 1_000_000).unwrap();
        assert!((mean(&xs) - 0.5).abs() < 0.003, "{}", mean(&xs));
    }

    #[test]
    fn discrete_pareto_tail_frequency() {
        let n = 2_000_000;
        let xs =
            sample_arrivals(&ArrivalSpec::discrete_pareto(2.5), RngStream::new(11, 0), n).unwrap();
        let p = 11f64.powf(-2.5);
        let freq = xs.iter().filter(|&&x| x > 10).count() as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * sigma, "{freq} vs {p}");
        assert!(xs.iter().all(|&x| x >= 1));
    }

    #[test]
    fn slow_vary_sampler_matches_ccdf() {
        let spec = ArrivalSpec::slow_vary(2.0, 1.0);
        let n = 400_000;
        let xs = sample_arrivals(&spec, RngStream::new(5, 9), n).unwrap();
        for b in [1u64, 3, 10, 30] {
            let p = spec.ccdf(b);
            let freq = xs.iter().filter(|&&x| x > b).count() as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * sigma, "b={b}: {freq} vs {p}");
        }
    }

    #[test]
    fn thinned_heavy_mean() {
        let spec = ArrivalSpec::heavy_pareto(3.5, 0.3);
        let xs = sample_arrivals(&spec, RngStream::new(2, 2), 1_000_000).unwrap();
        assert!((mean(&xs) - 0.3).abs() < 0.01, "{}", mean(&xs));
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let spec = ArrivalSpec::poisson(1.0);
        let a = sample_arrivals(&spec, RngStream::new(3, 1), 1000).unwrap();
        let b = sample_arrivals(&spec, RngStream::new(3, 1), 1000).unwrap();
        let c = sample_arrivals(&spec, RngStream::new(3, 2), 1000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sample_arrivals(&ArrivalSpec::poisson(1.0), RngStream::new(0, 0), 0).is_err());
        assert!(sample_arrivals(&ArrivalSpec::zeta(0.9), RngStream::new(0, 0), 5).is_err());
    }
}
