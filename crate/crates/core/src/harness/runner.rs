use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::sim::{run_coupled, run_replication, ReplicationStreams, RunStats};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "HQSIM_THREADS";

pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, usize::from);
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .map_or(available, |n| n.min(available))
}

fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))
}

fn one(cfg: &ExperimentConfig, rep: u64) -> Result<RunStats> {
    let params = cfg.run_params();
    let streams = ReplicationStreams::new(cfg.seed, rep);
    if cfg.coupled {
        run_coupled(&cfg.policy, &params, streams)
    } else {
        run_replication(&cfg.policy, &params, streams)
    }
}

/// Run every replication of every config on the worker pool and merge each
/// config's replications in replication order.
pub fn run_many(configs: &[ExperimentConfig]) -> Vec<Result<RunStats>> {
    let tasks: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.replications).map(move |r| (i, r)))
        .collect();
    let results: Vec<Result<RunStats>> = match pool() {
        Ok(p) => p.install(|| {
            tasks
                .par_iter()
                .map(|&(i, r)| one(&configs[i], r))
                .collect()
        }),
        Err(_) => tasks.iter().map(|&(i, r)| one(&configs[i], r)).collect(),
    };
    let mut merged: Vec<Option<Result<RunStats>>> = (0..configs.len()).map(|_| None).collect();
    for (&(i, _), res) in tasks.iter().zip(results) {
        merged[i] = Some(match (merged[i].take(), res) {
            (None, r) => r,
            (Some(Err(e)), _) => Err(e),
            (Some(Ok(_)), Err(e)) => Err(e),
            (Some(Ok(mut acc)), Ok(s)) => acc.merge(&s).map(|_| acc),
        });
    }
    merged
        .into_iter()
        .map(|m| m.unwrap_or_else(|| Err(Error::InvalidArgument("no replications".into()))))
        .collect()
}

/// Validate and run one experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunStats> {
    cfg.validate()?;
    run_many(std::slice::from_ref(cfg)).pop().unwrap()
}
