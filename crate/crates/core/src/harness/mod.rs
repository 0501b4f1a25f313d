//! Experiment configuration, parallel execution, result summaries, sweeps
//! and the validation suite.

mod config;
mod runner;
mod summary;
mod sweep;
mod validate;

pub use config::{EstimatorSettings, ExperimentConfig};
pub use runner::{run_experiment, run_many, worker_count, THREADS_ENV};
pub use summary::{
    fit_decay, heavy_lower_bound, ld_window, parse_summary, summarize, tail_band, write_outputs,
    Check, HalfSummary, Outcome, RunSummary,
};
pub use sweep::{
    lambda_prediction, render_alpha, render_exponents, render_lambda, sweep_alpha, sweep_lambda,
    AlphaRow, LambdaPrediction, LambdaRow, Regime, ALPHA_HEADER, EXPONENT_HEADER, LAMBDA_HEADER,
};
pub use validate::{
    bounded_pair, busy_identity_check, render_report, renewal_laws, run_validation, tie_check,
    ValidationCheck,
};
