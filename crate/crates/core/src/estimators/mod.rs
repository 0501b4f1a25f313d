//! Streaming CCDFs and the fits that turn them into tail coefficients and
//! decay rates.

mod fit;
mod histogram;
mod ols;

pub use fit::{
    fit_ld_exponent, fit_tail_index, fit_tail_index_hist, hill_index, moment_probe,
    ExponentEstimate, MomentReport, MomentVerdict, QuantileWindow, TailIndexEstimate, TailMethod,
    HILL_WARN, MIN_COUNT, MIN_POINTS,
};
pub use histogram::{
    exact_ccdf_csv, next_edge, parse_ccdf_csv, CcdfHistogram, CcdfRow, ExactTail, TailPoint,
    TailSource, DEFAULT_DIRECT_CAP,
};
pub use ols::{fit_line, quadratic_term, LineFit};
