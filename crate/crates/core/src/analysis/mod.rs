//! Predicted asymptotics: log-MGF and Legendre transform of the light input,
//! its intrinsic exponent, per-policy tail coefficients, and finite-window
//! order diagnostics.

mod legendre;
mod mgf;
mod order;
mod prediction;

pub use legendre::{
    intrinsic_exponent, legendre, lmw_exponent, ExponentMethod, ExponentResult, ExponentValue,
    IntrinsicExponent, AGREEMENT_TOL,
};
pub use mgf::{log_mgf, LogMgf};
pub use order::{order_diagnostic, order_diagnostic_fn, OrderDiagnostic, LIGHT_ORDER};
pub use prediction::{predict_tail_coefficient, TailCoefficient, TailPrediction};
