use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::run_many;
use super::summary::{fit_decay, Outcome};
use crate::analysis::{
    intrinsic_exponent, predict_tail_coefficient, ExponentValue, TailCoefficient,
};
use crate::error::{Error, Result};
use crate::estimators::{fit_tail_index_hist, ExponentEstimate, TailIndexEstimate};
use crate::kv::fmt_f64;
use crate::sim::{Policy, RunStats};

pub const ALPHA_HEADER: &str = "ratio,predicted,measured,stderr,hill,status";
pub const LAMBDA_HEADER: &str =
    "lambda_l,intrinsic_exponent,predicted,regime,measured,r_squared,status";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub ratio: f64,
    pub predicted: TailCoefficient,
    pub measured: Outcome<TailIndexEstimate>,
}

/// Which term attains `min(E_L, C_H − 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The heavy tail sets the rate (`C_H − 1`).
    Flat,
    /// The light queue's intrinsic exponent sets the rate.
    Intrinsic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Flat => "flat",
            Regime::Intrinsic => "intrinsic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaPrediction {
    pub lambda_l: f64,
    pub sup_form: ExponentValue,
    pub inf_form: ExponentValue,
    pub c_h: f64,
    pub predicted: f64,
    pub regime: Regime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda_l: f64,
    pub prediction: Option<LambdaPrediction>,
    pub measured: Outcome<ExponentEstimate>,
}

fn heavy_index(base: &ExperimentConfig) -> Result<f64> {
    base.heavy_index().ok_or_else(|| {
        Error::config(
            "traffic.heavy.family",
            "sweeps need a heavy law with a tail index",
        )
    })
}

fn na() -> String {
    "NA".into()
}

/// Light-queue tail coefficient across `alpha_L / alpha_H`, with `alpha_H = 1`.
pub fn sweep_alpha(base: &ExperimentConfig, ratios: &[f64]) -> Result<Vec<AlphaRow>> {
    let c_h = heavy_index(base)?;
    let mut configs = Vec::with_capacity(ratios.len());
    let mut predicted = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ratio must be positive, got {ratio}"
            )));
        }
        let mut cfg = base.clone();
        cfg.policy = Policy::max_weight(1.0, ratio);
        cfg.validate()?;
        predicted.push(predict_tail_coefficient(&cfg.policy, c_h)?.q_l);
        configs.push(cfg);
    }
    let window = base.estimator.tail_window;
    Ok(run_many(&configs)
        .into_iter()
        .zip(ratios.iter().zip(predicted))
        .map(|(stats, (&ratio, predicted))| AlphaRow {
            ratio,
            predicted,
            measured: measure(stats, |s| fit_tail_index_hist(&s.hist_l, window)),
        })
        .collect())
}

fn measure<T>(stats: Result<RunStats>, f: impl FnOnce(&RunStats) -> Result<T>) -> Outcome<T> {
    Outcome::from_result(stats.and_then(|s| f(&s)))
}

pub fn render_alpha(rows: &[AlphaRow]) -> String {
    let mut out = format!("{ALPHA_HEADER}\n");
    for r in rows {
        let pred = r.predicted.finite().map_or_else(na, fmt_f64);
        let (m, se, hill) = match r.measured.estimate() {
            Some(e) => (
                fmt_f64(e.slope),
                fmt_f64(e.stderr),
                e.hill.map_or_else(na, fmt_f64),
            ),
            None => (na(), na(), na()),
        };
        out += &format!(
            "{},{pred},{m},{se},{hill},{}\n",
            fmt_f64(r.ratio),
            r.measured.status()
        );
    }
    out
}

/// Predicted decay rate of `q_L` under log-max-weight when the light law is
/// rescaled to mean `lambda_l`.
pub fn lambda_prediction(base: &ExperimentConfig, lambda_l: f64) -> Result<LambdaPrediction> {
    let c_h = heavy_index(base)?;
    let light = base.light.with_mean(lambda_l)?;
    let e = intrinsic_exponent(&light)?;
    let flat = c_h - 1.0;
    let (predicted, regime) = match e.value() {
        ExponentValue::Finite(v) if v < flat => (v, Regime::Intrinsic),
        _ => (flat, Regime::Flat),
    };
    Ok(LambdaPrediction {
        lambda_l,
        sup_form: e.sup_form.value,
        inf_form: e.inf_form.value,
        c_h,
        predicted,
        regime,
    })
}

/// Light-queue decay rate under log-max-weight across light loads.
pub fn sweep_lambda(base: &ExperimentConfig, lambdas: &[f64]) -> Result<Vec<LambdaRow>> {
    heavy_index(base)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut configs = Vec::new();
    let mut slots = Vec::new();
    for &lambda_l in lambdas {
        let prepared = base.light.with_mean(lambda_l).and_then(|light| {
            let mut cfg = base.clone();
            cfg.light = light;
            cfg.policy = Policy::LogMaxWeight;
            cfg.validate()?;
            Ok(cfg)
        });
        let prediction = lambda_prediction(base, lambda_l).ok();
        match prepared {
            Ok(cfg) => {
                slots.push(rows.len());
                configs.push(cfg);
                rows.push(LambdaRow {
                    lambda_l,
                    prediction,
                    measured: Outcome::NotApplicable,
                });
            }
            Err(e) => rows.push(LambdaRow {
                lambda_l,
                prediction,
                measured: Outcome::Rejected {
                    message: e.to_string(),
                },
            }),
        }
    }
    let est = base.estimator.clone();
    for (i, stats) in slots.into_iter().zip(run_many(&configs)) {
        rows[i].measured = measure(stats, |s| fit_decay(&s.hist_l, est.ld_b_min, est.ld_depth));
    }
    Ok(rows)
}

pub fn render_lambda(rows: &[LambdaRow]) -> String {
    let mut out = format!("{LAMBDA_HEADER}\n");
    for r in rows {
        let (e, pred, regime) = match &r.prediction {
            Some(p) => (
                p.sup_form.to_string(),
                fmt_f64(p.predicted),
                p.regime.as_str().to_string(),
            ),
            None => (na(), na(), na()),
        };
        let (m, r2) = match r.measured.estimate() {
            Some(m) => (fmt_f64(m.rate), fmt_f64(m.r_squared)),
            None => (na(), na()),
        };
        out += &format!(
            "{},{e},{pred},{regime},{m},{r2},{}\n",
            fmt_f64(r.lambda_l),
            r.measured.status()
        );
    }
    out
}

pub const EXPONENT_HEADER: &str = "lambda_l,sup_form,inf_form,c_h_minus_1,predicted,regime";

pub fn render_exponents(rows: &[LambdaPrediction]) -> String {
    let mut out = format!("{EXPONENT_HEADER}\n");
    for p in rows {
        out += &format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(p.lambda_l),
            p.sup_form,
            p.inf_form,
            fmt_f64(p.c_h - 1.0),
            fmt_f64(p.predicted),
            p.regime.as_str()
        );
    }
    out
}
