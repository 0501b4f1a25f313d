use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::{lmw_exponent, predict_tail_coefficient, TailCoefficient, TailPrediction};
use crate::error::{Error, Result};
use crate::estimators::{
    fit_ld_exponent, fit_tail_index_hist, CcdfHistogram, ExponentEstimate, TailIndexEstimate,
};
use crate::sim::{Policy, RunStats};
use crate::traffic::{positive_part, RenewalTables};

/// An estimate, or the reason it could not be produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok {
        estimate: T,
    },
    WindowTooThin {
        message: String,
    },
    Failed {
        message: String,
    },
    /// The point's configuration was invalid, so nothing was run.
    Rejected {
        message: String,
    },
    NotApplicable,
}

impl<T> Outcome<T> {
    pub(crate) fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(estimate) => Outcome::Ok { estimate },
            Err(e @ Error::WindowTooThin { .. }) => Outcome::WindowTooThin {
                message: e.to_string(),
            },
            Err(e) => Outcome::Failed {
                message: e.to_string(),
            },
        }
    }

    pub fn estimate(&self) -> Option<&T> {
        match self {
            Outcome::Ok { estimate } => Some(estimate),
            _ => None,
        }
    }

    pub fn is_thin(&self) -> bool {
        matches!(self, Outcome::WindowTooThin { .. })
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Ok { .. } => "ok",
            Outcome::WindowTooThin { .. } => "window_too_thin",
            Outcome::Failed { .. } => "failed",
            Outcome::Rejected { .. } => "rejected",
            Outcome::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSummary {
    pub slots: u64,
    pub busy_fraction_h: f64,
    pub busy_fraction_l: f64,
    pub mean_q_h: f64,
    pub mean_q_l: f64,
}

/// Machine-readable result of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub config_text: String,
    pub seed: u64,
    pub replications: u64,
    pub burn_in: u64,
    pub measured_slots: u64,
    pub busy_fraction_h: f64,
    pub busy_fraction_l: f64,
    pub mean_q_h: f64,
    pub mean_q_l: f64,
    pub halves: [HalfSummary; 2],
    pub idle_while_busy: u64,
    pub conserves_packets: bool,
    pub dominance_violations: Option<u64>,
    pub prediction: Option<TailPrediction>,
    pub predicted_lmw_exponent: Option<f64>,
    pub tail_h: Outcome<TailIndexEstimate>,
    pub tail_l: Outcome<TailIndexEstimate>,
    pub tail_total: Outcome<TailIndexEstimate>,
    pub decay_l: Outcome<ExponentEstimate>,
    pub checks: Vec<Check>,
    pub ccdf_h: CcdfHistogram,
    pub ccdf_l: CcdfHistogram,
    pub ccdf_total: CcdfHistogram,
    pub ccdf_fict_h: Option<CcdfHistogram>,
    pub ccdf_fict_l: Option<CcdfHistogram>,
    pub hol_residual: Option<CcdfHistogram>,
}

/// Decay-rate window `[lo, b_max]`, where `b_max` is the deepest grid value
/// with `depth` samples; `lo` moves down so the window keeps four points.
pub fn ld_window(hist: &CcdfHistogram, b_min: u64, depth: u64) -> Option<(u64, u64)> {
    let b_max = hist.b_max(depth)?;
    let lo = b_min.min(b_max.saturating_sub(3)).max(1);
    (b_max > lo).then_some((lo, b_max))
}

pub fn fit_decay(hist: &CcdfHistogram, b_min: u64, depth: u64) -> Result<ExponentEstimate> {
    let (lo, hi) = ld_window(hist, b_min, depth).ok_or(Error::WindowTooThin {
        points: 0,
        needed: 2,
        achieved_depth: hist.ccdf_ge(b_min),
    })?;
    fit_ld_exponent(hist, lo, hi)
}

/// Allowed distance between a measured and a predicted tail coefficient.
pub fn tail_band(predicted: f64) -> f64 {
    (0.2 * predicted).max(0.35)
}

pub fn summarize(cfg: &ExperimentConfig, stats: &RunStats) -> RunSummary {
    let window = cfg.estimator.tail_window;
    let c_h = cfg.heavy_index();
    let prediction = c_h.and_then(|c| predict_tail_coefficient(&cfg.policy, c).ok());
    let predicted_lmw = match (cfg.policy, c_h) {
        (Policy::LogMaxWeight, Some(c)) => lmw_exponent(&cfg.light, c).ok(),
        _ => None,
    };
    let tail_h = Outcome::from_result(fit_tail_index_hist(&stats.hist_h, window));
    let tail_l = Outcome::from_result(fit_tail_index_hist(&stats.hist_l, window));
    let tail_total = Outcome::from_result(fit_tail_index_hist(&stats.hist_total, window));
    let decay_l = if matches!(cfg.policy, Policy::LogMaxWeight | Policy::PriorityL) {
        Outcome::from_result(fit_decay(
            &stats.hist_l,
            cfg.estimator.ld_b_min,
            cfg.estimator.ld_depth,
        ))
    } else {
        Outcome::NotApplicable
    };

    let mut checks = vec![
        Check {
            name: "packet conservation".into(),
            passed: stats.conserves_packets(),
            detail: format!(
                "arrivals {:?}, departures {:?}, backlog {:?}",
                stats.arrivals, stats.departures, stats.final_backlog
            ),
        },
        Check {
            name: "non-idling".into(),
            passed: stats.idle_while_busy == 0,
            detail: format!(
                "{} idle slots with a non-empty system",
                stats.idle_while_busy
            ),
        },
    ];
    if cfg.policy == Policy::PriorityH {
        let lambda_h = cfg.heavy.mean();
        let got = stats.busy_fraction_h();
        checks.push(Check {
            name: "heavy busy fraction equals heavy load".into(),
            passed: (got - lambda_h).abs() < 0.01,
            detail: format!("P(q_H>0) = {got:.5}, lambda_H = {lambda_h}"),
        });
        if let Some(c) = heavy_lower_bound_check(cfg, &stats.hist_h, 200) {
            checks.push(c);
        }
    }
    if let Some(p) = &prediction {
        if let (TailCoefficient::Finite(pred), Some(e)) = (p.q_h, tail_h.estimate()) {
            checks.push(band_check("q_H tail coefficient", e.slope, pred));
        }
        if let (TailCoefficient::Finite(pred), Some(e)) = (p.q_l, tail_l.estimate()) {
            checks.push(band_check("q_L tail coefficient", e.slope, pred));
        }
    }
    if let (Some(pred), Some(e)) = (predicted_lmw, decay_l.estimate()) {
        checks.push(Check {
            name: "q_L decay rate".into(),
            passed: (e.rate - pred).abs() <= 0.2 * pred,
            detail: format!("measured {:.4} vs predicted {pred:.4} (band 20%)", e.rate),
        });
    }
    if let Some(v) = cfg.coupled.then_some(stats.dominance_violations) {
        checks.push(Check {
            name: "comparison-system dominance".into(),
            passed: v == 0,
            detail: format!("{v} violations"),
        });
    }

    let half = |i: usize| {
        let h = &stats.halves[i];
        HalfSummary {
            slots: h.slots,
            busy_fraction_h: h.busy_fraction_h(),
            busy_fraction_l: h.busy_fraction_l(),
            mean_q_h: h.mean_q_h(),
            mean_q_l: h.mean_q_l(),
        }
    };
    // the echo omits the output location so reruns elsewhere compare equal
    let echo = ExperimentConfig {
        output_dir: None,
        ..cfg.clone()
    };
    RunSummary {
        config_text: echo.render(),
        config: echo,
        seed: cfg.seed,
        replications: stats.replications,
        burn_in: cfg.burn_in(),
        measured_slots: stats.measured_slots,
        busy_fraction_h: stats.busy_fraction_h(),
        busy_fraction_l: stats.busy_fraction_l(),
        mean_q_h: stats.mean_q_h(),
        mean_q_l: stats.mean_q_l(),
        halves: [half(0), half(1)],
        idle_while_busy: stats.idle_while_busy,
        conserves_packets: stats.conserves_packets(),
        dominance_violations: cfg.coupled.then_some(stats.dominance_violations),
        prediction,
        predicted_lmw_exponent: predicted_lmw,
        tail_h,
        tail_l,
        tail_total,
        decay_l,
        checks,
        ccdf_h: stats.hist_h.clone(),
        ccdf_l: stats.hist_l.clone(),
        ccdf_total: stats.hist_total.clone(),
        ccdf_fict_h: stats.fict_hist_h.clone(),
        ccdf_fict_l: stats.fict_hist_l.clone(),
        hol_residual: stats.hol_residual.clone(),
    }
}

fn band_check(name: &str, measured: f64, predicted: f64) -> Check {
    let band = tail_band(predicted);
    Check {
        name: name.into(),
        passed: (measured - predicted).abs() <= band,
        detail: format!("measured {measured:.3} vs predicted {predicted:.3} (band ±{band:.3})"),
    }
}

/// Worst ratio of `P̂{q_H > b}` to `λ_H P{H_R > b}` over `b` with at least
/// `depth` samples beyond it; the check passes when that ratio is ≥ 0.9.
pub fn heavy_lower_bound(
    cfg: &ExperimentConfig,
    hist: &CcdfHistogram,
    depth: u64,
) -> Option<(f64, u64)> {
    let n_max = (hist.max_seen().max(16) as usize).min(1 << 22) * 2;
    let pp = positive_part(&cfg.heavy, n_max).ok()?;
    let tables = RenewalTables::new(&pp.pmf).ok()?;
    let tail_gt = tables.residual_tail_gt_table();
    let lambda_h = cfg.heavy.mean();
    let total = hist.total() as f64;
    hist.counts_ge()
        .into_iter()
        .filter(|&(b, c)| b >= 1 && c >= depth && ((b - 1) as usize) < tail_gt.len())
        .map(|(b, c)| {
            let x = b - 1;
            ((c as f64 / total) / (lambda_h * tail_gt[x as usize]), x)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

fn heavy_lower_bound_check(
    cfg: &ExperimentConfig,
    hist: &CcdfHistogram,
    depth: u64,
) -> Option<Check> {
    let (ratio, at) = heavy_lower_bound(cfg, hist, depth)?;
    Some(Check {
        name: "heavy queue above residual lower bound".into(),
        passed: ratio >= 0.9,
        detail: format!("min P(q_H>b) / (lambda_H P(H_R>b)) = {ratio:.3} at b = {at}"),
    })
}

/// Write `summary.json` and the CCDF CSVs into `dir`.
pub fn write_outputs(summary: &RunSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: &str| {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(path, e))
    };
    write(
        "summary.json",
        &(serde_json::to_string_pretty(summary)? + "\n"),
    )?;
    write("ccdf_h.csv", &summary.ccdf_h.to_csv())?;
    write("ccdf_l.csv", &summary.ccdf_l.to_csv())?;
    write("ccdf_total.csv", &summary.ccdf_total.to_csv())?;
    if let (Some(h), Some(l)) = (&summary.ccdf_fict_h, &summary.ccdf_fict_l) {
        write("ccdf_fict_h.csv", &h.to_csv())?;
        write("ccdf_fict_l.csv", &l.to_csv())?;
    }
    Ok(())
}

/// Parse a `summary.json` document (histogram edge tables are rebuilt).
pub fn parse_summary(text: &str) -> Result<RunSummary> {
    let mut s: RunSummary = serde_json::from_str(text)?;
    s.ccdf_h = s.ccdf_h.rebuild()?;
    s.ccdf_l = s.ccdf_l.rebuild()?;
    s.ccdf_total = s.ccdf_total.rebuild()?;
    s.ccdf_fict_h = s.ccdf_fict_h.map(CcdfHistogram::rebuild).transpose()?;
    s.ccdf_fict_l = s.ccdf_fict_l.map(CcdfHistogram::rebuild).transpose()?;
    s.hol_residual = s.hol_residual.map(CcdfHistogram::rebuild).transpose()?;
    Ok(s)
}
