use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::QuantileWindow;
use crate::kv::{fmt_f64, KvDoc};
use crate::sim::{default_burn_in, Policy, RunParams};
use crate::traffic::ArrivalSpec;

/// Estimator settings shared by every run of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub tail_window: QuantileWindow,
    /// Lower end of the decay-rate fit window.
    pub ld_b_min: u64,
    /// The decay-rate window ends at the largest `b` with this many samples at or above it.
    pub ld_depth: u64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            tail_window: QuantileWindow::default(),
            ld_b_min: 5,
            ld_depth: 200,
        }
    }
}

/// A complete, reproducible description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub light: ArrivalSpec,
    pub heavy: ArrivalSpec,
    pub policy: Policy,
    /// Slots per replication.
    pub n_slots: u64,
    /// Explicit burn-in; `None` means the default rule.
    pub burn_in: Option<u64>,
    pub seed: u64,
    pub replications: u64,
    pub coupled: bool,
    pub track_hol: bool,
    pub estimator: EstimatorSettings,
    pub output_dir: Option<PathBuf>,
}

const SECTIONS: &[&str] = &[
    "traffic.light",
    "traffic.heavy",
    "policy",
    "run",
    "estimator",
    "output",
];

impl ExperimentConfig {
    pub fn new(light: ArrivalSpec, heavy: ArrivalSpec, policy: Policy) -> Self {
        ExperimentConfig {
            light,
            heavy,
            policy,
            n_slots: 10_000_000,
            burn_in: None,
            seed: 1,
            replications: 1,
            coupled: false,
            track_hol: false,
            estimator: EstimatorSettings::default(),
            output_dir: None,
        }
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
            .unwrap_or_else(|| default_burn_in(self.n_slots))
    }

    pub fn run_params(&self) -> RunParams {
        RunParams {
            light: self.light.clone(),
            heavy: self.heavy.clone(),
            n_slots: self.n_slots,
            burn_in: self.burn_in(),
            track_hol: self.track_hol,
            coupled: self.coupled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.light
            .validate()
            .map_err(|e| Error::config("traffic.light", e.to_string()))?;
        self.heavy
            .validate()
            .map_err(|e| Error::config("traffic.heavy", e.to_string()))?;
        self.policy.validate()?;
        let total = self.light.mean() + self.heavy.mean();
        if total >= 1.0 {
            return Err(Error::Unstable { total });
        }
        if self.n_slots == 0 {
            return Err(Error::config("run.slots", "must be at least 1"));
        }
        if self.burn_in() >= self.n_slots {
            return Err(Error::config(
                "run.burn_in",
                format!(
                    "{} must be below run.slots = {}",
                    self.burn_in(),
                    self.n_slots
                ),
            ));
        }
        if self.replications == 0 {
            return Err(Error::config("run.replications", "must be at least 1"));
        }
        if self.coupled
            && !matches!(
                self.policy,
                Policy::MaxWeightAlpha { .. } | Policy::LogMaxWeight
            )
        {
            return Err(Error::config(
                "run.coupled",
                "the comparison system needs policy.kind = max_weight_alpha or log_max_weight",
            ));
        }
        self.estimator
            .tail_window
            .validate()
            .map_err(|e| Error::config("estimator.tail_p_lo", e.to_string()))?;
        if self.estimator.ld_depth == 0 {
            return Err(Error::config("estimator.ld_depth", "must be at least 1"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KvDoc::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        for key in doc.keys() {
            if !SECTIONS.iter().any(|s| key.starts_with(&format!("{s}."))) {
                return Err(Error::config(key, "unknown section"));
            }
        }
        let light = ArrivalSpec::read_kv(doc, "traffic.light")?;
        let heavy = ArrivalSpec::read_kv(doc, "traffic.heavy")?;
        let policy = read_policy(doc)?;
        reject_unknown(
            doc,
            "run",
            &[
                "slots",
                "burn_in",
                "seed",
                "replications",
                "coupled",
                "track_hol",
            ],
        )?;
        reject_unknown(
            doc,
            "estimator",
            &["tail_p_hi", "tail_p_lo", "ld_b_min", "ld_depth"],
        )?;
        reject_unknown(doc, "output", &["dir"])?;
        let defaults = EstimatorSettings::default();
        let cfg = ExperimentConfig {
            light,
            heavy,
            policy,
            n_slots: doc.u64("run.slots")?.unwrap_or(10_000_000),
            burn_in: doc.u64("run.burn_in")?,
            seed: doc.u64("run.seed")?.unwrap_or(1),
            replications: doc.u64("run.replications")?.unwrap_or(1),
            coupled: doc.bool("run.coupled")?.unwrap_or(false),
            track_hol: doc.bool("run.track_hol")?.unwrap_or(false),
            estimator: EstimatorSettings {
                tail_window: QuantileWindow {
                    p_hi: doc
                        .f64("estimator.tail_p_hi")?
                        .unwrap_or(defaults.tail_window.p_hi),
                    p_lo: doc
                        .f64("estimator.tail_p_lo")?
                        .unwrap_or(defaults.tail_window.p_lo),
                },
                ld_b_min: doc.u64("estimator.ld_b_min")?.unwrap_or(defaults.ld_b_min),
                ld_depth: doc.u64("estimator.ld_depth")?.unwrap_or(defaults.ld_depth),
            },
            output_dir: doc.get("output.dir").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        self.light.write_kv(&mut doc, "traffic.light");
        self.heavy.write_kv(&mut doc, "traffic.heavy");
        doc.set("policy.kind", self.policy.name());
        if let Policy::MaxWeightAlpha { alpha_h, alpha_l } = self.policy {
            doc.set("policy.alpha_h", fmt_f64(alpha_h));
            doc.set("policy.alpha_l", fmt_f64(alpha_l));
        }
        doc.set("run.slots", self.n_slots);
        if let Some(b) = self.burn_in {
            doc.set("run.burn_in", b);
        }
        doc.set("run.seed", self.seed);
        doc.set("run.replications", self.replications);
        doc.set("run.coupled", self.coupled);
        doc.set("run.track_hol", self.track_hol);
        doc.set(
            "estimator.tail_p_hi",
            fmt_f64(self.estimator.tail_window.p_hi),
        );
        doc.set(
            "estimator.tail_p_lo",
            fmt_f64(self.estimator.tail_window.p_lo),
        );
        doc.set("estimator.ld_b_min", self.estimator.ld_b_min);
        doc.set("estimator.ld_depth", self.estimator.ld_depth);
        if let Some(dir) = &self.output_dir {
            doc.set("output.dir", dir.display());
        }
        doc
    }

    /// Canonical text form; `parse(render(c)) == c`.
    pub fn render(&self) -> String {
        self.to_kv().render()
    }

    /// Tail index of the heavy input, if it has one.
    pub fn heavy_index(&self) -> Option<f64> {
        self.heavy.tail_index()
    }
}

fn reject_unknown(doc: &KvDoc, prefix: &str, known: &[&str]) -> Result<()> {
    match doc.unknown_keys(prefix, known).first() {
        Some(k) => Err(Error::config(k.as_str(), "unknown key")),
        None => Ok(()),
    }
}

fn read_policy(doc: &KvDoc) -> Result<Policy> {
    let kind = doc.require("policy.kind")?;
    let policy = match kind {
        "priority_h" => Policy::PriorityH,
        "priority_l" => Policy::PriorityL,
        "log_max_weight" => Policy::LogMaxWeight,
        "max_weight_alpha" => Policy::MaxWeightAlpha {
            alpha_h: doc.f64("policy.alpha_h")?.unwrap_or(1.0),
            alpha_l: doc.f64("policy.alpha_l")?.unwrap_or(1.0),
        },
        other => {
            return Err(Error::config(
                "policy.kind",
                format!("unknown policy `{other}`"),
            ))
        }
    };
    let known: &[&str] = if kind == "max_weight_alpha" {
        &["kind", "alpha_h", "alpha_l"]
    } else {
        &["kind"]
    };
    reject_unknown(doc, "policy", known)?;
    policy.validate()?;
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
traffic.light.family = poisson
traffic.light.lambda = 0.3
traffic.heavy.family = discrete_pareto
traffic.heavy.index = 2.5
traffic.heavy.rate = 0.3
policy.kind = max_weight_alpha
policy.alpha_l = 2
run.slots = 1e5
run.seed = 7
";

    #[test]
    fn parses_minimal() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.policy, Policy::max_weight(1.0, 2.0));
        assert_eq!(c.n_slots, 100_000);
        assert_eq!(c.burn_in(), 10_000);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn round_trips() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.render()).unwrap(), c);
    }

    #[test]
    fn unstable_load_names_the_constraint() {
        let text = MINIMAL.replace("lambda = 0.3", "lambda = 0.8");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("input rate does not overwhelm"));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = [
            (
                MINIMAL.replace("run.slots = 1e5", "run.slots = ten"),
                "run.slots",
            ),
            (format!("{MINIMAL}run.colour = red\n"), "run.colour"),
            (format!("{MINIMAL}plot.x = 1\n"), "plot.x"),
            (MINIMAL.replace("max_weight_alpha", "fifo"), "policy.kind"),
            (
                MINIMAL.replace("alpha_l = 2", "alpha_l = -2"),
                "policy.alpha_l",
            ),
            (format!("{MINIMAL}run.burn_in = 100000\n"), "run.burn_in"),
        ];
        for (text, field) in bad {
            let msg = ExperimentConfig::parse(&text).unwrap_err().to_string();
            assert!(msg.contains(field), "{msg}");
        }
    }

    #[test]
    fn coupled_needs_comparison_policy() {
        let text = format!(
            "{}run.coupled = true\n",
            MINIMAL
                .replace("max_weight_alpha", "priority_h")
                .replace("policy.alpha_l = 2\n", "")
        );
        assert!(ExperimentConfig::parse(&text).is_err());
    }
}
