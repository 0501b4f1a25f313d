use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::special::{hurwitz_zeta, ksum, ln_factorial, riemann_zeta};
use crate::error::{Error, Result};
use crate::kv::{fmt_f64, fmt_f64_list, fmt_list, KvDoc};

/// Law of the number of packets arriving in one slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Bernoulli {
        p: f64,
    },
    Poisson {
        lambda: f64,
    },
    /// Geometric on `{0, 1, ...}` with the given mean.
    GeometricBatch {
        mean: f64,
    },
    /// `P{X > n} = (1 + n/scale)^(-index)` for `n = 0, 1, ...`; supported on `{1, 2, ...}`.
    DiscretePareto {
        index: f64,
        scale: f64,
    },
    /// `P{X = k} ∝ k^-(index+1)` on `{1, 2, ...}`, so the tail coefficient is `index`.
    Zeta {
        index: f64,
    },
    Tabulated {
        values: Vec<u64>,
        probs: Vec<f64>,
    },
    /// Discrete Pareto tail multiplied by the slowly varying factor `ln(e + n)^sv_power`.
    SlowVaryModulated {
        base: Box<ArrivalSpec>,
        sv_power: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    Light,
    HeavyOR,
}

/// An arrival law, optionally thinned: when `rate` is set, each slot emits a
/// draw from `family` with probability `rate / family_mean` and zero
/// otherwise, so the mean becomes `rate` while the tail shape is unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

impl From<Family> for ArrivalSpec {
    fn from(family: Family) -> Self {
        ArrivalSpec { family, rate: None }
    }
}

impl ArrivalSpec {
    pub fn bernoulli(p: f64) -> Self {
        Family::Bernoulli { p }.into()
    }

    pub fn poisson(lambda: f64) -> Self {
        Family::Poisson { lambda }.into()
    }

    pub fn geometric(mean: f64) -> Self {
        Family::GeometricBatch { mean }.into()
    }

    pub fn discrete_pareto(index: f64) -> Self {
        Family::DiscretePareto { index, scale: 1.0 }.into()
    }

    pub fn zeta(index: f64) -> Self {
        Family::Zeta { index }.into()
    }

    pub fn tabulated(values: Vec<u64>, probs: Vec<f64>) -> Self {
        Family::Tabulated { values, probs }.into()
    }

    pub fn slow_vary(index: f64, sv_power: f64) -> Self {
        Family::SlowVaryModulated {
            base: Box::new(Self::discrete_pareto(index)),
            sv_power,
        }
        .into()
    }

    /// Heavy input of mean `rate`: discrete Pareto bursts emitted with
    /// probability `rate / zeta(index)`.
    pub fn heavy_pareto(index: f64, rate: f64) -> Self {
        Self::discrete_pareto(index).with_rate(rate)
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = Some(rate);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::spec(format!("{name} must be finite")))
            }
        };
        match &self.family {
            Family::Bernoulli { p } => {
                finite("p", *p)?;
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::spec(format!("bernoulli p={p} outside [0,1]")));
                }
            }
            Family::Poisson { lambda } => {
                finite("lambda", *lambda)?;
                if *lambda < 0.0 {
                    return Err(Error::spec(format!("poisson lambda={lambda} < 0")));
                }
            }
            Family::GeometricBatch { mean } => {
                finite("mean", *mean)?;
                if *mean < 0.0 {
                    return Err(Error::spec(format!("geometric mean={mean} < 0")));
                }
            }
            Family::DiscretePareto { index, scale } => {
                finite("index", *index)?;
                finite("scale", *scale)?;
                if *index <= 1.0 {
                    return Err(Error::spec(format!(
                        "discrete pareto index={index} must exceed 1 for a finite mean"
                    )));
                }
                if *scale <= 0.0 {
                    return Err(Error::spec(format!(
                        "discrete pareto scale={scale} must be > 0"
                    )));
                }
            }
            Family::Zeta { index } => {
                finite("index", *index)?;
                if *index <= 1.0 {
                    return Err(Error::spec(format!(
                        "zeta index={index} must exceed 1 for a finite mean"
                    )));
                }
            }
            Family::Tabulated { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::spec(
                        "tabulated values/probs must be non-empty and equally long",
                    ));
                }
                let mut sorted = values.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != values.len() {
                    return Err(Error::spec("tabulated values must be distinct"));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::spec("tabulated probs must be finite and >= 0"));
                }
                let total = ksum(probs.iter().copied());
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::spec(format!(
                        "tabulated probs sum to {total}, not 1"
                    )));
                }
                if values.iter().any(|&v| v > 1 << 48) {
                    return Err(Error::spec("tabulated values must be < 2^48"));
                }
            }
            Family::SlowVaryModulated { base, sv_power } => {
                finite("sv_power", *sv_power)?;
                if base.rate.is_some() {
                    return Err(Error::spec("slow-vary base must not carry its own rate"));
                }
                let Family::DiscretePareto { index, scale } = base.family else {
                    return Err(Error::spec("slow-vary base must be discrete_pareto"));
                };
                base.validate()?;
                // keeps the modulated CCDF nonincreasing
                let limit = index * (E / scale).min(1.0);
                if !(0.0..=limit).contains(sv_power) {
                    return Err(Error::spec(format!(
                        "sv_power={sv_power} outside [0, {limit}] for this base"
                    )));
                }
            }
        }
        if let Some(rate) = self.rate {
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::spec(format!("rate={rate} must be finite and >= 0")));
            }
            let base = self.base_mean();
            if rate > base * (1.0 + 1e-12) {
                return Err(Error::spec(format!(
                    "rate={rate} exceeds the family mean {base}; thinning cannot raise the mean"
                )));
            }
            if rate > 0.0 && base <= 0.0 {
                return Err(Error::spec("cannot thin a law that is identically zero"));
            }
        }
        Ok(())
    }

    pub fn tail_class(&self) -> TailClass {
        match self.family {
            Family::Bernoulli { .. }
            | Family::Poisson { .. }
            | Family::GeometricBatch { .. }
            | Family::Tabulated { .. } => TailClass::Light,
            Family::DiscretePareto { .. }
            | Family::Zeta { .. }
            | Family::SlowVaryModulated { .. } => TailClass::HeavyOR,
        }
    }

    pub fn is_light(&self) -> bool {
        self.tail_class() == TailClass::Light
    }

    /// Tail index of the heavy families (`P{X > n}` decays like `n^-index`).
    pub fn tail_index(&self) -> Option<f64> {
        match &self.family {
            Family::DiscretePareto { index, .. } | Family::Zeta { index } => Some(*index),
            Family::SlowVaryModulated { base, .. } => base.tail_index(),
            _ => None,
        }
    }

    /// Mean of the untinned family.
    pub fn base_mean(&self) -> f64 {
        match &self.family {
            Family::Bernoulli { p } => *p,
            Family::Poisson { lambda } => *lambda,
            Family::GeometricBatch { mean } => *mean,
            Family::DiscretePareto { index, scale } => {
                // sum_{n>=0} (1 + n/s)^-c = s^c * zeta(c, s)
                scale.powf(*index) * hurwitz_zeta(*index, *scale)
            }
            Family::Zeta { index } => riemann_zeta(*index) / riemann_zeta(index + 1.0),
            Family::Tabulated { values, probs } => {
                ksum(values.iter().zip(probs).map(|(&v, &p)| v as f64 * p))
            }
            Family::SlowVaryModulated { .. } => self.numeric_mean_from_ccdf(),
        }
    }

    /// Probability that a slot draws from the family at all.
    pub fn activity(&self) -> f64 {
        match self.rate {
            None => 1.0,
            Some(rate) => {
                let base = self.base_mean();
                if base <= 0.0 {
                    0.0
                } else {
                    (rate / base).min(1.0)
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.rate.unwrap_or_else(|| self.base_mean())
    }

    fn base_pmf(&self, n: u64) -> f64 {
        match &self.family {
            Family::Bernoulli { p } => match n {
                0 => 1.0 - p,
                1 => *p,
                _ => 0.0,
            },
            Family::Poisson { lambda } => {
                if *lambda == 0.0 {
                    return if n == 0 { 1.0 } else { 0.0 };
                }
                (-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp()
            }
            Family::GeometricBatch { mean } => {
                let r = mean / (1.0 + mean);
                (1.0 - r) * r.powf(n as f64)
            }
            Family::Zeta { index } => {
                if n == 0 {
                    0.0
                } else {
                    (n as f64).powf(-(index + 1.0)) / riemann_zeta(index + 1.0)
                }
            }
            Family::Tabulated { values, probs } => values
                .iter()
                .position(|&v| v == n)
                .map_or(0.0, |i| probs[i]),
            Family::DiscretePareto { .. } | Family::SlowVaryModulated { .. } => {
                if n == 0 {
                    return 0.0;
                }
                // P{X = n} = P{X > n-1} (1 - P{X > n}/P{X > n-1}), without cancellation
                let hi = self.ln_base_ccdf(n - 1);
                let lo = self.ln_base_ccdf(n);
                hi.exp() * -(lo - hi).exp_m1()
            }
        }
    }

    /// `ln P{X > n}` for the Pareto-type families.
    pub(crate) fn ln_base_ccdf(&self, n: u64) -> f64 {
        match &self.family {
            Family::DiscretePareto { index, scale } => -index * (n as f64 / scale).ln_1p(),
            Family::SlowVaryModulated { base, sv_power } => {
                base.ln_base_ccdf(n) + sv_power * (E + n as f64).ln().ln()
            }
            _ => self.base_ccdf(n).ln(),
        }
    }

    fn base_ccdf(&self, n: u64) -> f64 {
        match &self.family {
            Family::Bernoulli { p } => {
                if n == 0 {
                    *p
                } else {
                    0.0
                }
            }
            Family::Poisson { lambda } => {
                // sum upward; the terms past the mode decay geometrically
                let mut total = super::special::KahanSum::default();
                let mut k = n + 1;
                let mut term = self.base_pmf(k);
                while term > 0.0 {
                    total.add(term);
                    if k as f64 > *lambda && term < 1e-20 * total.value() {
                        break;
                    }
                    k += 1;
                    term *= lambda / k as f64;
                }
                total.value()
            }
            Family::GeometricBatch { mean } => {
                let r = mean / (1.0 + mean);
                r.powf(n as f64 + 1.0)
            }
            Family::Zeta { index } => {
                hurwitz_zeta(index + 1.0, n as f64 + 1.0) / riemann_zeta(index + 1.0)
            }
            Family::Tabulated { values, probs } => ksum(
                values
                    .iter()
                    .zip(probs)
                    .filter(|(&v, _)| v > n)
                    .map(|(_, &p)| p),
            ),
            Family::DiscretePareto { .. } | Family::SlowVaryModulated { .. } => {
                self.ln_base_ccdf(n).exp()
            }
        }
    }

    pub fn pmf(&self, n: u64) -> f64 {
        let a = self.activity();
        let p = a * self.base_pmf(n);
        if n == 0 {
            p + (1.0 - a)
        } else {
            p
        }
    }

    /// `P{X > n}`.
    pub fn ccdf(&self, n: u64) -> f64 {
        self.activity() * self.base_ccdf(n)
    }

    /// Largest value with positive mass, `None` when unbounded.
    pub fn support_max(&self) -> Option<u64> {
        if self.activity() == 0.0 {
            return Some(0);
        }
        match &self.family {
            Family::Bernoulli { p } => Some(u64::from(*p > 0.0)),
            Family::Poisson { lambda } => (*lambda == 0.0).then_some(0),
            Family::GeometricBatch { mean } => (*mean == 0.0).then_some(0),
            Family::Tabulated { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .map(|(&v, _)| v)
                .max(),
            _ => None,
        }
    }

    /// Smallest value with positive mass.
    pub fn support_min(&self) -> u64 {
        let a = self.activity();
        if a < 1.0 {
            return 0;
        }
        match &self.family {
            Family::Bernoulli { p } => u64::from(*p >= 1.0),
            Family::Poisson { .. } | Family::GeometricBatch { .. } => 0,
            Family::Tabulated { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .map(|(&v, _)| v)
                .min()
                .unwrap_or(0),
            _ => 1,
        }
    }

    /// Atoms of a finite-support law as `(value, prob)`, ascending.
    pub fn atoms(&self) -> Option<Vec<(u64, f64)>> {
        let max = self.support_max()?;
        if max > 1 << 20 {
            return None;
        }
        Some(
            (0..=max)
                .map(|n| (n, self.pmf(n)))
                .filter(|&(_, p)| p > 0.0)
                .collect(),
        )
    }

    fn numeric_mean_from_ccdf(&self) -> f64 {
        // E[X] = sum_{n>=0} P{X > n}: exact head, integral tail with midpoint correction
        const HEAD: u64 = 200_000;
        let head = ksum((0..HEAD).map(|n| self.ln_base_ccdf(n).exp()));
        let x0 = HEAD as f64 - 0.5;
        let c = self.tail_index().unwrap_or(2.0);
        let span = 45.0 / (c - 1.0).max(0.02);
        let steps = 20_000usize;
        let h = span / steps as f64;
        let f = |u: f64| {
            let x = x0 * u.exp();
            // integrand of int P{X > x} dx under x = x0 e^u
            let ln_ccdf = match &self.family {
                Family::SlowVaryModulated { base, sv_power } => match base.family {
                    Family::DiscretePareto { index, scale } => {
                        -index * (x / scale).ln_1p() + sv_power * (E + x).ln().ln()
                    }
                    _ => unreachable!("validated"),
                },
                _ => unreachable!("only used for slow-vary"),
            };
            (ln_ccdf).exp() * x
        };
        let mut simpson = f(0.0) + f(span);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            simpson += w * f(i as f64 * h);
        }
        head + simpson * h / 3.0
    }

    /// Same family re-parameterised to the given mean (light families only).
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        let family =
            match &self.family {
                Family::Bernoulli { .. } => Family::Bernoulli { p: mean },
                Family::Poisson { .. } => Family::Poisson { lambda: mean },
                Family::GeometricBatch { .. } => Family::GeometricBatch { mean },
                _ => return Err(Error::spec(
                    "only bernoulli, poisson and geometric_batch can be re-parameterised by mean",
                )),
            };
        let spec = ArrivalSpec { family, rate: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Bernoulli { .. } => "bernoulli",
            Family::Poisson { .. } => "poisson",
            Family::GeometricBatch { .. } => "geometric_batch",
            Family::DiscretePareto { .. } => "discrete_pareto",
            Family::Zeta { .. } => "zeta",
            Family::Tabulated { .. } => "tabulated",
            Family::SlowVaryModulated { .. } => "slow_vary_modulated",
        }
    }

    /// Write this spec under `prefix` (e.g. `traffic.heavy`).
    pub fn write_kv(&self, doc: &mut KvDoc, prefix: &str) {
        let key = |name: &str| format!("{prefix}.{name}");
        doc.set(key("family"), self.family_name());
        match &self.family {
            Family::Bernoulli { p } => doc.set(key("p"), fmt_f64(*p)),
            Family::Poisson { lambda } => doc.set(key("lambda"), fmt_f64(*lambda)),
            Family::GeometricBatch { mean } => doc.set(key("mean"), fmt_f64(*mean)),
            Family::DiscretePareto { index, scale } => {
                doc.set(key("index"), fmt_f64(*index));
                doc.set(key("scale"), fmt_f64(*scale));
            }
            Family::Zeta { index } => doc.set(key("index"), fmt_f64(*index)),
            Family::Tabulated { values, probs } => {
                doc.set(key("values"), fmt_list(values));
                doc.set(key("probs"), fmt_f64_list(probs));
            }
            Family::SlowVaryModulated { base, sv_power } => {
                base.write_kv(doc, &key("base"));
                doc.set(key("sv_power"), fmt_f64(*sv_power));
            }
        }
        if let Some(rate) = self.rate {
            doc.set(key("rate"), fmt_f64(rate));
        }
    }

    /// Read and validate a spec from the keys under `prefix`.
    pub fn read_kv(doc: &KvDoc, prefix: &str) -> Result<Self> {
        Self::read_kv_depth(doc, prefix, 0)
    }

    fn read_kv_depth(doc: &KvDoc, prefix: &str, depth: usize) -> Result<Self> {
        let key = |name: &str| format!("{prefix}.{name}");
        let family_key = key("family");
        let name = doc.require(&family_key)?;
        let num = |name: &str| doc.require_f64(&key(name));
        let (family, known): (Family, &[&str]) = match name {
            "bernoulli" => (Family::Bernoulli { p: num("p")? }, &["family", "rate", "p"]),
            "poisson" => (
                Family::Poisson {
                    lambda: num("lambda")?,
                },
                &["family", "rate", "lambda"],
            ),
            "geometric_batch" => (
                Family::GeometricBatch { mean: num("mean")? },
                &["family", "rate", "mean"],
            ),
            "discrete_pareto" => (
                Family::DiscretePareto {
                    index: num("index")?,
                    scale: doc.f64(&key("scale"))?.unwrap_or(1.0),
                },
                &["family", "rate", "index", "scale"],
            ),
            "zeta" => (
                Family::Zeta {
                    index: num("index")?,
                },
                &["family", "rate", "index"],
            ),
            "tabulated" => (
                Family::Tabulated {
                    values: doc
                        .u64_list(&key("values"))?
                        .ok_or_else(|| Error::config(key("values"), "missing required key"))?,
                    probs: doc
                        .f64_list(&key("probs"))?
                        .ok_or_else(|| Error::config(key("probs"), "missing required key"))?,
                },
                &["family", "rate", "values", "probs"],
            ),
            "slow_vary_modulated" => {
                if depth > 0 {
                    return Err(Error::config(family_key, "slow-vary bases cannot nest"));
                }
                (
                    Family::SlowVaryModulated {
                        base: Box::new(Self::read_kv_depth(doc, &key("base"), depth + 1)?),
                        sv_power: num("sv_power")?,
                    },
                    &["family", "rate", "base", "sv_power"],
                )
            }
            other => {
                return Err(Error::config(
                    family_key,
                    format!("unknown family `{other}`"),
                ));
            }
        };
        if let Some(extra) = doc.unknown_keys(prefix, known).first() {
            return Err(Error::config(
                extra.as_str(),
                format!("unknown key for family `{name}`"),
            ));
        }
        let spec = ArrivalSpec {
            family,
            rate: doc.f64(&key("rate"))?,
        };
        spec.validate()
            .map_err(|e| Error::config(family_key, e.to_string()))?;
        Ok(spec)
    }
}
