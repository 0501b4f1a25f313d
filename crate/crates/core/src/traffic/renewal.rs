//! Renewal quantities of the heavy input: the strictly positive part `H+`,
//! and the residual, age and duration of the renewal interval covering a
//! typical slot when inter-renewal times are distributed as `H+`.
//!
//! Conventions: if a renewal happens in a slot, the age there is 0 and the
//! residual equals the length of the interval just starting, so residual is
//! in `{1, 2, ...}` and age in `{0, 1, ...}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spec::ArrivalSpec;
use super::special::{ksum, KahanSum};
use crate::error::{Error, Result};

/// Distribution of `H+` on `{1..=n_max}`; `pmf[0]` is unused and zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivePart {
    pub pmf: Vec<f64>,
    /// Mass of `H+` beyond `n_max` that was dropped before renormalising.
    pub truncated_mass: f64,
}

impl PositivePart {
    pub fn n_max(&self) -> usize {
        self.pmf.len() - 1
    }
}

/// `P{H+ = m} = P{H = m} / (1 - P{H = 0})` for `m = 1..=n_max`.
pub fn positive_part(spec: &ArrivalSpec, n_max: usize) -> Result<PositivePart> {
    spec.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let p0 = spec.pmf(0);
    let positive = spec.ccdf(0);
    if positive <= 0.0 || p0 >= 1.0 {
        return Err(Error::spec("law is degenerate at zero; H+ is undefined"));
    }
    let beyond = spec.ccdf(n_max as u64) / positive;
    if spec.support_max().is_some() && beyond >= 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "n_max={n_max} cuts {beyond:e} of a finite-support law"
        )));
    }
    let mut pmf = vec![0.0; n_max + 1];
    for (m, slot) in pmf.iter_mut().enumerate().skip(1) {
        *slot = spec.pmf(m as u64) / positive;
    }
    let kept = ksum(pmf.iter().copied());
    for p in &mut pmf {
        *p /= kept;
    }
    Ok(PositivePart {
        pmf,
        truncated_mass: beyond,
    })
}

/// Exact residual / age / duration laws for inter-renewal law `H+`.
///
/// Index conventions: `pmf_plus[m]`, `pmf_residual[k]` and `pmf_duration[k]`
/// are indexed by value (index 0 is zero); `pmf_age[k]` covers `0..n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalTables {
    pub pmf_plus: Vec<f64>,
    pub mean_plus: f64,
    pub pmf_residual: Vec<f64>,
    pub pmf_age: Vec<f64>,
    pub pmf_duration: Vec<f64>,
    /// `P{H+ >= k}` for `k = 0..=n_max + 1`.
    tail_ge: Vec<f64>,
    cdf_duration: Vec<f64>,
}

impl RenewalTables {
    pub fn new(pmf_plus: &[f64]) -> Result<Self> {
        if pmf_plus.len() < 2 {
            return Err(Error::InvalidArgument(
                "pmf_plus needs support {1..n_max}".into(),
            ));
        }
        if pmf_plus[0] != 0.0 || pmf_plus.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(
                "pmf_plus must be non-negative with no mass at 0".into(),
            ));
        }
        let sum = ksum(pmf_plus.iter().copied());
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { sum });
        }
        let n_max = pmf_plus.len() - 1;
        let mean_plus = ksum(pmf_plus.iter().enumerate().map(|(m, &p)| m as f64 * p));

        let mut tail_ge = vec![0.0; n_max + 2];
        let mut acc = KahanSum::default();
        for k in (1..=n_max).rev() {
            acc.add(pmf_plus[k]);
            tail_ge[k] = acc.value();
        }
        tail_ge[0] = acc.value();

        let pmf_residual: Vec<f64> = (0..=n_max)
            .map(|k| if k == 0 { 0.0 } else { tail_ge[k] / mean_plus })
            .collect();
        let pmf_age: Vec<f64> = (0..n_max).map(|k| tail_ge[k + 1] / mean_plus).collect();
        let pmf_duration: Vec<f64> = pmf_plus
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p / mean_plus)
            .collect();
        let mut cdf_duration = Vec::with_capacity(n_max + 1);
        let mut acc = KahanSum::default();
        for &p in &pmf_duration {
            acc.add(p);
            cdf_duration.push(acc.value());
        }
        Ok(RenewalTables {
            pmf_plus: pmf_plus.to_vec(),
            mean_plus,
            pmf_residual,
            pmf_age,
            pmf_duration,
            tail_ge,
            cdf_duration,
        })
    }

    pub fn n_max(&self) -> usize {
        self.pmf_plus.len() - 1
    }

    /// `P{H_R = k, H_A = l} = P{H+ = k + l} / E[H+]`.
    pub fn joint(&self, k: usize, l: usize) -> f64 {
        if k == 0 || k + l > self.n_max() {
            return 0.0;
        }
        self.pmf_plus[k + l] / self.mean_plus
    }

    /// `P{H+ >= k}`.
    pub fn plus_tail_ge(&self, k: usize) -> f64 {
        self.tail_ge.get(k).copied().unwrap_or(0.0)
    }

    /// `P{H_R >= m}` = `sum_{k>=m} P{H+ >= k} / E[H+]`.
    pub fn residual_tail_ge(&self, m: usize) -> f64 {
        let m = m.max(1);
        if m > self.n_max() {
            return 0.0;
        }
        ksum(self.pmf_residual[m..].iter().copied())
    }

    /// `P{H_R > b}` for every `b = 0..=n_max` in one pass.
    pub fn residual_tail_gt_table(&self) -> Vec<f64> {
        let n = self.n_max();
        let mut out = vec![0.0; n + 1];
        let mut acc = KahanSum::default();
        for b in (0..=n).rev() {
            out[b] = acc.value();
            acc.add(self.pmf_residual[b]);
        }
        out
    }

    /// One draw of `(residual, age)` from the joint law: pick the covering
    /// interval length `D` size-biased, then the position within it uniformly.
    pub fn sample_residual_age<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        let u: f64 = rng.random::<f64>() * self.cdf_duration[self.n_max()];
        let d = self
            .cdf_duration
            .partition_point(|&c| c <= u)
            .clamp(1, self.n_max());
        let age = rng.random_range(0..d as u64);
        (d as u64 - age, age)
    }
}
