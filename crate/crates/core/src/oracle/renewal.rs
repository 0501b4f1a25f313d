use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::special::ksum;
use crate::traffic::RenewalTables;

/// Time-averaged residual/age law of a renewal process started with a
/// renewal at slot 0 and observed for `horizon` slots, computed exactly from
/// the renewal recursion `u(t) = Σ_k f(k) u(t − k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalEnumeration {
    pub horizon: u64,
    pub n_max: usize,
    /// `joint[k][l]` for `k = 1..=n_max` (index 0 unused), `l = 0..n_max`.
    pub joint: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    pub age: Vec<f64>,
}

impl RenewalEnumeration {
    /// Largest absolute gap to the stationary tables, over the joint law and
    /// both marginals.
    pub fn max_deviation(&self, tables: &RenewalTables) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..=self.n_max {
            for l in 0..self.n_max {
                worst = worst.max((self.joint[k][l] - tables.joint(k, l)).abs());
            }
            worst = worst.max((self.residual[k] - tables.pmf_residual[k]).abs());
        }
        for l in 0..self.n_max {
            worst = worst.max((self.age[l] - tables.pmf_age[l]).abs());
        }
        worst
    }
}

pub fn renewal_enumeration(pmf_plus: &[f64], horizon: u64) -> Result<RenewalEnumeration> {
    let tables = RenewalTables::new(pmf_plus)?;
    let n = tables.n_max();
    let m = tables.mean_plus;
    let needed = ((100.0 * m * m).ceil() as u64).max(10 * n as u64);
    if horizon < needed {
        return Err(Error::HorizonTooShort { horizon, needed });
    }
    // cumulative renewal counts U(s) = Σ_{t<s} u(t) for s = horizon - n ..= horizon
    let t_len = horizon as usize;
    let mut ring = vec![0.0f64; n + 1];
    let mut cum_tail = vec![0.0f64; n + 1];
    let mut cum = 0.0f64;
    let mut comp = 0.0f64;
    let first_tracked = t_len - n;
    for t in 0..t_len {
        if t >= first_tracked {
            cum_tail[t - first_tracked] = cum + comp;
        }
        let u = if t == 0 {
            1.0
        } else {
            let mut acc = 0.0;
            for k in 1..=n.min(t) {
                acc += pmf_plus[k] * ring[(t - k) % (n + 1)];
            }
            acc
        };
        ring[t % (n + 1)] = u;
        // Neumaier update of the running sum
        let s = cum + u;
        comp += if cum.abs() >= u.abs() {
            (cum - s) + u
        } else {
            (u - s) + cum
        };
        cum = s;
    }
    cum_tail[n] = cum + comp;
    let big_u = |s: usize| cum_tail[s - first_tracked];
    let tf = horizon as f64;
    let mut joint = vec![vec![0.0; n]; n + 1];
    for (k, row) in joint.iter_mut().enumerate().skip(1) {
        for (l, cell) in row.iter_mut().enumerate() {
            if k + l <= n {
                *cell = pmf_plus[k + l] * big_u(t_len - l) / tf;
            }
        }
    }
    let residual: Vec<f64> = (0..=n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                ksum(joint[k].iter().copied())
            }
        })
        .collect();
    let age: Vec<f64> = (0..n).map(|l| ksum((1..=n).map(|k| joint[k][l]))).collect();
    Ok(RenewalEnumeration {
        horizon,
        n_max: n,
        joint,
        residual,
        age,
    })
}

/// `max_{m≥1, n≥0} |P{H_R ≥ m, H_A ≥ n} − P{H_R ≥ m + n}|` from table arithmetic.
#[allow(clippy::needless_range_loop)]
pub fn joint2_max_gap(tables: &RenewalTables) -> f64 {
    let n = tables.n_max();
    // S[k][l] = Σ_{k'≥k, l'≥l} joint(k', l')
    let mut s = vec![vec![0.0f64; n + 2]; n + 2];
    for k in (1..=n).rev() {
        for l in (0..n).rev() {
            s[k][l] = tables.joint(k, l) + s[k + 1][l] + s[k][l + 1] - s[k + 1][l + 1];
        }
    }
    let mut worst: f64 = 0.0;
    for m in 1..=n + 1 {
        for j in 0..=n {
            let lhs = if m <= n && j < n { s[m][j] } else { 0.0 };
            let rhs = tables.residual_tail_ge(m + j);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}
