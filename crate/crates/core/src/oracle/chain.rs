use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::CcdfHistogram;
use crate::sim::Policy;
use crate::traffic::ArrivalSpec;

/// Settings for the truncated-chain solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub cap: usize,
    /// L1 residual `‖πP − π‖₁` at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Largest acceptable stationary mass folded at the cap per step.
    pub fold_bound: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            cap: 150,
            tolerance: 1e-12,
            max_iterations: 500_000,
            fold_bound: 1e-6,
        }
    }
}

/// Stationary law of the post-arrival state `(q_H, q_L)` on `[0, cap]²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryLaw {
    pub cap: usize,
    /// Row-major: `pi[q_h * (cap + 1) + q_l]`.
    pub pi: Vec<f64>,
    pub marginal_h: Vec<f64>,
    pub marginal_l: Vec<f64>,
    pub folded_mass: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl StationaryLaw {
    pub fn prob(&self, q_h: usize, q_l: usize) -> f64 {
        self.pi[q_h * (self.cap + 1) + q_l]
    }

    /// `P{q > 0}` for the heavy queue.
    pub fn busy_h(&self) -> f64 {
        1.0 - self.marginal_h[0]
    }

    pub fn busy_l(&self) -> f64 {
        1.0 - self.marginal_l[0]
    }

    /// `P{q >= b}` tables for the CSV schema.
    pub fn ccdf_ge_h(&self) -> Vec<f64> {
        tail_ge(&self.marginal_h)
    }

    pub fn ccdf_ge_l(&self) -> Vec<f64> {
        tail_ge(&self.marginal_l)
    }
}

fn tail_ge(pmf: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for i in (0..pmf.len()).rev() {
        acc += pmf[i];
        out[i] = acc;
    }
    out
}

/// Serve decision computed directly from the rule definitions, with powers
/// and exponentials rather than the simulator's logarithms.
fn serves_light(policy: &Policy, q_h: usize, q_l: usize) -> bool {
    if q_l == 0 {
        return false;
    }
    if q_h == 0 {
        return true;
    }
    let (h, l) = (q_h as f64, q_l as f64);
    match *policy {
        Policy::PriorityH => false,
        Policy::PriorityL => true,
        Policy::MaxWeightAlpha { alpha_h, alpha_l } => {
            let (wl, wh) = (l.powf(alpha_l), h.powf(alpha_h));
            wl >= wh * (1.0 - 1e-12)
        }
        Policy::LogMaxWeight => l.exp() >= (1.0 + h) * (1.0 - 1e-12),
    }
}

fn atoms(spec: &ArrivalSpec, name: &str) -> Result<Vec<(usize, f64)>> {
    let atoms = spec
        .atoms()
        .ok_or_else(|| Error::InvalidArgument(format!("{name} input must have bounded support")))?;
    if atoms.len() > 8 {
        return Err(Error::InvalidArgument(format!(
            "{name} input has {} atoms; the oracle accepts at most 8",
            atoms.len()
        )));
    }
    Ok(atoms.into_iter().map(|(v, p)| (v as usize, p)).collect())
}

/// One application of the transition operator: serve, then add the next
/// slot's arrivals, folding overflow onto the cap. Returns the folded mass.
struct Operator {
    cap: usize,
    heavy: Vec<(usize, f64)>,
    light: Vec<(usize, f64)>,
    served: Vec<usize>,
}

impl Operator {
    fn new(
        policy: &Policy,
        heavy: Vec<(usize, f64)>,
        light: Vec<(usize, f64)>,
        cap: usize,
    ) -> Self {
        let n = cap + 1;
        let mut served = vec![0; n * n];
        for h in 0..n {
            for l in 0..n {
                let (h2, l2) = if serves_light(policy, h, l) {
                    (h, l - 1)
                } else if h > 0 {
                    (h - 1, l)
                } else {
                    (h, l)
                };
                served[h * n + l] = h2 * n + l2;
            }
        }
        Operator {
            cap,
            heavy,
            light,
            served,
        }
    }

    fn apply(&self, pi: &[f64], scratch: &mut [f64], out: &mut [f64]) -> f64 {
        let n = self.cap + 1;
        scratch.iter_mut().for_each(|x| *x = 0.0);
        for (s, &p) in pi.iter().enumerate() {
            if p != 0.0 {
                scratch[self.served[s]] += p;
            }
        }
        let mut folded = 0.0;
        // heavy arrivals along the first axis
        out.iter_mut().for_each(|x| *x = 0.0);
        for h in 0..n {
            for &(a, pa) in &self.heavy {
                let to = h + a;
                let row = if to > self.cap { self.cap } else { to };
                let fold = to > self.cap;
                for l in 0..n {
                    let m = scratch[h * n + l] * pa;
                    if fold {
                        folded += m;
                    }
                    out[row * n + l] += m;
                }
            }
        }
        // light arrivals along the second axis
        scratch.copy_from_slice(out);
        out.iter_mut().for_each(|x| *x = 0.0);
        for h in 0..n {
            for l in 0..n {
                let m = scratch[h * n + l];
                if m == 0.0 {
                    continue;
                }
                for &(a, pa) in &self.light {
                    let to = l + a;
                    if to > self.cap {
                        folded += m * pa;
                    }
                    out[h * n + to.min(self.cap)] += m * pa;
                }
            }
        }
        folded
    }
}

/// Stationary distribution of the truncated post-arrival chain by power
/// iteration from the empty state.
pub fn stationary_distribution(
    light: &ArrivalSpec,
    heavy: &ArrivalSpec,
    policy: &Policy,
    opts: ChainOptions,
) -> Result<StationaryLaw> {
    policy.validate()?;
    let total = light.mean() + heavy.mean();
    if total >= 1.0 {
        return Err(Error::Unstable { total });
    }
    if opts.cap == 0 || opts.cap > 400 {
        return Err(Error::InvalidArgument(format!(
            "cap {} outside 1..=400",
            opts.cap
        )));
    }
    let op = Operator::new(
        policy,
        atoms(heavy, "heavy")?,
        atoms(light, "light")?,
        opts.cap,
    );
    let n = opts.cap + 1;
    // start from the law after one slot of arrivals into the empty system
    let mut pi = vec![0.0; n * n];
    pi[0] = 1.0;
    let mut next = vec![0.0; n * n];
    let mut scratch = vec![0.0; n * n];
    op.apply(&pi.clone(), &mut scratch, &mut pi);
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let folded = op.apply(&pi, &mut scratch, &mut next);
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual < opts.tolerance {
            let sum: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|x| *x /= sum);
            if folded > opts.fold_bound {
                return Err(Error::FoldedMass {
                    folded,
                    bound: opts.fold_bound,
                });
            }
            let mut marginal_h = vec![0.0; n];
            let mut marginal_l = vec![0.0; n];
            for h in 0..n {
                for l in 0..n {
                    marginal_h[h] += pi[h * n + l];
                    marginal_l[l] += pi[h * n + l];
                }
            }
            return Ok(StationaryLaw {
                cap: opts.cap,
                pi,
                marginal_h,
                marginal_l,
                folded_mass: folded,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        residual,
        iterations: opts.max_iterations,
    })
}

/// `‖πP − π‖₁` for a candidate law (self-consistency check).
pub fn stationarity_residual(
    law: &StationaryLaw,
    light: &ArrivalSpec,
    heavy: &ArrivalSpec,
    policy: &Policy,
) -> Result<f64> {
    let op = Operator::new(
        policy,
        atoms(heavy, "heavy")?,
        atoms(light, "light")?,
        law.cap,
    );
    let mut scratch = vec![0.0; law.pi.len()];
    let mut out = vec![0.0; law.pi.len()];
    op.apply(&law.pi, &mut scratch, &mut out);
    Ok(law.pi.iter().zip(&out).map(|(a, b)| (a - b).abs()).sum())
}

/// Mass carried by one step of the operator from the point mass at
/// `(q_h, q_l)`; equals one for a stochastic operator.
pub fn row_sum(
    light: &ArrivalSpec,
    heavy: &ArrivalSpec,
    policy: &Policy,
    cap: usize,
    q_h: usize,
    q_l: usize,
) -> Result<f64> {
    let op = Operator::new(policy, atoms(heavy, "heavy")?, atoms(light, "light")?, cap);
    let n = cap + 1;
    let mut pi = vec![0.0; n * n];
    pi[q_h * n + q_l] = 1.0;
    let mut scratch = vec![0.0; n * n];
    let mut out = vec![0.0; n * n];
    op.apply(&pi, &mut scratch, &mut out);
    Ok(out.iter().sum())
}

/// Total variation between an exact pmf and an empirical histogram; the
/// histogram's mass at or beyond `pmf.len()` counts as disagreement.
pub fn tv_distance(pmf: &[f64], hist: &CcdfHistogram) -> f64 {
    let total = hist.total() as f64;
    if total == 0.0 {
        return 1.0;
    }
    let mut l1 = 0.0;
    let mut seen = 0.0;
    for (q, &p) in pmf.iter().enumerate() {
        let c = hist.count_eq(q as u64).unwrap_or(0) as f64;
        seen += c;
        l1 += (p - c / total).abs();
    }
    l1 += (total - seen) / total;
    0.5 * l1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (ArrivalSpec, ArrivalSpec) {
        (
            ArrivalSpec::bernoulli(0.3),
            ArrivalSpec::tabulated(vec![0, 3], vec![0.9, 0.1]),
        )
    }

    #[test]
    fn zero_arrivals_concentrate_at_origin() {
        let z = ArrivalSpec::bernoulli(0.0);
        let law = stationary_distribution(
            &z,
            &z,
            &Policy::PriorityH,
            ChainOptions {
                cap: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(law.prob(0, 0), 1.0);
    }

    #[test]
    fn operator_is_stochastic() {
        let (l, h) = toy();
        for p in [
            Policy::PriorityL,
            Policy::max_weight(1.0, 2.0),
            Policy::LogMaxWeight,
        ] {
            for (a, b) in [(0, 0), (5, 3), (20, 20), (19, 0), (0, 20)] {
                assert!((row_sum(&l, &h, &p, 20, a, b).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn priority_l_keeps_bernoulli_light_at_most_one() {
        let (l, h) = toy();
        let opts = ChainOptions {
            cap: 60,
            ..Default::default()
        };
        let law = stationary_distribution(&l, &h, &Policy::PriorityL, opts).unwrap();
        assert!(law.marginal_l[2..].iter().all(|&p| p == 0.0));
        assert!((law.busy_l() - 0.3).abs() < 1e-9);
        assert!(stationarity_residual(&law, &l, &h, &Policy::PriorityL).unwrap() < 1e-10);
    }

    #[test]
    fn priority_h_busy_fraction_is_heavy_load() {
        let (l, h) = toy();
        let opts = ChainOptions {
            cap: 80,
            ..Default::default()
        };
        let law = stationary_distribution(&l, &h, &Policy::PriorityH, opts).unwrap();
        assert!((law.busy_h() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn policies_give_distinct_laws() {
        let (l, h) = toy();
        let opts = ChainOptions {
            cap: 60,
            ..Default::default()
        };
        let a = stationary_distribution(&l, &h, &Policy::max_weight(1.0, 1.0), opts).unwrap();
        let b = stationary_distribution(&l, &h, &Policy::LogMaxWeight, opts).unwrap();
        let tv: f64 = 0.5
            * a.pi
                .iter()
                .zip(&b.pi)
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>();
        assert!(tv > 1e-3);
    }

    #[test]
    fn folding_beyond_bound_is_reported() {
        let l = ArrivalSpec::bernoulli(0.45);
        let h = ArrivalSpec::tabulated(vec![0, 5], vec![0.9, 0.1]);
        let opts = ChainOptions {
            cap: 5,
            ..Default::default()
        };
        assert!(matches!(
            stationary_distribution(&l, &h, &Policy::PriorityH, opts),
            Err(Error::FoldedMass { .. })
        ));
    }

    #[test]
    fn rejects_unbounded_inputs() {
        let opts = ChainOptions {
            cap: 10,
            ..Default::default()
        };
        assert!(stationary_distribution(
            &ArrivalSpec::poisson(0.2),
            &ArrivalSpec::bernoulli(0.2),
            &Policy::PriorityH,
            opts
        )
        .is_err());
    }

    #[test]
    fn tv_of_matching_histogram_is_zero() {
        let mut h = CcdfHistogram::new();
        h.record_n(0, 3);
        h.record_n(1, 1);
        assert!(tv_distance(&[0.75, 0.25], &h).abs() < 1e-15);
        assert!((tv_distance(&[1.0], &h) - 0.25).abs() < 1e-15);
    }
}
