use serde::{Deserialize, Serialize};

use super::histogram::{CcdfHistogram, TailPoint, TailSource};
use super::ols::{fit_line, quadratic_term};
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;
pub const MIN_COUNT: u64 = 50;
/// Hill and OLS disagreeing by more than this raises a warning.
pub const HILL_WARN: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    LogLogOls,
    Hill,
}

/// Quantile window `[p_hi, p_lo]` of the CCDF used by a tail fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileWindow {
    pub p_hi: f64,
    pub p_lo: f64,
}

impl Default for QuantileWindow {
    fn default() -> Self {
        QuantileWindow {
            p_hi: 1e-2,
            p_lo: 1e-5,
        }
    }
}

impl QuantileWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_lo > 0.0 && self.p_lo < self.p_hi && self.p_hi <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile window needs 0 < p_lo < p_hi <= 1, got [{}, {}]",
                self.p_hi, self.p_lo
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailIndexEstimate {
    /// Estimated tail coefficient (negated log-log slope).
    pub slope: f64,
    pub stderr: f64,
    pub window: QuantileWindow,
    /// Range of `x` actually used.
    pub x_range: (u64, u64),
    pub n_points: usize,
    pub method: TailMethod,
    /// Smallest `P{q > x}` in the window (sample depth reached).
    pub depth: f64,
    /// Log-log concavity, as for an exponential tail.
    pub curvature_flag: bool,
    pub hill: Option<f64>,
    pub warnings: Vec<String>,
}

/// Negated OLS slope of `ln P{q > x}` on `ln x` over the points whose tail
/// probability falls inside the quantile window.
pub fn fit_tail_index<S: TailSource + ?Sized>(
    source: &S,
    window: QuantileWindow,
) -> Result<TailIndexEstimate> {
    window.validate()?;
    let all = source.tail_points();
    let deepest_supported = all
        .iter()
        .filter(|p| p.count.is_none_or(|c| c >= MIN_COUNT))
        .map(|p| p.p_gt)
        .fold(f64::INFINITY, f64::min);
    let pts: Vec<&TailPoint> = all
        .iter()
        .filter(|p| p.x >= 1 && p.p_gt <= window.p_hi && p.p_gt >= window.p_lo)
        .filter(|p| p.count.is_none_or(|c| c >= MIN_COUNT))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::WindowTooThin {
            points: pts.len(),
            needed: MIN_POINTS,
            achieved_depth: deepest_supported,
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.x as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.p_gt.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or(Error::WindowTooThin {
        points: pts.len(),
        needed: MIN_POINTS,
        achieved_depth: deepest_supported,
    })?;
    let curvature_flag = quadratic_term(&xs, &ys).is_some_and(|(c, se)| c < -(3.0 * se).max(0.01));
    Ok(TailIndexEstimate {
        slope: -fit.slope,
        stderr: fit.slope_stderr,
        window,
        x_range: (pts[0].x, pts[pts.len() - 1].x),
        n_points: pts.len(),
        method: TailMethod::LogLogOls,
        depth: pts.iter().map(|p| p.p_gt).fold(f64::INFINITY, f64::min),
        curvature_flag,
        hill: None,
        warnings: Vec::new(),
    })
}

/// OLS fit plus the Hill cross-check on the same threshold.
pub fn fit_tail_index_hist(
    hist: &CcdfHistogram,
    window: QuantileWindow,
) -> Result<TailIndexEstimate> {
    let mut est = fit_tail_index(hist, window)?;
    if let Some(h) = hill_index(hist, est.x_range.0) {
        if (h - est.slope).abs() > HILL_WARN {
            est.warnings.push(format!(
                "Hill estimate {h:.3} differs from OLS {:.3} by more than {HILL_WARN}",
                est.slope
            ));
        }
        est.hill = Some(h);
    }
    Ok(est)
}

/// Hill estimate `1 / mean(ln(q / u))` over samples with `q > u`.
pub fn hill_index(hist: &CcdfHistogram, threshold: u64) -> Option<f64> {
    if threshold == 0 {
        return None;
    }
    let u = threshold as f64;
    let (mut n, mut s) = (0u64, 0.0);
    for (v, c) in hist.cells() {
        if v > u {
            n += c;
            s += c as f64 * (v / u).ln();
        }
    }
    (n >= MIN_COUNT && s > 0.0).then(|| n as f64 / s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    /// Decay rate in nats per packet.
    pub rate: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub window: (u64, u64),
    pub n_points: usize,
}

/// OLS slope of `−ln P{q >= b}` on `b` for grid values `b` in `[b_lo, b_hi]`.
pub fn fit_ld_exponent<S: TailSource + ?Sized>(
    source: &S,
    b_lo: u64,
    b_hi: u64,
) -> Result<ExponentEstimate> {
    if b_hi <= b_lo {
        return Err(Error::InvalidArgument(format!(
            "empty window [{b_lo}, {b_hi}]"
        )));
    }
    // P{q >= b} = P{q > b - 1}
    let pts: Vec<TailPoint> = source
        .tail_points()
        .into_iter()
        .filter(|p| p.x + 1 >= b_lo && p.x < b_hi)
        .collect();
    if let Some(p) = pts.iter().find(|p| p.p_gt <= 0.0 || p.count == Some(0)) {
        return Err(Error::InvalidArgument(format!(
            "zero tail mass at b = {}",
            p.x + 1
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.x + 1) as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| -p.p_gt.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or(Error::WindowTooThin {
        points: pts.len(),
        needed: 2,
        achieved_depth: pts.last().map_or(1.0, |p| p.p_gt),
    })?;
    Ok(ExponentEstimate {
        rate: fit.slope,
        stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
        window: (b_lo, b_hi),
        n_points: pts.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentVerdict {
    Saturating,
    Diverging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub exponent: f64,
    /// `(n, running mean of q^c)` at log-spaced checkpoints.
    pub checkpoints: Vec<(u64, f64)>,
    /// `ln` growth of the running mean over the final decade of `n`.
    pub last_decade_growth: f64,
    pub threshold: f64,
    pub verdict: MomentVerdict,
}

/// Running average of `q^c` at checkpoints spaced by `10^{1/10}`; the moment
/// is called diverging when the final decade grows by more than
/// `max(0.05, 3/√n)` in log terms.
pub fn moment_probe<I: IntoIterator<Item = u64>>(stream: I, c: f64) -> Result<MomentReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "moment exponent must be positive, got {c}"
        )));
    }
    let mut checkpoints = Vec::new();
    let mut next = 10u64;
    let mut k = 10u32;
    let mut sum = 0.0;
    let mut n = 0u64;
    for q in stream {
        sum += (q as f64).powf(c);
        n += 1;
        if n == next {
            checkpoints.push((n, sum / n as f64));
            k += 1;
            next = 10f64.powf(k as f64 / 10.0).round() as u64;
        }
    }
    if n > 0 && checkpoints.last().is_none_or(|&(m, _)| m != n) {
        checkpoints.push((n, sum / n as f64));
    }
    let threshold = if n > 0 {
        (3.0 / (n as f64).sqrt()).max(0.05)
    } else {
        0.05
    };
    let end = checkpoints.last().copied().unwrap_or((0, 0.0));
    let start = checkpoints
        .iter()
        .rev()
        .find(|&&(m, _)| m as f64 <= end.0 as f64 / 10.0)
        .copied();
    let last_decade_growth = match start {
        Some((_, m0)) if m0 > 0.0 && end.1 > 0.0 => (end.1 / m0).ln(),
        _ => 0.0,
    };
    Ok(MomentReport {
        exponent: c,
        checkpoints,
        last_decade_growth,
        threshold,
        verdict: if last_decade_growth > threshold {
            MomentVerdict::Diverging
        } else {
            MomentVerdict::Saturating
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ExactTail;

    #[test]
    fn exact_power_law_recovered() {
        for idx in [0.5, 1.5, 3.0] {
            let t = ExactTail::from_fn(|x| (x as f64).powf(-idx), 1 << 62);
            let e = fit_tail_index(&t, QuantileWindow::default()).unwrap();
            assert!((e.slope - idx).abs() < 1e-3, "{idx}: {}", e.slope);
            assert!(!e.curvature_flag);
        }
    }

    #[test]
    fn exact_exponential_is_steep_and_curved() {
        let t = ExactTail::from_fn(|x| 0.5f64.powf(x as f64 + 1.0), 200);
        let e = fit_tail_index(&t, QuantileWindow::default()).unwrap();
        assert!(e.slope > 4.0 && e.curvature_flag);
    }

    #[test]
    fn exact_geometric_rate() {
        for p in [0.3f64, 0.5, 0.7] {
            let t = ExactTail::from_fn(|x| p.powf(x as f64 + 1.0), 200);
            let e = fit_ld_exponent(&t, 1, 40).unwrap();
            assert!((e.rate + p.ln()).abs() < 1e-6);
            assert!((e.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_law_is_not_exponential() {
        let t = ExactTail::from_fn(|x| (1.0 + x as f64).powf(-1.5), 1 << 40);
        let e = fit_ld_exponent(&t, 1, 1 << 30).unwrap();
        assert!(e.r_squared < 0.9);
    }

    #[test]
    fn thin_window_reported() {
        let mut h = CcdfHistogram::new();
        for q in 0..1000 {
            h.record(q % 7);
        }
        match fit_tail_index(&h, QuantileWindow::default()) {
            Err(Error::WindowTooThin { needed: 8, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bounded_stream_saturates() {
        let r = moment_probe((0..100_000u64).map(|i| i % 13), 3.0).unwrap();
        assert_eq!(r.verdict, MomentVerdict::Saturating);
        assert!(moment_probe([1u64], 0.0).is_err());
    }
}
