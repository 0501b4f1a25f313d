use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIRECT_CAP: u64 = 4096;

/// Next edge of the ~10% geometric grid: `e + max(1, ceil(e / 10))`.
#[inline]
pub fn next_edge(e: u64) -> u64 {
    e.saturating_add(e.div_ceil(10).max(1))
}

fn bucket_edges(direct_cap: u64) -> Vec<u64> {
    let mut edges = vec![direct_cap];
    while *edges.last().unwrap() < u64::MAX {
        edges.push(next_edge(*edges.last().unwrap()));
    }
    edges
}

/// One row of a tail table: `P{q > x}`, with the supporting sample count
/// (`None` for exact tables).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailPoint {
    pub x: u64,
    pub p_gt: f64,
    pub count: Option<u64>,
}

/// Anything that can be turned into a tail table for fitting.
pub trait TailSource {
    /// Points in increasing `x`.
    fn tail_points(&self) -> Vec<TailPoint>;
}

/// Streaming empirical CCDF of a non-negative integer sequence: exact counts
/// below `direct_cap`, ~10% geometric buckets above.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcdfHistogram {
    direct_cap: u64,
    exact: Vec<u64>,
    #[serde(skip)]
    edges: Vec<u64>,
    buckets: Vec<u64>,
    total: u64,
    max_seen: u64,
}

impl Default for CcdfHistogram {
    fn default() -> Self {
        Self::new()
    }
}

impl CcdfHistogram {
    pub fn new() -> Self {
        Self::with_direct_cap(DEFAULT_DIRECT_CAP)
    }

    pub fn with_direct_cap(direct_cap: u64) -> Self {
        let direct_cap = direct_cap.max(1);
        let edges = bucket_edges(direct_cap);
        CcdfHistogram {
            direct_cap,
            exact: vec![0; direct_cap as usize],
            buckets: vec![0; edges.len()],
            edges,
            total: 0,
            max_seen: 0,
        }
    }

    #[inline]
    pub fn record(&mut self, q: u64) {
        if q < self.direct_cap {
            self.exact[q as usize] += 1;
        } else {
            let i = self.edges.partition_point(|&e| e <= q) - 1;
            self.buckets[i] += 1;
        }
        self.total += 1;
        self.max_seen = self.max_seen.max(q);
    }

    pub fn record_n(&mut self, q: u64, n: u64) {
        if n == 0 {
            return;
        }
        if q < self.direct_cap {
            self.exact[q as usize] += n;
        } else {
            let i = self.edges.partition_point(|&e| e <= q) - 1;
            self.buckets[i] += n;
        }
        self.total += n;
        self.max_seen = self.max_seen.max(q);
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_seen(&self) -> u64 {
        self.max_seen
    }

    pub fn direct_cap(&self) -> u64 {
        self.direct_cap
    }

    /// Count of exact value `q` (only below `direct_cap`).
    pub fn count_eq(&self, q: u64) -> Option<u64> {
        (q < self.direct_cap).then(|| self.exact[q as usize])
    }

    /// `P̂{q > 0}`.
    pub fn busy_fraction(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        1.0 - self.exact[0] as f64 / self.total as f64
    }

    /// Values `b` at which `count_ge` is exact: every integer below the cap
    /// plus the bucket edges up to the largest observation.
    pub fn grid(&self) -> Vec<u64> {
        let mut g: Vec<u64> = (0..self.direct_cap).collect();
        g.extend(
            self.edges
                .iter()
                .copied()
                .take_while(|&e| e <= self.max_seen),
        );
        g
    }

    /// `(b, #{q >= b})` at every grid value, in increasing `b`.
    pub fn counts_ge(&self) -> Vec<(u64, u64)> {
        let n_edges = self.edges.partition_point(|&e| e <= self.max_seen);
        let mut out = Vec::with_capacity(self.direct_cap as usize + n_edges);
        let mut acc: u64 = self.buckets.iter().sum();
        let mut tail = Vec::with_capacity(n_edges);
        let mut running = acc;
        for i in 0..n_edges {
            tail.push((self.edges[i], running));
            running -= self.buckets[i];
        }
        let mut head = Vec::with_capacity(self.direct_cap as usize);
        for b in (0..self.direct_cap).rev() {
            acc += self.exact[b as usize];
            head.push((b, acc));
        }
        head.reverse();
        out.extend(head);
        out.extend(tail);
        out
    }

    /// `#{q >= b}`; exact on the grid, otherwise the count at the next grid
    /// value above `b` (a lower bound).
    pub fn count_ge(&self, b: u64) -> u64 {
        if b < self.direct_cap {
            self.exact[b as usize..].iter().sum::<u64>() + self.buckets.iter().sum::<u64>()
        } else {
            let i = self.edges.partition_point(|&e| e < b);
            self.buckets[i.min(self.buckets.len())..].iter().sum()
        }
    }

    pub fn ccdf_ge(&self, b: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count_ge(b) as f64 / self.total as f64
    }

    /// Largest grid value `b` with `#{q >= b} >= depth`.
    pub fn b_max(&self, depth: u64) -> Option<u64> {
        self.counts_ge()
            .into_iter()
            .rev()
            .find(|&(_, c)| c >= depth)
            .map(|(b, _)| b)
    }

    /// Mean of the recorded values (bucket contents at their geometric midpoint).
    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mut s: f64 = self
            .exact
            .iter()
            .enumerate()
            .map(|(q, &c)| q as f64 * c as f64)
            .sum();
        for (i, &c) in self.buckets.iter().enumerate() {
            if c > 0 {
                s += c as f64 * self.bucket_mid(i);
            }
        }
        s / self.total as f64
    }

    fn bucket_mid(&self, i: usize) -> f64 {
        let lo = self.edges[i] as f64;
        let hi = self.edges.get(i + 1).map_or(lo, |&e| (e - 1) as f64);
        (lo * hi).sqrt()
    }

    /// Representative value and count of every non-empty cell.
    pub(crate) fn cells(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        let exact = self
            .exact
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(q, &c)| (q as f64, c));
        let buckets = self
            .buckets
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (self.bucket_mid(i), c));
        exact.chain(buckets)
    }

    /// Elementwise sum; equivalent to recording both streams into one histogram.
    pub fn merge(&mut self, other: &CcdfHistogram) -> Result<()> {
        if self.direct_cap != other.direct_cap {
            return Err(Error::InvalidArgument(format!(
                "cannot merge histograms with direct caps {} and {}",
                self.direct_cap, other.direct_cap
            )));
        }
        for (a, b) in self.exact.iter_mut().zip(&other.exact) {
            *a += b;
        }
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            *a += b;
        }
        self.total += other.total;
        self.max_seen = self.max_seen.max(other.max_seen);
        Ok(())
    }

    /// Restore the derived edge table after deserialisation.
    pub fn rebuild(mut self) -> Result<Self> {
        self.edges = bucket_edges(self.direct_cap);
        if self.direct_cap == 0
            || self.exact.len() as u64 != self.direct_cap
            || self.buckets.len() != self.edges.len()
        {
            return Err(Error::InvalidArgument(
                "histogram arrays do not match direct_cap".into(),
            ));
        }
        let counted = self
            .exact
            .iter()
            .chain(&self.buckets)
            .try_fold(0u64, |acc, &c| acc.checked_add(c));
        if counted != Some(self.total) {
            return Err(Error::InvalidArgument(
                "histogram counts do not sum to total".into(),
            ));
        }
        Ok(self)
    }

    /// CSV with header `b,count_ge,ccdf`, where `ccdf = P{q >= b}`; rows stop
    /// at the first empty grid value.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("b,count_ge,ccdf\n");
        if self.total == 0 {
            return s;
        }
        for (b, c) in self.counts_ge() {
            if c == 0 {
                break;
            }
            let _ = writeln!(s, "{b},{c},{:e}", c as f64 / self.total as f64);
        }
        s
    }
}

impl TailSource for CcdfHistogram {
    fn tail_points(&self) -> Vec<TailPoint> {
        if self.total == 0 {
            return Vec::new();
        }
        let t = self.total as f64;
        self.counts_ge()
            .into_iter()
            .filter(|&(b, c)| b >= 1 && c > 0)
            .map(|(b, c)| TailPoint {
                x: b - 1,
                p_gt: c as f64 / t,
                count: Some(c),
            })
            .collect()
    }
}

/// Exact tail table `x ↦ P{q > x}` sampled on the ~10% grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTail {
    points: Vec<TailPoint>,
}

impl ExactTail {
    /// Evaluate `p_gt` at `x = 1, 2, ..., 10, 11, 13, ...` up to `x_max`.
    pub fn from_fn(p_gt: impl Fn(u64) -> f64, x_max: u64) -> Self {
        let mut points = Vec::new();
        let mut x = 1u64;
        while x <= x_max {
            points.push(TailPoint {
                x,
                p_gt: p_gt(x),
                count: None,
            });
            x = next_edge(x);
        }
        ExactTail { points }
    }

    /// Every integer `x` in `0..p_gt.len()` from a dense table.
    pub fn from_table(p_gt: &[f64]) -> Self {
        ExactTail {
            points: p_gt
                .iter()
                .enumerate()
                .map(|(x, &p)| TailPoint {
                    x: x as u64,
                    p_gt: p,
                    count: None,
                })
                .collect(),
        }
    }
}

impl TailSource for ExactTail {
    fn tail_points(&self) -> Vec<TailPoint> {
        self.points.clone()
    }
}

/// One parsed CSV row; `count_ge` is empty for exact or oracle tables.
#[derive(Clone, Debug, PartialEq)]
pub struct CcdfRow {
    pub b: u64,
    pub count_ge: Option<u64>,
    pub ccdf: f64,
}

/// Parse the `b,count_ge,ccdf` schema. Rows must have increasing `b` and a
/// non-increasing `ccdf` in `[0, 1]`.
pub fn parse_ccdf_csv(text: &str) -> Result<Vec<CcdfRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "b,count_ge,ccdf" => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `b,count_ge,ccdf`".into(),
            })
        }
    }
    let mut rows: Vec<CcdfRow> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::Parse {
            line: line_no,
            message: m,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let b: u64 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad b `{}`", fields[0])))?;
        let count_ge = if fields[1].is_empty() {
            None
        } else {
            Some(
                fields[1]
                    .parse::<u64>()
                    .map_err(|_| err(format!("bad count_ge `{}`", fields[1])))?,
            )
        };
        let ccdf: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("bad ccdf `{}`", fields[2])))?;
        if !(0.0..=1.0).contains(&ccdf) {
            return Err(err(format!("ccdf {ccdf} outside [0, 1]")));
        }
        if let Some(prev) = rows.last() {
            if b <= prev.b {
                return Err(err("b must be strictly increasing".into()));
            }
            if ccdf > prev.ccdf * (1.0 + 1e-12) {
                return Err(err("ccdf must be non-increasing".into()));
            }
        }
        rows.push(CcdfRow { b, count_ge, ccdf });
    }
    Ok(rows)
}

/// Write an exact `P{q >= b}` table in the same CSV schema.
pub fn exact_ccdf_csv(p_ge: &[f64]) -> String {
    let mut s = String::from("b,count_ge,ccdf\n");
    for (b, p) in p_ge.iter().enumerate() {
        let _ = writeln!(s, "{b},,{:e}", p.clamp(0.0, 1.0));
    }
    s
}
