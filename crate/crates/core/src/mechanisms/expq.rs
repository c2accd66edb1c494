//! Exponential-mechanism quantile sampler over data-defined bins.
//!
//! For sorted values `x_1 <= ... <= x_n` inside `[xmin, xmax]`, the range is
//! cut into bins `B_i = [x_i, x_{i+1})`, `i = 0..=n`, with `x_0 = xmin` and
//! `x_{n+1} = xmax`. Bin `i` has utility `i + 1 - m` below the target rank
//! `m` and `m - i` from `m` upwards, so the two bins adjacent to `x_m` score
//! 0 and every step away costs 1. A bin is chosen with probability
//! proportional to `|B_i| * exp(eps/2 * u_i)` and the output is uniform
//! inside it.
//!
//! All weights are handled as logarithms with the maximum subtracted before
//! exponentiation, so utilities down to `-n` never overflow or flush the
//! whole distribution to zero.

use crate::data::{DataBounds, Database};
use crate::error::{require_len, Error, Result};
use crate::rng::RandomSource;

/// 1-based rank of the order statistic being targeted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuantileRank(usize);

impl QuantileRank {
    pub fn new(rank: usize, n: usize) -> Result<Self> {
        if rank == 0 || rank > n {
            return Err(Error::RankOutOfRange { rank, n });
        }
        Ok(QuantileRank(rank))
    }

    /// `floor((n + 1) / 2)`.
    pub fn median(n: usize) -> Result<Self> {
        QuantileRank::new((n + 1) / 2, n)
    }

    /// `floor(b (n - 1) + 1)` for a quantile fraction `b` in [0, 1].
    ///
    /// A relative slack of 1e-9 is added before flooring so that products
    /// that are integers in exact arithmetic (0.29 * 100) are not pushed one
    /// rank down by binary rounding.
    pub fn for_fraction(b: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::param("b", format!("quantile fraction must lie in [0, 1], got {b}")));
        }
        if n == 0 {
            return Err(Error::Empty);
        }
        let pos = b * (n - 1) as f64 + 1.0;
        let rank = (pos + 1e-9 * pos).floor() as usize;
        QuantileRank::new(rank.clamp(1, n), n)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Values sorted ascending; the form every quantile query consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedValues(Vec<f64>);

impl SortedValues {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        SortedValues(values)
    }

    pub fn from_database(db: &Database) -> Self {
        SortedValues::new(db.as_slice().to_vec())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Bin edges and utilities for one (database, rank, bounds) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct BinLayout {
    /// `n + 2` edges: `xmin, x_1, ..., x_n, xmax`.
    edges: Vec<f64>,
    utilities: Vec<i64>,
    rank: QuantileRank,
}

/// Utility of bin `i` (0-based) for 1-based target rank `m`.
pub fn bin_utility(i: usize, m: usize) -> i64 {
    let (i, m) = (i as i64, m as i64);
    if i < m {
        i + 1 - m
    } else {
        m - i
    }
}

impl BinLayout {
    fn from_sorted(sorted: &[f64], bounds: DataBounds, rank: QuantileRank) -> Result<Self> {
        require_len(sorted, 1)?;
        let n = sorted.len();
        QuantileRank::new(rank.get(), n)?;
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        if lo < bounds.xmin() || hi > bounds.xmax() {
            return Err(Error::param(
                "db",
                format!("values must be clamped to [{}, {}] before a quantile query", bounds.xmin(), bounds.xmax()),
            ));
        }
        let mut edges = Vec::with_capacity(n + 2);
        edges.push(bounds.xmin());
        edges.extend_from_slice(sorted);
        edges.push(bounds.xmax());
        let utilities = (0..=n).map(|i| bin_utility(i, rank.get())).collect();
        Ok(BinLayout { edges, utilities, rank })
    }

    pub fn n_bins(&self) -> usize {
        self.utilities.len()
    }

    pub fn rank(&self) -> QuantileRank {
        self.rank
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn utilities(&self) -> &[i64] {
        &self.utilities
    }

    pub fn bin(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `ln |B_i| + eps/2 * u_i`; `-inf` for zero-width bins.
    pub fn log_weights(&self, epsilon: f64) -> Vec<f64> {
        self.edges
            .windows(2)
            .zip(&self.utilities)
            .map(|(w, &u)| (w[1] - w[0]).ln() + 0.5 * epsilon * u as f64)
            .collect()
    }

    /// Normalized bin selection probabilities.
    pub fn probabilities(&self, epsilon: f64) -> Vec<f64> {
        let lw = self.log_weights(epsilon);
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }

    /// Index of the positive-width bin containing `y`.
    pub fn bin_of(&self, y: f64) -> Result<usize> {
        let (xmin, xmax) = (self.edges[0], *self.edges.last().unwrap());
        if !(y >= xmin && y < xmax) {
            return Err(Error::OutsideBounds { y, xmin, xmax });
        }
        // Last edge <= y; its bin is [edge, next) with next > y.
        Ok(self.edges.partition_point(|&e| e <= y) - 1)
    }

    /// Utility of an output value `y`.
    pub fn utility_at(&self, y: f64) -> Result<i64> {
        Ok(self.utilities[self.bin_of(y)?])
    }

    /// Exact output density at `y`.
    pub fn density(&self, epsilon: f64, y: f64) -> Result<f64> {
        let i = self.bin_of(y)?;
        let half = 0.5 * epsilon;
        let lw = self.log_weights(epsilon);
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = lw.iter().map(|l| (l - max).exp()).sum();
        // density = exp(eps/2 u_i) / sum_j |B_j| exp(eps/2 u_j)
        Ok((half * self.utilities[i] as f64 - max).exp() / norm)
    }

    /// Exact expectation: `sum_i p_i * (x_i + x_{i+1}) / 2`.
    pub fn expected_value(&self, epsilon: f64) -> f64 {
        self.probabilities(epsilon)
            .iter()
            .zip(self.edges.windows(2))
            .map(|(p, w)| if *p == 0.0 { 0.0 } else { p * 0.5 * (w[0] + w[1]) })
            .sum()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::param("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    Ok(())
}

/// Lay out bins for `db` (sorted internally) and target rank `m`.
pub fn build_bins(db: &Database, bounds: DataBounds, m: QuantileRank) -> Result<BinLayout> {
    BinLayout::from_sorted(SortedValues::from_database(db).as_slice(), bounds, m)
}

/// Sample a bin index and a uniform point inside it, streaming over the
/// sorted values without materializing the layout.
pub fn expq_sorted(
    sorted: &SortedValues,
    m: QuantileRank,
    epsilon: f64,
    bounds: DataBounds,
    rng: &mut RandomSource,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    let x = sorted.as_slice();
    require_len(x, 1)?;
    let n = x.len();
    let m = QuantileRank::new(m.get(), n)?.get();
    if x[0] < bounds.xmin() || x[n - 1] > bounds.xmax() {
        return Err(Error::param(
            "db",
            format!("values must be clamped to [{}, {}] before a quantile query", bounds.xmin(), bounds.xmax()),
        ));
    }
    let half = 0.5 * epsilon;
    let edge = |i: usize| -> f64 {
        if i == 0 {
            bounds.xmin()
        } else if i > n {
            bounds.xmax()
        } else {
            x[i - 1]
        }
    };

    let mut log_w = Vec::with_capacity(n + 1);
    let mut max = f64::NEG_INFINITY;
    for i in 0..=n {
        let lw = (edge(i + 1) - edge(i)).ln() + half * bin_utility(i, m) as f64;
        max = max.max(lw);
        log_w.push(lw);
    }
    let mut total = 0.0;
    for lw in log_w.iter_mut() {
        *lw = (*lw - max).exp();
        total += *lw;
    }
    let target = rng.uniform() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, &w) in log_w.iter().enumerate() {
        if w > 0.0 {
            chosen = Some(i);
            acc += w;
            if acc > target {
                break;
            }
        }
    }
    // `chosen` is the last positive-weight bin if rounding left acc <= target.
    let i = chosen.expect("at least one bin has positive width");
    let (lo, hi) = (edge(i), edge(i + 1));
    let y = lo + rng.uniform() * (hi - lo);
    Ok(if y < hi { y } else { lo })
}

/// Private estimate of the rank-`m` order statistic of `db`.
pub fn expq(
    db: &Database,
    m: QuantileRank,
    epsilon: f64,
    bounds: DataBounds,
    rng: &mut RandomSource,
) -> Result<f64> {
    expq_sorted(&SortedValues::from_database(db), m, epsilon, bounds, rng)
}

/// Exact density of the sampler's output at `y`.
pub fn expq_exact_density(
    db: &Database,
    m: QuantileRank,
    epsilon: f64,
    bounds: DataBounds,
    y: f64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    build_bins(db, bounds, m)?.density(epsilon, y)
}

/// Exact expected output for this fixed database.
pub fn expq_expected_value(db: &Database, m: QuantileRank, epsilon: f64, bounds: DataBounds) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(build_bins(db, bounds, m)?.expected_value(epsilon))
}

/// Exact per-bin selection probabilities.
pub fn expq_bin_probabilities(
    db: &Database,
    m: QuantileRank,
    epsilon: f64,
    bounds: DataBounds,
) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    Ok(build_bins(db, bounds, m)?.probabilities(epsilon))
}
