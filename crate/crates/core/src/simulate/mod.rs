//! Simulation-based intervals and the Monte Carlo experiment harness.
//!
//! [`sim_ci`] runs an estimator once on the real data, then reruns it `nsim`
//! times on synthetic normal databases drawn from the private center and
//! spread. Half the distance between the `alpha/2` and `1 - alpha/2`
//! quantiles of the simulated centers is the margin of error. Only the first
//! call touches private data; the reruns are post-processing.

mod bias;
mod experiment;

pub use bias::{bias_curve, BiasEstimate};
pub use experiment::{
    estimator_for, run_coverage, run_grid, run_moe, sweep_param, trial_seeds, CellRecord, ExperimentGrid, Metric,
    SweepCell, SweepParam, SweepRecord,
};

use crate::data::{check_alpha, CenterSpread, ConfidenceInterval, DataBounds, Database};
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::mechanisms::Mechanism;
use crate::rng::RandomSource;
use crate::stats::quantile_sorted;

pub const DEFAULT_NSIM: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub nsim: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Clamp synthetic databases to the bounds before re-estimating. When
    /// off, each synthetic rerun uses bounds widened to cover its own draws.
    pub clamp_synthetic: bool,
}

impl SimConfig {
    pub fn new(alpha: f64, seed: u64) -> Self {
        SimConfig { nsim: DEFAULT_NSIM, alpha, seed, clamp_synthetic: true }
    }

    pub fn with_nsim(mut self, nsim: usize) -> Self {
        self.nsim = nsim;
        self
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.nsim == 0 {
            return Err(Error::param("nsim", "must be >= 1"));
        }
        Ok(())
    }
}

/// Draw a synthetic database of size `n` from `N(center, spread^2)`.
fn synthetic_db(
    estimate: &CenterSpread,
    n: usize,
    bounds: DataBounds,
    clamp: bool,
    rng: &mut RandomSource,
) -> Result<(Database, DataBounds)> {
    let mut values: Vec<f64> = (0..n).map(|_| rng.normal(estimate.center, estimate.spread)).collect();
    if clamp {
        values.iter_mut().for_each(|v| *v = bounds.clamp(*v));
        return Ok((Database::from_finite(values), bounds));
    }
    let lo = values.iter().copied().fold(bounds.xmin(), f64::min);
    let hi = values.iter().copied().fold(bounds.xmax(), f64::max);
    Ok((Database::from_finite(values), DataBounds::new(lo, hi)?))
}

/// Sorted centers from `nsim` reruns of `estimator` on synthetic data.
pub fn simulate_centers(
    estimator: &dyn Estimator,
    estimate: &CenterSpread,
    n: usize,
    bounds: DataBounds,
    nsim: usize,
    clamp_synthetic: bool,
    rng: &mut RandomSource,
) -> Result<Vec<f64>> {
    if !estimate.center.is_finite() || !estimate.spread.is_finite() {
        return Err(Error::param("estimate", "center and spread must be finite"));
    }
    let mut centers = Vec::with_capacity(nsim);
    for _ in 0..nsim {
        let (synthetic, b) = synthetic_db(estimate, n, bounds, clamp_synthetic, rng)?;
        centers.push(estimator.estimate(&synthetic, b, rng)?.center);
    }
    centers.sort_by(f64::total_cmp);
    Ok(centers)
}

/// Interval `center +/- MoE` from a sorted reference distribution.
pub fn interval_from_reference(
    estimator: &dyn Estimator,
    estimate: &CenterSpread,
    sorted_centers: &[f64],
    alpha: f64,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    let hi = quantile_sorted(sorted_centers, 1.0 - alpha / 2.0)?;
    let lo = quantile_sorted(sorted_centers, alpha / 2.0)?;
    let moe = ((hi - lo) / 2.0).max(0.0);
    let mut ci = ConfidenceInterval::centered(estimate.center, moe, alpha, estimator.method());
    ci.spread = Some(estimate.spread);
    ci.nsim = sorted_centers.len();
    Ok(ci)
}

/// Simulation-based interval. The real-data call goes through `real`; the
/// synthetic reruns draw from `rng`.
pub fn sim_ci_with(
    estimator: &dyn Estimator,
    db: &Database,
    bounds: DataBounds,
    config: &SimConfig,
    real: &mut dyn Mechanism,
    rng: &mut RandomSource,
) -> Result<ConfidenceInterval> {
    config.validate()?;
    let estimate = estimator.estimate(db, bounds, real)?;
    let centers =
        simulate_centers(estimator, &estimate, db.len(), bounds, config.nsim, config.clamp_synthetic, rng)?;
    let mut ci = interval_from_reference(estimator, &estimate, &centers, config.alpha)?;
    ci.seed = Some(config.seed);
    Ok(ci)
}

/// Simulation-based interval seeded from `config.seed`. `db` must already be
/// clamped to `bounds`.
pub fn sim_ci(
    estimator: &dyn Estimator,
    db: &Database,
    bounds: DataBounds,
    config: &SimConfig,
) -> Result<ConfidenceInterval> {
    config.validate()?;
    let mut rng = RandomSource::new(config.seed);
    let estimate = estimator.estimate(db, bounds, &mut rng)?;
    let centers =
        simulate_centers(estimator, &estimate, db.len(), bounds, config.nsim, config.clamp_synthetic, &mut rng)?;
    let mut ci = interval_from_reference(estimator, &estimate, &centers, config.alpha)?;
    ci.seed = Some(config.seed);
    Ok(ci)
}
