//! The five private center/spread estimators.
//!
//! Each consumes a clamped database and spends exactly its budget through the
//! supplied [`Mechanism`]: two Laplace queries for the noise-based methods,
//! two quantile queries for the quantile-based ones.

use std::f64::consts::PI;

use crate::data::{CenterSpread, DataBounds, Database, Method, PrivacyBudget};
use crate::dist::qz;
use crate::error::{require_len, Error, Result};
use crate::mechanisms::{Mechanism, QuantileRank, SortedValues};
use crate::stats::{mad_sum_sensitivity, mean_abs_deviation, mean_sensitivity, sample_mean, sample_variance};
use crate::stats::variance_sensitivity;

/// Budget split `rho` and spread quantile `b`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorParams {
    pub rho: f64,
    pub b: f64,
}

impl EstimatorParams {
    /// Tuned defaults: NOISYVAR rho 0.8, NOISYMAD rho 0.85, CENQ rho 0.5 b 0.65,
    /// SYMQ b 0.35, MOD rho 0.5. Baselines and PUBLIC ignore both.
    pub fn defaults(method: Method) -> Self {
        let (rho, b) = match method {
            Method::NoisyVar => (0.8, 0.5),
            Method::NoisyMad => (0.85, 0.5),
            Method::CenQ => (0.5, 0.65),
            Method::SymQ => (0.5, 0.35),
            Method::Mod => (0.5, 0.5),
            Method::Public | Method::Vadhan | Method::Ora => (0.5, 0.5),
        };
        EstimatorParams { rho, b }
    }

    pub fn validate(&self, method: Method) -> Result<()> {
        match method {
            Method::NoisyVar | Method::NoisyMad | Method::Mod => check_rho(self.rho),
            Method::CenQ => {
                check_rho(self.rho)?;
                check_upper_b(self.b)
            }
            Method::SymQ => check_lower_b(self.b),
            Method::Public | Method::Vadhan | Method::Ora => Ok(()),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie strictly inside (0, 1), got {rho}")));
    }
    Ok(())
}

fn check_upper_b(b: f64) -> Result<()> {
    if !(b > 0.5 && b < 1.0) {
        return Err(Error::param("b", format!("CENQ needs b in (0.5, 1), got {b}")));
    }
    Ok(())
}

fn check_lower_b(b: f64) -> Result<()> {
    if !(b > 0.0 && b < 0.5) {
        return Err(Error::param("b", format!("SYMQ needs b in (0, 0.5), got {b}")));
    }
    Ok(())
}

fn check_clamped(db: &Database, bounds: DataBounds) -> Result<()> {
    if db.iter().any(|&v| v < bounds.xmin() || v > bounds.xmax()) {
        return Err(Error::param("db", "values must be clamped to the bounds first"));
    }
    Ok(())
}

/// Noisy mean and noisy variance.
pub fn noisyvar(
    db: &Database,
    budget: PrivacyBudget,
    bounds: DataBounds,
    mech: &mut dyn Mechanism,
) -> Result<CenterSpread> {
    require_len(db, 2)?;
    check_clamped(db, bounds)?;
    let (eps_mean, eps_var) = budget.split()?;
    let n = db.len();
    let center = sample_mean(db)? + mech.laplace(mean_sensitivity(bounds, n)?, eps_mean)?;
    let var = sample_variance(db)? + mech.laplace(variance_sensitivity(bounds, n)?, eps_var)?;
    Ok(CenterSpread::new(center, var.max(0.0).sqrt()))
}

/// Noisy mean and noisy mean absolute deviation, rescaled by `sqrt(pi/2)`.
pub fn noisymad(
    db: &Database,
    budget: PrivacyBudget,
    bounds: DataBounds,
    mech: &mut dyn Mechanism,
) -> Result<CenterSpread> {
    require_len(db, 1)?;
    check_clamped(db, bounds)?;
    let (eps_mean, eps_mad) = budget.split()?;
    let n = db.len();
    let center = sample_mean(db)? + mech.laplace(mean_sensitivity(bounds, n)?, eps_mean)?;
    let mad_sensitivity = mad_sum_sensitivity(bounds) / n as f64;
    let mad = mean_abs_deviation(db)? + mech.laplace(mad_sensitivity, eps_mad)?;
    if n == 1 {
        return Ok(CenterSpread { center, spread: 0.0, degenerate: true });
    }
    Ok(CenterSpread::new(center, (PI / 2.0).sqrt() * mad.max(0.0)))
}

/// Private median as the center; spread from the distance to the `b` quantile.
pub fn cenq(
    db: &Database,
    budget: PrivacyBudget,
    bounds: DataBounds,
    b: f64,
    mech: &mut dyn Mechanism,
) -> Result<CenterSpread> {
    require_len(db, 2)?;
    check_upper_b(b)?;
    let (eps_center, eps_spread) = budget.split()?;
    let n = db.len();
    let sorted = SortedValues::from_database(db);
    let center = mech.quantile(&sorted, QuantileRank::median(n)?, eps_center, bounds)?;
    let d = mech.quantile(&sorted, QuantileRank::for_fraction(b, n)?, eps_spread, bounds)?;
    Ok(CenterSpread::new(center, (d - center) / qz(b)?))
}

/// Two quantiles placed symmetrically about the median, each at `epsilon / 2`.
pub fn symq(
    db: &Database,
    epsilon: f64,
    bounds: DataBounds,
    b: f64,
    mech: &mut dyn Mechanism,
) -> Result<CenterSpread> {
    require_len(db, 2)?;
    check_lower_b(b)?;
    let n = db.len();
    let half = 0.5 * epsilon;
    let sorted = SortedValues::from_database(db);
    let d1 = mech.quantile(&sorted, QuantileRank::for_fraction(b, n)?, half, bounds)?;
    let d2 = mech.quantile(&sorted, QuantileRank::for_fraction(1.0 - b, n)?, half, bounds)?;
    let center = 0.5 * (d1 + d2);
    Ok(CenterSpread::new(center, (d2 - center) / qz(1.0 - b)?))
}

/// Private median, then the private median of absolute deviations from it,
/// rescaled by `qz(0.75)`.
pub fn mod_dev(
    db: &Database,
    budget: PrivacyBudget,
    bounds: DataBounds,
    mech: &mut dyn Mechanism,
) -> Result<CenterSpread> {
    require_len(db, 1)?;
    let (eps_center, eps_spread) = budget.split()?;
    let n = db.len();
    let median = QuantileRank::median(n)?;
    let center = mech.quantile(&SortedValues::from_database(db), median, eps_center, bounds)?;

    let deviations = SortedValues::new(db.iter().map(|v| (v - center).abs()).collect());
    let reach = (bounds.xmin() - center).abs().max((bounds.xmax() - center).abs());
    let dev_bounds = DataBounds::new(0.0, reach)?;
    let spread_raw = mech.quantile(&deviations, median, eps_spread, dev_bounds)? / qz(0.75)?;
    if n == 1 {
        return Ok(CenterSpread { center, spread: 0.0, degenerate: true });
    }
    Ok(CenterSpread::new(center, spread_raw))
}

/// Anything that maps a clamped database to a private center/spread pair.
pub trait Estimator: Sync {
    fn method(&self) -> Method;

    fn estimate(&self, db: &Database, bounds: DataBounds, mech: &mut dyn Mechanism) -> Result<CenterSpread>;
}

/// One of the five estimators with a fixed budget and tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivateEstimator {
    method: Method,
    epsilon: f64,
    params: EstimatorParams,
}

impl PrivateEstimator {
    pub fn new(method: Method, epsilon: f64, params: EstimatorParams) -> Result<Self> {
        if !matches!(method, Method::NoisyVar | Method::NoisyMad | Method::CenQ | Method::SymQ | Method::Mod) {
            return Err(Error::param("method", format!("{method} is not a private center/spread estimator")));
        }
        PrivacyBudget::new(epsilon, 0.5)?;
        params.validate(method)?;
        Ok(PrivateEstimator { method, epsilon, params })
    }

    pub fn with_defaults(method: Method, epsilon: f64) -> Result<Self> {
        PrivateEstimator::new(method, epsilon, EstimatorParams::defaults(method))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn params(&self) -> EstimatorParams {
        self.params
    }
}

impl Estimator for PrivateEstimator {
    fn method(&self) -> Method {
        self.method
    }

    fn estimate(&self, db: &Database, bounds: DataBounds, mech: &mut dyn Mechanism) -> Result<CenterSpread> {
        let budget = PrivacyBudget::new(self.epsilon, self.params.rho)?;
        match self.method {
            Method::NoisyVar => noisyvar(db, budget, bounds, mech),
            Method::NoisyMad => noisymad(db, budget, bounds, mech),
            Method::CenQ => cenq(db, budget, bounds, self.params.b, mech),
            Method::SymQ => symq(db, self.epsilon, bounds, self.params.b, mech),
            Method::Mod => mod_dev(db, budget, bounds, mech),
            _ => unreachable!("constructor admits only private estimators"),
        }
    }
}
