//! Prior-work comparators: the Karwa-Vadhan interval for pure DP and the
//! subsample-and-aggregate estimator of D'Orazio, Honaker and King, adapted
//! to a single mean.

use crate::data::{check_alpha, CenterSpread, ConfidenceInterval, DataBounds, Database, Method};
use crate::dist::qt;
use crate::error::{require_len, Error, Result};
use crate::estimators::Estimator;
use crate::mechanisms::{Mechanism, QuantileRank, SortedValues};
use crate::stats::{sample_mean, sample_sd, sample_variance};

/// Inputs of the Karwa-Vadhan interval other than `alpha0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VadhanParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub mean_min: f64,
    pub mean_max: f64,
    pub sd_min: f64,
    pub sd_max: f64,
}

impl VadhanParams {
    /// Equal split of `epsilon` between the mean and variance queries and of
    /// `alpha` four ways; mean bounds from `bounds`, sd bounds
    /// `[width / 1000, width / 2]`.
    pub fn split_evenly(epsilon: f64, alpha: f64, bounds: DataBounds) -> Self {
        let a = alpha / 4.0;
        VadhanParams {
            alpha1: a,
            alpha2: a,
            alpha3: a,
            eps1: epsilon / 2.0,
            eps2: epsilon / 2.0,
            eps3: 0.0,
            mean_min: bounds.xmin(),
            mean_max: bounds.xmax(),
            sd_min: bounds.width() / 1000.0,
            sd_max: bounds.width() / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("alpha3", self.alpha3)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::param(name, format!("must lie in (0, 1), got {a}")));
            }
        }
        for (name, e) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {e}")));
            }
        }
        if !(self.eps3.is_finite() && self.eps3 >= 0.0) {
            return Err(Error::param("eps3", format!("must be finite and >= 0, got {}", self.eps3)));
        }
        if !(self.mean_min < self.mean_max) {
            return Err(Error::param("mean_min", "mean bounds must satisfy mean_min < mean_max"));
        }
        if !(self.sd_min > 0.0 && self.sd_min <= self.sd_max) {
            return Err(Error::param("sd_min", "sd bounds must satisfy 0 < sd_min <= sd_max"));
        }
        Ok(())
    }

    pub fn total_epsilon(&self) -> f64 {
        self.eps1 + self.eps2 + self.eps3
    }
}

/// Produces the clamp window used by the Karwa-Vadhan interval.
pub trait RangeFinder: Sync {
    /// Returns the window and the privacy budget it consumed.
    fn find(&self, db: &Database, params: &VadhanParams, mech: &mut dyn Mechanism) -> Result<(DataBounds, f64)>;
}

/// Data-independent window
/// `[mean_min - sd_max * sqrt(2 ln(2n / alpha3)), mean_max + ...]`.
/// Under the normal model all `n` points fall inside it with probability at
/// least `1 - alpha3`. Spends no budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianTailRange;

impl RangeFinder for GaussianTailRange {
    fn find(&self, db: &Database, params: &VadhanParams, _mech: &mut dyn Mechanism) -> Result<(DataBounds, f64)> {
        let n = db.len() as f64;
        let reach = params.sd_max * (2.0 * (2.0 * n / params.alpha3).ln()).sqrt();
        Ok((DataBounds::new(params.mean_min - reach, params.mean_max + reach)?, 0.0))
    }
}

/// A fixed, public window.
#[derive(Debug, Clone, Copy)]
pub struct FixedRange(pub DataBounds);

impl RangeFinder for FixedRange {
    fn find(&self, _db: &Database, _params: &VadhanParams, _mech: &mut dyn Mechanism) -> Result<(DataBounds, f64)> {
        Ok((self.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadhanOutcome {
    pub interval: ConfidenceInterval,
    /// The noisy variance went negative and was floored at zero.
    pub variance_floored: bool,
    pub range: DataBounds,
    pub epsilon_spent: f64,
}

/// Karwa-Vadhan interval with `delta = 0`.
pub fn vadhan_ci(
    db: &Database,
    params: &VadhanParams,
    alpha0: f64,
    range_finder: &dyn RangeFinder,
    mech: &mut dyn Mechanism,
) -> Result<VadhanOutcome> {
    check_alpha(alpha0)?;
    params.validate()?;
    require_len(db, 2)?;
    let (range, eps_range) = range_finder.find(db, params, mech)?;
    let x = db.clamp(range);
    let n = x.len() as f64;
    let width = range.width();

    let mean_scale = width / (params.eps1 * n);
    let var_scale = width * width / (params.eps2 * (n - 1.0));
    let center = sample_mean(&x)? + mech.laplace(width / n, params.eps1)?;
    let inflation = var_scale * (1.0 / (2.0 * params.alpha2)).ln();
    let noisy_var = sample_variance(&x)? + inflation + mech.laplace(width * width / (n - 1.0), params.eps2)?;
    let variance_floored = noisy_var < 0.0;
    let var = noisy_var.max(0.0);

    let moe = (var / n).sqrt() * qt(1.0 - alpha0 / 2.0, x.len() as u64 - 1)? + mean_scale * (1.0 / params.alpha1).ln();
    let mut interval = ConfidenceInterval::centered(center, moe, alpha0, Method::Vadhan);
    interval.spread = Some(var.sqrt());
    Ok(VadhanOutcome {
        interval,
        variance_floored,
        range,
        epsilon_spent: params.eps1 + params.eps2 + eps_range,
    })
}

/// Subsample count and public sd bound for the ORA estimator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OraParams {
    /// Number of subsets `M`; `None` means `floor(n / 2)` (subsets of two rows).
    pub subsets: Option<usize>,
    pub sd_max: f64,
}

impl OraParams {
    /// Subsets of two rows and `sd_max = width / 2`, the largest standard
    /// deviation any data inside the bounds can have.
    pub fn defaults(bounds: DataBounds) -> Self {
        OraParams { subsets: None, sd_max: bounds.width() / 2.0 }
    }

    pub fn subsets_for(&self, n: usize) -> Result<usize> {
        let m = self.subsets.unwrap_or(n / 2);
        if m < 2 {
            return Err(Error::TooFewObservations { required: 4, actual: n });
        }
        if m > n / 2 {
            return Err(Error::param("subsets", format!("M = {m} exceeds n / 2 = {}", n / 2)));
        }
        Ok(m)
    }
}

/// Truncate every value into `[lo, hi]`.
pub fn winsorize(values: &mut [f64], lo: f64, hi: f64) {
    for v in values.iter_mut() {
        *v = v.max(lo).min(hi);
    }
}

/// Split `values` into `m` contiguous subsets of `floor(n / m)` rows; the
/// remainder joins the last subset.
pub fn partition(values: &[f64], m: usize) -> Vec<&[f64]> {
    let size = values.len() / m;
    (0..m)
        .map(|i| {
            let end = if i + 1 == m { values.len() } else { (i + 1) * size };
            &values[i * size..end]
        })
        .collect()
}

/// Intermediate values of one ORA run, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct OraTrace {
    pub estimate: CenterSpread,
    pub standard_errors: Vec<f64>,
    pub winsorized: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

/// Adapted D'Orazio-Honaker-King mean and standard deviation.
///
/// Noise scales: `eps/2` on the mean, `eps/4` on each quartile of the
/// subset standard errors, and `eps/2` on their winsorized mean. The total spend is therefore `1.5 * eps`.
pub fn ora_trace(
    db: &Database,
    epsilon: f64,
    bounds: DataBounds,
    params: &OraParams,
    mech: &mut dyn Mechanism,
) -> Result<OraTrace> {
    if !(params.sd_max.is_finite() && params.sd_max > 0.0) {
        return Err(Error::param("sd_max", format!("must be finite and > 0, got {}", params.sd_max)));
    }
    let n = db.len();
    let m = params.subsets_for(n)?;
    let nf = n as f64;

    // Scale 2 (xmax - xmin) / (eps n).
    let center = sample_mean(db)? + mech.laplace(bounds.width() / nf, epsilon / 2.0)?;

    let se_max = params.sd_max / nf.sqrt();
    let se_upper = se_max + 2.0 * params.sd_max * (m as f64).sqrt() / (2.0 * nf * nf).sqrt();
    let standard_errors: Vec<f64> =
        partition(db, m).into_iter().map(|s| sample_sd(s).map(|sd| sd / nf.sqrt())).collect::<Result<_>>()?;

    let se_bounds = DataBounds::new(0.0, se_upper)?;
    let clamped = SortedValues::new(standard_errors.iter().map(|&s| se_bounds.clamp(s)).collect());
    let a = mech.quantile(&clamped, QuantileRank::for_fraction(0.25, m)?, epsilon / 4.0, se_bounds)?;
    let b = mech.quantile(&clamped, QuantileRank::for_fraction(0.75, m)?, epsilon / 4.0, se_bounds)?;
    let mid = 0.5 * (a + b);
    let iqr = (a - b).abs();
    let (lower, upper) = (mid - 2.0 * iqr, mid + 2.0 * iqr);

    let mut winsorized = standard_errors.clone();
    winsorize(&mut winsorized, lower, upper);
    let w = winsorized.iter().sum::<f64>() / m as f64;
    // Scale 2 |u - l| / (eps M).
    let noisy_se = w + mech.laplace((upper - lower).abs() / m as f64, epsilon / 2.0)?;

    Ok(OraTrace {
        estimate: CenterSpread::new(center, noisy_se * nf.sqrt()),
        standard_errors,
        winsorized,
        lower,
        upper,
    })
}

pub fn ora_estimate(
    db: &Database,
    epsilon: f64,
    bounds: DataBounds,
    params: &OraParams,
    mech: &mut dyn Mechanism,
) -> Result<CenterSpread> {
    ora_trace(db, epsilon, bounds, params, mech).map(|t| t.estimate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraEstimator {
    pub epsilon: f64,
    pub params: OraParams,
}

impl Estimator for OraEstimator {
    fn method(&self) -> Method {
        Method::Ora
    }

    fn estimate(&self, db: &Database, bounds: DataBounds, mech: &mut dyn Mechanism) -> Result<CenterSpread> {
        ora_estimate(db, self.epsilon, bounds, &self.params, mech)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{BudgetLedger, ChargeKind, Noiseless};
    use crate::rng::RandomSource;
    use crate::stats::public_ci;

    fn db(v: &[f64]) -> Database {
        Database::new(v.to_vec()).unwrap()
    }

    fn b6() -> DataBounds {
        DataBounds::new(-6.0, 6.0).unwrap()
    }

    fn normal_db(seed: u64, n: usize) -> Database {
        let mut r = RandomSource::new(seed);
        db(&(0..n).map(|_| r.standard_normal()).collect::<Vec<_>>())
    }

    #[test]
    fn vadhan_collapses_without_noise_or_inflation() {
        let mut p = VadhanParams::split_evenly(1.0, 0.05, b6());
        p.alpha2 = 0.5;
        p.alpha1 = 1.0 - 1e-12;
        let out = vadhan_ci(&db(&[1.5; 10]), &p, 0.05, &FixedRange(b6()), &mut Noiseless).unwrap();
        assert!((out.interval.lower - 1.5).abs() < 1e-9);
        assert!((out.interval.upper - 1.5).abs() < 1e-9);
    }

    #[test]
    fn vadhan_inflation_is_nonnegative_for_small_alpha2() {
        for a2 in [0.5, 0.25, 0.01, 1e-6] {
            assert!((1.0 / (2.0f64 * a2)).ln() >= 0.0);
        }
    }

    #[test]
    fn vadhan_never_narrower_than_public_without_noise() {
        let x = normal_db(4, 200).clamp(b6());
        let public = public_ci(&x, 0.05).unwrap();
        let p = VadhanParams { alpha2: 0.3, ..VadhanParams::split_evenly(1.0, 0.05, b6()) };
        let out = vadhan_ci(&x, &p, 0.05, &FixedRange(b6()), &mut Noiseless).unwrap();
        assert!(out.interval.moe >= public.moe);
        assert!((out.interval.center - public.center).abs() < 1e-12);
    }

    #[test]
    fn vadhan_spends_eps1_plus_eps2() {
        let x = normal_db(5, 100);
        let p = VadhanParams::split_evenly(0.1, 0.05, b6());
        let mut ledger = BudgetLedger::new(RandomSource::new(1));
        let out = vadhan_ci(&x, &p, 0.0125, &GaussianTailRange, &mut ledger).unwrap();
        assert!((ledger.total_epsilon() - p.total_epsilon()).abs() < 1e-15);
        assert!((out.epsilon_spent - 0.1).abs() < 1e-15);
        // Default range finder: mean bounds widened by sd_max * sqrt(2 ln(2n / alpha3)).
        let reach = 6.0 * (2.0 * (200.0 / 0.0125f64).ln()).sqrt();
        assert!((out.range.xmax() - (6.0 + reach)).abs() < 1e-9);
    }

    #[test]
    fn vadhan_floors_negative_variance() {
        let p = VadhanParams { alpha2: 0.5, ..VadhanParams::split_evenly(1.0, 0.05, b6()) };
        let mut m = crate::mechanisms::Scripted::new([0.0, -100.0], []);
        let out = vadhan_ci(&db(&[0.0, 0.1, 0.2]), &p, 0.05, &FixedRange(b6()), &mut m).unwrap();
        assert!(out.variance_floored);
        assert_eq!(out.interval.spread, Some(0.0));
    }

    #[test]
    fn vadhan_rejects_bad_params() {
        let mut p = VadhanParams::split_evenly(1.0, 0.05, b6());
        p.eps1 = 0.0;
        assert!(vadhan_ci(&normal_db(1, 10), &p, 0.05, &GaussianTailRange, &mut Noiseless).is_err());
        let p = VadhanParams::split_evenly(1.0, 0.05, b6());
        assert!(vadhan_ci(&db(&[1.0]), &p, 0.05, &GaussianTailRange, &mut Noiseless).is_err());
    }

    #[test]
    fn partition_sizes() {
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        let parts = partition(&v, 5);
        assert_eq!(parts.len(), 5);
        assert!(parts.iter().all(|p| p.len() == 2));
        let v: Vec<f64> = (0..11).map(f64::from).collect();
        let parts = partition(&v, 5);
        assert_eq!(parts.last().unwrap().len(), 3);
        assert_eq!(parts.iter().map(|p| p.len()).sum::<usize>(), 11);
    }

    #[test]
    fn ora_constant_data() {
        let trace = ora_trace(&db(&[1.0; 10]), 1.0, b6(), &OraParams::defaults(b6()), &mut Noiseless).unwrap();
        assert_eq!(trace.standard_errors.len(), 5);
        assert_eq!(trace.estimate.center, 1.0);
        assert_eq!(trace.estimate.spread, 0.0);
    }

    #[test]
    fn ora_budget_and_scales() {
        let x = normal_db(6, 2000).clamp(b6());
        let eps = 0.1;
        let mut ledger = BudgetLedger::new(RandomSource::new(3));
        let trace = ora_trace(&x, eps, b6(), &OraParams::defaults(b6()), &mut ledger).unwrap();
        let c = ledger.charges();
        assert_eq!(c.len(), 4);
        assert!((ledger.total_epsilon() - 1.5 * eps).abs() < 1e-15);
        assert_eq!(c[0].kind, ChargeKind::Laplace);
        // Mean scale 2 (xmax - xmin) / (eps n).
        assert!((c[0].sensitivity / c[0].epsilon - 2.0 * 12.0 / (eps * 2000.0)).abs() < 1e-12);
        assert_eq!((c[1].kind, c[2].kind), (ChargeKind::Quantile, ChargeKind::Quantile));
        assert!((c[1].epsilon - eps / 4.0).abs() < 1e-15);
        // Final scale 2 |u - l| / (eps M).
        let m = 1000.0;
        let expected = 2.0 * (trace.upper - trace.lower).abs() / (eps * m);
        assert!((c[3].sensitivity / c[3].epsilon - expected).abs() < 1e-12);
        assert!(trace.winsorized.iter().all(|&s| s >= trace.lower && s <= trace.upper));
    }

    #[test]
    fn ora_rejects_bad_params() {
        let x = normal_db(7, 10).clamp(b6());
        let too_many = OraParams { subsets: Some(6), sd_max: 1.0 };
        assert!(ora_estimate(&x, 1.0, b6(), &too_many, &mut Noiseless).is_err());
        let bad_sd = OraParams { subsets: None, sd_max: 0.0 };
        assert!(ora_estimate(&x, 1.0, b6(), &bad_sd, &mut Noiseless).is_err());
        assert!(ora_estimate(&db(&[1.0, 2.0, 3.0]), 1.0, b6(), &OraParams::defaults(b6()), &mut Noiseless).is_err());
    }
}
