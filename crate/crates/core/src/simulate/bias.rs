use rayon::prelude::*;

use crate::data::{DataBounds, Database};
use crate::dist::qz;
use crate::error::{Error, Result};
use crate::mechanisms::{expq_expected_value, QuantileRank};
use crate::rng::{derive_seed, RandomSource};

const BIAS_STREAM: u64 = 0x6269_6173; // "bias"

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasEstimate {
    pub bias: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Bias of the private `b` quantile for clamped `N(mu, sigma^2)` databases of
/// size `n`.
///
/// The inner expectation over the mechanism is exact; only the databases are
/// sampled. Database `t` is seeded from `(seed, n, mu, sigma, t)` alone, so
/// curves over `b` or `epsilon` share their databases.
#[allow(clippy::too_many_arguments)]
pub fn bias_curve(
    n: usize,
    epsilon: f64,
    b: f64,
    bounds: DataBounds,
    trials: usize,
    mu: f64,
    sigma: f64,
    seed: u64,
) -> Result<BiasEstimate> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::param("b", format!("must lie in (0, 1), got {b}")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    if n == 0 {
        return Err(Error::Empty);
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon}")));
    }
    if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", "mu must be finite and sigma finite and > 0"));
    }
    let rank = QuantileRank::for_fraction(b, n)?;
    let truth = sigma * qz(b)? + mu;

    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, &[BIAS_STREAM, n as u64, mu.to_bits(), sigma.to_bits(), t as u64]);
            let mut rng = RandomSource::new(s);
            let db = Database::from_finite((0..n).map(|_| bounds.clamp(rng.normal(mu, sigma))).collect());
            expq_expected_value(&db, rank, epsilon, bounds).map(|e| e - truth)
        })
        .collect::<Result<_>>()?;

    let k = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / k;
    let stderr = if errors.len() < 2 {
        0.0
    } else {
        (errors.iter().map(|e| (e - bias) * (e - bias)).sum::<f64>() / (k - 1.0) / k).sqrt()
    };
    Ok(BiasEstimate { bias, stderr, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b6() -> DataBounds {
        DataBounds::new(-6.0, 6.0).unwrap()
    }

    #[test]
    fn median_is_unbiased() {
        let est = bias_curve(21, 0.5, 0.5, b6(), 2000, 0.0, 1.0, 1).unwrap();
        assert!(est.bias.abs() <= 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn upper_quantile_is_biased_at_small_epsilon() {
        let hi = bias_curve(50, 0.05, 0.9, b6(), 400, 0.0, 1.0, 2).unwrap();
        let mid = bias_curve(50, 0.05, 0.5, b6(), 400, 0.0, 1.0, 2).unwrap();
        assert!(hi.bias.abs() > mid.bias.abs(), "{hi:?} {mid:?}");
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let est = bias_curve(11, 1.0, 0.3, b6(), 1, 0.0, 1.0, 3).unwrap();
        assert_eq!(est.stderr, 0.0);
        assert!(est.bias.is_finite());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bias_curve(11, 1.0, 1.0, b6(), 10, 0.0, 1.0, 0).is_err());
        assert!(bias_curve(11, 1.0, 0.5, b6(), 0, 0.0, 1.0, 0).is_err());
        assert!(bias_curve(11, 0.0, 0.5, b6(), 10, 0.0, 1.0, 0).is_err());
    }
}
