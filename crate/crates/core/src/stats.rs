//! Classical sample statistics, their sensitivities over neighboring
//! databases, and the non-private t-interval.

use crate::data::{check_alpha, ConfidenceInterval, DataBounds, Database, Method};
use crate::dist::qt;
use crate::error::{require_len, Error, Result};

pub fn sample_mean(values: &[f64]) -> Result<f64> {
    require_len(values, 1)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Unbiased (`n - 1`) sample variance.
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    require_len(values, 2)?;
    let mean = sample_mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (values.len() - 1) as f64).max(0.0))
}

pub fn sample_sd(values: &[f64]) -> Result<f64> {
    sample_variance(values).map(f64::sqrt)
}

/// `(1/n) * sum |x_i - mean|`.
pub fn mean_abs_deviation(values: &[f64]) -> Result<f64> {
    Ok(abs_deviation_sum(values)? / values.len() as f64)
}

/// `sum |x_i - mean|`, the statistic whose sensitivity is `2 (xmax - xmin)`.
pub fn abs_deviation_sum(values: &[f64]) -> Result<f64> {
    let mean = sample_mean(values)?;
    Ok(values.iter().map(|v| (v - mean).abs()).sum())
}

pub fn mean_sensitivity(bounds: DataBounds, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::TooFewObservations { required: 1, actual: 0 });
    }
    Ok(bounds.width() / n as f64)
}

pub fn variance_sensitivity(bounds: DataBounds, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewObservations { required: 2, actual: n });
    }
    Ok(bounds.width() * bounds.width() / n as f64)
}

pub fn mad_sum_sensitivity(bounds: DataBounds) -> f64 {
    2.0 * bounds.width()
}

/// Linear interpolation between order statistics at position `p (n - 1)`
/// (zero-based). Sorts a copy of the input.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    require_len(values, 1)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

/// As [`empirical_quantile`] for input that is already sorted ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    require_len(sorted, 1)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
    }
    let n = sorted.len();
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    let (a, b) = (sorted[lo], sorted[hi]);
    if frac == 0.0 || a == b {
        return Ok(a);
    }
    Ok(a + frac * (b - a))
}

/// The classical `mean +/- (s / sqrt(n)) * qt(1 - alpha/2, n - 1)` interval.
pub fn public_ci(db: &Database, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    require_len(db, 2)?;
    let n = db.len();
    let mean = sample_mean(db)?;
    let sd = sample_sd(db)?;
    let moe = sd / (n as f64).sqrt() * qt(1.0 - alpha / 2.0, (n - 1) as u64)?;
    let mut ci = ConfidenceInterval::centered(mean, moe, alpha, Method::Public);
    ci.spread = Some(sd);
    Ok(ci)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::normal_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn db(v: &[f64]) -> Database {
        Database::new(v.to_vec()).unwrap()
    }

    #[test]
    fn moments() {
        assert_eq!(sample_mean(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(sample_mean(&[5.0]).unwrap(), 5.0);
        assert_eq!(sample_mean(&[-1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(sample_mean(&[]), Err(Error::Empty));

        assert_eq!(sample_variance(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(sample_variance(&[4.2, 4.2, 4.2]).unwrap(), 0.0);
        assert_eq!(sample_variance(&[0.0, 2.0]).unwrap(), 2.0);
        assert!(matches!(sample_variance(&[1.0]), Err(Error::TooFewObservations { .. })));

        assert!((mean_abs_deviation(&[1.0, 2.0, 3.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(mean_abs_deviation(&[3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mean_abs_deviation(&[0.0, 4.0]).unwrap(), 2.0);
        assert_eq!(mean_abs_deviation(&[]), Err(Error::Empty));
    }

    #[test]
    fn sensitivities() {
        let b = DataBounds::new(-6.0, 6.0).unwrap();
        let unit = DataBounds::new(0.0, 1.0).unwrap();
        assert_eq!(mean_sensitivity(b, 12).unwrap(), 1.0);
        assert_eq!(mean_sensitivity(unit, 100).unwrap(), 0.01);
        let wide = DataBounds::new(-32.0, 32.0).unwrap();
        assert_eq!(mean_sensitivity(wide, 2782).unwrap(), 64.0 / 2782.0);
        assert!(mean_sensitivity(b, 0).is_err());

        assert_eq!(variance_sensitivity(unit, 4).unwrap(), 0.25);
        assert_eq!(variance_sensitivity(b, 144).unwrap(), 1.0);
        assert!(variance_sensitivity(b, 1).is_err());

        assert_eq!(mad_sum_sensitivity(unit), 2.0);
        assert_eq!(mad_sum_sensitivity(b), 24.0);
    }

    /// All length-`n` databases over `grid` paired with every single-row change.
    fn for_each_neighbor_pair(grid: &[f64], n: usize, mut f: impl FnMut(&[f64], &[f64])) {
        let total = grid.len().pow(n as u32);
        for code in 0..total {
            let mut x = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                x.push(grid[c % grid.len()]);
                c /= grid.len();
            }
            for row in 0..n {
                for &g in grid {
                    let mut y = x.clone();
                    y[row] = g;
                    f(&x, &y);
                }
            }
        }
    }

    #[test]
    fn variance_sensitivity_exhaustive_three_rows() {
        let grid = [0.0, 0.5, 1.0];
        let bound = variance_sensitivity(DataBounds::new(0.0, 1.0).unwrap(), 3).unwrap();
        assert!((bound - 1.0 / 3.0).abs() < 1e-15);
        let mut worst: f64 = 0.0;
        for_each_neighbor_pair(&grid, 3, |x, y| {
            worst = worst.max((sample_variance(x).unwrap() - sample_variance(y).unwrap()).abs());
        });
        assert!(worst <= bound + 1e-12, "worst {worst} > {bound}");
    }

    #[test]
    fn mad_sum_sensitivity_exhaustive_quarter_grid() {
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mut worst: f64 = 0.0;
        for_each_neighbor_pair(&grid, 3, |x, y| {
            worst = worst.max((abs_deviation_sum(x).unwrap() - abs_deviation_sum(y).unwrap()).abs());
        });
        assert!(worst <= 2.0 + 1e-12);
    }

    #[test]
    fn quantile_convention() {
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[7.5], 0.3).unwrap(), 7.5);
        // Position 0.25 * (2 - 1) = 0.25 of the way from 0 to 10.
        assert_eq!(empirical_quantile(&[0.0, 10.0], 0.25).unwrap(), 2.5);
        assert_eq!(empirical_quantile(&[3.0, -1.0, 2.0], 0.0).unwrap(), -1.0);
        assert_eq!(empirical_quantile(&[3.0, -1.0, 2.0], 1.0).unwrap(), 3.0);
        assert_eq!(empirical_quantile(&[], 0.5), Err(Error::Empty));
        assert!(empirical_quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn public_ci_examples() {
        let ci = public_ci(&db(&[2.5, 2.5, 2.5]), 0.1).unwrap();
        assert_eq!((ci.lower, ci.upper), (2.5, 2.5));

        let ci = public_ci(&db(&[0.0, 2.0]), 0.05).unwrap();
        assert!((ci.lower + 11.7062047362).abs() < 1e-6);
        assert!((ci.upper - 13.7062047362).abs() < 1e-6);
        assert!(((ci.upper - ci.lower) / 2.0 - ci.moe).abs() < 1e-12);

        assert!(public_ci(&db(&[1.0]), 0.05).is_err());
        assert!(public_ci(&db(&[1.0, 2.0]), 0.0).is_err());
    }

    fn normal_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    #[test]
    fn public_ci_coverage_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 20_000;
        let hits = (0..trials)
            .filter(|_| public_ci(&db(&normal_sample(&mut rng, 100)), 0.05).unwrap().contains(0.0))
            .count();
        let coverage = hits as f64 / trials as f64;
        assert!((coverage - 0.95).abs() <= 0.005, "coverage {coverage}");
    }

    #[test]
    fn mad_to_sd_ratio_for_normal_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = normal_sample(&mut rng, 100_000);
        let ratio = mean_abs_deviation(&x).unwrap() / sample_sd(&x).unwrap();
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!((ratio / target - 1.0).abs() < 0.02, "ratio {ratio}");
        // sanity: the normal CDF helper agrees with the ratio's origin
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn public_width_scales_inverse_sqrt_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mean_width = |rng: &mut ChaCha8Rng, n: usize| {
            (0..200).map(|_| public_ci(&db(&normal_sample(rng, n)), 0.05).unwrap().width()).sum::<f64>()
                / 200.0
        };
        let ratio = mean_width(&mut rng, 100) / mean_width(&mut rng, 400);
        assert!((ratio / 2.0 - 1.0).abs() < 0.10, "ratio {ratio}");
    }
}
