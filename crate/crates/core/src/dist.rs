//! Normal and Student-t distribution functions.
//!
//! `qz` starts from Acklam's rational approximation (relative error about
//! 1.15e-9) and applies one Halley step against the erfc-based CDF, which
//! brings it to full double precision over the open unit interval. `qt`
//! bisects the t CDF, written through the regularized incomplete beta
//! function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
    }
    Ok(())
}

const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549671664286209e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn acklam(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard normal quantile function.
pub fn qz(p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail so the residual is computed without cancellation.
    let (tail, sign) = if p < 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let x = acklam(tail);
    let e = 0.5 * libm::erfc(-x * FRAC_1_SQRT_2) - tail;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    let refined = x - u / (1.0 + 0.5 * x * u);
    Ok(sign * refined)
}

/// Natural log of the beta function.
fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 100_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Student-t CDF with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let x = df / (df + t * t);
    let tail = 0.5 * inc_beta(0.5 * df, 0.5, x);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Upper-tail probability `P(T > t)` for `t > 0`, without the `1 - cdf` cancellation.
fn t_upper_tail(t: f64, df: f64) -> f64 {
    0.5 * inc_beta(0.5 * df, 0.5, df / (df + t * t))
}

/// Student-t quantile function.
pub fn qt(p: f64, df: u64) -> Result<f64> {
    check_p(p)?;
    if df == 0 {
        return Err(Error::param("df", "degrees of freedom must be >= 1"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let df = df as f64;
    let (tail, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };

    // Bracket the root of P(T > t) = tail on t > 0.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_upper_tail(hi, df) > tail {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::param("p", "quantile is not representable"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t_upper_tail(mid, df) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: bisection on the erfc-based CDF.
    fn qz_bisect(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn qz_examples() {
        assert_eq!(qz(0.5).unwrap(), 0.0);
        assert!((qz(0.75).unwrap() - 0.6744897502).abs() < 1e-9);
        assert!((qz(0.975).unwrap() - 1.9599639845).abs() < 1e-9);
        assert!((qz(0.75).unwrap() - qz_bisect(0.75)).abs() < 1e-12);
        assert!((qz(0.975).unwrap() - qz_bisect(0.975)).abs() < 1e-12);
    }

    #[test]
    fn qz_matches_bisection_oracle_across_range() {
        let mut p = 1e-6;
        while p < 1.0 - 1e-6 {
            let err = (qz(p).unwrap() - qz_bisect(p)).abs();
            assert!(err <= 1e-9, "p={p} err={err}");
            p += 0.0123;
        }
        for p in [1e-6, 1e-5, 1e-4, 0.02425, 0.97575, 1.0 - 1e-6] {
            assert!((qz(p).unwrap() - qz_bisect(p)).abs() <= 1e-9, "p={p}");
        }
    }

    #[test]
    fn qz_rejects_out_of_range() {
        for p in [0.0, 1.0, -0.1, 1.1, f64::NAN] {
            assert!(qz(p).is_err());
        }
    }

    #[test]
    fn qt_closed_forms() {
        // df = 1 is Cauchy, df = 2 has an algebraic quantile.
        for p in [0.6, 0.9, 0.975, 0.995, 0.01] {
            let cauchy = (PI * (p - 0.5)).tan();
            assert!((qt(p, 1).unwrap() - cauchy).abs() < 1e-6 * cauchy.abs().max(1.0), "p={p}");
            let two = (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
            assert!((qt(p, 2).unwrap() - two).abs() < 1e-9, "p={p}");
        }
        assert!((qt(0.975, 1).unwrap() - 12.7062047362).abs() < 1e-6);
    }

    #[test]
    fn qt_symmetry_and_limit() {
        assert_eq!(qt(0.5, 7).unwrap(), 0.0);
        for df in [1, 3, 10, 99] {
            assert!((qt(0.2, df).unwrap() + qt(0.8, df).unwrap()).abs() < 1e-10);
        }
        assert!((qt(0.975, 1_000_000).unwrap() - 1.959964).abs() < 1e-3);
        assert!(qt(0.5, 0).is_err());
        assert!(qt(1.0, 3).is_err());
    }

    #[test]
    fn t_cdf_inverts_qt() {
        for df in [2u64, 5, 30, 1000] {
            for p in [0.01, 0.2, 0.7, 0.99] {
                let t = qt(p, df).unwrap();
                assert!((t_cdf(t, df as f64) - p).abs() < 1e-10);
            }
        }
    }
}
