use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Inverse CDF of Laplace(0, scale) at `u` in (0, 1):
/// `-scale * sgn(u - 1/2) * ln(1 - 2 |u - 1/2|)`.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let c = u - 0.5;
    if c == 0.0 {
        return 0.0;
    }
    -scale * c.signum() * (-2.0 * c.abs()).ln_1p()
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::param("scale", format!("must be finite and >= 0, got {scale}")));
    }
    Ok(())
}

/// One draw from Laplace(0, scale) using a single uniform.
pub fn laplace_draw(scale: f64, rng: &mut RandomSource) -> Result<f64> {
    check_scale(scale)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(laplace_from_uniform(rng.uniform(), scale))
}

/// Laplace CDF, used by tests and tail computations.
pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}
