//! Data model shared by every estimator: the private database, the
//! analyst-declared clamp window, the privacy budget, and the two result
//! types (a private center/spread pair and a confidence interval).

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An in-memory collection of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    values: Vec<f64>,
}

impl Database {
    /// Rejects empty input and any NaN or infinite value.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Database { values })
    }

    /// Caller guarantees the values are finite and non-empty.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        Database { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    /// Clamp into `bounds`, preserving order and count.
    pub fn clamp(&self, bounds: DataBounds) -> Database {
        Database { values: self.values.iter().map(|&v| bounds.clamp(v)).collect() }
    }

    /// Number of values strictly outside the closed window.
    pub fn count_outside(&self, bounds: DataBounds) -> usize {
        self.values.iter().filter(|&&v| v < bounds.xmin() || v > bounds.xmax()).count()
    }
}

impl Deref for Database {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for Database {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Database::new(values)
    }
}

/// The clamp window `[xmin, xmax]` supplied by the analyst.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataBounds {
    xmin: f64,
    xmax: f64,
}

impl DataBounds {
    pub fn new(xmin: f64, xmax: f64) -> Result<Self> {
        if !(xmin.is_finite() && xmax.is_finite() && xmin < xmax) {
            return Err(Error::InvalidBounds { xmin, xmax });
        }
        Ok(DataBounds { xmin, xmax })
    }

    /// Symmetric window `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        DataBounds::new(-half_width, half_width)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.xmin, self.xmax)
    }

    pub fn shifted(&self, by: f64) -> Result<Self> {
        DataBounds::new(self.xmin + by, self.xmax + by)
    }
}

/// Clamp every value into `bounds`.
pub fn clamp(db: &Database, bounds: DataBounds) -> Database {
    db.clamp(bounds)
}

/// Total privacy budget and the fraction `rho` routed to the first sub-query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    rho: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, rho: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::param("rho", format!("must lie in [0, 1], got {rho}")));
        }
        Ok(PrivacyBudget { epsilon, rho })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(rho * eps, (1 - rho) * eps)`, rejecting a split that starves either side.
    pub fn split(&self) -> Result<(f64, f64)> {
        if self.rho <= 0.0 || self.rho >= 1.0 {
            return Err(Error::param(
                "rho",
                format!("must lie strictly inside (0, 1) for a two-query split, got {}", self.rho),
            ));
        }
        Ok((self.rho * self.epsilon, (1.0 - self.rho) * self.epsilon))
    }
}

/// Private estimate of the data center and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterSpread {
    pub center: f64,
    pub spread: f64,
    /// Set when the spread was floored at zero or forced to zero because the
    /// database was too small to estimate one.
    pub degenerate: bool,
}

impl CenterSpread {
    pub fn new(center: f64, raw_spread: f64) -> Self {
        let degenerate = !(raw_spread > 0.0);
        CenterSpread { center, spread: raw_spread.max(0.0), degenerate }
    }
}

/// Every interval procedure the toolkit can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Public,
    NoisyVar,
    NoisyMad,
    CenQ,
    SymQ,
    Mod,
    Vadhan,
    Ora,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Public,
        Method::NoisyVar,
        Method::NoisyMad,
        Method::CenQ,
        Method::SymQ,
        Method::Mod,
        Method::Vadhan,
        Method::Ora,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Public => "public",
            Method::NoisyVar => "noisyvar",
            Method::NoisyMad => "noisymad",
            Method::CenQ => "cenq",
            Method::SymQ => "symq",
            Method::Mod => "mod",
            Method::Vadhan => "vadhan",
            Method::Ora => "ora",
        }
    }

    /// Stable small integer used in seed derivation and the C ABI.
    pub fn code(self) -> u32 {
        match self {
            Method::Public => 0,
            Method::NoisyVar => 1,
            Method::NoisyMad => 2,
            Method::CenQ => 3,
            Method::SymQ => 4,
            Method::Mod => 5,
            Method::Vadhan => 6,
            Method::Ora => 7,
        }
    }

    pub fn from_code(code: u32) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.code() == code)
    }

    /// Methods whose interval comes from simulating the estimator.
    pub fn is_simulated(self) -> bool {
        !matches!(self, Method::Public | Method::Vadhan)
    }

    /// Minimum database size the method accepts.
    pub fn min_n(self) -> usize {
        match self {
            Method::NoisyMad | Method::Mod => 1,
            Method::Ora => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::param("method", format!("unknown method `{s}`")))
    }
}

/// A two-sided interval for the mean, with the configuration that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub moe: f64,
    /// Point estimate the interval is built around.
    pub center: f64,
    /// Spread estimate behind the interval, when the method produces one.
    pub spread: Option<f64>,
    pub alpha: f64,
    pub method: Method,
    pub seed: Option<u64>,
    /// Number of simulated reruns; 0 for closed-form intervals.
    pub nsim: usize,
}

impl ConfidenceInterval {
    pub fn centered(center: f64, moe: f64, alpha: f64, method: Method) -> Self {
        ConfidenceInterval {
            lower: center - moe,
            upper: center + moe,
            moe,
            center,
            spread: None,
            alpha,
            method,
            seed: None,
            nsim: 0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(v: &[f64]) -> Database {
        Database::new(v.to_vec()).unwrap()
    }

    #[test]
    fn clamp_examples() {
        let b = DataBounds::new(-6.0, 6.0).unwrap();
        assert_eq!(clamp(&db(&[-9.0, 0.0, 9.0]), b).as_slice(), &[-6.0, 0.0, 6.0]);
        let b = DataBounds::new(0.0, 4.0).unwrap();
        assert_eq!(clamp(&db(&[1.0, 2.0, 3.0]), b).as_slice(), &[1.0, 2.0, 3.0]);
        let b = DataBounds::new(-6.0, 6.0).unwrap();
        assert_eq!(clamp(&db(&[6.0]), b).as_slice(), &[6.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(Database::new(vec![]), Err(Error::Empty));
        assert!(matches!(Database::new(vec![1.0, f64::NAN]), Err(Error::NonFinite { index: 1, .. })));
        assert!(DataBounds::new(1.0, 1.0).is_err());
        assert!(DataBounds::new(2.0, 1.0).is_err());
        assert!(PrivacyBudget::new(0.0, 0.5).is_err());
        assert!(PrivacyBudget::new(1.0, 1.5).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).unwrap().split().is_err());
        assert!(PrivacyBudget::new(1.0, 0.0).unwrap().split().is_err());
    }

    #[test]
    fn count_outside_is_strict() {
        let b = DataBounds::new(-1.0, 1.0).unwrap();
        assert_eq!(db(&[-1.0, 1.0, 1.5, -3.0, 0.0]).count_outside(b), 2);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(Method::from_code(m.code()), Some(m));
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn center_spread_floors() {
        let cs = CenterSpread::new(1.0, -0.5);
        assert_eq!(cs.spread, 0.0);
        assert!(cs.degenerate);
        assert!(!CenterSpread::new(1.0, 0.5).degenerate);
    }
}
