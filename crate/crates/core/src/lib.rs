//! Differentially private confidence intervals for the mean of bounded,
//! approximately normal data.
//!
//! A private estimator turns a clamped database into a center/spread pair
//! while spending a fixed budget `epsilon`. [`sim_ci`] then builds an
//! interval by rerunning the same estimator on synthetic normal data, which
//! costs no further privacy.
//!
//! ```
//! use dpci::{sim_ci, DataBounds, Database, Method, PrivateEstimator, SimConfig};
//!
//! let bounds = DataBounds::new(-6.0, 6.0).unwrap();
//! let db = Database::new((0..500).map(|i| ((i % 17) as f64 - 8.0) / 4.0).collect()).unwrap();
//! let est = PrivateEstimator::with_defaults(Method::SymQ, 1.0).unwrap();
//! let ci = sim_ci(&est, &db.clamp(bounds), bounds, &SimConfig::new(0.05, 7).with_nsim(200)).unwrap();
//! assert!(ci.lower < ci.upper);
//! ```

pub mod baselines;
pub mod data;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod mechanisms;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use data::{clamp, CenterSpread, ConfidenceInterval, DataBounds, Database, Method, PrivacyBudget};
pub use error::{Error, Result};
pub use estimators::{Estimator, EstimatorParams, PrivateEstimator};
pub use mechanisms::{BudgetLedger, Mechanism, Noiseless, QuantileRank, Scripted};
pub use rng::RandomSource;
pub use simulate::{sim_ci, sim_ci_with, SimConfig};
pub use stats::public_ci;
