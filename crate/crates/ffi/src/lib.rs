//! C ABI for `dpci`.
//!
//! Every fallible function returns a [`DpciStatus`] and writes its result
//! through an out-pointer. On failure a human-readable message is kept per
//! thread and can be read with [`dpci_last_error`]. Panics never cross the
//! boundary; they surface as [`DpciStatus::Panic`].
//!
//! Random state and configured estimators are opaque handles created with a
//! `_new` function and released with the matching `_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dpci::dist::{qt, qz};
use dpci::mechanisms::{expq, expq_exact_density, expq_expected_value, QuantileRank};
use dpci::simulate::estimator_for;
use dpci::{public_ci, sim_ci, DataBounds, Database, Error, Estimator, EstimatorParams, Method, RandomSource, SimConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpciStatus {
    Ok = 0,
    NullPointer = 1,
    Empty = 2,
    TooFewObservations = 3,
    NonFinite = 4,
    InvalidBounds = 5,
    InvalidParameter = 6,
    RankOutOfRange = 7,
    OutsideBounds = 8,
    NotApplicable = 9,
    UnknownMethod = 10,
    Panic = 11,
}

/// Method identifiers, matching `Method::code`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpciMethod {
    Public = 0,
    NoisyVar = 1,
    NoisyMad = 2,
    CenQ = 3,
    SymQ = 4,
    Mod = 5,
    Vadhan = 6,
    Ora = 7,
}

/// Budget split and spread quantile.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpciParams {
    pub rho: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpciEstimate {
    pub center: f64,
    pub spread: f64,
    /// Non-zero when the spread was floored or forced to zero.
    pub degenerate: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpciInterval {
    pub lower: f64,
    pub upper: f64,
    pub moe: f64,
    pub center: f64,
    /// NaN when the method reports no spread.
    pub spread: f64,
    pub alpha: f64,
    pub nsim: usize,
}

/// Seeded random state.
pub struct DpciRng(RandomSource);

/// A private estimator bound to a method, budget, tuning and clamp window.
pub struct DpciEstimator {
    inner: Box<dyn Estimator>,
    bounds: DataBounds,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DpciStatus {
    match e {
        Error::Empty => DpciStatus::Empty,
        Error::TooFewObservations { .. } => DpciStatus::TooFewObservations,
        Error::NonFinite { .. } => DpciStatus::NonFinite,
        Error::InvalidBounds { .. } => DpciStatus::InvalidBounds,
        Error::InvalidParameter { .. } => DpciStatus::InvalidParameter,
        Error::RankOutOfRange { .. } => DpciStatus::RankOutOfRange,
        Error::OutsideBounds { .. } => DpciStatus::OutsideBounds,
        Error::NotApplicable { .. } => DpciStatus::NotApplicable,
    }
}

enum Failure {
    Null(&'static str),
    Method(u32),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DpciStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DpciStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer passed for `{what}`"));
            DpciStatus::NullPointer
        }
        Ok(Err(Failure::Method(code))) => {
            set_last_error(&format!("unknown method code {code}"));
            DpciStatus::UnknownMethod
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            DpciStatus::Panic
        }
    }
}

fn method_of(code: u32) -> Result<Method, Failure> {
    Method::from_code(code).ok_or(Failure::Method(code))
}

unsafe fn values<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null("values"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn database(ptr: *const f64, len: usize) -> Result<Database, Failure> {
    Ok(Database::new(values(ptr, len)?.to_vec())?)
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure::Null(what))
}

fn interval(ci: &dpci::ConfidenceInterval) -> DpciInterval {
    DpciInterval {
        lower: ci.lower,
        upper: ci.upper,
        moe: ci.moe,
        center: ci.center,
        spread: ci.spread.unwrap_or(f64::NAN),
        alpha: ci.alpha,
        nsim: ci.nsim,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dpci_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message for the most recent failure on this thread; empty after a
/// success. Valid until the next `dpci_` call on the same thread.
#[no_mangle]
pub extern "C" fn dpci_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn dpci_rng_new(seed: u64) -> *mut DpciRng {
    Box::into_raw(Box::new(DpciRng(RandomSource::new(seed))))
}

/// Releases a handle from [`dpci_rng_new`]. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dpci_rng_free(rng: *mut DpciRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Standard normal quantile.
#[no_mangle]
pub unsafe extern "C" fn dpci_qz(p: f64, result: *mut f64) -> DpciStatus {
    guard(|| {
        *out(result, "result")? = qz(p)?;
        Ok(())
    })
}

/// Student t quantile with `df` degrees of freedom.
#[no_mangle]
pub unsafe extern "C" fn dpci_qt(p: f64, df: u64, result: *mut f64) -> DpciStatus {
    guard(|| {
        *out(result, "result")? = qt(p, df)?;
        Ok(())
    })
}

/// Tuned defaults for `method`.
#[no_mangle]
pub unsafe extern "C" fn dpci_default_params(method: u32, result: *mut DpciParams) -> DpciStatus {
    guard(|| {
        let p = EstimatorParams::defaults(method_of(method)?);
        *out(result, "result")? = DpciParams { rho: p.rho, b: p.b };
        Ok(())
    })
}

/// Non-private t interval.
#[no_mangle]
pub unsafe extern "C" fn dpci_public_ci(
    data: *const f64,
    len: usize,
    alpha: f64,
    result: *mut DpciInterval,
) -> DpciStatus {
    guard(|| {
        let db = database(data, len)?;
        *out(result, "result")? = interval(&public_ci(&db, alpha)?);
        Ok(())
    })
}

/// Configure a simulated-interval method. `params` may be null for the
/// method's defaults. Returns null on failure; see [`dpci_last_error`].
#[no_mangle]
pub unsafe extern "C" fn dpci_estimator_new(
    method: u32,
    epsilon: f64,
    params: *const DpciParams,
    xmin: f64,
    xmax: f64,
) -> *mut DpciEstimator {
    let mut handle = std::ptr::null_mut();
    let status = guard(|| {
        let m = method_of(method)?;
        let p = match params.as_ref() {
            Some(p) => EstimatorParams { rho: p.rho, b: p.b },
            None => EstimatorParams::defaults(m),
        };
        let bounds = DataBounds::new(xmin, xmax)?;
        let inner = estimator_for(m, epsilon, p, bounds)?;
        handle = Box::into_raw(Box::new(DpciEstimator { inner, bounds }));
        Ok(())
    });
    debug_assert_eq!(status == DpciStatus::Ok, !handle.is_null());
    handle
}

/// Releases a handle from [`dpci_estimator_new`]. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dpci_estimator_free(est: *mut DpciEstimator) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// One private center/spread estimate. The data are clamped to the
/// estimator's window first.
#[no_mangle]
pub unsafe extern "C" fn dpci_estimator_estimate(
    est: *const DpciEstimator,
    data: *const f64,
    len: usize,
    rng: *mut DpciRng,
    result: *mut DpciEstimate,
) -> DpciStatus {
    guard(|| {
        let est = est.as_ref().ok_or(Failure::Null("est"))?;
        let rng = out(rng, "rng")?;
        let db = database(data, len)?.clamp(est.bounds);
        let cs = est.inner.estimate(&db, est.bounds, &mut rng.0)?;
        *out(result, "result")? = DpciEstimate { center: cs.center, spread: cs.spread, degenerate: cs.degenerate as u8 };
        Ok(())
    })
}

/// Simulation-based interval. The data are clamped to the estimator's
/// window first; `seed` fixes all randomness.
#[no_mangle]
pub unsafe extern "C" fn dpci_estimator_sim_ci(
    est: *const DpciEstimator,
    data: *const f64,
    len: usize,
    alpha: f64,
    nsim: usize,
    seed: u64,
    result: *mut DpciInterval,
) -> DpciStatus {
    guard(|| {
        let est = est.as_ref().ok_or(Failure::Null("est"))?;
        let db = database(data, len)?.clamp(est.bounds);
        let config = SimConfig::new(alpha, seed).with_nsim(nsim);
        *out(result, "result")? = interval(&sim_ci(est.inner.as_ref(), &db, est.bounds, &config)?);
        Ok(())
    })
}

/// Private estimate of the rank-`rank` (1-based) order statistic. The data
/// must already lie inside `[xmin, xmax]`.
#[no_mangle]
pub unsafe extern "C" fn dpci_expq(
    data: *const f64,
    len: usize,
    rank: usize,
    epsilon: f64,
    xmin: f64,
    xmax: f64,
    rng: *mut DpciRng,
    result: *mut f64,
) -> DpciStatus {
    guard(|| {
        let db = database(data, len)?;
        let rng = out(rng, "rng")?;
        let m = QuantileRank::new(rank, db.len())?;
        *out(result, "result")? = expq(&db, m, epsilon, DataBounds::new(xmin, xmax)?, &mut rng.0)?;
        Ok(())
    })
}

/// Exact output density of [`dpci_expq`] at `y`.
#[no_mangle]
pub unsafe extern "C" fn dpci_expq_density(
    data: *const f64,
    len: usize,
    rank: usize,
    epsilon: f64,
    xmin: f64,
    xmax: f64,
    y: f64,
    result: *mut f64,
) -> DpciStatus {
    guard(|| {
        let db = database(data, len)?;
        let m = QuantileRank::new(rank, db.len())?;
        *out(result, "result")? = expq_exact_density(&db, m, epsilon, DataBounds::new(xmin, xmax)?, y)?;
        Ok(())
    })
}

/// Exact expected output of [`dpci_expq`].
#[no_mangle]
pub unsafe extern "C" fn dpci_expq_expected_value(
    data: *const f64,
    len: usize,
    rank: usize,
    epsilon: f64,
    xmin: f64,
    xmax: f64,
    result: *mut f64,
) -> DpciStatus {
    guard(|| {
        let db = database(data, len)?;
        let m = QuantileRank::new(rank, db.len())?;
        *out(result, "result")? = expq_expected_value(&db, m, epsilon, DataBounds::new(xmin, xmax)?)?;
        Ok(())
    })
}
