use std::ffi::CStr;
use std::ptr;

use dpci_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dpci_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(dpci_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn quantiles_and_errors() {
    let mut x = 0.0;
    assert_eq!(unsafe { dpci_qz(0.975, &mut x) }, DpciStatus::Ok);
    assert!((x - 1.959963984540054).abs() < 1e-12);
    assert_eq!(unsafe { dpci_qt(0.975, 1, &mut x) }, DpciStatus::Ok);
    assert!((x - 12.706204736174707).abs() < 1e-8);
    assert_eq!(unsafe { dpci_qz(1.5, &mut x) }, DpciStatus::InvalidParameter);
    assert!(last_error().contains('p'));
    assert_eq!(unsafe { dpci_qz(0.5, ptr::null_mut()) }, DpciStatus::NullPointer);
    assert!(last_error().contains("result"));
}

#[test]
fn public_interval_matches_library() {
    let data = [1.0, 2.0, 3.0];
    let mut out = std::mem::MaybeUninit::<DpciInterval>::uninit();
    assert_eq!(unsafe { dpci_public_ci(data.as_ptr(), 3, 0.05, out.as_mut_ptr()) }, DpciStatus::Ok);
    let out = unsafe { out.assume_init() };
    let lib = dpci::public_ci(&dpci::Database::new(data.to_vec()).unwrap(), 0.05).unwrap();
    assert_eq!((out.lower, out.upper, out.center), (lib.lower, lib.upper, 2.0));
    assert!(last_error().is_empty());
}

#[test]
fn data_errors_map_to_codes() {
    let mut out = std::mem::MaybeUninit::<DpciInterval>::uninit();
    assert_eq!(unsafe { dpci_public_ci(ptr::null(), 0, 0.05, out.as_mut_ptr()) }, DpciStatus::Empty);
    assert_eq!(unsafe { dpci_public_ci([1.0].as_ptr(), 1, 0.05, out.as_mut_ptr()) }, DpciStatus::TooFewObservations);
    let bad = [1.0, f64::NAN];
    assert_eq!(unsafe { dpci_public_ci(bad.as_ptr(), 2, 0.05, out.as_mut_ptr()) }, DpciStatus::NonFinite);
    assert_eq!(unsafe { dpci_public_ci(ptr::null(), 2, 0.05, out.as_mut_ptr()) }, DpciStatus::NullPointer);
}

#[test]
fn expq_oracles() {
    let data = [1.0, 2.0, 3.0];
    let mut d = 0.0;
    assert_eq!(unsafe { dpci_expq_density(data.as_ptr(), 3, 2, 2.0, 0.0, 4.0, 1.5, &mut d) }, DpciStatus::Ok);
    let e = std::f64::consts::E;
    assert!((d - 1.0 / (2.0 / e + 2.0)).abs() < 1e-12);
    assert_eq!(unsafe { dpci_expq_expected_value(data.as_ptr(), 3, 2, 2.0, 0.0, 4.0, &mut d) }, DpciStatus::Ok);
    assert!((d - 2.0).abs() < 1e-12);
    assert_eq!(
        unsafe { dpci_expq_density(data.as_ptr(), 3, 2, 2.0, 0.0, 4.0, 4.0, &mut d) },
        DpciStatus::OutsideBounds
    );
    assert_eq!(
        unsafe { dpci_expq_expected_value(data.as_ptr(), 3, 4, 2.0, 0.0, 4.0, &mut d) },
        DpciStatus::RankOutOfRange
    );

    let rng = dpci_rng_new(5);
    let mut y = f64::NAN;
    assert_eq!(unsafe { dpci_expq(data.as_ptr(), 3, 2, 2.0, 0.0, 4.0, rng, &mut y) }, DpciStatus::Ok);
    assert!((0.0..4.0).contains(&y));
    assert_eq!(unsafe { dpci_expq(data.as_ptr(), 3, 2, 2.0, 0.0, 4.0, ptr::null_mut(), &mut y) }, DpciStatus::NullPointer);
    unsafe { dpci_rng_free(rng) };
}

#[test]
fn estimator_handle_lifecycle() {
    let mut p = DpciParams { rho: 0.0, b: 0.0 };
    assert_eq!(unsafe { dpci_default_params(DpciMethod::SymQ as u32, &mut p) }, DpciStatus::Ok);
    assert_eq!(p.b, 0.35);
    assert_eq!(unsafe { dpci_default_params(99, &mut p) }, DpciStatus::UnknownMethod);

    let est = unsafe { dpci_estimator_new(DpciMethod::SymQ as u32, 1.0, ptr::null(), -6.0, 6.0) };
    assert!(!est.is_null());
    let data: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 25.0 - 2.0).collect();

    let rng = dpci_rng_new(1);
    let mut cs = DpciEstimate { center: 0.0, spread: 0.0, degenerate: 0 };
    assert_eq!(unsafe { dpci_estimator_estimate(est, data.as_ptr(), data.len(), rng, &mut cs) }, DpciStatus::Ok);
    assert!(cs.spread > 0.0);
    unsafe { dpci_rng_free(rng) };

    let mut a = std::mem::MaybeUninit::<DpciInterval>::uninit();
    let mut b = std::mem::MaybeUninit::<DpciInterval>::uninit();
    unsafe {
        assert_eq!(dpci_estimator_sim_ci(est, data.as_ptr(), data.len(), 0.05, 200, 9, a.as_mut_ptr()), DpciStatus::Ok);
        assert_eq!(dpci_estimator_sim_ci(est, data.as_ptr(), data.len(), 0.05, 200, 9, b.as_mut_ptr()), DpciStatus::Ok);
    }
    let (a, b) = unsafe { (a.assume_init(), b.assume_init()) };
    assert_eq!(a, b);
    assert!(a.lower < a.upper && a.nsim == 200);
    unsafe { dpci_estimator_free(est) };
}

#[test]
fn estimator_new_reports_failures() {
    let bad = DpciParams { rho: 1.0, b: 0.5 };
    let est = unsafe { dpci_estimator_new(DpciMethod::NoisyVar as u32, 1.0, &bad, -1.0, 1.0) };
    assert!(est.is_null());
    assert!(last_error().contains("rho"));
    let est = unsafe { dpci_estimator_new(DpciMethod::SymQ as u32, 1.0, ptr::null(), 1.0, -1.0) };
    assert!(est.is_null());
    let est = unsafe { dpci_estimator_new(DpciMethod::Public as u32, 1.0, ptr::null(), -1.0, 1.0) };
    assert!(est.is_null());
    unsafe {
        dpci_estimator_free(ptr::null_mut());
        dpci_rng_free(ptr::null_mut());
    }
}
