//! Monte Carlo coverage of every interval procedure.

use dpci::simulate::{run_coverage, ExperimentGrid};
use dpci::{DataBounds, Method};

fn b6() -> DataBounds {
    DataBounds::new(-6.0, 6.0).unwrap()
}

fn grid(method: Method, n: usize, eps: f64, alphas: &[f64], trials: usize, nsim: usize, seed: u64) -> ExperimentGrid {
    ExperimentGrid {
        alphas: alphas.to_vec(),
        trials,
        nsim,
        seed,
        ..ExperimentGrid::standard(vec![method], vec![n], vec![eps], vec![b6()])
    }
}

fn three_se(alpha: f64, trials: usize) -> f64 {
    3.0 * (alpha * (1.0 - alpha) / trials as f64).sqrt()
}

#[test]
fn public_t_interval_is_exact() {
    let alphas = [0.01, 0.05, 0.1, 0.2, 0.32, 0.5];
    for r in run_coverage(&grid(Method::Public, 100, 1.0, &alphas, 5000, 1, 11)).unwrap() {
        let target = 1.0 - r.alpha;
        assert!((r.value - target).abs() <= three_se(r.alpha, 5000), "alpha {}: {}", r.alpha, r.value);
    }
}

#[test]
fn vadhan_is_conservative() {
    let r = &run_coverage(&grid(Method::Vadhan, 2000, 0.1, &[0.05], 1000, 1, 12)).unwrap()[0];
    assert!(r.value >= 0.95, "{}", r.value);
}

#[test]
fn noisymad_off_center_mean() {
    let g = ExperimentGrid { mu: 3.0, ..grid(Method::NoisyMad, 1000, 0.1, &[0.05, 0.1, 0.32], 600, 500, 13) };
    for r in run_coverage(&g).unwrap() {
        assert!(r.value >= 1.0 - r.alpha - three_se(r.alpha, 600), "alpha {}: {}", r.alpha, r.value);
    }
}

fn validity(method: Method, seed: u64) {
    let trials = 2000;
    for r in run_coverage(&grid(method, 1000, 0.1, &[0.05, 0.1, 0.32], trials, 500, seed)).unwrap() {
        assert!(r.value >= 1.0 - r.alpha - three_se(r.alpha, trials), "{method} alpha {}: {}", r.alpha, r.value);
    }
}

#[test]
fn noisyvar_coverage_is_valid() {
    validity(Method::NoisyVar, 14);
}

#[test]
fn mod_coverage_is_valid() {
    validity(Method::Mod, 15);
}

#[test]
fn symq_coverage_at_default_nsim() {
    let r = &run_coverage(&grid(Method::SymQ, 1000, 0.1, &[0.05], 1000, 1000, 16)).unwrap()[0];
    assert!(r.value >= 0.95 - 2.0 * (0.05f64 * 0.95 / 1000.0).sqrt(), "{}", r.value);
}
