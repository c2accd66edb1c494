use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::baselines::{vadhan_ci, FixedRange, OraEstimator, OraParams, VadhanParams};
use crate::data::{check_alpha, DataBounds, Database, Method};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, EstimatorParams, PrivateEstimator};
use crate::rng::{derive_seed, RandomSource};
use crate::simulate::{interval_from_reference, simulate_centers, DEFAULT_NSIM};
use crate::stats::public_ci;

const DATA_STREAM: u64 = 0x6461_7461; // "data"
const MECH_STREAM: u64 = 0x6d65_6368; // "mech"

/// Seeds for outer trial `trial` of a cell: `(data, mechanism)`.
///
/// The data seed hashes `(n, mu, sigma, trial)` only, so every method,
/// budget and window in a grid sees the same databases. The mechanism seed
/// hashes the full cell `(method, n, epsilon, xmin, xmax, trial)`. Both go
/// through [`derive_seed`] with a distinct leading stream tag. Neither
/// depends on `alpha` or on tuning parameters, so all alphas of a cell share
/// trials and parameter sweeps use common random numbers.
#[allow(clippy::too_many_arguments)]
pub fn trial_seeds(
    master: u64,
    method: Method,
    n: usize,
    epsilon: f64,
    bounds: DataBounds,
    mu: f64,
    sigma: f64,
    trial: usize,
) -> (u64, u64) {
    let data = derive_seed(master, &[DATA_STREAM, n as u64, mu.to_bits(), sigma.to_bits(), trial as u64]);
    let mech = derive_seed(
        master,
        &[
            MECH_STREAM,
            method.code() as u64,
            n as u64,
            epsilon.to_bits(),
            bounds.xmin().to_bits(),
            bounds.xmax().to_bits(),
            trial as u64,
        ],
    );
    (data, mech)
}

/// Boxed estimator for any simulated method.
pub fn estimator_for(
    method: Method,
    epsilon: f64,
    params: EstimatorParams,
    bounds: DataBounds,
) -> Result<Box<dyn Estimator>> {
    match method {
        Method::Ora => {
            if !(epsilon.is_finite() && epsilon > 0.0) {
                return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon}")));
            }
            Ok(Box::new(OraEstimator { epsilon, params: OraParams::defaults(bounds) }))
        }
        Method::Public | Method::Vadhan => {
            Err(Error::param("method", format!("{method} builds its interval in closed form")))
        }
        _ => Ok(Box::new(PrivateEstimator::new(method, epsilon, params)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Coverage,
    Moe,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Coverage => "coverage",
            Metric::Moe => "moe",
        })
    }
}

/// Aggregate for one (method, n, epsilon, bounds, alpha) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub method: Method,
    pub n: usize,
    pub epsilon: f64,
    pub bounds: DataBounds,
    pub alpha: f64,
    pub metric: Metric,
    /// Coverage fraction or mean margin of error.
    pub value: f64,
    /// Monte Carlo standard error of `value`.
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub methods: Vec<Method>,
    pub n_values: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub bounds: Vec<DataBounds>,
    pub alphas: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub trials: usize,
    pub nsim: usize,
    pub seed: u64,
    pub clamp_synthetic: bool,
    /// Per-method overrides; missing methods use [`EstimatorParams::defaults`].
    pub params: BTreeMap<Method, EstimatorParams>,
}

impl ExperimentGrid {
    /// Standard-normal grid with default tuning and `nsim`.
    pub fn standard(methods: Vec<Method>, n_values: Vec<usize>, epsilons: Vec<f64>, bounds: Vec<DataBounds>) -> Self {
        ExperimentGrid {
            methods,
            n_values,
            epsilons,
            bounds,
            alphas: vec![0.05],
            mu: 0.0,
            sigma: 1.0,
            trials: 100,
            nsim: DEFAULT_NSIM,
            seed: 0,
            clamp_synthetic: true,
            params: BTreeMap::new(),
        }
    }

    pub fn params_for(&self, method: Method) -> EstimatorParams {
        self.params.get(&method).copied().unwrap_or_else(|| EstimatorParams::defaults(method))
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &'static str| Err(Error::param(name, "grid must not be empty"));
        if self.methods.is_empty() {
            return empty("methods");
        }
        if self.n_values.is_empty() {
            return empty("n_values");
        }
        if self.epsilons.is_empty() {
            return empty("epsilons");
        }
        if self.bounds.is_empty() {
            return empty("bounds");
        }
        if self.alphas.is_empty() {
            return empty("alphas");
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be >= 1"));
        }
        if self.nsim == 0 {
            return Err(Error::param("nsim", "must be >= 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) || !self.mu.is_finite() {
            return Err(Error::param("sigma", "mu must be finite and sigma finite and > 0"));
        }
        for &a in &self.alphas {
            check_alpha(a)?;
        }
        for &e in &self.epsilons {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::param("epsilon", format!("must be finite and > 0, got {e}")));
            }
        }
        for &m in &self.methods {
            self.params_for(m).validate(m)?;
        }
        for &n in &self.n_values {
            for &m in &self.methods {
                if n < m.min_n() {
                    return Err(Error::TooFewObservations { required: m.min_n(), actual: n });
                }
            }
        }
        Ok(())
    }
}

/// Everything that fixes the outcome of one cell, apart from `alpha`.
#[derive(Debug, Clone, Copy)]
struct CellSpec {
    method: Method,
    params: EstimatorParams,
    n: usize,
    epsilon: f64,
    bounds: DataBounds,
    mu: f64,
    sigma: f64,
    trials: usize,
    nsim: usize,
    seed: u64,
    clamp_synthetic: bool,
}

/// `(covered, moe)` per alpha for one outer trial.
fn run_trial(spec: &CellSpec, estimator: Option<&dyn Estimator>, alphas: &[f64], trial: usize) -> Result<Vec<(bool, f64)>> {
    let (data_seed, mech_seed) =
        trial_seeds(spec.seed, spec.method, spec.n, spec.epsilon, spec.bounds, spec.mu, spec.sigma, trial);
    let mut data_rng = RandomSource::new(data_seed);
    let raw = Database::from_finite((0..spec.n).map(|_| data_rng.normal(spec.mu, spec.sigma)).collect());

    match spec.method {
        Method::Public => alphas
            .iter()
            .map(|&a| public_ci(&raw, a).map(|ci| (ci.contains(spec.mu), ci.moe)))
            .collect(),
        Method::Vadhan => alphas
            .iter()
            .map(|&a| {
                let params = VadhanParams::split_evenly(spec.epsilon, a, spec.bounds);
                let mut rng = RandomSource::new(mech_seed);
                let out = vadhan_ci(&raw, &params, a / 4.0, &FixedRange(spec.bounds), &mut rng)?;
                Ok((out.interval.contains(spec.mu), out.interval.moe))
            })
            .collect(),
        _ => {
            let estimator = estimator.expect("simulated methods carry an estimator");
            let clamped = raw.clamp(spec.bounds);
            let mut rng = RandomSource::new(mech_seed);
            let estimate = estimator.estimate(&clamped, spec.bounds, &mut rng)?;
            let centers =
                simulate_centers(estimator, &estimate, spec.n, spec.bounds, spec.nsim, spec.clamp_synthetic, &mut rng)?;
            alphas
                .iter()
                .map(|&a| {
                    interval_from_reference(estimator, &estimate, &centers, a).map(|ci| (ci.contains(spec.mu), ci.moe))
                })
                .collect()
        }
    }
}

/// Per-trial outcomes in trial order, evaluated in parallel.
fn run_cell(spec: &CellSpec, alphas: &[f64]) -> Result<Vec<Vec<(bool, f64)>>> {
    let estimator = if spec.method.is_simulated() {
        Some(estimator_for(spec.method, spec.epsilon, spec.params, spec.bounds)?)
    } else {
        None
    };
    (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, estimator.as_deref(), alphas, t))
        .collect()
}

fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let v: Vec<f64> = values.collect();
    let k = v.len();
    let mean = v.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0, k);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt(), k)
}

/// Coverage and mean-MoE records for every cell of the grid, ordered by
/// (method, n, epsilon, xmin, xmax, alpha).
pub fn run_grid(grid: &ExperimentGrid) -> Result<(Vec<CellRecord>, Vec<CellRecord>)> {
    grid.validate()?;
    let mut methods = grid.methods.clone();
    methods.sort();
    methods.dedup();
    let mut n_values = grid.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();
    let mut epsilons = grid.epsilons.clone();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();
    let mut bounds = grid.bounds.clone();
    bounds.sort_by(|a, b| a.xmin().total_cmp(&b.xmin()).then(a.xmax().total_cmp(&b.xmax())));
    bounds.dedup();
    let mut alphas = grid.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mut coverage = Vec::new();
    let mut moe = Vec::new();
    for &method in &methods {
        for &n in &n_values {
            for &epsilon in &epsilons {
                for &b in &bounds {
                    let spec = CellSpec {
                        method,
                        params: grid.params_for(method),
                        n,
                        epsilon,
                        bounds: b,
                        mu: grid.mu,
                        sigma: grid.sigma,
                        trials: grid.trials,
                        nsim: grid.nsim,
                        seed: grid.seed,
                        clamp_synthetic: grid.clamp_synthetic,
                    };
                    let outcomes = run_cell(&spec, &alphas)?;
                    for (k, &alpha) in alphas.iter().enumerate() {
                        let trials = outcomes.len();
                        let hits = outcomes.iter().filter(|o| o[k].0).count();
                        let p = hits as f64 / trials as f64;
                        let base = CellRecord {
                            method,
                            n,
                            epsilon,
                            bounds: b,
                            alpha,
                            metric: Metric::Coverage,
                            value: p,
                            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
                            trials,
                        };
                        coverage.push(base);
                        let (mean, se, _) = mean_and_stderr(outcomes.iter().map(|o| o[k].1));
                        moe.push(CellRecord { metric: Metric::Moe, value: mean, stderr: se, ..base });
                    }
                }
            }
        }
    }
    Ok((coverage, moe))
}

/// Fraction of trials whose interval covered the true mean, per cell.
pub fn run_coverage(grid: &ExperimentGrid) -> Result<Vec<CellRecord>> {
    run_grid(grid).map(|(c, _)| c)
}

/// Mean margin of error per cell.
pub fn run_moe(grid: &ExperimentGrid) -> Result<Vec<CellRecord>> {
    run_grid(grid).map(|(_, m)| m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rho,
    B,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::B => "b",
        }
    }

    fn applies_to(self, method: Method) -> bool {
        match self {
            SweepParam::Rho => matches!(method, Method::NoisyVar | Method::NoisyMad | Method::CenQ | Method::Mod),
            SweepParam::B => matches!(method, Method::CenQ | Method::SymQ),
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rho" => Ok(SweepParam::Rho),
            "b" => Ok(SweepParam::B),
            other => Err(Error::param("param", format!("unknown sweep parameter `{other}`"))),
        }
    }
}

/// The fixed part of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub epsilon: f64,
    pub bounds: DataBounds,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub trials: usize,
    pub nsim: usize,
    pub seed: u64,
    pub clamp_synthetic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub method: Method,
    pub param: SweepParam,
    pub value: f64,
    pub n: usize,
    pub epsilon: f64,
    pub mean_moe: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Mean MoE of `method` as one tuning parameter moves over `values`, other
/// parameters at their defaults.
pub fn sweep_param(method: Method, param: SweepParam, values: &[f64], cell: &SweepCell) -> Result<Vec<SweepRecord>> {
    if !param.applies_to(method) {
        return Err(Error::NotApplicable { param: param.name(), method: method.name() });
    }
    if values.is_empty() {
        return Err(Error::param("values", "grid must not be empty"));
    }
    if cell.trials == 0 || cell.nsim == 0 {
        return Err(Error::param("trials", "trials and nsim must be >= 1"));
    }
    check_alpha(cell.alpha)?;
    values
        .iter()
        .map(|&value| {
            let mut params = EstimatorParams::defaults(method);
            match param {
                SweepParam::Rho => params.rho = value,
                SweepParam::B => params.b = value,
            }
            params.validate(method)?;
            let spec = CellSpec {
                method,
                params,
                n: cell.n,
                epsilon: cell.epsilon,
                bounds: cell.bounds,
                mu: cell.mu,
                sigma: cell.sigma,
                trials: cell.trials,
                nsim: cell.nsim,
                seed: cell.seed,
                clamp_synthetic: cell.clamp_synthetic,
            };
            let outcomes = run_cell(&spec, &[cell.alpha])?;
            let (mean_moe, stderr, trials) = mean_and_stderr(outcomes.iter().map(|o| o[0].1));
            Ok(SweepRecord { method, param, value, n: cell.n, epsilon: cell.epsilon, mean_moe, stderr, trials })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b6() -> DataBounds {
        DataBounds::new(-6.0, 6.0).unwrap()
    }

    fn small_grid(method: Method) -> ExperimentGrid {
        ExperimentGrid {
            trials: 20,
            nsim: 40,
            seed: 5,
            alphas: vec![0.1, 0.05],
            ..ExperimentGrid::standard(vec![method], vec![60], vec![1.0], vec![b6()])
        }
    }

    #[test]
    fn grid_is_deterministic() {
        let g = small_grid(Method::SymQ);
        let a = run_grid(&g).unwrap();
        let b = run_grid(&g).unwrap();
        assert_eq!(a, b);
        // Sorted by alpha within the cell.
        assert!(a.0[0].alpha < a.0[1].alpha);
    }

    #[test]
    fn single_trial_coverage_is_binary() {
        let g = ExperimentGrid { trials: 1, ..small_grid(Method::NoisyMad) };
        for r in run_coverage(&g).unwrap() {
            assert!(r.value == 0.0 || r.value == 1.0);
            assert_eq!(r.stderr, 0.0);
        }
    }

    #[test]
    fn every_method_runs() {
        for m in Method::ALL {
            let recs = run_grid(&small_grid(m)).unwrap();
            assert_eq!(recs.0.len(), 2);
            assert!(recs.1.iter().all(|r| r.value >= 0.0 && r.value.is_finite()), "{m}");
        }
    }

    #[test]
    fn empty_grids_are_rejected() {
        let mut g = small_grid(Method::SymQ);
        g.alphas.clear();
        assert!(run_grid(&g).is_err());
        let mut g = small_grid(Method::SymQ);
        g.methods.clear();
        assert!(run_grid(&g).is_err());
        let g = ExperimentGrid { trials: 0, ..small_grid(Method::SymQ) };
        assert!(run_grid(&g).is_err());
    }

    fn cell() -> SweepCell {
        SweepCell {
            n: 60,
            epsilon: 1.0,
            bounds: b6(),
            alpha: 0.05,
            mu: 0.0,
            sigma: 1.0,
            trials: 10,
            nsim: 30,
            seed: 5,
            clamp_synthetic: true,
        }
    }

    #[test]
    fn single_point_sweep_matches_moe_cell() {
        let sweep = sweep_param(Method::SymQ, SweepParam::B, &[0.35], &cell()).unwrap();
        assert_eq!(sweep.len(), 1);
        let g = ExperimentGrid { trials: 10, nsim: 30, alphas: vec![0.05], ..small_grid(Method::SymQ) };
        let moe = run_moe(&g).unwrap();
        assert_eq!(sweep[0].mean_moe, moe[0].value);
    }

    #[test]
    fn sweep_rejects_inapplicable_param() {
        assert!(matches!(
            sweep_param(Method::SymQ, SweepParam::Rho, &[0.5], &cell()),
            Err(Error::NotApplicable { .. })
        ));
        assert!(sweep_param(Method::NoisyVar, SweepParam::B, &[0.5], &cell()).is_err());
        assert!(sweep_param(Method::NoisyVar, SweepParam::Rho, &[1.0], &cell()).is_err());
    }

    #[test]
    fn seeds_share_data_across_methods() {
        let a = trial_seeds(1, Method::SymQ, 100, 0.1, b6(), 0.0, 1.0, 3);
        let b = trial_seeds(1, Method::NoisyMad, 100, 0.5, b6(), 0.0, 1.0, 3);
        assert_eq!(a.0, b.0);
        assert_ne!(a.1, b.1);
        let c = trial_seeds(1, Method::SymQ, 100, 0.1, b6(), 0.0, 1.0, 4);
        assert_ne!(a.0, c.0);
    }
}
