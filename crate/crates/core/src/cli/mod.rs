//! Command-line front end.
//!
//! Results go to stdout as JSON (`ci`) or CSV (everything else). Every run
//! also writes a manifest describing how to reproduce it, to stderr or to
//! `--manifest PATH`; `dpci replay PATH` re-executes a manifest.

mod input;
mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dpci::baselines::{vadhan_ci, FixedRange, VadhanParams};
use dpci::simulate::{
    bias_curve, estimator_for, run_grid, sweep_param, ExperimentGrid, SweepCell, SweepParam, DEFAULT_NSIM,
};
use dpci::{public_ci, sim_ci, ConfidenceInterval, DataBounds, Database, EstimatorParams, Method, RandomSource, SimConfig};

use output::{num, opt_num, JsonObject};

const EXIT_OK: i32 = 0;
const EXIT_IO: i32 = 1;
const EXIT_INPUT: i32 = 2;
const EXIT_PARAM: i32 = 3;
const EXIT_TOO_SMALL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Param(String),
    TooSmall(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Param(_) => EXIT_PARAM,
            CliError::TooSmall(_) => EXIT_TOO_SMALL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Param(m) | CliError::TooSmall(m) | CliError::Io(m) => m,
        }
    }
}

impl From<dpci::Error> for CliError {
    fn from(e: dpci::Error) -> Self {
        if e.is_insufficient_data() {
            CliError::TooSmall(e.to_string())
        } else {
            CliError::Param(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dpci", version, about = "Differentially private confidence intervals for a mean")]
struct Cli {
    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interval for the mean of one data file.
    Ci(CiArgs),
    /// Coverage or mean-MoE over a grid of cells.
    Experiment(ExperimentArgs),
    /// Mean MoE as one tuning parameter varies.
    Sweep(SweepArgs),
    /// Bias of the private quantile sampler.
    Bias(BiasArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(value_name = "MANIFEST")]
        path: String,
    },
}

#[derive(Debug, Args)]
struct CiArgs {
    /// One value per line; `-` reads stdin.
    #[arg(long)]
    input: String,
    /// Skip the first line.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = "symq")]
    method: Method,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NSIM)]
    nsim: usize,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Do not clamp the synthetic databases inside the simulation.
    #[arg(long)]
    no_clamp_synthetic: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Coverage,
    Moe,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    eps_grid: Vec<f64>,
    /// Clamp windows as `xmin:xmax`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    bounds: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    alpha_grid: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_NSIM)]
    nsim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Tuning override `method.param=value`, e.g. `symq.b=0.3`; repeatable.
    #[arg(long = "set", value_name = "METHOD.PARAM=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    no_clamp_synthetic: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, allow_hyphen_values = true)]
    xmin: f64,
    #[arg(long, allow_hyphen_values = true)]
    xmax: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_NSIM)]
    nsim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long)]
    no_clamp_synthetic: bool,
}

#[derive(Debug, Args)]
struct BiasArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    eps_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    b_grid: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmin: f64,
    #[arg(long, allow_hyphen_values = true)]
    xmax: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

/// What a command produced besides its stdout text.
struct Outcome {
    stdout: String,
    config: serde_json::Value,
    input_digest: Option<String>,
}

pub fn main() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAM } else { EXIT_OK };
        }
    };
    match execute(cli, argv[1..].to_vec(), false) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn execute(cli: Cli, args: Vec<String>, replaying: bool) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Param("--jobs must be >= 1".into()));
        }
        // A pool may already exist when replaying; the thread count never
        // changes results, so that error is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let start = Instant::now();
    let (name, outcome) = match cli.command {
        Command::Ci(a) => ("ci", cmd_ci(&a)?),
        Command::Experiment(a) => ("experiment", cmd_experiment(&a)?),
        Command::Sweep(a) => ("sweep", cmd_sweep(&a)?),
        Command::Bias(a) => ("bias", cmd_bias(&a)?),
        Command::Replay { path } => {
            if replaying {
                return Err(CliError::Param("a manifest cannot replay another replay".into()));
            }
            return cmd_replay(&path);
        }
    };
    let mut out = std::io::stdout().lock();
    out.write_all(outcome.stdout.as_bytes())?;
    out.flush()?;

    let manifest = json!({
        "tool": "dpci",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "argv": args,
        "config": outcome.config,
        "input_digest": outcome.input_digest,
        "duration_seconds": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    match (&cli.manifest, replaying) {
        (Some(path), false) => std::fs::write(path, text)?,
        _ => std::io::stderr().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_replay(path: &str) -> Result<(), CliError> {
    let bytes = input::read_bytes(path)?;
    let manifest: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{path}: not a manifest: {e}")))?;
    let args: Vec<String> = manifest["argv"]
        .as_array()
        .and_then(|a| a.iter().map(|v| v.as_str().map(str::to_string)).collect())
        .ok_or_else(|| CliError::Input(format!("{path}: manifest has no argv list")))?;
    let cli = Cli::try_parse_from(std::iter::once("dpci".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Param(format!("{path}: recorded arguments no longer parse: {e}")))?;
    if let (Command::Ci(a), Some(expected)) = (&cli.command, manifest["input_digest"].as_str()) {
        let actual = input::sha256_hex(&input::read_bytes(&a.input)?);
        if actual != expected {
            return Err(CliError::Input(format!("{}: contents changed since the manifest was written", a.input)));
        }
    }
    execute(cli, args, true)
}

fn bounds_from(xmin: Option<f64>, xmax: Option<f64>) -> Result<Option<DataBounds>, CliError> {
    match (xmin, xmax) {
        (Some(lo), Some(hi)) => Ok(Some(DataBounds::new(lo, hi)?)),
        (None, None) => Ok(None),
        _ => Err(CliError::Param("--xmin and --xmax must be given together".into())),
    }
}

fn tuning(method: Method, rho: Option<f64>, b: Option<f64>) -> Result<EstimatorParams, CliError> {
    let mut params = EstimatorParams::defaults(method);
    let uses_rho = matches!(method, Method::NoisyVar | Method::NoisyMad | Method::CenQ | Method::Mod);
    let uses_b = matches!(method, Method::CenQ | Method::SymQ);
    if let Some(r) = rho {
        if !uses_rho {
            return Err(dpci::Error::NotApplicable { param: "rho", method: method.name() }.into());
        }
        params.rho = r;
    }
    if let Some(v) = b {
        if !uses_b {
            return Err(dpci::Error::NotApplicable { param: "b", method: method.name() }.into());
        }
        params.b = v;
    }
    params.validate(method)?;
    Ok(params)
}

fn cmd_ci(a: &CiArgs) -> Result<Outcome, CliError> {
    let bytes = input::read_bytes(&a.input)?;
    let digest = input::sha256_hex(&bytes);
    let values = input::parse_values(&bytes, a.header)?;
    let params = tuning(a.method, a.rho, a.b)?;
    let bounds = bounds_from(a.xmin, a.xmax)?;
    if a.method != Method::Public {
        if bounds.is_none() {
            return Err(CliError::Param(format!("method {} needs --xmin and --xmax", a.method)));
        }
        if a.epsilon.is_none() {
            return Err(CliError::Param(format!("method {} needs --epsilon", a.method)));
        }
    }
    if values.len() < a.method.min_n() {
        return Err(CliError::TooSmall(format!(
            "method {} needs at least {} values, got {}",
            a.method,
            a.method.min_n(),
            values.len()
        )));
    }
    let db = Database::new(values)?;
    let clamped_count = bounds.map_or(0, |b| db.count_outside(b));
    let config = SimConfig {
        nsim: a.nsim,
        alpha: a.alpha,
        seed: a.seed,
        clamp_synthetic: !a.no_clamp_synthetic,
    };

    let ci: ConfidenceInterval = match (a.method, bounds, a.epsilon) {
        (Method::Public, _, _) => public_ci(&db, a.alpha)?,
        (Method::Vadhan, Some(b), Some(eps)) => {
            let vp = VadhanParams::split_evenly(eps, a.alpha, b);
            let mut rng = RandomSource::new(a.seed);
            let mut ci = vadhan_ci(&db, &vp, a.alpha / 4.0, &FixedRange(b), &mut rng)?.interval;
            ci.alpha = a.alpha;
            ci.seed = Some(a.seed);
            ci
        }
        (m, Some(b), Some(eps)) => {
            let est = estimator_for(m, eps, params, b)?;
            sim_ci(est.as_ref(), &db.clamp(b), b, &config)?
        }
        _ => unreachable!("checked above"),
    };

    let mut obj = JsonObject::default()
        .num("lower", ci.lower)
        .num("upper", ci.upper)
        .num("moe", ci.moe)
        .num("center", ci.center)
        .raw("spread", opt_num(ci.spread))
        .str("method", a.method.name())
        .num("alpha", a.alpha)
        .raw("epsilon", if a.method == Method::Public { "null".into() } else { opt_num(a.epsilon) })
        .int("seed", a.seed)
        .int("nsim", ci.nsim)
        .int("n", db.len());
    obj = obj.int("clamped_count", clamped_count);

    Ok(Outcome {
        stdout: obj.finish() + "\n",
        config: json!({
            "method": a.method.name(),
            "rho": params.rho,
            "b": params.b,
            "epsilon": a.epsilon,
            "xmin": a.xmin,
            "xmax": a.xmax,
            "alpha": a.alpha,
            "nsim": a.nsim,
            "seed": a.seed,
            "clamp_synthetic": !a.no_clamp_synthetic,
            "header": a.header,
            "input": a.input,
        }),
        input_digest: Some(digest),
    })
}

fn parse_bounds(s: &str) -> Result<DataBounds, CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Param(format!("bounds `{s}` must look like xmin:xmax")))?;
    let parse = |t: &str| {
        t.trim().parse::<f64>().map_err(|_| CliError::Param(format!("bounds `{s}`: `{t}` is not a number")))
    };
    Ok(DataBounds::new(parse(lo)?, parse(hi)?)?)
}

fn parse_overrides(items: &[String]) -> Result<BTreeMap<Method, EstimatorParams>, CliError> {
    let mut map: BTreeMap<Method, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for item in items {
        let bad = || CliError::Param(format!("override `{item}` must look like method.param=value"));
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let (method, param) = key.split_once('.').ok_or_else(bad)?;
        let method: Method = method.parse()?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        let entry = map.entry(method).or_default();
        match param.trim() {
            "rho" => entry.0 = Some(value),
            "b" => entry.1 = Some(value),
            other => return Err(CliError::Param(format!("unknown parameter `{other}` in `{item}`"))),
        }
    }
    map.into_iter().map(|(m, (rho, b))| Ok((m, tuning(m, rho, b)?))).collect()
}

fn csv(fields: &[String]) -> String {
    fields.join(",") + "\n"
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<Outcome, CliError> {
    let bounds = a.bounds.iter().map(|s| parse_bounds(s)).collect::<Result<Vec<_>, _>>()?;
    let grid = ExperimentGrid {
        methods: a.methods.clone(),
        n_values: a.n_grid.clone(),
        epsilons: a.eps_grid.clone(),
        bounds,
        alphas: a.alpha_grid.clone(),
        mu: a.mu,
        sigma: a.sigma,
        trials: a.trials,
        nsim: a.nsim,
        seed: a.seed,
        clamp_synthetic: !a.no_clamp_synthetic,
        params: parse_overrides(&a.overrides)?,
    };
    let (coverage, moe) = run_grid(&grid)?;
    let records = match a.mode {
        Mode::Coverage => coverage,
        Mode::Moe => moe,
    };
    let mut out = String::from("method,n,epsilon,xmin,xmax,alpha,metric,value,stderr,trials\n");
    for r in &records {
        out += &csv(&[
            r.method.to_string(),
            r.n.to_string(),
            num(r.epsilon),
            num(r.bounds.xmin()),
            num(r.bounds.xmax()),
            num(r.alpha),
            r.metric.to_string(),
            num(r.value),
            num(r.stderr),
            r.trials.to_string(),
        ]);
    }
    let params: BTreeMap<&str, serde_json::Value> = grid
        .methods
        .iter()
        .map(|&m| {
            let p = grid.params_for(m);
            (m.name(), json!({ "rho": p.rho, "b": p.b }))
        })
        .collect();
    Ok(Outcome {
        stdout: out,
        config: json!({
            "mode": format!("{:?}", a.mode).to_lowercase(),
            "methods": grid.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "n_grid": grid.n_values,
            "eps_grid": grid.epsilons,
            "bounds": grid.bounds.iter().map(|b| [b.xmin(), b.xmax()]).collect::<Vec<_>>(),
            "alpha_grid": grid.alphas,
            "trials": grid.trials,
            "nsim": grid.nsim,
            "seed": grid.seed,
            "mu": grid.mu,
            "sigma": grid.sigma,
            "clamp_synthetic": grid.clamp_synthetic,
            "params": params,
        }),
        input_digest: None,
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let cell = SweepCell {
        n: a.n,
        epsilon: a.epsilon,
        bounds: DataBounds::new(a.xmin, a.xmax)?,
        alpha: a.alpha,
        mu: a.mu,
        sigma: a.sigma,
        trials: a.trials,
        nsim: a.nsim,
        seed: a.seed,
        clamp_synthetic: !a.no_clamp_synthetic,
    };
    if a.n < a.method.min_n() {
        return Err(dpci::Error::TooFewObservations { required: a.method.min_n(), actual: a.n }.into());
    }
    let records = sweep_param(a.method, a.param, &a.values, &cell)?;
    let mut out = String::from("method,param,value,n,epsilon,mean_moe,stderr\n");
    for r in &records {
        out += &csv(&[
            r.method.to_string(),
            r.param.name().to_string(),
            num(r.value),
            r.n.to_string(),
            num(r.epsilon),
            num(r.mean_moe),
            num(r.stderr),
        ]);
    }
    Ok(Outcome {
        stdout: out,
        config: json!({
            "method": a.method.name(),
            "param": a.param.name(),
            "values": a.values,
            "n": a.n,
            "epsilon": a.epsilon,
            "xmin": a.xmin,
            "xmax": a.xmax,
            "alpha": a.alpha,
            "trials": a.trials,
            "nsim": a.nsim,
            "seed": a.seed,
            "mu": a.mu,
            "sigma": a.sigma,
            "clamp_synthetic": !a.no_clamp_synthetic,
        }),
        input_digest: None,
    })
}

fn cmd_bias(a: &BiasArgs) -> Result<Outcome, CliError> {
    let bounds = DataBounds::new(a.xmin, a.xmax)?;
    let mut out = String::from("n,epsilon,b,bias,stderr,trials\n");
    for &n in &a.n_grid {
        for &eps in &a.eps_grid {
            for &b in &a.b_grid {
                let est = bias_curve(n, eps, b, bounds, a.trials, a.mu, a.sigma, a.seed)?;
                out += &csv(&[
                    n.to_string(),
                    num(eps),
                    num(b),
                    num(est.bias),
                    num(est.stderr),
                    est.trials.to_string(),
                ]);
            }
        }
    }
    Ok(Outcome {
        stdout: out,
        config: json!({
            "n_grid": a.n_grid,
            "eps_grid": a.eps_grid,
            "b_grid": a.b_grid,
            "xmin": a.xmin,
            "xmax": a.xmax,
            "trials": a.trials,
            "seed": a.seed,
            "mu": a.mu,
            "sigma": a.sigma,
        }),
        input_digest: None,
    })
}
