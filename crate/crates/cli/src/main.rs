//! Command-line driver: configure experiments, run each module's
//! computations, and emit machine-readable results.
//!
//! Every command is deterministic given its flags and seed; rerunning
//! writes byte-identical files at any `--workers` setting. Exit codes:
//! 0 success, 1 computational failure, 2 usage error.

mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use gaussroots::chaos;
use gaussroots::correlations::{bundle, sinc_limits, v_n};
use gaussroots::kacrice;
use gaussroots::montecarlo::{run_experiment, with_workers, SimulationConfig};
use gaussroots::{FamilyKind, OrthonormalBasis};
use output::{fmt17, interval_tag, write_csv, write_json};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "gaussroots",
    version,
    about = "Root statistics of Gaussian random orthogonal polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo root-count ensemble with CLT diagnostics
    Simulate(SimulateArgs),
    /// Kac-Rice quadrature of the count mean and variance
    Kacrice(KacriceArgs),
    /// Convergence tables of the correlations to their sinc limits
    Limits(LimitsArgs),
    /// Chaos-level variance contributions and contraction diagnostics
    Chaos(ChaosArgs),
    /// Join prior outputs into a pass/fail verification report
    Report(ReportArgs),
}

/// Family selection shared by the computational commands.
#[derive(Args, Clone, Debug, Default)]
struct FamilyOpts {
    /// Polynomial family: chebyshev1 | legendre | jacobi | gegenbauer
    #[arg(long)]
    family: Option<String>,
    /// Jacobi weight exponent alpha (> -1)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Jacobi weight exponent beta (> -1)
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Gegenbauer parameter lambda (> -1/2)
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
}

/// Optional JSON config mirroring the flags; flags override file values.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    family: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    n: Option<usize>,
    interval: Option<[f64; 2]>,
    trials: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    grid_factor: Option<u32>,
    qmax: Option<usize>,
    tol: Option<f64>,
    cab: Option<f64>,
    out_dir: Option<PathBuf>,
    n_list: Option<Vec<usize>>,
    theta: Option<Vec<f64>>,
    tau: Option<Vec<f64>>,
    mc_samples: Option<usize>,
}

/// Marker for errors that are the user's command line rather than a failed
/// computation; they exit with the usage code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let body = std::fs::read_to_string(p)
                .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", p.display()))?;
            Ok(serde_json::from_str(&body)
                .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", p.display()))?)
        }
    }
}

fn resolve_family(opts: &FamilyOpts, file: &FileConfig) -> anyhow::Result<FamilyKind> {
    let name = opts
        .family
        .clone()
        .or_else(|| file.family.clone())
        .ok_or_else(|| usage("--family is required (or set it in --config)"))?;
    let alpha = opts.alpha.or(file.alpha);
    let beta = opts.beta.or(file.beta);
    let lambda = opts.lambda.or(file.lambda);
    match name.to_ascii_lowercase().as_str() {
        "chebyshev1" => Ok(FamilyKind::Chebyshev1),
        "legendre" => Ok(FamilyKind::Legendre),
        "jacobi" => {
            let alpha = alpha.ok_or_else(|| usage("jacobi requires --alpha"))?;
            let beta = beta.ok_or_else(|| usage("jacobi requires --beta"))?;
            Ok(FamilyKind::Jacobi { alpha, beta })
        }
        "gegenbauer" => {
            let lambda = lambda.ok_or_else(|| usage("gegenbauer requires --lambda"))?;
            Ok(FamilyKind::Gegenbauer { lambda })
        }
        other => Err(usage(format!(
            "unknown family '{other}' (expected chebyshev1 | legendre | jacobi | gegenbauer)"
        ))),
    }
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected 'lo,hi', got '{s}'"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("bad hi: {e}"))?;
    Ok((lo, hi))
}

/// Comma-separated list of floats; a newtype so clap treats the whole
/// list as one value.
#[derive(Clone, Debug)]
struct F64List(Vec<f64>);

/// Comma-separated list of degrees.
#[derive(Clone, Debug)]
struct UsizeList(Vec<usize>);

fn parse_f64_list(s: &str) -> Result<F64List, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad entry '{p}': {e}")))
        .collect::<Result<Vec<f64>, String>>()
        .map(F64List)
}

fn parse_usize_list(s: &str) -> Result<UsizeList, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad entry '{p}': {e}")))
        .collect::<Result<Vec<usize>, String>>()
        .map(UsizeList)
}

/// Run `f` on a pool of the requested size; `None` keeps the global pool
/// (defaulting to the logical core count).
fn maybe_with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) if w > 0 => with_workers(w, f),
        _ => f(),
    }
}

#[derive(Serialize, Clone)]
struct FamilyConfigOut {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

impl From<FamilyKind> for FamilyConfigOut {
    fn from(kind: FamilyKind) -> Self {
        match kind {
            FamilyKind::Chebyshev1 => Self {
                family: "chebyshev1".into(),
                alpha: None,
                beta: None,
                lambda: None,
            },
            FamilyKind::Legendre => Self {
                family: "legendre".into(),
                alpha: None,
                beta: None,
                lambda: None,
            },
            FamilyKind::Jacobi { alpha, beta } => Self {
                family: "jacobi".into(),
                alpha: Some(alpha),
                beta: Some(beta),
                lambda: None,
            },
            FamilyKind::Gegenbauer { lambda } => Self {
                family: "gegenbauer".into(),
                alpha: None,
                beta: None,
                lambda: Some(lambda),
            },
        }
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    family: FamilyOpts,
    /// Polynomial degree
    #[arg(long)]
    n: Option<usize>,
    /// Count interval as 'lo,hi', strictly inside (-1, 1)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_interval)]
    interval: Option<(f64, f64)>,
    /// Number of Monte Carlo trials
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed (decimal 64-bit unsigned)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Grid points per expected root spacing
    #[arg(long)]
    grid_factor: Option<u32>,
    /// Variance slope c_ab for the canonical sqrt(c_ab n) standardization mode
    #[arg(long, allow_hyphen_values = true)]
    cab: Option<f64>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON config file mirroring these flags (flags override)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimulateConfigOut {
    #[serde(flatten)]
    family: FamilyConfigOut,
    n: usize,
    a: f64,
    b: f64,
    trials: usize,
    master_seed: u64,
    grid_factor: u32,
    refine_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cab: Option<f64>,
}

#[derive(Serialize)]
struct SimulateResultsOut {
    mean: f64,
    variance: Option<f64>,
    var_over_n: Option<f64>,
    se_mean: Option<f64>,
    bootstrap_se_variance: Option<f64>,
    ks_stat: Option<f64>,
    ks_pvalue: Option<f64>,
    skewness: Option<f64>,
    excess_kurtosis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ks_stat_theoretical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ks_pvalue_theoretical: Option<f64>,
}

#[derive(Serialize)]
struct SimulateOut {
    schema_version: u32,
    command: &'static str,
    config: SimulateConfigOut,
    results: SimulateResultsOut,
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let file = load_config(&args.config)?;
    let family = resolve_family(&args.family, &file)?;
    let n = args.n.or(file.n).ok_or_else(|| usage("--n is required"))?;
    let (a, b) = args
        .interval
        .or(file.interval.map(|[a, b]| (a, b)))
        .ok_or_else(|| usage("--interval is required"))?;
    let trials = args
        .trials
        .or(file.trials)
        .ok_or_else(|| usage("--trials is required"))?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let workers = args.workers.or(file.workers);
    let out_dir = args.out_dir.or(file.out_dir).unwrap_or_else(|| "out".into());
    let cab = args.cab.or(file.cab);

    let mut config = SimulationConfig::new(family, n, a, b, trials, seed);
    if let Some(g) = args.grid_factor.or(file.grid_factor) {
        config.grid_factor = g;
    }
    config.validate().map_err(|e| anyhow::anyhow!(e))?;

    let run = maybe_with_workers(workers, || run_experiment(&config))?;

    let (ks_t_stat, ks_t_p) = match cab {
        Some(c) => {
            let (s, p) = run.ks_with_theoretical_scaling(c)?;
            (Some(s), Some(p))
        }
        None => (None, None),
    };

    let out = SimulateOut {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        config: SimulateConfigOut {
            family: family.into(),
            n,
            a,
            b,
            trials,
            master_seed: seed,
            grid_factor: config.grid_factor,
            refine_tol: config.refine_tol,
            cab,
        },
        results: SimulateResultsOut {
            mean: run.mean,
            variance: run.variance,
            var_over_n: run.variance.map(|v| v / n as f64),
            se_mean: run.se_mean,
            bootstrap_se_variance: run.bootstrap_se_variance,
            ks_stat: run.ks_stat,
            ks_pvalue: run.ks_pvalue,
            skewness: run.skewness,
            excess_kurtosis: run.excess_kurtosis,
            ks_stat_theoretical: ks_t_stat,
            ks_pvalue_theoretical: ks_t_p,
        },
    };

    let stem = format!(
        "simulate_{}_n{}_{}_t{}_s{}",
        family.slug(),
        n,
        interval_tag(a, b),
        trials,
        seed
    );
    let json_path = write_json(&out_dir, &format!("{stem}.json"), &out)?;

    let rows: Vec<String> = run
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let z = run
                .standardized
                .get(i)
                .map(|&z| fmt17(z))
                .unwrap_or_default();
            format!("{i},{c},{z}")
        })
        .collect();
    let csv_path = write_csv(&out_dir, &format!("{stem}_trials.csv"), "trial,count,standardized", &rows)?;

    println!("mean = {}", run.mean);
    println!(
        "variance = {}",
        run.variance.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
    );
    println!(
        "var_over_n = {}",
        run.variance
            .map(|v| (v / n as f64).to_string())
            .unwrap_or_else(|| "n/a".into())
    );
    println!(
        "ks_pvalue = {}",
        run.ks_pvalue.map(|p| p.to_string()).unwrap_or_else(|| "n/a".into())
    );
    eprintln!(
        "wrote {} and {} in {:.2}s",
        json_path.display(),
        csv_path.display(),
        run.wall_time_secs
    );
    Ok(())
}

// ---------------------------------------------------------------- kacrice

#[derive(Args, Debug)]
struct KacriceArgs {
    #[command(flatten)]
    family: FamilyOpts,
    #[arg(long)]
    n: Option<usize>,
    /// Interval as 'lo,hi', strictly inside (-1, 1)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_interval)]
    interval: Option<(f64, f64)>,
    /// Relative error target of the mean quadrature
    #[arg(long)]
    tol: Option<f64>,
    /// Skip the double-integral variance (mean only)
    #[arg(long, default_value_t = false)]
    mean_only: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Serialize)]
struct KacriceConfigOut {
    #[serde(flatten)]
    family: FamilyConfigOut,
    n: usize,
    a: f64,
    b: f64,
    tol: f64,
    mean_only: bool,
}

#[derive(Serialize)]
struct KacriceResultsOut {
    mean: f64,
    mean_quad_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance_quad_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_ab: Option<f64>,
}

#[derive(Serialize)]
struct KacriceOut {
    schema_version: u32,
    command: &'static str,
    config: KacriceConfigOut,
    results: KacriceResultsOut,
}

fn cmd_kacrice(args: KacriceArgs) -> anyhow::Result<()> {
    let file = load_config(&args.config)?;
    let family = resolve_family(&args.family, &file)?;
    let n = args.n.or(file.n).ok_or_else(|| usage("--n is required"))?;
    let (a, b) = args
        .interval
        .or(file.interval.map(|[a, b]| (a, b)))
        .ok_or_else(|| usage("--interval is required"))?;
    let tol = args.tol.or(file.tol).unwrap_or(1e-3);
    let workers = args.workers.or(file.workers);
    let out_dir = args.out_dir.or(file.out_dir).unwrap_or_else(|| "out".into());

    let basis = OrthonormalBasis::new(family)?;
    let (mean, mean_err) = kacrice::expected_count_with_tol(&basis, n, a, b, tol)?;
    let kr = if args.mean_only || a == b {
        None
    } else {
        Some(maybe_with_workers(workers, || {
            kacrice::variance_count(&basis, n, a, b)
        })?)
    };

    let out = KacriceOut {
        schema_version: SCHEMA_VERSION,
        command: "kacrice",
        config: KacriceConfigOut {
            family: family.into(),
            n,
            a,
            b,
            tol,
            mean_only: args.mean_only,
        },
        results: KacriceResultsOut {
            mean,
            mean_quad_error: mean_err,
            variance: kr.map(|k| k.variance),
            variance_quad_error: kr.map(|k| k.quad_error),
            c_ab: kr.map(|k| k.c_ab),
        },
    };
    let stem = format!("kacrice_{}_n{}_{}", family.slug(), n, interval_tag(a, b));
    let path = write_json(&out_dir, &format!("{stem}.json"), &out)?;

    println!("mean = {mean}");
    if let Some(k) = kr {
        println!("variance = {}", k.variance);
        println!("c_ab = {}", k.c_ab);
        println!("quad_error = {}", k.quad_error + mean_err);
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------- limits

#[derive(Args, Debug)]
struct LimitsArgs {
    #[command(flatten)]
    family: FamilyOpts,
    /// Degrees, e.g. '500,1000,2000'
    #[arg(long, value_parser = parse_usize_list)]
    n_list: Option<UsizeList>,
    /// Bulk points theta
    #[arg(long, allow_hyphen_values = true, value_parser = parse_f64_list)]
    theta: Option<F64List>,
    /// Rescaled separations tau
    #[arg(long, allow_hyphen_values = true, value_parser = parse_f64_list)]
    tau: Option<F64List>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Serialize)]
struct LimitsMaxErr {
    n: usize,
    rbar: f64,
    rtilde_prime: f64,
    rtilde_doubleprime: f64,
    v_rel: f64,
}

#[derive(Serialize)]
struct LimitsOut {
    schema_version: u32,
    command: &'static str,
    config: LimitsConfigOut,
    results: Vec<LimitsMaxErr>,
}

#[derive(Serialize)]
struct LimitsConfigOut {
    #[serde(flatten)]
    family: FamilyConfigOut,
    n_list: Vec<usize>,
    theta: Vec<f64>,
    tau: Vec<f64>,
}

fn cmd_limits(args: LimitsArgs) -> anyhow::Result<()> {
    let file = load_config(&args.config)?;
    let family = resolve_family(&args.family, &file)?;
    let n_list = args
        .n_list
        .map(|l| l.0)
        .or(file.n_list)
        .unwrap_or_else(|| vec![500, 1000, 2000]);
    let thetas = args
        .theta
        .map(|l| l.0)
        .or(file.theta)
        .unwrap_or_else(|| vec![0.0, 0.3, -0.3]);
    let taus = args
        .tau
        .map(|l| l.0)
        .or(file.tau)
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let out_dir = args.out_dir.or(file.out_dir).unwrap_or_else(|| "out".into());

    let basis = OrthonormalBasis::new(family)?;
    let mut rows: Vec<String> = Vec::new();
    let mut summary = Vec::new();
    for &n in &n_list {
        let nf = n as f64;
        let mut max_err = [0.0f64; 3];
        let mut max_v_rel = 0.0f64;
        for &theta in &thetas {
            let lim_v = std::f64::consts::PI * basis.equilibrium_density(theta) / 3.0_f64.sqrt();
            let got_v = v_n(&basis, n, nf * theta)?;
            let v_err = (got_v - lim_v).abs();
            max_v_rel = max_v_rel.max(v_err / lim_v);
            rows.push(format!(
                "{n},{},0,v,{},{},{}",
                fmt17(theta),
                fmt17(got_v),
                fmt17(lim_v),
                fmt17(v_err)
            ));
            for &tau in &taus {
                let s = nf * theta - tau / 2.0;
                let t = nf * theta + tau / 2.0;
                let bun = bundle(&basis, n, s, t)?;
                let lim = sinc_limits(theta, tau, |x| basis.equilibrium_density(x));
                let entries = [
                    ("rbar", bun.rbar, lim.rbar),
                    ("rtilde_prime", bun.rtilde_prime_st, lim.rtilde_prime),
                    ("rtilde_doubleprime", bun.rtilde_doubleprime, lim.rtilde_doubleprime),
                ];
                for (k, (name, got, want)) in entries.iter().enumerate() {
                    let err = (got - want).abs();
                    max_err[k] = max_err[k].max(err);
                    rows.push(format!(
                        "{n},{},{},{name},{},{},{}",
                        fmt17(theta),
                        fmt17(tau),
                        fmt17(*got),
                        fmt17(*want),
                        fmt17(err)
                    ));
                }
            }
        }
        summary.push(LimitsMaxErr {
            n,
            rbar: max_err[0],
            rtilde_prime: max_err[1],
            rtilde_doubleprime: max_err[2],
            v_rel: max_v_rel,
        });
    }

    let out = LimitsOut {
        schema_version: SCHEMA_VERSION,
        command: "limits",
        config: LimitsConfigOut {
            family: family.into(),
            n_list: n_list.clone(),
            theta: thetas,
            tau: taus,
        },
        results: summary,
    };
    let stem = format!("limits_{}", family.slug());
    let jp = write_json(&out_dir, &format!("{stem}.json"), &out)?;
    let cp = write_csv(
        &out_dir,
        &format!("{stem}.csv"),
        "n,theta,tau,quantity,computed,limit,abs_error",
        &rows,
    )?;
    for s in &out.results {
        println!(
            "n = {}: max |err| rbar {:.3e}, rtp {:.3e}, rtpp {:.3e}, v rel {:.3e}",
            s.n, s.rbar, s.rtilde_prime, s.rtilde_doubleprime, s.v_rel
        );
    }
    eprintln!("wrote {} and {}", jp.display(), cp.display());
    Ok(())
}

// ---------------------------------------------------------------- chaos

#[derive(Args, Debug)]
struct ChaosArgs {
    #[command(flatten)]
    family: FamilyOpts,
    #[arg(long)]
    n: Option<usize>,
    /// Interval as 'lo,hi'
    #[arg(long, allow_hyphen_values = true, value_parser = parse_interval)]
    interval: Option<(f64, f64)>,
    /// Highest chaos level (2..=8)
    #[arg(long)]
    qmax: Option<usize>,
    /// Seed of the contraction-bound Monte Carlo
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count of the contraction-bound Monte Carlo
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Serialize)]
struct ChaosConfigOut {
    #[serde(flatten)]
    family: FamilyConfigOut,
    n: usize,
    a: f64,
    b: f64,
    qmax: usize,
    seed: u64,
    mc_samples: usize,
}

#[derive(Serialize)]
struct ChaosResultsOut {
    c_ab: f64,
    sigma2: std::collections::BTreeMap<String, f64>,
    partial_sum: f64,
    contraction_small: chaos::ContractionBound,
    contraction_large: chaos::ContractionBound,
}

#[derive(Serialize)]
struct ChaosOut {
    schema_version: u32,
    command: &'static str,
    config: ChaosConfigOut,
    results: ChaosResultsOut,
}

fn cmd_chaos(args: ChaosArgs) -> anyhow::Result<()> {
    let file = load_config(&args.config)?;
    let family = resolve_family(&args.family, &file)?;
    let n = args.n.or(file.n).ok_or_else(|| usage("--n is required"))?;
    let (a, b) = args
        .interval
        .or(file.interval.map(|[a, b]| (a, b)))
        .ok_or_else(|| usage("--interval is required"))?;
    let qmax = args.qmax.or(file.qmax).unwrap_or(8);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mc_samples = args.mc_samples.or(file.mc_samples).unwrap_or(1_000_000);
    let workers = args.workers.or(file.workers);
    let out_dir = args.out_dir.or(file.out_dir).unwrap_or_else(|| "out".into());

    let basis = OrthonormalBasis::new(family)?;
    let report = maybe_with_workers(workers, || chaos::chaos_variances(&basis, n, a, b, qmax, None))?;
    let contraction_small = chaos::contraction_bound(100, a, b, mc_samples, seed)?;
    let contraction_large = chaos::contraction_bound(10_000, a, b, mc_samples / 10, seed)?;

    let mut running = 0.0;
    let mut rows = Vec::new();
    let mut sigma2 = std::collections::BTreeMap::new();
    for (&q, &v) in &report.sigma2 {
        running += v;
        rows.push(format!("{q},{},{}", fmt17(v), fmt17(running)));
        sigma2.insert(format!("{q}"), v);
    }

    let out = ChaosOut {
        schema_version: SCHEMA_VERSION,
        command: "chaos",
        config: ChaosConfigOut {
            family: family.into(),
            n,
            a,
            b,
            qmax,
            seed,
            mc_samples,
        },
        results: ChaosResultsOut {
            c_ab: report.c_ab,
            sigma2,
            partial_sum: report.partial_sum(),
            contraction_small,
            contraction_large,
        },
    };
    let stem = format!("chaos_{}_n{}_{}", family.slug(), n, interval_tag(a, b));
    let jp = write_json(&out_dir, &format!("{stem}.json"), &out)?;
    let cp = write_csv(&out_dir, &format!("{stem}.csv"), "q,sigma2,partial_sum", &rows)?;

    println!("c_ab = {}", report.c_ab);
    for (&q, &v) in &report.sigma2 {
        println!("sigma2[{q}] = {v}");
    }
    println!("partial_sum = {}", report.partial_sum());
    println!(
        "contraction closed form: n=100 -> {}, n=10000 -> {}",
        out.results.contraction_small.closed_form, out.results.contraction_large.closed_form
    );
    eprintln!("wrote {} and {}", jp.display(), cp.display());
    Ok(())
}

// ---------------------------------------------------------------- report

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory containing the JSON outputs of prior commands
    #[arg(long, default_value = "out")]
    dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Kacrice(args) => cmd_kacrice(args),
        Command::Limits(args) => cmd_limits(args),
        Command::Chaos(args) => cmd_chaos(args),
        Command::Report(args) => return report::cmd_report(&args.dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
