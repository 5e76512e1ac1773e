//! Command-line interface. Exit codes: 0 on success or when every check
//! passes, 1 when a check fails, 2 on usage or input errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use latsurj_core::certifier::is_surjective;
use latsurj_core::ensembles::{sample_matrix, Ensemble, EnsembleSpec};
use latsurj_core::fq::FieldTable;
use latsurj_core::linalg::{cokernel, smith_normal_form};
use latsurj_core::predictions::{corank_prediction, trivial_cokernel_all_primes, trivial_cokernel_prediction};
use serde::Serialize;
use serde_json::json;

use crate::config;
use crate::dist::{parse_distribution, parse_elements, parse_fq_distribution, parse_u64_list};
use crate::experiments::{self, ExperimentConfig, ExperimentKind};
use crate::format::{certificate_json, parse_matrix, snf_json, write_matrix};
use crate::sweeps::{check_claims, run_sweep, SweepConfig};

#[derive(Debug, Parser)]
#[command(name = "latsurj", version, about = "Surjectivity of random integer matrices: certificates, predictions, experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by all subcommands. Each can also be set through a
/// `LATSURJ_<NAME>` environment variable or a `--config` file.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Rows (matrix dimension).
    #[arg(long, global = true, env = "LATSURJ_N")]
    pub n: Option<usize>,
    /// Columns for `sample` (default n).
    #[arg(long, global = true, env = "LATSURJ_M")]
    pub m: Option<usize>,
    /// Extra columns.
    #[arg(long, global = true, env = "LATSURJ_U")]
    pub u: Option<usize>,
    /// Prime (corank experiment; singularity modulo p).
    #[arg(long, global = true, env = "LATSURJ_P")]
    pub p: Option<u64>,
    /// Field order or prime power.
    #[arg(long, global = true, env = "LATSURJ_Q")]
    pub q: Option<u64>,
    /// Corank for `predict corank`; number of summands for `fourier check`.
    #[arg(long, global = true, env = "LATSURJ_K")]
    pub k: Option<u32>,
    /// Entry distribution literal, e.g. `uniform01` or `0:9/10,1:1/10`.
    #[arg(long, global = true, env = "LATSURJ_DIST")]
    pub dist: Option<String>,
    #[arg(long, global = true, env = "LATSURJ_TRIALS")]
    pub trials: Option<u64>,
    #[arg(long, global = true, env = "LATSURJ_SEED")]
    pub seed: Option<u64>,
    /// Budget constant B.
    #[arg(long = "B", global = true, env = "LATSURJ_B")]
    pub b: Option<f64>,
    /// Worker threads (default: available parallelism). Output does not
    /// depend on this.
    #[arg(long, global = true, env = "LATSURJ_THREADS")]
    pub threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, env = "LATSURJ_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, env = "LATSURJ_FORMAT", default_value_t = Format::Json)]
    pub format: Format,
    /// Comma-separated primes (restricted triviality prediction).
    #[arg(long, global = true, env = "LATSURJ_PRIMES")]
    pub primes: Option<String>,
    #[arg(long, global = true, env = "LATSURJ_CONFIDENCE")]
    pub confidence: Option<f64>,
    /// Tolerance or frequency threshold of the experiment's check.
    #[arg(long, global = true, env = "LATSURJ_TOL")]
    pub tol: Option<f64>,
    /// `key = value` file supplying defaults for the flags above.
    #[arg(long, global = true, env = "LATSURJ_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a matrix in the text format.
    Sample {
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Symmetric n x n block followed by u iid columns.
        #[arg(long)]
        symmetric: bool,
    },
    /// Certify surjectivity of a matrix file (stdin if absent or `-`).
    Certify {
        file: Option<PathBuf>,
        /// Include wall-clock time in the certificate.
        #[arg(long)]
        timing: bool,
    },
    /// Smith normal form and cokernel of a matrix file.
    Snf { file: Option<PathBuf> },
    /// Limiting probabilities.
    Predict {
        #[command(subcommand)]
        what: Predict,
    },
    /// Monte Carlo experiment with a JSON or CSV report.
    Experiment {
        #[arg(value_enum)]
        kind: KindArg,
        /// Use the simpler extra-column budget in the exposure experiment.
        #[arg(long)]
        simple_budget: bool,
        /// Comma-separated exponents c for the singularity curves.
        #[arg(long)]
        c_grid: Option<String>,
    },
    /// Finite-field anti-concentration checks.
    Fourier {
        #[command(subcommand)]
        what: Fourier,
    },
}

#[derive(Debug, Subcommand)]
pub enum Predict {
    /// P(corank = k) for square matrices over F_q (`--q`, `--k`).
    Corank,
    /// P(trivial cokernel) with u extra columns (`--u`, optional `--primes`).
    Trivial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Corank,
    Trivial,
    Singularity,
    Exposure,
    Symmetric,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Corank => ExperimentKind::Corank,
            KindArg::Trivial => ExperimentKind::Trivial,
            KindArg::Singularity => ExperimentKind::Singularity,
            KindArg::Exposure => ExperimentKind::Exposure,
            KindArg::Symmetric => ExperimentKind::Symmetric,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Fourier {
    /// Check every claim on one law over F_q (`--q`, `--mu`, `--w`, `--k`).
    Check {
        /// Law on element codes, e.g. `0:1/2,1:1/4,2:1/4`, or `uniform`.
        #[arg(long, default_value = "uniform")]
        mu: String,
        /// Coefficients as element codes, e.g. `1,1,2`.
        #[arg(long)]
        w: Option<String>,
        /// Targets r (default: every element).
        #[arg(long)]
        r: Option<String>,
        /// Level for the nesting check.
        #[arg(long, default_value_t = 1.0)]
        v: f64,
    },
    /// Exhaustive grids and random sweeps; exits 1 on any violation.
    Sweep {
        /// Random instances for the nesting and cosine sweeps.
        #[arg(long)]
        instances: Option<u64>,
        /// Largest law denominator in the Littlewood-Offord grid.
        #[arg(long)]
        max_denom: Option<u64>,
        /// Largest number of coefficients in the Littlewood-Offord grid.
        #[arg(long)]
        max_m: Option<usize>,
        /// Largest modulus in the Kneser sweep.
        #[arg(long)]
        kneser_max: Option<usize>,
    },
}

/// Error that maps to exit code 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

fn usage<T>(r: Result<T>) -> std::result::Result<T, Usage> {
    r.map_err(Usage)
}

/// Run with raw arguments (including the program name) and return the exit
/// code.
pub fn run_cli(args: Vec<String>) -> i32 {
    if let Err(e) = load_config(&args) {
        eprintln!("error: {e:#}");
        return 2;
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, &args) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Usage(e)) => {
            eprintln!("error: {e:#}\nsee `latsurj --help` for usage");
            2
        }
    }
}

fn load_config(args: &[String]) -> Result<()> {
    let path = config::config_arg(args).or_else(|| std::env::var(format!("{}CONFIG", config::ENV_PREFIX)).ok());
    let Some(path) = path else { return Ok(()) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let entries = config::parse_config(&text).with_context(|| format!("in config {path}"))?;
    for (name, value) in config::env_overlay(&entries, |name| std::env::var_os(name).is_some()) {
        std::env::set_var(name, value);
    }
    Ok(())
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_input(file: &Option<PathBuf>) -> Result<String> {
    match file {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing --{flag}"))
}

fn execute(cli: &Cli, args: &[String]) -> std::result::Result<bool, Usage> {
    let g = &cli.global;
    eprintln!("latsurj: resolved config {}", serde_json::to_string(g).unwrap_or_default());
    match &cli.command {
        Command::Sample { stream, symmetric } => usage(sample(g, *stream, *symmetric)),
        Command::Certify { file, timing } => usage(certify(g, file, *timing)),
        Command::Snf { file } => usage(snf(g, file)),
        Command::Predict { what } => usage(predict(g, what)),
        Command::Experiment { kind, simple_budget, c_grid } => {
            let cfg = usage(experiment_config(g, (*kind).into(), *simple_budget, c_grid.as_deref()))?;
            eprintln!("latsurj: experiment config {}", serde_json::to_string(&cfg).unwrap_or_default());
            let mut report = usage(experiments::run(&cfg))?;
            report.invocation = Some(args.to_vec());
            let text = match (g.format, cfg.kind) {
                (Format::Json, _) => report.to_json(),
                (Format::Csv, ExperimentKind::Exposure) => usage(experiments::exposure_runs_csv(&report))?,
                (Format::Csv, _) => report.to_csv(),
            };
            usage(emit(g, &text))?;
            Ok(report.pass)
        }
        Command::Fourier { what: Fourier::Check { mu, w, r, v } } => usage(fourier_check(g, mu, w, r, *v)),
        Command::Fourier { what: Fourier::Sweep { instances, max_denom, max_m, kneser_max } } => {
            let mut cfg = SweepConfig { seed: g.seed.unwrap_or(0), threads: g.threads.unwrap_or(0), ..Default::default() };
            cfg.random_instances = instances.unwrap_or(cfg.random_instances);
            cfg.lo_max_denom = max_denom.unwrap_or(cfg.lo_max_denom);
            cfg.lo_max_m = max_m.unwrap_or(cfg.lo_max_m);
            cfg.kneser_max = kneser_max.unwrap_or(cfg.kneser_max);
            eprintln!("latsurj: sweep config {}", serde_json::to_string(&cfg).unwrap_or_default());
            let report = usage(run_sweep(&cfg))?;
            let mut v = usage(serde_json::to_value(&report).map_err(Into::into))?;
            v["invocation"] = json!(args);
            usage(emit(g, &pretty(&v)))?;
            Ok(report.pass)
        }
    }
}

fn sample(g: &Global, stream: u64, symmetric: bool) -> Result<bool> {
    let n = need(g.n, "n")?;
    let dist = parse_distribution(g.dist.as_deref().unwrap_or("uniform01"))?;
    let ensemble =
        if symmetric { Ensemble::SymmetricPlus { n, u: g.u.unwrap_or(0) } } else { Ensemble::IidRect { n, m: g.m.unwrap_or(n) } };
    let spec = EnsembleSpec::new(ensemble, dist, g.seed.unwrap_or(0))?.with_stream(stream);
    emit(g, &write_matrix(&sample_matrix(&spec)))?;
    Ok(true)
}

fn certify(g: &Global, file: &Option<PathBuf>, timing: bool) -> Result<bool> {
    let m = parse_matrix(&read_input(file)?)?;
    let start = Instant::now();
    let cert = is_surjective(&m);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    emit(g, &pretty(&certificate_json(&cert, timing.then_some(elapsed))))?;
    Ok(true)
}

fn snf(g: &Global, file: &Option<PathBuf>) -> Result<bool> {
    let m = parse_matrix(&read_input(file)?)?;
    emit(g, &pretty(&snf_json(&smith_normal_form(&m), &cokernel(&m))))?;
    Ok(true)
}

fn predict(g: &Global, what: &Predict) -> Result<bool> {
    let (v, p) = match what {
        Predict::Corank => {
            let (q, k) = (need(g.q, "q")?, need(g.k, "k")?);
            (json!({"prediction": "corank", "q": q, "k": k}), corank_prediction(q, k)?)
        }
        Predict::Trivial => {
            let u = need(g.u, "u")? as u32;
            match &g.primes {
                Some(list) => {
                    let primes = parse_u64_list(list)?;
                    (json!({"prediction": "trivial", "u": u, "primes": primes}), trivial_cokernel_prediction(&primes, u)?)
                }
                None => {
                    if u == 0 {
                        bail!("the all-primes prediction needs u >= 1 (it is 0 for u = 0)");
                    }
                    (json!({"prediction": "trivial", "u": u, "primes": "all"}), trivial_cokernel_all_primes(u))
                }
            }
        }
    };
    let mut v = v;
    v["value"] = json!(p.value);
    v["tail_bound"] = json!(p.truncation_bound);
    v["terms_used"] = json!(p.terms_used);
    let text = match g.format {
        Format::Json => pretty(&v),
        Format::Csv => format!("value,tail_bound,terms_used\n{},{},{}\n", p.value, p.truncation_bound, p.terms_used),
    };
    emit(g, &text)?;
    Ok(true)
}

fn experiment_config(g: &Global, kind: ExperimentKind, simple_budget: bool, c_grid: Option<&str>) -> Result<ExperimentConfig> {
    let n = need(g.n, "n")?;
    let dist = g.dist.clone().unwrap_or_else(|| "uniform01".into());
    let mut cfg = ExperimentConfig::new(kind, n, &dist, g.trials.unwrap_or(1000), g.seed.unwrap_or(0));
    cfg.u = g.u;
    cfg.p = g.p;
    if let Some(list) = &g.primes {
        cfg.primes = parse_u64_list(list)?;
    }
    if let Some(c) = g.confidence {
        cfg.confidence = c;
    }
    cfg.tolerance = g.tol;
    if let Some(b) = g.b {
        cfg.b = b;
    }
    cfg.simple_budget = simple_budget;
    if let Some(grid) = c_grid {
        cfg.c_grid = grid.split(',').map(|c| c.trim().parse::<f64>().with_context(|| format!("bad c {c:?}"))).collect::<Result<_>>()?;
    }
    cfg.threads = g.threads.unwrap_or(0);
    if kind == ExperimentKind::Corank && cfg.p.is_none() {
        bail!("corank experiment needs --p");
    }
    Ok(cfg)
}

fn fourier_check(g: &Global, mu: &str, w: &Option<String>, r: &Option<String>, v: f64) -> Result<bool> {
    let q = need(g.q, "q")?;
    let field = Arc::new(FieldTable::of_order(q)?);
    let mu = parse_fq_distribution(field.clone(), mu)?;
    let w = w.as_deref().map(|s| parse_elements(&field, s)).transpose()?;
    let targets = r.as_deref().map(|s| parse_elements(&field, s)).transpose()?.unwrap_or_default();
    let k = g.k.unwrap_or(2) as usize;
    let (report, pass) = check_claims(&mu, w.as_deref(), &targets, v, k)?;
    emit(g, &pretty(&report))?;
    Ok(pass)
}

/// Every config-file key names a flag with the matching environment
/// variable.
pub fn config_keys_match_flags() -> bool {
    let cmd = Cli::command();
    config::KEYS.iter().all(|key| {
        let env = config::env_name(key);
        cmd.get_arguments().any(|a| a.get_env().is_some_and(|e| e == env.as_str()))
    })
}
