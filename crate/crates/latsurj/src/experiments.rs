//! Monte Carlo experiments comparing empirical frequencies with the
//! predictions in `latsurj_core::predictions`.
//!
//! Trial `t` draws its matrix from ChaCha stream `t` of the master seed (the
//! exposure experiment uses streams `2t` and `2t + 1`), so any trial can be
//! replayed alone. Trials run on a rayon pool and are collected in trial
//! order, which makes every report independent of the thread count.

use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use latsurj_core::certifier::{is_surjective, surjective_mod_p};
use latsurj_core::ensembles::{sample_matrix, Distribution, Ensemble, EnsembleSpec, Fraction};
use latsurj_core::exposure::{run_exposure, trace_is_consistent, u_budget, BudgetVariant, ExposureParams, PrimeSource};
use latsurj_core::linalg;
use latsurj_core::modp::{corank_mod_p, reduce_mod};
use latsurj_core::predictions::{corank_prediction, trivial_cokernel_all_primes, trivial_cokernel_prediction};
use latsurj_core::IntMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dist::{format_distribution, parse_distribution};
use crate::report::{Outcome, Report};
use crate::stats::standard_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Corank,
    Trivial,
    Singularity,
    Exposure,
    Symmetric,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Corank => "corank",
            ExperimentKind::Trivial => "trivial",
            ExperimentKind::Singularity => "singularity",
            ExperimentKind::Exposure => "exposure",
            ExperimentKind::Symmetric => "symmetric",
        }
    }
}

/// Settings shared by all experiments; each kind reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Extra columns (`trivial`, `symmetric`).
    pub u: Option<usize>,
    /// Prime for `corank`; reduction prime for `singularity` (none means
    /// `det = 0` over the integers).
    pub p: Option<u64>,
    /// Restrict the `trivial` experiment to these primes as well.
    pub primes: Vec<u64>,
    pub dist: String,
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    /// Tolerance `|freq - prediction|` or frequency threshold, depending on
    /// the experiment; `None` selects the documented default.
    pub tolerance: Option<f64>,
    pub b: f64,
    pub simple_budget: bool,
    /// Exponents `c` for the singularity curves `exp(-c alpha n)`.
    pub c_grid: Vec<f64>,
    /// Worker threads; 0 uses the available parallelism. Not echoed in
    /// reports.
    #[serde(skip)]
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: usize, dist: &str, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            n,
            u: None,
            p: None,
            primes: Vec::new(),
            dist: dist.into(),
            trials,
            seed,
            confidence: 0.95,
            tolerance: None,
            b: 1.0,
            simple_budget: false,
            c_grid: vec![0.01, 0.05, 0.1, 0.5],
            threads: 0,
        }
    }
}

fn frac_f64(f: Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

fn validate(cfg: &ExperimentConfig) -> Result<Distribution> {
    if cfg.trials == 0 {
        bail!("trials must be at least 1");
    }
    if cfg.n == 0 {
        bail!("n must be at least 1");
    }
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        bail!("confidence must lie in (0, 1)");
    }
    parse_distribution(&cfg.dist)
}

/// Evaluate `f(t)` for `t in 0..trials` on a pool of `threads` workers,
/// returning results in trial order.
pub fn run_trials<T, F>(threads: usize, trials: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(&f).collect()))
}

fn square_spec(n: usize, dist: &Distribution, seed: u64, stream: u64) -> Result<EnsembleSpec> {
    Ok(EnsembleSpec::new(Ensemble::IidRect { n, m: n }, dist.clone(), seed)?.with_stream(stream))
}

/// The matrix of trial `t` of an experiment (for replaying single trials).
pub fn trial_matrix(cfg: &ExperimentConfig, t: u64) -> Result<IntMatrix> {
    let dist = parse_distribution(&cfg.dist)?;
    let n = cfg.n;
    let spec = match cfg.kind {
        ExperimentKind::Corank | ExperimentKind::Singularity => square_spec(n, &dist, cfg.seed, t)?,
        ExperimentKind::Exposure => square_spec(n, &dist, cfg.seed, 2 * t)?,
        ExperimentKind::Trivial => {
            EnsembleSpec::new(Ensemble::IidRect { n, m: n + cfg.u.unwrap_or(0) }, dist, cfg.seed)?.with_stream(t)
        }
        ExperimentKind::Symmetric => {
            EnsembleSpec::new(Ensemble::SymmetricPlus { n, u: symmetric_u(cfg) }, dist, cfg.seed)?.with_stream(t)
        }
    };
    Ok(sample_matrix(&spec))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = match cfg.kind {
        ExperimentKind::Corank => run_corank(cfg),
        ExperimentKind::Trivial => run_trivial(cfg),
        ExperimentKind::Singularity => run_singularity(cfg),
        ExperimentKind::Exposure => run_exposure_experiment(cfg),
        ExperimentKind::Symmetric => run_symmetric(cfg),
    }?;
    report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    Ok(report)
}

/// Coranks `k = 0, 1, 2` are checked against the limiting law (default
/// tolerance 0.02); larger `k` are reported without a check.
pub fn run_corank(cfg: &ExperimentConfig) -> Result<Report> {
    let dist = validate(cfg)?;
    let p = cfg.p.ok_or_else(|| anyhow!("corank experiment needs a prime p"))?;
    let tol = cfg.tolerance.unwrap_or(0.02);
    let pb = BigUint::from(p);
    reduce_mod(&IntMatrix::identity(1), &pb)?;
    let coranks = run_trials(cfg.threads, cfg.trials, |t| -> Result<usize> {
        let m = sample_matrix(&square_spec(cfg.n, &dist, cfg.seed, t)?);
        Ok(corank_mod_p(&reduce_mod(&m, &pb)?))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let kmax = coranks.iter().copied().max().unwrap_or(0).max(3);
    let mut outcomes = Vec::new();
    for k in 0..=kmax {
        let count = coranks.iter().filter(|&&c| c == k).count() as u64;
        let pred = corank_prediction(p, k as u32)?;
        let o = Outcome::new(format!("corank={k}"), count, cfg.trials, cfg.confidence)
            .predicted(pred.value, pred.truncation_bound);
        outcomes.push(if k <= 2 { o.within(tol) } else { o });
    }
    let config = json!({
        "n": cfg.n, "p": p, "dist": format_distribution(&dist), "trials": cfg.trials,
        "confidence": cfg.confidence, "tolerance": tol,
    });
    Ok(Report::new("corank", config, cfg.seed, cfg.trials, outcomes))
}

/// Triviality of the cokernel of `n x (n + u)` matrices, against the
/// all-primes limit (default tolerance 0.03, or 0.02 when `u = 0`) and
/// optionally against the prediction restricted to `primes`.
pub fn run_trivial(cfg: &ExperimentConfig) -> Result<Report> {
    let dist = validate(cfg)?;
    let u = cfg.u.unwrap_or(0);
    let tol = cfg.tolerance.unwrap_or(if u == 0 { 0.02 } else { 0.03 });
    let restricted = if cfg.primes.is_empty() { None } else { Some(trivial_cokernel_prediction(&cfg.primes, u as u32)?) };
    let primes: Vec<BigInt> = cfg.primes.iter().map(|&p| BigInt::from(p)).collect();
    let rows = run_trials(cfg.threads, cfg.trials, |t| -> Result<(bool, bool)> {
        let spec = EnsembleSpec::new(Ensemble::IidRect { n: cfg.n, m: cfg.n + u }, dist.clone(), cfg.seed)?.with_stream(t);
        let m = sample_matrix(&spec);
        let trivial = is_surjective(&m).is_surjective();
        let mut local = true;
        for p in &primes {
            local &= surjective_mod_p(&m, p)?;
        }
        Ok((trivial, local))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let all = trivial_cokernel_all_primes(u as u32);
    let count = rows.iter().filter(|r| r.0).count() as u64;
    let mut outcomes = vec![Outcome::new("trivial", count, cfg.trials, cfg.confidence)
        .predicted(all.value, all.truncation_bound)
        .within(tol)];
    if let Some(pred) = restricted {
        let label = format!("trivial_at_primes={}", cfg.primes.iter().map(u64::to_string).collect::<Vec<_>>().join(";"));
        let count = rows.iter().filter(|r| r.1).count() as u64;
        outcomes.push(
            Outcome::new(label, count, cfg.trials, cfg.confidence).predicted(pred.value, pred.truncation_bound).within(tol),
        );
    }
    let config = json!({
        "n": cfg.n, "u": u, "primes": cfg.primes, "dist": format_distribution(&dist), "trials": cfg.trials,
        "confidence": cfg.confidence, "tolerance": tol,
    });
    Ok(Report::new("trivial", config, cfg.seed, cfg.trials, outcomes))
}

/// Frequency of singular square matrices (over `Z`, or modulo `p`), with
/// the curves `exp(-c alpha n)` reported alongside. Passes when the
/// frequency is at most the threshold (default 0.02).
pub fn run_singularity(cfg: &ExperimentConfig) -> Result<Report> {
    let dist = validate(cfg)?;
    let threshold = cfg.tolerance.unwrap_or(0.02);
    let pb = cfg.p.map(BigUint::from);
    if let Some(p) = &pb {
        reduce_mod(&IntMatrix::identity(1), p)?;
    }
    let singular = run_trials(cfg.threads, cfg.trials, |t| -> Result<bool> {
        let m = sample_matrix(&square_spec(cfg.n, &dist, cfg.seed, t)?);
        Ok(match &pb {
            Some(p) => corank_mod_p(&reduce_mod(&m, p)?) > 0,
            None => linalg::is_singular(&m)?,
        })
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let alpha = match cfg.p {
        Some(p) => frac_f64(dist.alpha_mod_p(p)?),
        None => dist.alpha_min().as_f64(),
    };
    let count = singular.iter().filter(|&&s| s).count() as u64;
    let mut singular_outcome = Outcome::new("singular", count, cfg.trials, cfg.confidence);
    if let Some(p) = cfg.p {
        // Limiting law of the corank modulo p, for reference only.
        let full = corank_prediction(p, 0)?;
        singular_outcome = singular_outcome.predicted(1.0 - full.value, full.truncation_bound);
    }
    let outcomes = vec![singular_outcome.at_most(threshold)];
    let curves: Vec<Value> =
        cfg.c_grid.iter().map(|&c| json!({"c": c, "bound": (-c * alpha * cfg.n as f64).exp()})).collect();
    let config = json!({
        "n": cfg.n, "p": cfg.p, "dist": format_distribution(&dist), "trials": cfg.trials,
        "confidence": cfg.confidence, "threshold": threshold, "alpha": alpha,
    });
    let mut r = Report::new("singularity", config, cfg.seed, cfg.trials, outcomes);
    r.extra = json!({ "curves": curves });
    Ok(r)
}

/// One exposure run as exported to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRun {
    pub trial: u64,
    /// `(modulus, d_0)` for every tracked modulus.
    pub d0: Vec<(String, usize)>,
    pub batches: Vec<usize>,
    pub total_extra_columns: usize,
    pub achieved: bool,
    pub singular_start: bool,
    pub consistent: bool,
    pub verified: bool,
    /// `(successes, attempts, summed bound)` over batches at prime moduli
    /// with positive corank before the batch.
    pub batch_stats: (u64, u64, f64),
}

fn exposure_run(cfg: &ExperimentConfig, dist: &Distribution, params: &ExposureParams, t: u64) -> Result<ExposureRun> {
    let m0 = sample_matrix(&square_spec(cfg.n, dist, cfg.seed, 2 * t)?);
    if linalg::is_singular(&m0)? {
        return Ok(ExposureRun {
            trial: t,
            d0: Vec::new(),
            batches: Vec::new(),
            total_extra_columns: 0,
            achieved: false,
            singular_start: true,
            consistent: true,
            verified: true,
            batch_stats: (0, 0, 0.0),
        });
    }
    let trace = run_exposure(&m0, dist, params, cfg.seed, 2 * t + 1, &PrimeSource::DivisorsOfDet)?;
    let consistent = trace_is_consistent(&trace, cfg.n);
    let verified = !trace.achieved || is_surjective(&trace.extended_matrix(&m0)?).is_surjective();
    let mut stats = (0u64, 0u64, 0.0f64);
    for tm in trace.moduli.iter().filter(|tm| tm.prime) {
        let alpha = match tm.modulus.to_u64() {
            Some(p) => frac_f64(dist.alpha_mod_p(p)?),
            None => 1.0 - frac_f64(dist.max_weight()),
        };
        for (i, &k) in trace.batches.iter().enumerate() {
            let (before, after) = (tm.coranks[i], tm.coranks[i + 1]);
            if before > 0 {
                stats.1 += 1;
                stats.0 += u64::from(after < before);
                stats.2 += 1.0 - (1.0 - alpha).powf((before * k) as f64);
            }
        }
    }
    Ok(ExposureRun {
        trial: t,
        d0: trace.moduli.iter().map(|tm| (tm.modulus.to_string(), tm.coranks[0])).collect(),
        batches: trace.batches.clone(),
        total_extra_columns: trace.total_extra_columns,
        achieved: trace.achieved,
        singular_start: false,
        consistent,
        verified,
        batch_stats: stats,
    })
}

/// Column-exposure runs on `n x n` starting matrices. Passes when at least
/// the threshold fraction of runs (default 0.95) reach surjectivity within
/// `u_budget` extra columns, every trace is consistent, every achieved run
/// certifies as surjective, and batch success clears its bound.
pub fn run_exposure_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let dist = validate(cfg)?;
    let threshold = cfg.tolerance.unwrap_or(0.95);
    let variant = if cfg.simple_budget { BudgetVariant::Simple } else { BudgetVariant::Refined };
    let params = ExposureParams { b: cfg.b, variant, ..Default::default() };
    let alpha = dist.alpha_min();
    if alpha.degenerate {
        bail!("distribution is degenerate (alpha = 0)");
    }
    let budget = u_budget(cfg.n, alpha.as_f64(), cfg.b, variant);
    let runs = run_trials(cfg.threads, cfg.trials, |t| exposure_run(cfg, &dist, &params, t))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let trials = cfg.trials;
    let within = runs.iter().filter(|r| r.achieved && r.total_extra_columns <= budget).count() as u64;
    let achieved = runs.iter().filter(|r| r.achieved).count() as u64;
    let consistent = runs.iter().filter(|r| r.consistent).count() as u64;
    let verified = runs.iter().filter(|r| r.achieved && r.verified).count() as u64;
    let singular = runs.iter().filter(|r| r.singular_start).count() as u64;
    let (succ, att, bound_sum) =
        runs.iter().fold((0, 0, 0.0), |a, r| (a.0 + r.batch_stats.0, a.1 + r.batch_stats.1, a.2 + r.batch_stats.2));
    let c = cfg.confidence;
    let mut outcomes = vec![
        Outcome::new("within_budget", within, trials, c).at_least(threshold),
        Outcome::new("achieved", achieved, trials, c),
        Outcome::new("consistent_trace", consistent, trials, c).check(consistent == trials, "every trace consistent"),
        Outcome::new("verified_surjective", verified, trials, c)
            .check(verified == achieved, "every achieved run certifies surjective"),
        Outcome::new("singular_start", singular, trials, c),
    ];
    if att > 0 {
        let mean_bound = bound_sum / att as f64;
        let se = standard_error(succ, att);
        let o = Outcome::new("batch_success", succ, att, c).predicted(mean_bound, 0.0);
        let pass = o.freq >= mean_bound - 4.0 * se;
        outcomes.push(o.check(pass, "freq >= mean bound - 4 standard errors"));
    }
    let config = json!({
        "n": cfg.n, "dist": format_distribution(&dist), "trials": trials, "B": cfg.b,
        "budget_variant": if cfg.simple_budget { "simple" } else { "refined" },
        "u_budget": budget, "alpha": alpha.as_f64(), "confidence": c, "threshold": threshold,
    });
    let mut r = Report::new("exposure", config, cfg.seed, trials, outcomes);
    r.extra = json!({ "runs": runs });
    Ok(r)
}

/// One CSV row per exposure run.
pub fn exposure_runs_csv(report: &Report) -> Result<String> {
    let runs: Vec<ExposureRun> = serde_json::from_value(report.extra["runs"].clone())?;
    let mut out = String::from("trial,seed,stream,d0,batches,total_extra_columns,achieved\n");
    for r in runs {
        let d0: Vec<String> = r.d0.iter().map(|(p, d)| format!("{p}:{d}")).collect();
        let batches: Vec<String> = r.batches.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.trial,
            report.seed,
            2 * r.trial + 1,
            d0.join(";"),
            batches.join(";"),
            r.total_extra_columns,
            r.achieved
        ));
    }
    Ok(out)
}

/// `u` for the symmetric model: explicit, or `ceil(B sqrt(n ln n))`.
pub fn symmetric_u(cfg: &ExperimentConfig) -> usize {
    cfg.u.unwrap_or_else(|| {
        let n = cfg.n as f64;
        (cfg.b * (n * n.ln()).sqrt()).ceil() as usize
    })
}

/// Symmetric `n x n` block plus `u` iid columns. The `u = 0` control uses
/// the symmetric block of the same sample. Passes when the triviality
/// frequency reaches the threshold (default 0.8), the control is strictly
/// lower, and every sampled block is symmetric.
pub fn run_symmetric(cfg: &ExperimentConfig) -> Result<Report> {
    let dist = validate(cfg)?;
    let u = symmetric_u(cfg);
    let threshold = cfg.tolerance.unwrap_or(0.8);
    let n = cfg.n;
    let rows = run_trials(cfg.threads, cfg.trials, |t| -> Result<(bool, bool, bool)> {
        let spec = EnsembleSpec::new(Ensemble::SymmetricPlus { n, u }, dist.clone(), cfg.seed)?.with_stream(t);
        let m = sample_matrix(&spec);
        let symmetric = (0..n).all(|i| (0..i).all(|j| m.get(i, j) == m.get(j, i)));
        let square = m.select_columns(&(0..n).collect::<Vec<_>>())?;
        Ok((symmetric, is_surjective(&m).is_surjective(), is_surjective(&square).is_surjective()))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let c = cfg.confidence;
    let count = |f: fn(&(bool, bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count() as u64;
    let (sym, main, control) = (count(|r| r.0), count(|r| r.1), count(|r| r.2));
    let outcomes = vec![
        Outcome::new("trivial", main, cfg.trials, c).at_least(threshold),
        Outcome::new("trivial_u0", control, cfg.trials, c).check(control < main, "control below main frequency"),
        Outcome::new("symmetric_block", sym, cfg.trials, c).check(sym == cfg.trials, "every block symmetric"),
    ];
    let config = json!({
        "n": n, "u": u, "B": cfg.b, "dist": format_distribution(&dist), "trials": cfg.trials,
        "confidence": c, "threshold": threshold,
    });
    Ok(Report::new("symmetric", config, cfg.seed, cfg.trials, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ExperimentKind, n: usize, dist: &str, trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind, n, dist, trials, 3);
        c.threads = 2;
        c
    }

    #[test]
    fn corank_point_mass_is_full_corank() {
        let mut c = cfg(ExperimentKind::Corank, 6, "point(0)", 20);
        c.p = Some(2);
        let r = run_corank(&c).unwrap();
        assert_eq!(r.outcome("corank=6").unwrap().freq, 1.0);
        assert_eq!(r.outcomes.iter().map(|o| o.count).sum::<u64>(), 20);
        assert!(!r.pass);
    }

    #[test]
    fn corank_frequencies_partition_trials() {
        let mut c = cfg(ExperimentKind::Corank, 12, "uniform01", 300);
        c.p = Some(3);
        let r = run_corank(&c).unwrap();
        assert_eq!(r.outcomes.iter().map(|o| o.count).sum::<u64>(), 300);
        assert!(run_corank(&cfg(ExperimentKind::Corank, 12, "uniform01", 10)).is_err());
    }

    #[test]
    fn trivial_with_many_extra_columns() {
        let mut c = cfg(ExperimentKind::Trivial, 20, "uniform01", 60);
        c.u = Some(20);
        c.primes = vec![2];
        let r = run_trivial(&c).unwrap();
        assert!(r.outcome("trivial").unwrap().freq >= 0.98, "{r:?}");
        assert!(r.outcome("trivial_at_primes=2").is_some());
    }

    #[test]
    fn singularity_point_mass_at_one() {
        let r = run_singularity(&cfg(ExperimentKind::Singularity, 4, "point(1)", 10)).unwrap();
        assert_eq!(r.outcome("singular").unwrap().freq, 1.0);
        let mut c = cfg(ExperimentKind::Singularity, 4, "point(1)", 10);
        c.p = Some(2);
        assert_eq!(run_singularity(&c).unwrap().outcome("singular").unwrap().count, 10);
    }

    #[test]
    fn exposure_small_runs() {
        let mut c = cfg(ExperimentKind::Exposure, 12, "uniform01", 20);
        c.b = 2.0;
        let r = run_exposure_experiment(&c).unwrap();
        assert_eq!(r.outcome("consistent_trace").unwrap().pass, Some(true));
        assert_eq!(r.outcome("verified_surjective").unwrap().pass, Some(true));
        let csv = exposure_runs_csv(&r).unwrap();
        assert_eq!(csv.lines().count(), 21);
    }

    #[test]
    fn symmetric_defaults() {
        let c = cfg(ExperimentKind::Symmetric, 40, "uniform01", 1);
        assert_eq!(symmetric_u(&c), 13);
        let r = run_symmetric(&cfg(ExperimentKind::Symmetric, 10, "uniform01", 20)).unwrap();
        assert_eq!(r.outcome("symmetric_block").unwrap().count, 20);
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let mut a = cfg(ExperimentKind::Trivial, 10, "uniform-1,0,1", 40);
        a.u = Some(1);
        let mut b = a.clone();
        b.threads = 1;
        assert_eq!(run_trivial(&a).unwrap().to_json(), run_trivial(&b).unwrap().to_json());
    }

    #[test]
    fn trial_matrices_replay() {
        let mut c = cfg(ExperimentKind::Corank, 5, "uniform01", 4);
        c.p = Some(2);
        let m = trial_matrix(&c, 2).unwrap();
        let d = parse_distribution("uniform01").unwrap();
        assert_eq!(m, sample_matrix(&square_spec(5, &d, 3, 2).unwrap()));
    }
}
