//! Exhaustive and randomized checks of the finite-field and additive
//! combinatorics claims, plus the subspace-probability bound over `F_p`.
//!
//! Randomized instances draw from ChaCha stream `i` of the sweep seed, so
//! results do not depend on the thread count.

use std::f64::consts::PI;
use std::sync::Arc;

use anyhow::{Context, Result};
use latsurj_core::ensembles::stream_rng;
use latsurj_core::fq::{self, Elem, FieldTable, FqDistribution, SpectrumOutcome};
use latsurj_core::modp::odlyzko_check;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub name: String,
    pub cases: u64,
    pub violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
    pub pass: bool,
}

impl SweepSection {
    fn counted(name: &str, cases: u64, violations: u64) -> Self {
        SweepSection { name: name.into(), cases, violations, worst_ratio: None, detail: Value::Null, pass: violations == 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub sections: Vec<SweepSection>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl SweepReport {
    pub fn section(&self, name: &str) -> Option<&SweepSection> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub seed: u64,
    pub lo_fields: Vec<u64>,
    pub lo_max_denom: u64,
    pub lo_max_m: usize,
    pub kneser_max: usize,
    pub random_instances: u64,
    pub spectrum_fields: Vec<u64>,
    pub spectrum_max_denom: u64,
    pub odlyzko_primes: Vec<u64>,
    pub odlyzko_max_n: usize,
    pub odlyzko_max_denom: u64,
    pub full_rank_fields: Vec<u64>,
    pub full_rank_trials: u64,
    #[serde(skip)]
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 0,
            lo_fields: vec![2, 3, 4, 5, 7, 8],
            lo_max_denom: 8,
            lo_max_m: 6,
            kneser_max: 12,
            random_instances: 100_000,
            spectrum_fields: vec![2, 3, 4, 5, 7, 8, 9],
            spectrum_max_denom: 4,
            odlyzko_primes: vec![2, 3],
            odlyzko_max_n: 5,
            odlyzko_max_denom: 4,
            full_rank_fields: vec![2, 3, 4, 5],
            full_rank_trials: 400,
            threads: 0,
        }
    }
}

fn field(q: u64) -> Result<Arc<FieldTable>> {
    Ok(Arc::new(FieldTable::of_order(q).with_context(|| format!("no field of order {q}"))?))
}

/// Littlewood-Offord bound over every law with denominator at most
/// `max_denom` and every multiset of up to `max_m` nonzero coefficients.
pub fn lo_grid(qs: &[u64], max_denom: u64, max_m: usize) -> Result<SweepSection> {
    let mut total = fq::LoCellReport::default();
    let mut degenerate = 0u64;
    let mut per_field = Vec::new();
    for &q in qs {
        let k = field(q)?;
        let laws = fq::distributions_with_denominator(q as usize, max_denom);
        let cells = laws
            .into_par_iter()
            .map(|num| fq::lo_sweep_cell(&FqDistribution::from_numerators(k.clone(), num)?, max_m))
            .collect::<latsurj_core::Result<Vec<_>>>()?;
        let mut cell_total = fq::LoCellReport::default();
        for c in &cells {
            match c {
                Some(c) => cell_total.merge(c),
                None => degenerate += 1,
            }
        }
        per_field.push(json!({"q": q, "cases": cell_total.cases, "violations": cell_total.violations, "worst_ratio": cell_total.worst_ratio}));
        total.merge(&cell_total);
    }
    let mut s = SweepSection::counted("littlewood_offord", total.cases, total.violations);
    s.worst_ratio = Some(total.worst_ratio);
    s.detail = json!({"max_denominator": max_denom, "max_m": max_m, "degenerate_laws": degenerate, "fields": per_field});
    Ok(s)
}

/// Every pair of nonempty subsets of `Z/N` for `N <= max_n`.
pub fn kneser(max_n: usize) -> Result<SweepSection> {
    let sweeps = (1..=max_n).into_par_iter().map(fq::kneser_sweep).collect::<latsurj_core::Result<Vec<_>>>()?;
    let pairs = sweeps.iter().map(|s| s.pairs).sum();
    let violations = sweeps.iter().map(|s| s.violations + s.non_subgroups).sum();
    let mut s = SweepSection::counted("kneser", pairs, violations);
    s.detail = json!({
        "max_modulus": max_n,
        "equality_cases": sweeps.iter().map(|s| s.equality_cases).sum::<u64>(),
    });
    Ok(s)
}

const RANDOM_FIELDS: [u64; 7] = [2, 3, 4, 5, 7, 8, 9];

/// Random `(mu, w, v, k)` instances of the level-set nesting.
pub fn nesting_random(count: u64, seed: u64) -> Result<SweepSection> {
    let fields = RANDOM_FIELDS.iter().map(|&q| field(q)).collect::<Result<Vec<_>>>()?;
    let failures = (0..count)
        .into_par_iter()
        .map(|i| -> latsurj_core::Result<bool> {
            let mut rng = stream_rng(seed, i);
            let k = fields[rng.gen_range(0..fields.len())].clone();
            let q = k.order();
            let mut num: Vec<u64> = (0..q).map(|_| rng.gen_range(0..4)).collect();
            if num.iter().all(Zero::is_zero) {
                num[rng.gen_range(0..q as usize)] = 1;
            }
            let mu = FqDistribution::from_numerators(k, num)?;
            let m = rng.gen_range(1..=5);
            let w: Vec<Elem> = (0..m).map(|_| rng.gen_range(0..q)).collect();
            let v = rng.gen_range(0.0..m as f64);
            let reps = rng.gen_range(1..=4);
            Ok(!fq::check_level_set_nesting(&mu, &w, v, reps)?.holds())
        })
        .collect::<latsurj_core::Result<Vec<_>>>()?;
    Ok(SweepSection::counted("level_set_nesting", count, failures.iter().filter(|&&f| f).count() as u64))
}

/// Random angle tuples for the cosine inequality.
pub fn cosine_random(count: u64, seed: u64) -> SweepSection {
    let (violations, worst) = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let k = rng.gen_range(1..=8);
            let betas: Vec<f64> = (0..k).map(|_| rng.gen_range(-PI..=PI)).collect();
            let c = fq::cosine_inequality_check(&betas);
            (u64::from(!c.holds), c.rhs - c.lhs)
        })
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| (a.0 + b.0, a.1.max(b.1)));
    let mut s = SweepSection::counted("cosine_inequality", count, violations);
    s.detail = json!({"max_rhs_minus_lhs": worst});
    s
}

/// No nontrivial subgroup inside the large spectrum, for every law with
/// small denominator.
pub fn spectrum_grid(qs: &[u64], max_denom: u64) -> Result<SweepSection> {
    let mut cases = 0;
    let mut violations = 0;
    let mut hypothesis_fails = 0;
    for &q in qs {
        let k = field(q)?;
        let outcomes = fq::distributions_with_denominator(q as usize, max_denom)
            .into_par_iter()
            .map(|num| fq::spectrum_subgroup_check(&FqDistribution::from_numerators(k.clone(), num)?))
            .collect::<latsurj_core::Result<Vec<_>>>()?;
        for o in outcomes {
            cases += 1;
            match o {
                SpectrumOutcome::Holds => {}
                SpectrumOutcome::Violated(_) => violations += 1,
                SpectrumOutcome::HypothesisFails => hypothesis_fails += 1,
            }
        }
    }
    let mut s = SweepSection::counted("spectrum_subgroups", cases, violations);
    s.detail = json!({"max_denominator": max_denom, "hypothesis_fails": hypothesis_fails});
    Ok(s)
}

/// Every subspace of `F_p^n` against every residue law with small
/// denominator.
pub fn odlyzko_suite(primes: &[u64], max_n: usize, max_denom: u64) -> Result<SweepSection> {
    let mut jobs = Vec::new();
    for &p in primes {
        for n in 1..=max_n {
            for law in fq::distributions_with_denominator(p as usize, max_denom) {
                jobs.push((p, n, law));
            }
        }
    }
    let reports = jobs
        .into_par_iter()
        .map(|(p, n, law)| odlyzko_check(p, n, &law))
        .collect::<latsurj_core::Result<Vec<_>>>()?;
    let mut s = SweepSection::counted(
        "subspace_probability",
        reports.iter().map(|r| r.subspaces).sum(),
        reports.iter().map(|r| r.violations).sum(),
    );
    s.worst_ratio = Some(reports.iter().map(|r| r.worst_ratio).fold(0.0, f64::max));
    s.detail = json!({"primes": primes, "max_n": max_n, "max_denominator": max_denom, "laws": reports.len()});
    Ok(s)
}

/// Full-rank frequency of `n - k` uniform columns against its lower bound.
pub fn full_rank(qs: &[u64], trials: u64, seed: u64) -> Result<SweepSection> {
    let (n, k) = (16, 8);
    let mut rows = Vec::new();
    let mut failures = 0;
    for &q in qs {
        let mu = FqDistribution::uniform(field(q)?);
        let independent = (0..trials).into_par_iter().filter(|&t| fq::full_rank_trial(&mu, n, k, seed, t)).count() as u64;
        let r = fq::full_rank_report(&mu, n, k, trials, independent)?;
        failures += u64::from(!r.holds);
        rows.push(json!({"q": q, "frequency": r.frequency, "bound": r.bound, "std_error": r.std_error, "holds": r.holds}));
    }
    let mut s = SweepSection::counted("full_rank", qs.len() as u64, failures);
    s.detail = json!({"n": n, "k": k, "trials": trials, "fields": rows});
    Ok(s)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let start = std::time::Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    let sections = pool.install(|| -> Result<Vec<SweepSection>> {
        Ok(vec![
            lo_grid(&cfg.lo_fields, cfg.lo_max_denom, cfg.lo_max_m)?,
            kneser(cfg.kneser_max)?,
            nesting_random(cfg.random_instances, cfg.seed)?,
            cosine_random(cfg.random_instances, cfg.seed),
            spectrum_grid(&cfg.spectrum_fields, cfg.spectrum_max_denom)?,
            odlyzko_suite(&cfg.odlyzko_primes, cfg.odlyzko_max_n, cfg.odlyzko_max_denom)?,
            full_rank(&cfg.full_rank_fields, cfg.full_rank_trials, cfg.seed)?,
        ])
    })?;
    let pass = sections.iter().all(|s| s.pass);
    Ok(SweepReport { seed: cfg.seed, sections, pass, runtime_ms: Some(start.elapsed().as_millis() as u64) })
}

/// Evaluate every claim on one law `mu`, optionally with coefficients `w`
/// (enabling the Littlewood-Offord bound at `targets` and the level-set
/// nesting at `(v, k)`). Returns the JSON report and whether all applicable
/// claims hold.
pub fn check_claims(mu: &FqDistribution, w: Option<&[Elem]>, targets: &[Elem], v: f64, k: usize) -> Result<(Value, bool)> {
    let q = mu.field().order();
    let mut pass = true;
    let alpha = mu.balance_alpha()?;
    let alpha_f = *alpha.numer() as f64 / *alpha.denom() as f64;
    let hat = mu.fourier_transform();
    let energy: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
    let collision: f64 = mu.numerators().iter().map(|&x| (x as f64 / mu.denominator() as f64).powi(2)).sum();
    let parseval_ok = (energy - q as f64 * collision).abs() < 1e-9 * q as f64;
    pass &= parseval_ok;
    let sym = fq::symmetrized_balance(mu);
    pass &= sym.within_bounds;
    let spectrum = match fq::spectrum_subgroup_check(mu)? {
        SpectrumOutcome::Holds => json!({"outcome": "holds"}),
        SpectrumOutcome::Violated(h) => {
            pass = false;
            json!({"outcome": "violated", "subgroup": h})
        }
        SpectrumOutcome::HypothesisFails => json!({"outcome": "hypothesis_fails"}),
    };
    let mut out = json!({
        "q": q,
        "numerators": mu.numerators(),
        "denominator": mu.denominator(),
        "alpha": alpha.to_string(),
        "alpha_f64": alpha_f,
        "parseval": {"energy": energy, "q_times_collision": q as f64 * collision, "holds": parseval_ok},
        "symmetrized_balance": {"alpha": sym.alpha, "alpha_sym": sym.alpha_sym, "holds": sym.within_bounds},
        "spectrum": spectrum,
    });
    if let Some(w) = w {
        if !alpha.is_zero() && w.iter().any(|&c| c != 0) {
            let rs: Vec<Elem> = if targets.is_empty() { (0..q).collect() } else { targets.to_vec() };
            let mut lo = Vec::new();
            for r in rs {
                let c = fq::lo_bound_check(mu, w, r)?;
                pass &= c.holds;
                lo.push(json!({"r": r, "probability": format!("{}/{}", c.probability.0, c.probability.1), "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds}));
            }
            out["littlewood_offord"] = json!(lo);
        }
        let nest = fq::check_level_set_nesting(mu, w, v, k)?;
        pass &= nest.holds();
        out["nesting"] = json!({
            "v": v, "k": k, "level_set": nest.level_set, "sumset": nest.sumset,
            "target": nest.target, "escape": nest.escape, "holds": nest.holds(),
        });
    }
    out["pass"] = json!(pass);
    Ok((out, pass))
}
