//! Column exposure: starting from a square matrix `M0`, append batches of
//! fresh random columns until the column space modulo every tracked prime is
//! the whole space.
//!
//! Batch `i` has `k_i = ceil(B ln n / (alpha d_{i-1}))` columns, where
//! `d_{i-1}` is the largest corank over the tracked moduli after the
//! previous batch. The same physical columns update every modulus.
//!
//! When the determinant of `M0` has a cofactor that resists factoring, the
//! cofactor is tracked as a composite modulus. Elimination over `Z/N` either
//! behaves like a field or meets a non-unit pivot, which exposes a factor of
//! `N`; the modulus is then split and both parts are rebuilt by replaying
//! every column seen so far.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::ensembles::{stream_rng, Distribution};
use crate::modp::ColumnSpace;
use crate::{arith, factor, linalg, Error, IntMatrix, Result};

/// `sqrt(3 ln n / (alpha n))`.
pub fn epsilon_n(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    libm::sqrt(3.0 * libm::log(nf) / (alpha * nf))
}

/// `ceil(B ln n / (alpha d_prev))`, at least 1.
pub fn batch_size(n: usize, alpha: f64, b: f64, d_prev: usize) -> usize {
    let k = libm::ceil(b * libm::log(n as f64) / (alpha * d_prev.max(1) as f64));
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BudgetVariant {
    /// `B ((L) ln L + ln n)` with `L = ln n / alpha`.
    #[default]
    Refined,
    /// `B ln^2 n / alpha + sqrt(n ln n / alpha)`.
    Simple,
}

/// Extra-column budget, floored; negative values clamp to zero.
pub fn u_budget(n: usize, alpha: f64, b: f64, variant: BudgetVariant) -> usize {
    let ln = libm::log(n as f64);
    let v = match variant {
        BudgetVariant::Refined => {
            let l = ln / alpha;
            b * (l * libm::log(l) + ln)
        }
        BudgetVariant::Simple => b * ln * ln / alpha + libm::sqrt(n as f64 * ln / alpha),
    };
    if v > 0.0 {
        libm::floor(v) as usize
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeSource {
    /// Every prime factor of `det(M0)`; requires `det(M0) != 0`.
    DivisorsOfDet,
    Explicit(Vec<BigUint>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureParams {
    pub b: f64,
    /// Balance parameter in the batch formula; defaults to the entry
    /// distribution's `alpha_min`.
    pub alpha: Option<f64>,
    pub variant: BudgetVariant,
    /// Extra-column cap; defaults to `10 * max(u_budget, 1)`.
    pub cap: Option<usize>,
}

impl Default for ExposureParams {
    fn default() -> Self {
        ExposureParams { b: 1.0, alpha: None, variant: BudgetVariant::Refined, cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedModulus {
    pub modulus: BigUint,
    pub prime: bool,
    /// `coranks[0]` for `M0`, `coranks[i]` after batch `i`.
    pub coranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureTrace {
    pub moduli: Vec<TrackedModulus>,
    /// `k_1, k_2, ...`; the last may be clipped by the cap.
    pub batches: Vec<usize>,
    /// `d_{i-1}` used to size batch `i`.
    pub d_prev: Vec<usize>,
    pub total_extra_columns: usize,
    pub achieved: bool,
    pub alpha: f64,
    pub b: f64,
    pub u_budget: usize,
    pub cap: usize,
    pub columns: Vec<Vec<BigInt>>,
}

impl ExposureTrace {
    /// Primes among the tracked moduli.
    pub fn primes(&self) -> Vec<&BigUint> {
        self.moduli.iter().filter(|t| t.prime).map(|t| &t.modulus).collect()
    }

    /// `[M0 | extra columns]`.
    pub fn extended_matrix(&self, m0: &IntMatrix) -> Result<IntMatrix> {
        if self.columns.is_empty() {
            return Ok(m0.clone());
        }
        m0.hstack(&IntMatrix::from_columns(m0.rows(), &self.columns)?)
    }

    /// Largest corank over tracked moduli after each batch, starting at `d_0`.
    pub fn max_coranks(&self) -> Vec<usize> {
        (0..=self.batches.len()).map(|i| self.moduli.iter().map(|t| t.coranks[i]).max().unwrap_or(0)).collect()
    }
}

struct Tracked {
    modulus: BigUint,
    space: ColumnSpace,
    coranks: Vec<usize>,
}

fn split_err(e: Error) -> core::result::Result<BigUint, Error> {
    match e {
        Error::ModulusSplit { factor } => Ok(factor),
        other => Err(other),
    }
}

/// Build the space for `modulus` from `M0` and replay the extra columns
/// batch by batch. `Err(Ok(f))` reports a discovered factor `f`.
fn rebuild(
    modulus: &BigUint,
    m0: &IntMatrix,
    columns: &[Vec<BigInt>],
    batches: &[usize],
) -> core::result::Result<Tracked, core::result::Result<BigUint, Error>> {
    let n = m0.rows();
    let mut space = ColumnSpace::new_unchecked(modulus, n);
    for j in 0..m0.cols() {
        space.insert_int(&m0.column(j)).map_err(split_err)?;
    }
    let mut coranks = alloc::vec![space.codimension()];
    let mut next = 0;
    for &k in batches {
        for c in &columns[next..next + k] {
            space.insert_int(c).map_err(split_err)?;
        }
        next += k;
        coranks.push(space.codimension());
    }
    Ok(Tracked { modulus: modulus.clone(), space, coranks })
}

/// Track every queued modulus, splitting composites as factors surface.
fn absorb(
    queue: &mut VecDeque<BigUint>,
    tracked: &mut Vec<Tracked>,
    m0: &IntMatrix,
    columns: &[Vec<BigInt>],
    batches: &[usize],
) -> Result<()> {
    while let Some(q) = queue.pop_front() {
        if q.is_one() || tracked.iter().any(|t| t.modulus == q) {
            continue;
        }
        match rebuild(&q, m0, columns, batches) {
            Ok(t) => tracked.push(t),
            Err(Ok(f)) => queue_split(queue, &q, &f),
            Err(Err(e)) => return Err(e),
        }
    }
    Ok(())
}

fn queue_split(queue: &mut VecDeque<BigUint>, n: &BigUint, f: &BigUint) {
    let g = &num_integer::Integer::gcd(n, f);
    let parts = [g.clone(), n / g];
    for part in parts {
        let fac = factor::factorize(&part);
        for (p, _) in fac.primes {
            queue.push_back(p);
        }
        queue.extend(fac.unfactored);
    }
}

/// Run one exposure process. Extra columns are drawn iid from `dist` with
/// the ChaCha substream `(seed, stream)`.
pub fn run_exposure(
    m0: &IntMatrix,
    dist: &Distribution,
    params: &ExposureParams,
    seed: u64,
    stream: u64,
    source: &PrimeSource,
) -> Result<ExposureTrace> {
    if !m0.is_square() {
        return Err(Error::NotSquare { rows: m0.rows(), cols: m0.cols() });
    }
    let n = m0.rows();
    let alpha = match params.alpha {
        Some(a) if a > 0.0 && a <= 1.0 => a,
        Some(_) => return Err(Error::InvalidParameter("alpha must lie in (0, 1]")),
        None => {
            let a = dist.alpha_min();
            if a.degenerate {
                return Err(Error::Degenerate);
            }
            a.as_f64()
        }
    };
    if !(params.b >= 0.0 && params.b.is_finite()) {
        return Err(Error::InvalidParameter("B must be finite and non-negative"));
    }

    let mut queue = VecDeque::new();
    match source {
        PrimeSource::DivisorsOfDet => {
            let d = linalg::det(m0)?;
            if d.is_zero() {
                return Err(Error::Singular);
            }
            let f = factor::factorize(d.magnitude());
            queue.extend(f.primes.into_iter().map(|(p, _)| p));
            queue.extend(f.unfactored);
        }
        PrimeSource::Explicit(ps) => {
            if let Some(bad) = ps.iter().find(|p| !arith::is_prime(p)) {
                return Err(Error::NotPrime(alloc::format!("{bad}")));
            }
            queue.extend(ps.iter().cloned());
        }
    }

    let budget = u_budget(n, alpha, params.b, params.variant);
    let cap = params.cap.unwrap_or(10 * budget.max(1));
    let mut tracked = Vec::new();
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    let mut batches = Vec::new();
    let mut d_prev = Vec::new();
    absorb(&mut queue, &mut tracked, m0, &columns, &batches)?;

    let mut rng = stream_rng(seed, stream);
    loop {
        let d = tracked.iter().map(|t| t.space.codimension()).max().unwrap_or(0);
        if d == 0 || columns.len() >= cap {
            break;
        }
        let k = batch_size(n, alpha, params.b, d).min(cap - columns.len());
        let start = columns.len();
        for _ in 0..k {
            columns.push(dist.sample_column(n, &mut rng));
        }
        batches.push(k);
        d_prev.push(d);

        let mut keep = Vec::with_capacity(tracked.len());
        for mut t in tracked.drain(..) {
            let mut failed = None;
            for c in &columns[start..] {
                if let Err(e) = t.space.insert_int(c) {
                    failed = Some(split_err(e)?);
                    break;
                }
            }
            match failed {
                None => {
                    t.coranks.push(t.space.codimension());
                    keep.push(t);
                }
                Some(f) => queue_split(&mut queue, &t.modulus, &f),
            }
        }
        tracked = keep;
        absorb(&mut queue, &mut tracked, m0, &columns, &batches)?;
    }

    let achieved = tracked.iter().all(|t| t.space.codimension() == 0);
    tracked.sort_by(|a, b| a.modulus.cmp(&b.modulus));
    let moduli = tracked
        .into_iter()
        .map(|t| TrackedModulus { prime: arith::is_prime(&t.modulus), modulus: t.modulus, coranks: t.coranks })
        .collect();
    Ok(ExposureTrace {
        moduli,
        total_extra_columns: columns.len(),
        batches,
        d_prev,
        achieved,
        alpha,
        b: params.b,
        u_budget: budget,
        cap,
        columns,
    })
}

/// Internal consistency of a trace: non-increasing coranks, batch sizes
/// recomputed from the recorded `d_{i-1}`, and column accounting.
pub fn trace_is_consistent(trace: &ExposureTrace, n: usize) -> bool {
    let batches = trace.batches.len();
    let monotone = trace.moduli.iter().all(|t| t.coranks.len() == batches + 1 && t.coranks.windows(2).all(|w| w[1] <= w[0]));
    let maxes = trace.max_coranks();
    let sizes = trace.batches.iter().enumerate().all(|(i, &k)| {
        let expect = batch_size(n, trace.alpha, trace.b, trace.d_prev[i]);
        trace.d_prev[i] == maxes[i] && (k == expect || (i + 1 == batches && k < expect && trace.total_extra_columns == trace.cap))
    });
    let total = trace.batches.iter().sum::<usize>() == trace.total_extra_columns
        && trace.columns.len() == trace.total_extra_columns
        && trace.total_extra_columns <= trace.cap;
    let achieved = trace.achieved == (maxes[batches] == 0);
    monotone && sizes && total && achieved && trace.columns.iter().all(|c| c.len() == n)
}
