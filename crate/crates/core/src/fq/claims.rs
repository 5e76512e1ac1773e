//! Checks of the anti-concentration statements over `F_q`: the
//! Littlewood-Offord bound, level-set nesting, the spectrum claim, the
//! consecutive-difference claim for sparse supports and the full-rank bound.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use super::additive::iterated_sumset;
use super::field::{rank, Elem, FieldTable};
use super::fourier::{convolve_scaled, exact_dot_distribution, level_function, level_set_of, FqDistribution};
use crate::ensembles::stream_rng;
use crate::{Error, Result};

/// `|P(X . w = r) - 1/q| <= 2 / sqrt(alpha m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoCheck {
    /// `P(X . w = r)` as `numerator / denominator`.
    pub probability: (u128, u128),
    pub alpha: f64,
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Decided in exact arithmetic.
    pub holds: bool,
}

/// `alpha` is the subgroup-coset balance of `mu`. Errors with
/// [`Error::Degenerate`] when it is zero (the bound is then vacuous) and
/// [`Error::InvalidParameter`] when `w = 0`.
pub fn lo_bound_check(mu: &FqDistribution, w: &[Elem], r: Elem) -> Result<LoCheck> {
    let q = mu.field().order();
    if r >= q {
        return Err(Error::InvalidParameter("target outside the field"));
    }
    let alpha = mu.balance_alpha()?;
    if alpha.is_zero() {
        return Err(Error::Degenerate);
    }
    let d = exact_dot_distribution(mu, w)?;
    if d.support == 0 {
        return Err(Error::InvalidParameter("w must have a nonzero coordinate"));
    }
    let n = d.numerators[r as usize];
    let (a, b) = (*alpha.numer(), *alpha.denom());
    let holds = lo_holds_exact(n, d.denom, q, a, b, d.support);
    let alpha_f = a as f64 / b as f64;
    Ok(LoCheck {
        probability: (n, d.denom),
        alpha: alpha_f,
        m: d.support,
        lhs: (n as f64 / d.denom as f64 - 1.0 / q as f64).abs(),
        rhs: 2.0 / libm::sqrt(alpha_f * d.support as f64),
        holds,
    })
}

/// `|n/D - 1/q| <= 2/sqrt((a/b) m)` iff `(nq - D)^2 a m <= 4 (D q)^2 b`.
fn lo_holds_exact(n: u128, denom: u128, q: u32, a: u64, b: u64, m: usize) -> bool {
    let small = || -> Option<bool> {
        let diff = n.checked_mul(q as u128)?.abs_diff(denom);
        let lhs = diff.checked_mul(diff)?.checked_mul(a as u128)?.checked_mul(m as u128)?;
        let dq = denom.checked_mul(q as u128)?;
        let rhs = dq.checked_mul(dq)?.checked_mul(4)?.checked_mul(b as u128)?;
        Some(lhs <= rhs)
    };
    if let Some(holds) = small() {
        return holds;
    }
    let diff = BigInt::from(n) * q - BigInt::from(denom);
    let lhs = diff.magnitude().pow(2) * a * m as u64;
    let rhs = (BigUint::from(denom) * q).pow(2) * 4u32 * b;
    lhs <= rhs
}

/// Totals over one distribution of the exhaustive Littlewood-Offord grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoCellReport {
    /// `(w, r)` pairs checked.
    pub cases: u64,
    pub violations: u64,
    /// Largest `lhs / rhs`; a violation has ratio above one.
    pub worst_ratio: f64,
}

impl LoCellReport {
    pub fn merge(&mut self, other: &LoCellReport) {
        self.cases += other.cases;
        self.violations += other.violations;
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
    }
}

/// Check the bound for every multiset `w` of `1..=max_m` nonzero elements
/// and every target `r`. Coordinate order does not affect `X . w`, so
/// multisets cover all vectors. Returns `Ok(None)` when `mu` is degenerate.
pub fn lo_sweep_cell(mu: &FqDistribution, max_m: usize) -> Result<Option<LoCellReport>> {
    let alpha = mu.balance_alpha()?;
    if alpha.is_zero() {
        return Ok(None);
    }
    let field = mu.field();
    let q = field.order() as usize;
    let denom = mu.denominator() as u128;
    if (max_m as u32) > 0 && denom.checked_pow(max_m as u32).is_none() {
        return Err(Error::Overflow);
    }
    let (a, b) = (*alpha.numer(), *alpha.denom());
    let rhs: Vec<f64> = (0..=max_m).map(|m| 2.0 / libm::sqrt(a as f64 / b as f64 * m as f64)).collect();
    let mut report = LoCellReport::default();
    let mut start = alloc::vec![0u128; q];
    start[0] = 1;
    // Depth-first over nondecreasing coefficient sequences, extending the
    // convolution one coordinate at a time.
    let mut stack: Vec<(Vec<u128>, u128, usize, Elem)> = alloc::vec![(start, 1, 0, 1)];
    while let Some((cur, d, m, min_c)) = stack.pop() {
        if m > 0 {
            for &n in &cur {
                report.cases += 1;
                if !lo_holds_exact(n, d, q as u32, a, b, m) {
                    report.violations += 1;
                }
                let lhs = (n as f64 / d as f64 - 1.0 / q as f64).abs();
                report.worst_ratio = report.worst_ratio.max(lhs / rhs[m]);
            }
        }
        if m < max_m {
            for c in min_c..q as Elem {
                let next = convolve_scaled(field, &cur, mu.numerators(), c);
                stack.push((next, d * denom, m + 1, c));
            }
        }
    }
    Ok(Some(report))
}

/// Weight vectors on `q` points with common denominator `1..=max_denom`,
/// each distribution listed once (in lowest terms).
pub fn distributions_with_denominator(q: usize, max_denom: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for d in 1..=max_denom {
        let mut parts = alloc::vec![0u64; q];
        compositions(d, 0, &mut parts, &mut |v| {
            let g = v.iter().fold(0u64, |g, &x| num_integer::gcd(g, x));
            if g == 1 {
                out.push(v.to_vec());
            }
        });
    }
    out
}

fn compositions(left: u64, i: usize, parts: &mut [u64], emit: &mut dyn FnMut(&[u64])) {
    if i + 1 == parts.len() {
        parts[i] = left;
        emit(parts);
        return;
    }
    for x in 0..=left {
        parts[i] = x;
        compositions(left - x, i + 1, parts, emit);
    }
}

/// Outcome of a level-set nesting check.
#[derive(Debug, Clone, PartialEq)]
pub struct NestingCheck {
    pub level_set: Vec<Elem>,
    pub sumset: Vec<Elem>,
    pub target: Vec<Elem>,
    /// An element of the k-fold sumset outside `T(k^2 v)`, if any.
    pub escape: Option<Elem>,
}

impl NestingCheck {
    pub fn holds(&self) -> bool {
        self.escape.is_none()
    }
}

/// Verify `T(v) + ... + T(v)` (`k` copies) `⊆ T(k^2 v)` exhaustively.
pub fn check_level_set_nesting(mu: &FqDistribution, w: &[Elem], v: f64, k: usize) -> Result<NestingCheck> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    let f = level_function(mu, w);
    let level_set = level_set_of(&f, v);
    let target = level_set_of(&f, (k * k) as f64 * v);
    if level_set.is_empty() {
        return Ok(NestingCheck { level_set, sumset: Vec::new(), target, escape: None });
    }
    let field: &FieldTable = mu.field();
    let members: Vec<usize> = level_set.iter().map(|&x| x as usize).collect();
    let sum: Vec<Elem> = iterated_sumset(field, &members, k)?.into_iter().map(|x| x as Elem).collect();
    let escape = sum.iter().copied().find(|x| target.binary_search(x).is_err());
    Ok(NestingCheck { level_set, sumset: sum, target, escape })
}

/// Outcome of the spectrum claim for one distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectrumOutcome {
    /// No nontrivial additive subgroup lies inside `Spec_{1 - alpha/2}`.
    Holds,
    /// A nontrivial subgroup inside the spectrum.
    Violated(Vec<Elem>),
    /// `alpha = 0`: the balance hypothesis fails, so nothing is claimed.
    HypothesisFails,
}

/// `sum_{s in H} |mu_hat(s)|^2`.
pub fn subgroup_energy(mu: &FqDistribution, subgroup: &[Elem]) -> f64 {
    let hat = mu.fourier_transform();
    subgroup.iter().map(|&s| hat[s as usize].norm_sqr()).sum()
}

/// Check that `Spec_{1 - alpha/2}` contains no additive subgroup other
/// than `{0}`, enumerating all subgroups (extension degree at most 3).
pub fn spectrum_subgroup_check(mu: &FqDistribution) -> Result<SpectrumOutcome> {
    let subgroups = mu.field().additive_subgroups()?;
    let alpha = mu.balance_alpha()?;
    if alpha.is_zero() {
        return Ok(SpectrumOutcome::HypothesisFails);
    }
    let alpha = alpha.to_f64().unwrap_or(0.0);
    let spec = mu.spec_set(alpha / 2.0)?;
    for h in subgroups {
        if h.len() > 1 && h.iter().all(|x| spec.binary_search(x).is_ok()) {
            return Ok(SpectrumOutcome::Violated(h));
        }
    }
    Ok(SpectrumOutcome::Holds)
}

/// Balance of `mu` against that of the symmetrized law `xi - xi'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizedBalance {
    /// `1 - max_x mu(x)`.
    pub alpha: f64,
    /// `1 - P(xi = xi')`.
    pub alpha_sym: f64,
    /// `alpha <= alpha_sym <= 2 alpha`, decided exactly.
    pub within_bounds: bool,
}

pub fn symmetrized_balance(mu: &FqDistribution) -> SymmetrizedBalance {
    let d = mu.denominator() as u128;
    let max = mu.numerators().iter().copied().max().unwrap_or(0) as u128;
    let coll: u128 = mu.numerators().iter().map(|&w| (w as u128) * (w as u128)).sum();
    // alpha = (d - max)/d, alpha_sym = (d^2 - coll)/d^2.
    let a_num = (d - max) * d;
    let s_num = d * d - coll;
    SymmetrizedBalance {
        alpha: (d - max) as f64 / d as f64,
        alpha_sym: s_num as f64 / (d * d) as f64,
        within_bounds: a_num <= s_num && s_num <= 2 * a_num,
    }
}

/// `floor(144 / alpha)`, the largest support size covered by the
/// consecutive-difference claim. The argument bounding the failure
/// probability works with a range depending on an auxiliary constant; the
/// two ranges are not reconciled here.
pub fn zeros_claim_range(alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1]"));
    }
    Ok(libm::floor(144.0 / alpha) as usize)
}

/// Largest `n` for which [`check_zeros_claim`] enumerates supports.
pub const ZEROS_MAX_ROWS: usize = 24;

/// For columns `X_1, ..., X_c` of length `n`, search every support
/// `sigma` with `1 <= |sigma| <= t_max` for one where no consecutive
/// difference `(X_{i+1} - X_i)|sigma` has exactly one nonzero entry.
/// Returns the first such `sigma` (as a sorted index list) or `None`.
pub fn check_zeros_claim(field: &FieldTable, columns: &[Vec<Elem>], t_max: usize) -> Result<Option<Vec<usize>>> {
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidParameter("columns must have equal length"));
    }
    if n > ZEROS_MAX_ROWS {
        return Err(Error::EnumerationLimit { rows: n, limit: ZEROS_MAX_ROWS });
    }
    let diffs: Vec<u32> = columns
        .windows(2)
        .map(|pair| (0..n).filter(|&i| field.sub(pair[1][i], pair[0][i]) != 0).fold(0u32, |m, i| m | 1 << i))
        .collect();
    let t_max = t_max.min(n);
    for sigma in 1u32..(1u64 << n) as u32 {
        if sigma.count_ones() as usize > t_max {
            continue;
        }
        if !diffs.iter().any(|&d| (d & sigma).count_ones() == 1) {
            return Ok(Some((0..n).filter(|&i| sigma >> i & 1 == 1).collect()));
        }
    }
    Ok(None)
}

/// Whether `n - k` iid columns of length `n` drawn from `mu` are linearly
/// independent over `F_q`, for the trial on RNG stream `stream`.
pub fn full_rank_trial(mu: &FqDistribution, n: usize, k: usize, seed: u64, stream: u64) -> bool {
    let cols = n.saturating_sub(k);
    let mut rng = stream_rng(seed, stream);
    let columns: Vec<Vec<Elem>> = (0..cols).map(|_| (0..n).map(|_| mu.sample(&mut rng)).collect()).collect();
    rank(mu.field(), columns) == cols
}

/// Empirical full-rank frequency against `1 - n (1 - alpha)^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRankReport {
    pub trials: u64,
    pub independent: u64,
    pub frequency: f64,
    pub bound: f64,
    pub std_error: f64,
    /// `frequency >= bound - 4 std_error`.
    pub holds: bool,
}

pub fn full_rank_report(mu: &FqDistribution, n: usize, k: usize, trials: u64, independent: u64) -> Result<FullRankReport> {
    if trials == 0 || independent > trials {
        return Err(Error::InvalidParameter("need 0 < trials and independent <= trials"));
    }
    let alpha = mu.balance_alpha()?.to_f64().unwrap_or(0.0);
    let bound = 1.0 - n as f64 * libm::pow(1.0 - alpha, k as f64);
    let frequency = independent as f64 / trials as f64;
    let std_error = libm::sqrt(frequency * (1.0 - frequency) / trials as f64);
    Ok(FullRankReport { trials, independent, frequency, bound, std_error, holds: frequency >= bound - 4.0 * std_error })
}

/// Sequential driver for [`full_rank_trial`] over streams `0..trials`.
pub fn full_rank_check(mu: &FqDistribution, n: usize, k: usize, trials: u64, seed: u64) -> Result<FullRankReport> {
    let independent = (0..trials).filter(|&t| full_rank_trial(mu, n, k, seed, t)).count() as u64;
    full_rank_report(mu, n, k, trials, independent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;
    use num_rational::Ratio;

    fn field(q: u64) -> Arc<FieldTable> {
        Arc::new(FieldTable::of_order(q).unwrap())
    }

    #[test]
    fn lo_examples() {
        let k3 = field(3);
        let mu = FqDistribution::uniform_on(k3.clone(), &[0, 1]).unwrap();
        let c = lo_bound_check(&mu, &[1, 1, 1, 1], 0).unwrap();
        assert_eq!(c.probability, (5, 16));
        assert!((c.lhs - (5.0 / 16.0 - 1.0 / 3.0f64).abs()).abs() < 1e-15);
        assert!((c.lhs - 0.0208333).abs() < 1e-6);
        assert!((c.rhs - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(c.holds);
        assert_eq!(c.m, 4);

        let u = FqDistribution::uniform(field(5));
        let c = lo_bound_check(&u, &[2, 0, 3], 4).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);

        assert_eq!(lo_bound_check(&u, &[0, 0], 0), Err(Error::InvalidParameter("w must have a nonzero coordinate")));
        let delta = FqDistribution::point_mass(k3, 1).unwrap();
        assert_eq!(lo_bound_check(&delta, &[1], 0), Err(Error::Degenerate));
    }

    #[test]
    fn exact_decision_agrees_with_float_away_from_ties() {
        let mu = FqDistribution::from_numerators(field(7), alloc::vec![5, 1, 0, 0, 0, 0, 1]).unwrap();
        for m in 1..5 {
            let w = alloc::vec![3; m];
            for r in 0..7 {
                let c = lo_bound_check(&mu, &w, r).unwrap();
                if (c.lhs - c.rhs).abs() > 1e-9 {
                    assert_eq!(c.holds, c.lhs <= c.rhs);
                }
            }
        }
    }

    #[test]
    fn exact_decision_survives_word_overflow() {
        // 3 * 2^100 / 2^102 against 1/2 with alpha = 1, m = 1: lhs = 1/4 <= 2.
        let d = 1u128 << 102;
        assert!(lo_holds_exact(3 << 100, d, 2, 1, 1, 1));
        // Same with a huge m shrinking rhs below lhs.
        assert!(!lo_holds_exact(3 << 100, d, 2, 1, 1, 1 << 40));
        assert!(lo_holds_exact(3, 4, 2, 1, 1, 64));
        assert!(!lo_holds_exact(3, 4, 2, 1, 1, 65));
    }

    #[test]
    fn sweep_cell_matches_pointwise_checks() {
        let mu = FqDistribution::from_numerators(field(4), alloc::vec![2, 1, 0, 1]).unwrap();
        let cell = lo_sweep_cell(&mu, 3).unwrap().unwrap();
        // Multisets of size 1..=3 from 3 nonzero elements: 3 + 6 + 10.
        assert_eq!(cell.cases, 19 * 4);
        assert_eq!(cell.violations, 0);
        let mut worst: f64 = 0.0;
        for a in 1..4u32 {
            for b in a..4 {
                for r in 0..4 {
                    let c = lo_bound_check(&mu, &[a, b], r).unwrap();
                    worst = worst.max(c.lhs / c.rhs);
                }
            }
        }
        assert!(cell.worst_ratio >= worst - 1e-15);
        let line = FqDistribution::uniform_on(field(4), &[0, 1]).unwrap();
        assert_eq!(lo_sweep_cell(&line, 2).unwrap(), None);
    }

    #[test]
    fn distribution_grid_counts() {
        // Reduced compositions of d into 2 parts, d = 1..=4: 2, 1, 2, 2.
        let g = distributions_with_denominator(2, 4);
        assert_eq!(g.len(), 7);
        assert!(g.contains(&alloc::vec![1, 3]));
        assert!(!g.contains(&alloc::vec![2, 2]));
        assert_eq!(distributions_with_denominator(3, 1).len(), 3);
    }

    #[test]
    fn nesting_examples() {
        let k5 = field(5);
        let mu = FqDistribution::from_numerators(k5.clone(), alloc::vec![3, 1, 0, 0, 1]).unwrap();
        let w = [1, 2, 2];
        for v in [0.1, 0.5, 1.0, 2.0] {
            for k in 1..4 {
                let c = check_level_set_nesting(&mu, &w, v, k).unwrap();
                assert!(c.holds(), "v={v} k={k}");
            }
        }
        let u = FqDistribution::uniform(k5);
        let c = check_level_set_nesting(&u, &w, 1.0, 3).unwrap();
        assert_eq!(c.level_set, [0]);
        assert!(c.holds());
        assert!(check_level_set_nesting(&u, &w, 1.0, 0).is_err());
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(spectrum_subgroup_check(&FqDistribution::uniform(field(4))).unwrap(), SpectrumOutcome::Holds);
        let line = FqDistribution::uniform_on(field(4), &[2, 3]).unwrap();
        assert_eq!(spectrum_subgroup_check(&line).unwrap(), SpectrumOutcome::HypothesisFails);
        // On the annihilator of the line's subgroup the transform has full modulus.
        let hat = line.fourier_transform();
        assert!(hat.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-12).count() >= 2);
        let mu = FqDistribution::from_numerators(field(7), alloc::vec![5, 1, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(spectrum_subgroup_check(&mu).unwrap(), SpectrumOutcome::Holds);
        assert!(spectrum_subgroup_check(&FqDistribution::uniform(field(16))).is_err());
    }

    #[test]
    fn subgroup_energy_bound() {
        for q in [4, 8, 9] {
            let k = field(q);
            for num in distributions_with_denominator(q as usize, 3) {
                let mu = FqDistribution::from_numerators(k.clone(), num).unwrap();
                let alpha = mu.balance_alpha().unwrap().to_f64().unwrap();
                for h in k.additive_subgroups().unwrap() {
                    if h.len() > 1 {
                        assert!(subgroup_energy(&mu, &h) <= h.len() as f64 * (1.0 - alpha) + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetrized_balance_bounds() {
        for num in distributions_with_denominator(5, 6) {
            let mu = FqDistribution::from_numerators(field(5), num).unwrap();
            let s = symmetrized_balance(&mu);
            assert!(s.within_bounds);
            let sym = mu.symmetrize().unwrap();
            assert!((1.0 - sym.weight(0).to_f64().unwrap() - s.alpha_sym).abs() < 1e-12);
        }
        let mu = FqDistribution::from_weights(field(3), &[(0, Ratio::new(1, 2)), (2, Ratio::new(1, 2))]).unwrap();
        assert_eq!(symmetrized_balance(&mu).alpha_sym, 0.5);
    }

    #[test]
    fn zeros_claim_examples() {
        let k2 = field(2);
        assert_eq!(zeros_claim_range(0.5).unwrap(), 288);
        assert!(zeros_claim_range(0.0).is_err());
        // Consecutive differences e_0, e_1, e_2 isolate every support on 3 rows.
        let cols = alloc::vec![
            alloc::vec![0, 0, 0],
            alloc::vec![1, 0, 0],
            alloc::vec![1, 1, 0],
            alloc::vec![1, 1, 1],
        ];
        assert_eq!(check_zeros_claim(&k2, &cols, 3).unwrap(), None);
        // Identical columns give zero differences.
        let flat = alloc::vec![alloc::vec![1, 0, 1]; 3];
        assert_eq!(check_zeros_claim(&k2, &flat, 2).unwrap(), Some(alloc::vec![0]));
        // A difference supported on {0,1} meets {0,1} in two entries.
        let pair = alloc::vec![alloc::vec![0, 0, 0], alloc::vec![1, 1, 0]];
        assert_eq!(check_zeros_claim(&k2, &pair, 2).unwrap(), Some(alloc::vec![0, 1]));
        assert_eq!(check_zeros_claim(&k2, &pair, 1).unwrap(), Some(alloc::vec![2]));
        let big = alloc::vec![alloc::vec![0; 25]; 2];
        assert!(check_zeros_claim(&k2, &big, 1).is_err());
    }

    #[test]
    fn full_rank_frequency_clears_bound() {
        let mu = FqDistribution::uniform_on(field(3), &[0, 1]).unwrap();
        let r = full_rank_check(&mu, 12, 6, 400, 11).unwrap();
        assert!(r.holds, "{r:?}");
        let u = FqDistribution::uniform(field(4));
        let r = full_rank_check(&u, 10, 3, 200, 5).unwrap();
        assert!(r.holds && r.frequency > 0.9, "{r:?}");
    }
}
