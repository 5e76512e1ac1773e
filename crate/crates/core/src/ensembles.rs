//! Finite-support integer distributions with exact rational weights, and
//! seeded samplers for the iid rectangular and symmetric-plus-columns
//! matrix models.
//!
//! Weights are stored as numerators over one common denominator `D`, so
//! sampling draws a uniform integer in `[0, D)` and the balance parameters
//! come out as exact fractions.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{arith, factor, Error, IntMatrix, Result};

pub type Fraction = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    values: Vec<i64>,
    weights: Vec<u64>,
    cumulative: Vec<u64>,
    denom: u64,
}

impl Distribution {
    /// Atoms with rational weights; values must be distinct, weights positive
    /// and summing to exactly one.
    pub fn new(atoms: &[(i64, Fraction)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms"));
        }
        let denom = atoms.iter().try_fold(1u64, |acc, (_, w)| {
            let l = acc.lcm(w.denom());
            (l / acc).checked_mul(acc).ok_or(Error::Overflow)
        })?;
        let pairs: Vec<(i64, u64)> = atoms.iter().map(|(v, w)| (*v, w.numer() * (denom / w.denom()))).collect();
        Self::from_numerators(denom, &pairs)
    }

    /// Atoms given as numerators over the common denominator `denom`.
    pub fn from_numerators(denom: u64, atoms: &[(i64, u64)]) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidDistribution("zero denominator"));
        }
        let mut atoms = atoms.to_vec();
        atoms.sort_unstable();
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("repeated value"));
        }
        if atoms.iter().any(|a| a.1 == 0) {
            return Err(Error::InvalidDistribution("weights must be positive"));
        }
        let total = atoms.iter().try_fold(0u64, |acc, a| acc.checked_add(a.1)).ok_or(Error::Overflow)?;
        if total != denom {
            return Err(Error::InvalidDistribution("weights must sum to one"));
        }
        let g = atoms.iter().fold(denom, |acc, a| acc.gcd(&a.1));
        let values: Vec<i64> = atoms.iter().map(|a| a.0).collect();
        let weights: Vec<u64> = atoms.iter().map(|a| a.1 / g).collect();
        let cumulative = weights
            .iter()
            .scan(0u64, |s, &w| {
                *s += w;
                Some(*s)
            })
            .collect();
        Ok(Distribution { values, weights, cumulative, denom: denom / g })
    }

    pub fn uniform(values: &[i64]) -> Result<Self> {
        let atoms: Vec<(i64, u64)> = values.iter().map(|&v| (v, 1)).collect();
        Self::from_numerators(values.len() as u64, &atoms)
    }

    pub fn point_mass(value: i64) -> Self {
        Self::from_numerators(1, &[(value, 1)]).unwrap()
    }

    /// `P(1) = alpha`, `P(0) = 1 - alpha`.
    pub fn sparse_bernoulli(alpha: Fraction) -> Result<Self> {
        if alpha.is_zero() || alpha >= Fraction::one() {
            return Err(Error::InvalidParameter("bernoulli alpha must lie in (0, 1)"));
        }
        Self::new(&[(0, Fraction::one() - alpha), (1, alpha)])
    }

    /// Atoms in increasing value order.
    pub fn atoms(&self) -> impl Iterator<Item = (i64, Fraction)> + '_ {
        self.values.iter().zip(&self.weights).map(|(&v, &w)| (v, Fraction::new(w, self.denom)))
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Weight numerators over [`Self::denominator`].
    pub fn numerators(&self) -> &[u64] {
        &self.weights
    }

    pub fn denominator(&self) -> u64 {
        self.denom
    }

    pub fn weight(&self, value: i64) -> Fraction {
        match self.values.binary_search(&value) {
            Ok(i) => Fraction::new(self.weights[i], self.denom),
            Err(_) => Fraction::zero(),
        }
    }

    pub fn max_weight(&self) -> Fraction {
        Fraction::new(*self.weights.iter().max().unwrap(), self.denom)
    }

    /// Residue-class masses modulo `p`, as numerators over the denominator.
    pub fn residue_numerators(&self, p: u64) -> Vec<u64> {
        let mut out = alloc::vec![0u64; p as usize];
        for (&v, &w) in self.values.iter().zip(&self.weights) {
            out[v.rem_euclid(p as i64) as usize] += w;
        }
        out
    }

    /// `1 - max_x P(xi = x mod p)`.
    pub fn alpha_mod_p(&self, p: u64) -> Result<Fraction> {
        if !arith::is_prime_u64(p) {
            return Err(Error::NotPrime(alloc::format!("{p}")));
        }
        let max = self.max_residue_mass(p);
        Ok(Fraction::one() - Fraction::new(max, self.denom))
    }

    fn max_residue_mass(&self, p: u64) -> u64 {
        if p > self.diameter() {
            return *self.weights.iter().max().unwrap();
        }
        let mut classes: alloc::collections::BTreeMap<i64, u64> = alloc::collections::BTreeMap::new();
        for (&v, &w) in self.values.iter().zip(&self.weights) {
            *classes.entry(v.rem_euclid(p as i64)).or_default() += w;
        }
        classes.into_values().max().unwrap()
    }

    /// `max - min` over the support.
    pub fn diameter(&self) -> u64 {
        self.values.last().unwrap().abs_diff(self.values[0])
    }

    /// Primes that merge at least two atoms into one residue class.
    pub fn merging_primes(&self) -> Vec<u64> {
        let mut primes = BTreeSet::new();
        for (i, a) in self.values.iter().enumerate() {
            for b in &self.values[i + 1..] {
                let d = BigUint::from(a.abs_diff(*b));
                for (p, _) in factor::factorize(&d).primes {
                    primes.insert(u64::try_from(p).expect("divisor of a u64 fits"));
                }
            }
        }
        primes.into_iter().collect()
    }

    /// `min_p alpha_mod_p` over all primes. Only primes dividing a
    /// difference of two atoms can merge residues; every other prime gives
    /// `1 - max weight`.
    pub fn alpha_min(&self) -> AlphaMin {
        let mut best = AlphaMin { alpha: Fraction::one() - self.max_weight(), prime: None, degenerate: false };
        for p in self.merging_primes() {
            let a = Fraction::one() - Fraction::new(self.max_residue_mass(p), self.denom);
            if a < best.alpha {
                best.alpha = a;
                best.prime = Some(p);
            }
        }
        best.degenerate = best.alpha.is_zero();
        best
    }

    /// `P(xi = xi')` for independent copies.
    pub fn collision_probability(&self) -> Result<Fraction> {
        let d2 = self.denom.checked_mul(self.denom).ok_or(Error::Overflow)?;
        let s = self.weights.iter().try_fold(0u64, |acc, &w| acc.checked_add(w * w)).ok_or(Error::Overflow)?;
        Ok(Fraction::new(s, d2))
    }

    /// Law of `xi - xi'` for independent copies.
    pub fn symmetrize(&self) -> Result<Distribution> {
        let d2 = self.denom.checked_mul(self.denom).ok_or(Error::Overflow)?;
        let mut law: alloc::collections::BTreeMap<i64, u64> = alloc::collections::BTreeMap::new();
        for (&a, &wa) in self.values.iter().zip(&self.weights) {
            for (&b, &wb) in self.values.iter().zip(&self.weights) {
                let v = a.checked_sub(b).ok_or(Error::Overflow)?;
                *law.entry(v).or_default() += wa * wb;
            }
        }
        let atoms: Vec<(i64, u64)> = law.into_iter().collect();
        Self::from_numerators(d2, &atoms)
    }

    /// Draw one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = rng.gen_range(0..self.denom);
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i]
    }

    /// `n` iid draws as a column vector.
    pub fn sample_column<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<BigInt> {
        (0..n).map(|_| BigInt::from(self.sample(rng))).collect()
    }
}

/// Result of [`Distribution::alpha_min`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaMin {
    pub alpha: Fraction,
    /// The prime attaining the minimum, or `None` when the generic
    /// large-prime value `1 - max weight` is the minimum.
    pub prime: Option<u64>,
    /// Set when `alpha = 0` (all mass in one residue class).
    pub degenerate: bool,
}

impl AlphaMin {
    pub fn as_f64(&self) -> f64 {
        *self.alpha.numer() as f64 / *self.alpha.denom() as f64
    }
}

/// The two matrix models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    /// `n x m` with iid entries, `m >= n`.
    IidRect { n: usize, m: usize },
    /// Symmetric `n x n` block (iid upper triangle) followed by `u` iid columns.
    SymmetricPlus { n: usize, u: usize },
}

impl Ensemble {
    pub fn rows(&self) -> usize {
        match *self {
            Ensemble::IidRect { n, .. } | Ensemble::SymmetricPlus { n, .. } => n,
        }
    }

    pub fn cols(&self) -> usize {
        match *self {
            Ensemble::IidRect { m, .. } => m,
            Ensemble::SymmetricPlus { n, u } => n + u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    pub ensemble: Ensemble,
    pub dist: Distribution,
    pub seed: u64,
    /// Substream index; trial `t` of an experiment uses stream `t`.
    pub stream: u64,
}

impl EnsembleSpec {
    pub fn new(ensemble: Ensemble, dist: Distribution, seed: u64) -> Result<Self> {
        match ensemble {
            Ensemble::IidRect { n, m } if n == 0 || m < n => {
                return Err(Error::InvalidParameter("iid_rect needs m >= n >= 1"));
            }
            Ensemble::SymmetricPlus { n: 0, .. } => {
                return Err(Error::InvalidParameter("symmetric_plus needs n >= 1"));
            }
            _ => {}
        }
        Ok(EnsembleSpec { ensemble, dist, seed, stream: 0 })
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

/// Counter-based substream: ChaCha8 keyed by `seed`, stream `stream`.
/// Streams never overlap, so trials can run in any order or thread.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic function of `spec`. Entries are drawn column by column,
/// so for the iid model an `n x m` sample is a prefix of an `n x m'` sample
/// with the same seed and stream whenever `m <= m'`.
pub fn sample_matrix(spec: &EnsembleSpec) -> IntMatrix {
    let mut rng = stream_rng(spec.seed, spec.stream);
    let dist = &spec.dist;
    let (rows, cols) = (spec.ensemble.rows(), spec.ensemble.cols());
    let mut entries = alloc::vec![BigInt::zero(); rows * cols];
    match spec.ensemble {
        Ensemble::IidRect { n, m } => {
            for j in 0..m {
                for i in 0..n {
                    entries[i * cols + j] = BigInt::from(dist.sample(&mut rng));
                }
            }
        }
        Ensemble::SymmetricPlus { n, u } => {
            for j in 0..n {
                for i in 0..=j {
                    let x = BigInt::from(dist.sample(&mut rng));
                    entries[j * cols + i] = x.clone();
                    entries[i * cols + j] = x;
                }
            }
            for j in n..n + u {
                for i in 0..n {
                    entries[i * cols + j] = BigInt::from(dist.sample(&mut rng));
                }
            }
        }
    }
    IntMatrix::new(rows, cols, entries).expect("ensemble shapes are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(a: u64, b: u64) -> Fraction {
        Fraction::new(a, b)
    }

    #[test]
    fn alpha_mod_p_examples() {
        let u01 = Distribution::uniform(&[0, 1]).unwrap();
        assert_eq!(u01.alpha_mod_p(2).unwrap(), fr(1, 2));
        assert_eq!(Distribution::point_mass(0).alpha_mod_p(7).unwrap(), fr(0, 1));
        let u3 = Distribution::uniform(&[-1, 0, 1]).unwrap();
        assert_eq!(u3.alpha_mod_p(3).unwrap(), fr(2, 3));
        assert!(matches!(u01.alpha_mod_p(4), Err(Error::NotPrime(_))));
    }

    #[test]
    fn alpha_min_examples() {
        assert_eq!(Distribution::uniform(&[0, 1]).unwrap().alpha_min().alpha, fr(1, 2));
        let even = Distribution::uniform(&[0, 2]).unwrap().alpha_min();
        assert_eq!(even.alpha, fr(0, 1));
        assert!(even.degenerate);
        assert_eq!(even.prime, Some(2));
        let four = Distribution::uniform(&[0, 1, 2, 3]).unwrap().alpha_min();
        assert_eq!(four.alpha, fr(1, 2));
        let pm = Distribution::point_mass(5).alpha_min();
        assert!(pm.degenerate);
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(Distribution::sparse_bernoulli(fr(1, 2)).unwrap(), Distribution::uniform(&[0, 1]).unwrap());
        let b = Distribution::sparse_bernoulli(fr(1, 10)).unwrap();
        assert_eq!(b.atoms().collect::<Vec<_>>(), [(0, fr(9, 10)), (1, fr(1, 10))]);
        assert_eq!(b.alpha_mod_p(2).unwrap(), fr(1, 10));
        assert!(Distribution::sparse_bernoulli(fr(0, 1)).is_err());
        assert!(Distribution::sparse_bernoulli(fr(1, 1)).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        assert_eq!(Distribution::point_mass(3).symmetrize().unwrap(), Distribution::point_mass(0));
        let s = Distribution::uniform(&[0, 1]).unwrap().symmetrize().unwrap();
        assert_eq!(s.atoms().collect::<Vec<_>>(), [(-1, fr(1, 4)), (0, fr(1, 2)), (1, fr(1, 4))]);
        let s = Distribution::uniform(&[0, 1, 2]).unwrap().symmetrize().unwrap();
        assert_eq!(s.weight(0), fr(1, 3));
    }

    #[test]
    fn invalid_distributions_are_rejected() {
        assert!(Distribution::new(&[(0, fr(1, 2)), (0, fr(1, 2))]).is_err());
        assert!(Distribution::new(&[(0, fr(1, 2)), (1, fr(1, 3))]).is_err());
        assert!(Distribution::from_numerators(2, &[(0, 2), (1, 0)]).is_err());
    }

    #[test]
    fn sampling_examples() {
        let ones = Distribution::point_mass(1);
        let spec = EnsembleSpec::new(Ensemble::IidRect { n: 2, m: 2 }, ones, 1).unwrap();
        assert_eq!(sample_matrix(&spec), IntMatrix::from_rows(&[[1, 1], [1, 1]]).unwrap());

        let u01 = Distribution::uniform(&[0, 1]).unwrap();
        let spec = EnsembleSpec::new(Ensemble::IidRect { n: 3, m: 3 }, u01.clone(), 42).unwrap();
        assert_eq!(sample_matrix(&spec), sample_matrix(&spec));
        assert_ne!(sample_matrix(&spec), sample_matrix(&spec.clone().with_stream(1)));

        let spec = EnsembleSpec::new(Ensemble::SymmetricPlus { n: 6, u: 3 }, u01, 9).unwrap();
        let m = sample_matrix(&spec);
        assert_eq!((m.rows(), m.cols()), (6, 9));
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn iid_samples_extend_by_columns() {
        let d = Distribution::uniform(&[-1, 0, 1]).unwrap();
        let small = sample_matrix(&EnsembleSpec::new(Ensemble::IidRect { n: 4, m: 4 }, d.clone(), 3).unwrap());
        let big = sample_matrix(&EnsembleSpec::new(Ensemble::IidRect { n: 4, m: 7 }, d, 3).unwrap());
        assert_eq!(big.select_columns(&[0, 1, 2, 3]).unwrap(), small);
    }

    #[test]
    fn spec_validation() {
        let d = Distribution::point_mass(0);
        assert!(EnsembleSpec::new(Ensemble::IidRect { n: 3, m: 2 }, d.clone(), 0).is_err());
        assert!(EnsembleSpec::new(Ensemble::IidRect { n: 0, m: 2 }, d.clone(), 0).is_err());
        assert!(EnsembleSpec::new(Ensemble::SymmetricPlus { n: 2, u: 0 }, d, 0).is_ok());
    }
}
