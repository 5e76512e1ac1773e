//! Distributions on `F_q`, their Fourier transforms, spectra and the level
//! sets of `f(t) = sum_l psi(w_l t)`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;

use super::field::{Elem, FieldTable};
use crate::{Error, Result};

/// Slack for comparisons between floating-point Fourier quantities.
pub const FOURIER_SLACK: f64 = 1e-9;

/// A probability measure on `F_q` with rational weights `numerators[x] / denom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqDistribution {
    field: Arc<FieldTable>,
    numerators: Vec<u64>,
    denom: u64,
    cumulative: Vec<u64>,
}

impl FqDistribution {
    /// Weights `numerators[x] / sum`, one entry per field element, reduced
    /// to lowest terms.
    pub fn from_numerators(field: Arc<FieldTable>, numerators: Vec<u64>) -> Result<Self> {
        if numerators.len() != field.order() as usize {
            return Err(Error::DimensionMismatch { expected: field.order() as usize, found: numerators.len() });
        }
        let mut denom: u64 = 0;
        for &w in &numerators {
            denom = denom.checked_add(w).ok_or(Error::Overflow)?;
        }
        if denom == 0 {
            return Err(Error::InvalidDistribution("weights sum to zero"));
        }
        let g = numerators.iter().fold(denom, |g, &w| g.gcd(&w));
        let numerators: Vec<u64> = numerators.iter().map(|w| w / g).collect();
        let cumulative = numerators
            .iter()
            .scan(0u64, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(FqDistribution { field, numerators, denom: denom / g, cumulative })
    }

    /// Sparse form: `(element, weight)` pairs with weights summing to one.
    pub fn from_weights(field: Arc<FieldTable>, weights: &[(Elem, Ratio<u64>)]) -> Result<Self> {
        let lcm = weights.iter().fold(1u64, |l, (_, w)| l.lcm(w.denom()));
        let mut num = alloc::vec![0u64; field.order() as usize];
        for &(x, w) in weights {
            if x >= field.order() {
                return Err(Error::InvalidDistribution("element outside the field"));
            }
            let add = w.numer().checked_mul(lcm / w.denom()).ok_or(Error::Overflow)?;
            num[x as usize] = num[x as usize].checked_add(add).ok_or(Error::Overflow)?;
        }
        if num.iter().try_fold(0u64, |a, &w| a.checked_add(w)) != Some(lcm) {
            return Err(Error::InvalidDistribution("weights must sum to 1"));
        }
        Self::from_numerators(field, num)
    }

    pub fn uniform(field: Arc<FieldTable>) -> Self {
        let q = field.order() as usize;
        Self::from_numerators(field, alloc::vec![1; q]).unwrap()
    }

    /// Uniform on a nonempty set of elements.
    pub fn uniform_on(field: Arc<FieldTable>, support: &[Elem]) -> Result<Self> {
        let mut num = alloc::vec![0u64; field.order() as usize];
        for &x in support {
            *num.get_mut(x as usize).ok_or(Error::InvalidDistribution("element outside the field"))? = 1;
        }
        Self::from_numerators(field, num)
    }

    pub fn point_mass(field: Arc<FieldTable>, x: Elem) -> Result<Self> {
        Self::uniform_on(field, &[x])
    }

    pub fn field(&self) -> &Arc<FieldTable> {
        &self.field
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator(&self) -> u64 {
        self.denom
    }

    pub fn weight(&self, x: Elem) -> Ratio<u64> {
        Ratio::new(self.numerators[x as usize], self.denom)
    }

    pub fn support(&self) -> Vec<Elem> {
        (0..self.field.order()).filter(|&x| self.numerators[x as usize] > 0).collect()
    }

    /// `1 - max mu(s + T)` over proper additive subgroups `T` and shifts `s`.
    /// The whole field is excluded since it always carries mass one.
    pub fn balance_alpha(&self) -> Result<Ratio<u64>> {
        let q = self.field.order() as usize;
        let mut best = 0u64;
        for t in self.field.additive_subgroups()? {
            if t.len() == q {
                continue;
            }
            let mut seen = alloc::vec![false; q];
            for s in 0..q {
                if seen[s] {
                    continue;
                }
                let mut mass = 0;
                for &h in &t {
                    let x = self.field.add(s as Elem, h) as usize;
                    seen[x] = true;
                    mass += self.numerators[x];
                }
                best = best.max(mass);
            }
        }
        Ok(Ratio::new(self.denom - best, self.denom))
    }

    /// `1 - max_x mu(x)`, the balance against the trivial subgroup alone.
    pub fn point_alpha(&self) -> Ratio<u64> {
        let m = self.numerators.iter().copied().max().unwrap_or(0);
        Ratio::new(self.denom - m, self.denom)
    }

    /// `mu_hat(x) = sum_t mu(t) e_p(tr(x t))`.
    pub fn mu_hat(&self, x: Elem) -> Complex64 {
        let roots = roots_of_unity(self.field.p());
        self.mu_hat_with(&roots, x)
    }

    fn mu_hat_with(&self, roots: &[Complex64], x: Elem) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &w) in self.numerators.iter().enumerate() {
            if w > 0 {
                let k = self.field.trace(self.field.mul(x, t as Elem));
                acc += roots[k as usize] * w as f64;
            }
        }
        acc / self.denom as f64
    }

    /// `mu_hat` at every element, indexed by element.
    pub fn fourier_transform(&self) -> Vec<Complex64> {
        let roots = roots_of_unity(self.field.p());
        self.field.elements().map(|x| self.mu_hat_with(&roots, x)).collect()
    }

    /// `psi(x) = 1 - |mu_hat(x)|^2` at every element.
    pub fn psi_table(&self) -> Vec<f64> {
        self.fourier_transform().iter().map(|z| (1.0 - z.norm_sqr()).max(0.0)).collect()
    }

    /// `Spec_{1-eps} = {x : |mu_hat(x)| >= 1 - eps}`, sorted.
    pub fn spec_set(&self, eps: f64) -> Result<Vec<Elem>> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidParameter("eps must lie in [0, 1]"));
        }
        let hat = self.fourier_transform();
        Ok(self.field.elements().filter(|&x| hat[x as usize].norm() >= 1.0 - eps - FOURIER_SLACK).collect())
    }

    /// Law of `xi - xi'` for independent copies.
    pub fn symmetrize(&self) -> Result<FqDistribution> {
        let q = self.field.order() as usize;
        let mut num = alloc::vec![0u64; q];
        for (a, &wa) in self.numerators.iter().enumerate() {
            for (b, &wb) in self.numerators.iter().enumerate() {
                if wa > 0 && wb > 0 {
                    let x = self.field.sub(a as Elem, b as Elem) as usize;
                    num[x] = num[x].checked_add(wa.checked_mul(wb).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
                }
            }
        }
        Self::from_numerators(self.field.clone(), num)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        let u = rng.gen_range(0..self.denom);
        self.cumulative.partition_point(|&c| c <= u) as Elem
    }
}

/// `e_p(k) = exp(2 pi i k / p)` for `k` in `[0, p)`.
pub fn roots_of_unity(p: u32) -> Vec<Complex64> {
    (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect()
}

/// Exact law of `X . w` for `X` with iid `mu` entries: `numerators[r] / denom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotDistribution {
    pub numerators: Vec<u128>,
    pub denom: u128,
    /// Number of nonzero coordinates of `w`.
    pub support: usize,
}

impl DotDistribution {
    pub fn probability(&self, r: Elem) -> f64 {
        self.numerators[r as usize] as f64 / self.denom as f64
    }
}

/// Iterated convolution over the nonzero coordinates of `w` with unreduced
/// denominator `D^m`. Zero coordinates contribute nothing.
pub fn exact_dot_distribution(mu: &FqDistribution, w: &[Elem]) -> Result<DotDistribution> {
    let field = &mu.field;
    let q = field.order() as usize;
    let mut cur = alloc::vec![0u128; q];
    cur[0] = 1;
    let mut denom: u128 = 1;
    let mut support = 0;
    for &c in w {
        if c >= field.order() {
            return Err(Error::InvalidParameter("coefficient outside the field"));
        }
        if c == 0 {
            continue;
        }
        support += 1;
        denom = denom.checked_mul(mu.denom as u128).ok_or(Error::Overflow)?;
        cur = convolve_scaled(field, &cur, &mu.numerators, c);
    }
    Ok(DotDistribution { numerators: cur, denom, support })
}

/// `out[a + c t] += cur[a] * num[t]`. Callers bound the magnitudes.
pub(crate) fn convolve_scaled(field: &FieldTable, cur: &[u128], num: &[u64], c: Elem) -> Vec<u128> {
    let mut out = alloc::vec![0u128; cur.len()];
    for (t, &wt) in num.iter().enumerate() {
        if wt == 0 {
            continue;
        }
        let ct = field.mul(c, t as Elem);
        for (a, &x) in cur.iter().enumerate() {
            if x != 0 {
                out[field.add(a as Elem, ct) as usize] += x * wt as u128;
            }
        }
    }
    out
}

/// `f(t) = sum_l psi(w_l t)` at every element.
pub fn level_function(mu: &FqDistribution, w: &[Elem]) -> Vec<f64> {
    let psi = mu.psi_table();
    let field = &mu.field;
    field.elements().map(|t| w.iter().map(|&c| psi[field.mul(c, t) as usize]).sum()).collect()
}

/// `T(v) = {t : f(t) <= v}`, sorted.
pub fn psi_level_set(mu: &FqDistribution, w: &[Elem], v: f64) -> Vec<Elem> {
    level_set_of(&level_function(mu, w), v)
}

pub(crate) fn level_set_of(f: &[f64], v: f64) -> Vec<Elem> {
    (0..f.len() as Elem).filter(|&t| f[t as usize] <= v + FOURIER_SLACK).collect()
}
