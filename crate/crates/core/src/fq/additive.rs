//! Sumsets and stabilizers in finite abelian groups, Kneser's inequality
//! checked exhaustively over small cyclic groups, and the cosine inequality
//! behind the level-set nesting.

use alloc::vec::Vec;

use super::field::FieldTable;
use crate::{Error, Result};

/// A finite abelian group on `0..order()` with identity `0`.
pub trait AdditiveGroup {
    fn order(&self) -> usize;
    fn add(&self, a: usize, b: usize) -> usize;
    fn neg(&self, a: usize) -> usize;
}

/// `Z/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cyclic(pub usize);

impl AdditiveGroup for Cyclic {
    fn order(&self) -> usize {
        self.0
    }

    fn add(&self, a: usize, b: usize) -> usize {
        (a + b) % self.0
    }

    fn neg(&self, a: usize) -> usize {
        (self.0 - a) % self.0
    }
}

impl AdditiveGroup for FieldTable {
    fn order(&self) -> usize {
        self.order() as usize
    }

    fn add(&self, a: usize, b: usize) -> usize {
        FieldTable::add(self, a as u32, b as u32) as usize
    }

    fn neg(&self, a: usize) -> usize {
        FieldTable::neg(self, a as u32) as usize
    }
}

fn indicator<G: AdditiveGroup + ?Sized>(g: &G, a: &[usize]) -> Result<Vec<bool>> {
    let mut v = alloc::vec![false; g.order()];
    for &x in a {
        if x >= g.order() {
            return Err(Error::DimensionMismatch { expected: g.order(), found: x + 1 });
        }
        v[x] = true;
    }
    Ok(v)
}

fn members(v: &[bool]) -> Vec<usize> {
    v.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
}

/// `A + B`, sorted.
pub fn sumset<G: AdditiveGroup + ?Sized>(g: &G, a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("sumset of an empty set"));
    }
    indicator(g, a)?;
    let ib = indicator(g, b)?;
    let bs = members(&ib);
    let mut out = alloc::vec![false; g.order()];
    for &x in a {
        for &y in &bs {
            out[g.add(x, y)] = true;
        }
    }
    Ok(members(&out))
}

/// `A + ... + A` (`k` copies), sorted.
pub fn iterated_sumset<G: AdditiveGroup + ?Sized>(g: &G, a: &[usize], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    let mut acc = members(&indicator(g, a)?);
    if acc.is_empty() {
        return Err(Error::InvalidParameter("sumset of an empty set"));
    }
    for _ in 1..k {
        acc = sumset(g, &acc, a)?;
    }
    Ok(acc)
}

/// `Sym(X) = {h : h + X = X}`, sorted. Always a subgroup.
pub fn sym_set<G: AdditiveGroup + ?Sized>(g: &G, x: &[usize]) -> Result<Vec<usize>> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("stabilizer of an empty set"));
    }
    let ix = indicator(g, x)?;
    let xs = members(&ix);
    Ok((0..g.order()).filter(|&h| xs.iter().all(|&t| ix[g.add(h, t)])).collect())
}

/// Closed under addition and negation and containing `0`.
pub fn is_subgroup<G: AdditiveGroup + ?Sized>(g: &G, h: &[usize]) -> bool {
    let Ok(ih) = indicator(g, h) else {
        return false;
    };
    !h.is_empty() && ih[0] && h.iter().all(|&a| ih[g.neg(a)] && h.iter().all(|&b| ih[g.add(a, b)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KneserSweep {
    pub modulus: usize,
    pub pairs: u64,
    pub violations: u64,
    /// Pairs where `|A+B| + |Sym(A+B)| = |A| + |B|`.
    pub equality_cases: u64,
    /// Stabilizers that failed to be subgroups (always zero).
    pub non_subgroups: u64,
}

fn rotate(mask: u64, by: usize, n: usize) -> u64 {
    let full = (1u64 << n) - 1;
    if by == 0 {
        return mask;
    }
    ((mask << by) | (mask >> (n - by))) & full
}

/// Check `|A+B| + |Sym(A+B)| >= |A| + |B|` for every pair of nonempty
/// subsets of `Z/N`, with sets as bitmasks. Pairs are unordered since the
/// inequality is symmetric.
pub fn kneser_sweep(n: usize) -> Result<KneserSweep> {
    if n == 0 || n > 16 {
        return Err(Error::InvalidParameter("exhaustive Kneser sweep supports 1 <= N <= 16"));
    }
    let full = (1u64 << n) - 1;
    let mut out = KneserSweep { modulus: n, ..Default::default() };
    // Subgroups of Z/N are dZ/NZ for d | N.
    let subgroup_masks: Vec<u64> =
        (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| (0..n).step_by(d).fold(0u64, |m, i| m | 1 << i)).collect();
    for a in 1..=full {
        let shifts_a: Vec<usize> = (0..n).filter(|&i| a >> i & 1 == 1).collect();
        for b in a..=full {
            let s = shifts_a.iter().fold(0u64, |acc, &i| acc | rotate(b, i, n));
            let sym = (0..n).filter(|&h| rotate(s, h, n) == s).fold(0u64, |m, h| m | 1 << h);
            let lhs = s.count_ones() + sym.count_ones();
            let rhs = a.count_ones() + b.count_ones();
            out.pairs += 1;
            if lhs < rhs {
                out.violations += 1;
            } else if lhs == rhs {
                out.equality_cases += 1;
            }
            if !subgroup_masks.contains(&sym) {
                out.non_subgroups += 1;
            }
        }
    }
    Ok(out)
}

/// Slack used when comparing floating-point sides of an inequality.
pub const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `cos(b_1 + ... + b_k) >= k (cos b_1 + ... + cos b_k) - k^2 + 1`.
pub fn cosine_inequality_check(betas: &[f64]) -> InequalityCheck {
    let k = betas.len() as f64;
    let lhs = libm::cos(betas.iter().sum());
    let rhs = k * betas.iter().map(|&b| libm::cos(b)).sum::<f64>() - k * k + 1.0;
    InequalityCheck { lhs, rhs, holds: lhs >= rhs - FLOAT_SLACK }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sumset_examples() {
        let z5 = Cyclic(5);
        let full: Vec<usize> = (0..5).collect();
        assert_eq!(sumset(&z5, &full, &full).unwrap(), full);
        assert_eq!(sym_set(&z5, &full).unwrap(), full);
        assert_eq!(sumset(&z5, &[2], &[4]).unwrap(), [1]);
        assert_eq!(sym_set(&z5, &[1]).unwrap(), [0]);
        let s = sumset(&z5, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(s, [0, 1, 2]);
        assert_eq!(sym_set(&z5, &s).unwrap(), [0]);
        assert!(sumset(&z5, &[], &[1]).is_err());
        assert!(sym_set(&z5, &[]).is_err());
    }

    #[test]
    fn stabilizer_of_union_of_cosets() {
        let z12 = Cyclic(12);
        let x = [0, 4, 8, 1, 5, 9];
        assert_eq!(sym_set(&z12, &x).unwrap(), [0, 4, 8]);
        assert!(is_subgroup(&z12, &[0, 4, 8]));
        assert!(!is_subgroup(&z12, &[0, 4]));
        assert_eq!(iterated_sumset(&z12, &[0, 1], 3).unwrap(), [0, 1, 2, 3]);
    }

    #[test]
    fn stabilizers_in_field_groups() {
        let f4 = FieldTable::of_order(4).unwrap();
        let sub = [0usize, 1];
        assert_eq!(sym_set(&f4, &[2, 3]).unwrap(), sub);
        assert!(is_subgroup(&f4, &sub));
    }

    #[test]
    fn kneser_small_groups_brute_force() {
        // Cross-check the bitmask sweep against the set-based operations.
        for n in 1..=6 {
            let z = Cyclic(n);
            let mut pairs = 0;
            for a in 1u64..1 << n {
                for b in a..1 << n {
                    let sa: Vec<usize> = (0..n).filter(|i| a >> i & 1 == 1).collect();
                    let sb: Vec<usize> = (0..n).filter(|i| b >> i & 1 == 1).collect();
                    let s = sumset(&z, &sa, &sb).unwrap();
                    let h = sym_set(&z, &s).unwrap();
                    assert!(is_subgroup(&z, &h));
                    assert!(s.len() + h.len() >= sa.len() + sb.len());
                    pairs += 1;
                }
            }
            let sweep = kneser_sweep(n).unwrap();
            assert_eq!(sweep.pairs, pairs);
            assert_eq!(sweep.violations, 0);
            assert_eq!(sweep.non_subgroups, 0);
        }
    }

    #[test]
    fn cosine_examples() {
        for k in 1..7 {
            let c = cosine_inequality_check(&alloc::vec![0.0; k]);
            assert!((c.lhs - c.rhs).abs() < 1e-12 && c.holds);
        }
        let c = cosine_inequality_check(&[1.234]);
        assert!((c.lhs - c.rhs).abs() < 1e-12);
        assert!(cosine_inequality_check(&[3.0, -2.0, 0.5]).holds);
    }
}
