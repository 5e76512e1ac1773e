use alloc::vec::Vec;

use crate::{arith, modp, Error, Result};

/// Field elements are encoded as integers in `[0, q)` whose base-`p` digits
/// are the coefficients of a polynomial of degree `< f` in the generator.
pub type Elem = u32;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 12;

/// Largest extension degree for which additive subgroups are enumerated.
pub const MAX_SUBGROUP_DEGREE: u32 = 3;

/// `F_q` for `q = p^f <= 2^12`, built on the lexicographically first
/// primitive monic polynomial of degree `f` over `F_p`, with log/antilog
/// tables for multiplication and a precomputed trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTable {
    p: u32,
    f: u32,
    q: u32,
    /// `c_0, ..., c_{f-1}` of `x^f + c_{f-1} x^{f-1} + ... + c_0`.
    modulus: Vec<u32>,
    log: Vec<u32>,
    exp: Vec<Elem>,
    trace: Vec<u32>,
}

impl FieldTable {
    pub fn new(p: u64, f: u32) -> Result<Self> {
        if !arith::is_prime_u64(p) {
            return Err(Error::NotPrime(alloc::format!("{p}")));
        }
        let q = (f >= 1).then(|| p.checked_pow(f)).flatten().filter(|&q| q <= MAX_ORDER);
        let Some(q) = q else {
            return Err(Error::UnsupportedField { p, f });
        };
        let (p, q) = (p as u32, q as u32);
        for code in 0..q {
            // Most significant digit is c_{f-1}.
            let modulus: Vec<u32> = (0..f).map(|i| (code / p.pow(i)) % p).collect();
            if modulus[0] == 0 {
                continue;
            }
            if let Some(exp) = powers_of_x(p, &modulus, q) {
                let mut log = alloc::vec![0u32; q as usize];
                for (k, &e) in exp.iter().enumerate().take(q as usize - 1) {
                    log[e as usize] = k as u32;
                }
                let mut field = FieldTable { p, f, q, modulus, log, exp, trace: Vec::new() };
                field.trace = (0..q).map(|x| field.compute_trace(x)).collect();
                return Ok(field);
            }
        }
        unreachable!("every finite field has a primitive element")
    }

    /// `F_q` from its order.
    pub fn of_order(q: u64) -> Result<Self> {
        match arith::prime_power(q) {
            Some((p, f)) => Self::new(p, f),
            None => Err(Error::InvalidParameter("field order must be a prime power")),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.f
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Low-order coefficients of the defining polynomial.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> core::ops::Range<Elem> {
        0..self.q
    }

    /// The class of `x`, a generator of the multiplicative group.
    pub fn generator(&self) -> Elem {
        self.exp[1]
    }

    /// Embedding of `c mod p` as a constant polynomial.
    pub fn from_prime_field(&self, c: i64) -> Elem {
        c.rem_euclid(self.p as i64) as Elem
    }

    pub fn digits(&self, x: Elem) -> Vec<u32> {
        (0..self.f).map(|i| (x / self.p.pow(i)) % self.p).collect()
    }

    pub fn from_digits(&self, d: &[u32]) -> Elem {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c % self.p)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        if self.f == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        let (mut a, mut out, mut place) = (a, 0, 1);
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let k = self.log[a as usize] + self.log[b as usize];
        self.exp[(k % (self.q - 1)) as usize]
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        (a != 0).then(|| self.exp[((self.q - 1 - self.log[a as usize]) % (self.q - 1)) as usize])
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let k = (self.log[a as usize] as u64 * (e % (self.q as u64 - 1))) % (self.q as u64 - 1);
        self.exp[k as usize]
    }

    /// Discrete log base the generator, for nonzero `a`.
    pub fn log(&self, a: Elem) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// `tr(x) = x + x^p + ... + x^{p^{f-1}}`, as an integer in `[0, p)`.
    pub fn trace(&self, x: Elem) -> u32 {
        self.trace[x as usize]
    }

    fn compute_trace(&self, x: Elem) -> u32 {
        let mut acc = 0;
        let mut y = x;
        for _ in 0..self.f {
            acc = self.add(acc, y);
            y = self.pow(y, self.p as u64);
        }
        debug_assert!(acc < self.p, "trace lies in the prime field");
        acc
    }

    /// All additive subgroups (`F_p`-subspaces), each as a sorted element
    /// list, from `{0}` up to the whole field.
    pub fn additive_subgroups(&self) -> Result<Vec<Vec<Elem>>> {
        if self.f > MAX_SUBGROUP_DEGREE {
            return Err(Error::UnsupportedField { p: self.p as u64, f: self.f });
        }
        let mut out = Vec::new();
        for basis in modp::enumerate_subspaces(self.p as u64, self.f as usize) {
            let gens: Vec<Elem> =
                basis.iter().map(|v| self.from_digits(&v.iter().map(|&c| c as u32).collect::<Vec<_>>())).collect();
            let mut members = alloc::vec![0 as Elem];
            for g in gens {
                let mut next = Vec::with_capacity(members.len() * self.p as usize);
                for c in 0..self.p {
                    let cg = self.mul(self.from_prime_field(c as i64), g);
                    next.extend(members.iter().map(|&m| self.add(m, cg)));
                }
                members = next;
            }
            members.sort_unstable();
            out.push(members);
        }
        Ok(out)
    }
}

/// Successive powers `x^0, x^1, ..., x^{q-2}` (then repeated) modulo the
/// polynomial, or `None` if `x` is not a generator of order `q - 1`.
fn powers_of_x(p: u32, modulus: &[u32], q: u32) -> Option<Vec<Elem>> {
    let f = modulus.len();
    let order = (q - 1) as usize;
    let mut digits = alloc::vec![0u32; f];
    digits[0] = 1;
    let encode = |d: &[u32]| d.iter().rev().fold(0u32, |acc, &c| acc * p + c);
    let mut exp = Vec::with_capacity(2 * order);
    for k in 0..order {
        let e = encode(&digits);
        if k > 0 && e == 1 {
            return None;
        }
        exp.push(e);
        // Multiply by x: shift up and fold x^f = -(c_0 + ... + c_{f-1} x^{f-1}).
        let top = digits[f - 1];
        for i in (1..f).rev() {
            digits[i] = digits[i - 1];
        }
        digits[0] = 0;
        for i in 0..f {
            digits[i] = (digits[i] + (p - modulus[i]) * top) % p;
        }
    }
    if encode(&digits) != 1 {
        return None;
    }
    let head = exp.clone();
    exp.extend(head);
    Some(exp)
}

/// Rank of a matrix over `F_q`, rows given as element vectors.
pub fn rank(field: &FieldTable, mut rows: Vec<Vec<Elem>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = field.inv(rows[r][c]).unwrap();
        let pivot: Vec<Elem> = rows[r].iter().map(|&x| field.mul(x, inv)).collect();
        for row in rows.iter_mut().skip(r + 1) {
            let s = row[c];
            if s != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = field.sub(*x, field.mul(s, y));
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORDERS: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27];

    #[test]
    fn field_axioms_on_small_fields() {
        for q in ORDERS {
            let k = FieldTable::of_order(q).unwrap();
            for a in k.elements() {
                assert_eq!(k.add(a, k.neg(a)), 0);
                if a != 0 {
                    assert_eq!(k.mul(a, k.inv(a).unwrap()), 1);
                }
                for b in k.elements() {
                    assert_eq!(k.add(a, b), k.add(b, a));
                    assert_eq!(k.mul(a, b), k.mul(b, a));
                    for c in [0, 1, k.generator(), q as Elem - 1] {
                        assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn multiplicative_group_is_cyclic() {
        for q in ORDERS.into_iter().chain([4096, 3125, 2187, 4093]) {
            let k = FieldTable::of_order(q).unwrap();
            let g = k.generator();
            let mut seen = alloc::vec![false; q as usize];
            let mut x = 1;
            for _ in 0..q - 1 {
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
                x = k.mul(x, g);
            }
            assert_eq!(x, 1);
        }
    }

    #[test]
    fn trace_is_linear_and_identity_on_prime_fields() {
        for q in ORDERS {
            let k = FieldTable::of_order(q).unwrap();
            for a in k.elements() {
                if k.degree() == 1 {
                    assert_eq!(k.trace(a), a);
                }
                for b in k.elements() {
                    assert_eq!(k.trace(k.add(a, b)), (k.trace(a) + k.trace(b)) % k.p());
                }
                for c in 0..k.p() {
                    let ca = k.mul(c, a);
                    assert_eq!(k.trace(ca), (c * k.trace(a)) % k.p());
                }
            }
            // The trace is onto F_p, so each value is hit q/p times.
            let ones = k.elements().filter(|&x| k.trace(x) == 1).count();
            assert_eq!(ones as u64, q / k.p() as u64);
        }
    }

    #[test]
    fn defining_polynomials() {
        // x^2 + x + 1 over F_2; x^3 + x + 1 over F_2.
        assert_eq!(FieldTable::new(2, 2).unwrap().modulus(), [1, 1]);
        assert_eq!(FieldTable::new(2, 3).unwrap().modulus(), [1, 1, 0]);
        // Over F_7 the first primitive candidate is x + 2, with root 5.
        let f7 = FieldTable::new(7, 1).unwrap();
        assert_eq!(f7.modulus(), [2]);
        assert_eq!(f7.generator(), 5);
        assert!(FieldTable::new(2, 13).is_err());
        assert!(FieldTable::of_order(6).is_err());
    }

    #[test]
    fn subgroup_counts() {
        let counts: Vec<usize> =
            [4u64, 8, 9, 27, 5].iter().map(|&q| FieldTable::of_order(q).unwrap().additive_subgroups().unwrap().len()).collect();
        // Gaussian binomial sums: F_2^2 has 5, F_2^3 has 16, F_3^2 has 6, F_3^3 has 28.
        assert_eq!(counts, [5, 16, 6, 28, 2]);
        assert!(FieldTable::of_order(16).unwrap().additive_subgroups().is_err());
    }

    #[test]
    fn rank_over_extension_field() {
        let k = FieldTable::of_order(4).unwrap();
        let g = k.generator();
        let g2 = k.mul(g, g);
        assert_eq!(rank(&k, alloc::vec![alloc::vec![1, g], alloc::vec![g, g2]]), 1);
        assert_eq!(rank(&k, alloc::vec![alloc::vec![1, g], alloc::vec![g, 1]]), 2);
    }
}
