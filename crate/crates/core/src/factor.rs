//! Integer factorization within a fixed budget: trial division to 10^6,
//! then Brent's variant of Pollard rho with a bounded iteration count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::{arith, Error, Result};

pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;
const RHO_ITERATIONS_WORD: u64 = 1 << 21;
const RHO_ITERATIONS_BIG: u64 = 1 << 18;
const RHO_ATTEMPTS: u64 = 3;

/// Result of [`factorize`]: fully resolved prime powers plus whatever
/// composite cofactors resisted the budget.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pub primes: Vec<(BigUint, u32)>,
    pub unfactored: Vec<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }
}

fn small_primes(limit: u32) -> Vec<u32> {
    let limit = limit as usize;
    let mut sieve = alloc::vec![true; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if sieve[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Factor `|n|` (for `n != 0`) as far as the budget allows.
pub fn factorize(n: &BigUint) -> Factorization {
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut unfactored = Vec::new();
    let mut rest = n.clone();
    if rest.is_zero() {
        return Factorization { primes: Vec::new(), unfactored: alloc::vec![rest] };
    }

    // Cheap strip of the tiny primes before deciding whether to sieve.
    for p in [2u32, 3, 5, 7, 11, 13] {
        while (&rest % p).is_zero() {
            rest /= p;
            *found.entry(BigUint::from(p)).or_default() += 1;
        }
    }
    if rest > BigUint::one() && !arith::is_prime(&rest) {
        for p in small_primes(TRIAL_DIVISION_LIMIT).into_iter().skip(6) {
            let pp = BigUint::from(p) * p;
            if pp > rest {
                break;
            }
            if (&rest % p).is_zero() {
                while (&rest % p).is_zero() {
                    rest /= p;
                    *found.entry(BigUint::from(p)).or_default() += 1;
                }
                if arith::is_prime(&rest) {
                    break;
                }
            }
        }
    }

    let mut stack = Vec::new();
    if rest > BigUint::one() {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if arith::is_prime(&m) {
            *found.entry(m).or_default() += 1;
        } else if let Some(f) = pollard_rho(&m) {
            let g = &m / &f;
            stack.push(f);
            stack.push(g);
        } else {
            unfactored.push(m);
        }
    }
    unfactored.sort();
    Factorization { primes: found.into_iter().collect(), unfactored }
}

/// The set of prime divisors of `|d|`, in increasing order.
pub fn prime_divisors(d: &BigInt) -> Result<Vec<BigInt>> {
    if d.is_zero() {
        return Err(Error::InvalidParameter("zero has no finite set of prime divisors"));
    }
    let f = factorize(d.magnitude());
    if let Some(c) = f.unfactored.first() {
        return Err(Error::FactoringFailed { cofactor: c.clone() });
    }
    Ok(f.primes.into_iter().map(|(p, _)| BigInt::from(p)).collect())
}

/// A nontrivial factor of the odd composite `n`, or `None` if the budget ran
/// out.
pub fn pollard_rho(n: &BigUint) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(w) = n.to_u64().filter(|&w| w < 1 << 63) {
        return (1..=RHO_ATTEMPTS).find_map(|c| rho_word(w, c, RHO_ITERATIONS_WORD)).map(BigUint::from);
    }
    (1..=RHO_ATTEMPTS).find_map(|c| rho_big(n, c, RHO_ITERATIONS_BIG))
}

// Brent cycle finding with batched gcds.
fn rho_word(n: u64, c: u64, max_iter: u64) -> Option<u64> {
    let f = |x: u64| arith::add_mod(arith::mul_mod(x, x, n), c, n);
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let (mut x, mut ys);
    let mut iters = 0;
    let batch = 128;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r {
            ys = y;
            for _ in 0..batch.min(r - k) {
                y = f(y);
                q = arith::mul_mod(q, x.abs_diff(y), n);
            }
            let g = q.gcd(&n);
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                // Backtrack one step at a time.
                loop {
                    ys = f(ys);
                    let g = x.abs_diff(ys).gcd(&n);
                    if g != 1 {
                        return (g != n).then_some(g);
                    }
                }
            }
            k += batch;
            iters += batch;
            if iters > max_iter {
                return None;
            }
        }
        r *= 2;
    }
}

fn rho_big(n: &BigUint, c: u64, max_iter: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let mut y = BigUint::from(2u32);
    let mut q = BigUint::one();
    let mut r = 1u64;
    let mut iters = 0;
    let batch = 128;
    loop {
        let x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r {
            let mut ys = y.clone();
            for _ in 0..batch.min(r - k) {
                y = f(&y);
                q = (q * diff(&x, &y)) % n;
            }
            let g = q.gcd(n);
            if !g.is_one() {
                if &g != n {
                    return Some(g);
                }
                loop {
                    ys = f(&ys);
                    let g = diff(&x, &ys).gcd(n);
                    if !g.is_one() {
                        return (&g != n).then_some(g);
                    }
                }
            }
            k += batch;
            iters += batch;
            if iters > max_iter {
                return None;
            }
        }
        r *= 2;
    }
}
