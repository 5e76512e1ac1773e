//! Word-size modular arithmetic, primality testing and the CRT helpers used
//! by the determinant and factoring code.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Largest modulus handled by the native `u64` backends.
pub const WORD_LIMIT: u64 = 1 << 62;

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    if s >= m as u128 {
        (s - m as u128) as u64
    } else {
        s as u64
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, or `Err(g)` with `g = gcd(a, m) > 1`.
pub fn inv_mod(a: u64, m: u64) -> Result<u64, u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(r0 as u64);
    }
    Ok(t0.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with the first twelve prime bases. Exact below 3.3e24 and a
/// (strong) probable-prime test beyond that.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'bases: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// `Some((p, f))` when `q = p^f` with `p` prime and `f >= 1`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..).take_while(|&d: &u64| d.saturating_mul(d) <= q).find(|&d| q.is_multiple_of(d)).unwrap_or(q);
    let mut rest = q;
    let mut f = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        f += 1;
    }
    (rest == 1).then_some((p, f))
}

pub fn is_prime_int(n: &BigInt) -> bool {
    n.sign() == Sign::Plus && is_prime(n.magnitude())
}

/// Primes below 2^62 in decreasing order.
pub fn word_primes() -> impl Iterator<Item = u64> {
    (1..).map(|k| WORD_LIMIT - k).filter(|&c| is_prime_u64(c))
}

/// `ceil(sqrt(n))`.
pub fn ceil_sqrt(n: &BigUint) -> BigUint {
    let r = n.sqrt();
    if &(&r * &r) == n {
        r
    } else {
        r + 1u32
    }
}

/// Reduce `x` into `[0, m)` for a word-size modulus.
pub fn reduce_word(x: &BigInt, m: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits in a word")
}

pub fn reduce_big(x: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from_biguint(Sign::Plus, m.clone());
    x.mod_floor(&mi).magnitude().clone()
}

/// Incremental Chinese remaindering over pairwise coprime word moduli.
#[derive(Debug, Clone)]
pub struct Crt {
    value: BigUint,
    modulus: BigUint,
}

impl Default for Crt {
    fn default() -> Self {
        Self::new()
    }
}

impl Crt {
    pub fn new() -> Self {
        Crt { value: BigUint::zero(), modulus: BigUint::one() }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn push(&mut self, residue: u64, p: u64) {
        // x = value + modulus * t with t = (residue - value) / modulus mod p
        let cur = (&self.value % p).to_u64().unwrap();
        let m_mod = (&self.modulus % p).to_u64().unwrap();
        let inv = inv_mod(m_mod, p).expect("CRT moduli must be coprime");
        let t = mul_mod(sub_mod(residue % p, cur, p), inv, p);
        self.value += &self.modulus * t;
        self.modulus *= p;
    }

    /// The representative in `(-modulus/2, modulus/2]`.
    pub fn symmetric(&self) -> BigInt {
        let half = &self.modulus >> 1;
        if self.value > half {
            BigInt::from(self.value.clone()) - BigInt::from(self.modulus.clone())
        } else {
            BigInt::from(self.value.clone())
        }
    }
}
