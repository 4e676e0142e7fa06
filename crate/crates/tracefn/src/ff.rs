//! Exact arithmetic in the prime field F_p, plus the standard characters.
//!
//! A [`PrimeField`] fixes an odd prime p, the smallest primitive root g
//! mod p, and a full discrete-logarithm table base g. On top of that it
//! exposes the additive character psi(x) = e(x/p) and the multiplicative
//! characters chi of any order dividing p - 1, realized as
//! chi(g^k) = e(k/order). These are the building blocks for every trace
//! function in the crate.
//!
//! The field is immutable after construction; all operations are pure.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest modulus we build a dlog table for (table is O(p) memory).
pub const MAX_PRIME: u64 = 1 << 24;

const TAU: f64 = std::f64::consts::TAU;

/// Deterministic Miller-Rabin for u64 (the standard 12-witness set is
/// exact for all 64-bit inputs).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
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

/// Prime factorization by trial division; fine for the desk-scale moduli
/// this crate targets.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// An odd prime field with a fixed primitive root and dlog table.
#[derive(Clone)]
pub struct PrimeField {
    p: u64,
    g: u64,
    /// dlog_table[x] = k with g^k = x, for x in 1..p; entry 0 is a sentinel.
    dlog_table: Vec<u32>,
}

impl std::fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeField")
            .field("p", &self.p)
            .field("g", &self.g)
            .finish()
    }
}

impl PrimeField {
    /// Construct F_p. Picks the smallest primitive root and precomputes
    /// the full dlog table, so construction is O(p).
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_PRIME {
            return Err(Error::NotPrime(p));
        }
        let g = smallest_primitive_root(p);
        let mut dlog_table = vec![u32::MAX; p as usize];
        let mut x = 1u64;
        for k in 0..p - 1 {
            dlog_table[x as usize] = k as u32;
            x = mul_mod(x, g, p);
        }
        debug_assert_eq!(x, 1);
        Ok(PrimeField { p, g, dlog_table })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// The fixed primitive root g mod p.
    #[inline]
    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Reduce an integer into [0, p).
    #[inline]
    pub fn element(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Multiplicative inverse; x must be nonzero.
    #[inline]
    pub fn inv(&self, x: u64) -> u64 {
        debug_assert!(x % self.p != 0);
        pow_mod(x, self.p - 2, self.p)
    }

    /// g^k mod p.
    #[inline]
    pub fn exp_g(&self, k: u64) -> u64 {
        pow_mod(self.g, k % (self.p - 1), self.p)
    }

    /// Discrete logarithm base g. Errors on x = 0.
    pub fn dlog(&self, x: u64) -> Result<u64> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::DlogOfZero);
        }
        Ok(self.dlog_table[x as usize] as u64)
    }

    /// The standard additive character psi(x) = e(x/p) = exp(2 pi i x / p).
    #[inline]
    pub fn additive_character(&self, x: u64) -> Complex64 {
        let r = (x % self.p) as f64 / self.p as f64;
        Complex64::from_polar(1.0, TAU * r)
    }

    /// Multiplicative character of exact order `order` (must divide p - 1),
    /// defined by chi(g^k) = e(k / order); chi(0) = 0.
    ///
    /// order = 1 gives the trivial character (1 on all of F_p^x),
    /// order = 2 the Legendre symbol.
    pub fn mult_character(&self, order: u64, x: u64) -> Result<Complex64> {
        if order == 0 || (self.p - 1) % order != 0 {
            return Err(Error::InvalidCharacterOrder {
                order,
                pm1: self.p - 1,
            });
        }
        let x = x % self.p;
        if x == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let k = self.dlog_table[x as usize] as u64;
        let r = (k % order) as f64 / order as f64;
        Ok(Complex64::from_polar(1.0, TAU * r))
    }

    /// Legendre symbol of x as an integer in {-1, 0, 1}.
    pub fn legendre(&self, x: u64) -> i32 {
        let x = x % self.p;
        if x == 0 {
            return 0;
        }
        if self.dlog_table[x as usize] % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

fn smallest_primitive_root(p: u64) -> u64 {
    let factors = factorize(p - 1);
    'cand: for g in 2..p {
        for &(q, _) in &factors {
            if pow_mod(g, (p - 1) / q, p) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every odd prime has a primitive root")
}
