//! Complete Kloosterman-type sums over the ring Z/c:
//!
//!   Kl(a, b, d; c) = sum over pairs s1 s2 = d (mod c) of e((a s1 + b s2)/c).
//!
//! d need not be a unit: the sum is evaluated by direct enumeration of
//! s1, solving s1 s2 = d for each (gcd(s1, c) | d gives gcd(s1, c)
//! solutions). This covers the degenerate arguments that appear at
//! ramified places. The sums are multiplicative across coprime moduli
//! after CRT-adjusting the arguments, and for unit d satisfy
//! Kl(a, b, d; c) = Kl(a, d b; c) = Kl(a d, b; c).

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Parameters (a, b, d; c) of a ring Kloosterman sum, reduced mod c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RingKloosterman {
    pub a: u64,
    pub b: u64,
    pub d: u64,
    pub c: u64,
}

impl RingKloosterman {
    pub fn new(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        if c < 1 {
            return Err(Error::InvalidModulus(c));
        }
        let c = c as u64;
        Ok(RingKloosterman {
            a: a.rem_euclid(c as i64) as u64,
            b: b.rem_euclid(c as i64) as u64,
            d: d.rem_euclid(c as i64) as u64,
            c,
        })
    }

    pub fn evaluate(&self) -> Complex64 {
        kl_ring_reduced(self.a, self.b, self.d, self.c)
    }
}

/// Kl(a, b, d; c); c = 1 returns 1 (the single empty-modulus pair).
pub fn kl_ring(a: i64, b: i64, d: i64, c: i64) -> Result<Complex64> {
    Ok(RingKloosterman::new(a, b, d, c)?.evaluate())
}

fn kl_ring_reduced(a: u64, b: u64, d: u64, c: u64) -> Complex64 {
    if c == 1 {
        return Complex64::new(1.0, 0.0);
    }
    // e(t/c) for t in 0..c
    let roots: Vec<Complex64> = (0..c)
        .map(|t| Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / c as f64))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for s1 in 0..c {
        let g = s1.gcd(&c);
        if d % g != 0 {
            continue;
        }
        // all solutions of s1 s2 = d (mod c): s20 + k (c/g), k in 0..g
        let cg = c / g;
        let s20 = if cg == 1 {
            0
        } else {
            let inv = mod_inverse(s1 / g, cg).expect("s1/g is a unit mod c/g");
            (inv as u128 * ((d / g) % cg) as u128 % cg as u128) as u64
        };
        let base = (a as u128 * s1 as u128 % c as u128) as u64;
        for k in 0..g {
            let s2 = s20 + k * cg;
            let t = ((base as u128 + b as u128 * s2 as u128) % c as u128) as u64;
            total += roots[t as usize];
        }
    }
    total
}

/// For unit d, rewrite Kl(a, b, d; c) = Kl(a, d b, 1; c) by substituting
/// s2 -> d s2. Errors unless gcd(d, c) = 1.
pub fn kl_unit_twist(a: i64, b: i64, d: i64, c: i64) -> Result<Complex64> {
    let params = RingKloosterman::new(a, b, d, c)?;
    if params.d.gcd(&params.c) != 1 {
        return Err(Error::NotAUnit { d, c });
    }
    let db = (params.d as u128 * params.b as u128 % params.c as u128) as i64;
    kl_ring(params.a as i64, db, 1, params.c as i64)
}

/// Inverse of x mod m (extended Euclid); None when gcd(x, m) != 1.
pub fn mod_inverse(x: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (x % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// The CRT factor of Kl(a, b, d; c) at the coprime divisor ci of c:
/// Kl(a (c/ci)^{-1}, b (c/ci)^{-1}, d; ci).
pub fn kl_crt_factor(a: u64, b: u64, d: u64, c: u64, ci: u64) -> Result<Complex64> {
    let other = c / ci;
    let inv = mod_inverse(other % ci, ci)
        .ok_or(Error::Config(format!("{ci} and {other} are not coprime")))?;
    let ai = (a % ci) as u128 * inv as u128 % ci as u128;
    let bi = (b % ci) as u128 * inv as u128 % ci as u128;
    kl_ring(ai as i64, bi as i64, (d % ci) as i64, ci as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::factorize;

    #[test]
    fn unit_count_and_trivial_cases() {
        // a=b=0, d=1, c=5: counts the 4 unit pairs
        let v = kl_ring(0, 0, 1, 5).unwrap();
        assert!((v - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        // c = 1
        assert!((kl_ring(1, 1, 1, 1).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // c <= 0 rejected
        assert!(kl_ring(1, 1, 1, 0).is_err());
        assert!(kl_ring(1, 1, 1, -3).is_err());
    }

    #[test]
    fn degenerate_arguments_count_solutions() {
        // Kl(0,0,d;c) = #{(s1,s2) : s1 s2 = d mod c}
        for c in [4i64, 6, 9, 12] {
            for d in 0..c {
                let mut count = 0;
                for s1 in 0..c {
                    for s2 in 0..c {
                        if (s1 * s2 - d).rem_euclid(c) == 0 {
                            count += 1;
                        }
                    }
                }
                let v = kl_ring(0, 0, d, c).unwrap();
                assert!(
                    (v - Complex64::new(count as f64, 0.0)).norm() < 1e-10,
                    "c={c} d={d}"
                );
            }
        }
    }

    #[test]
    fn matches_prime_field_kloosterman() {
        // Kl(1,1,1;p) = sqrt(p) * Kl_2(1; p)
        use crate::trace::TraceFunction;
        use std::sync::Arc;
        for p in [5u64, 13, 31] {
            let f = Arc::new(crate::ff::PrimeField::new(p).unwrap());
            let kl2 = TraceFunction::kloosterman(f, 2).unwrap();
            let ring = kl_ring(1, 1, 1, p as i64).unwrap();
            let expect = kl2.value(1) * (p as f64).sqrt();
            assert!((ring - expect).norm() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn naive_double_loop_oracle() {
        let cases: [(i64, i64, i64, i64); 4] = [(1, 1, 1, 5), (2, 3, 4, 12), (1, 5, 6, 15), (0, 7, 2, 9)];
        for (a, b, d, c) in cases {
            let mut s = Complex64::new(0.0, 0.0);
            for s1 in 0..c {
                for s2 in 0..c {
                    if (s1 * s2 - d).rem_euclid(c) == 0 {
                        let t = (a * s1 + b * s2).rem_euclid(c);
                        s += Complex64::from_polar(
                            1.0,
                            std::f64::consts::TAU * t as f64 / c as f64,
                        );
                    }
                }
            }
            let v = kl_ring(a, b, d, c).unwrap();
            assert!((v - s).norm() < 1e-10, "({a},{b},{d};{c}): {v} vs {s}");
        }
    }

    #[test]
    fn unit_twist_identities() {
        // Kl(1,1,2;5) = Kl(1,2,1;5) = Kl(2,1,1;5)
        let x = kl_ring(1, 1, 2, 5).unwrap();
        let y = kl_ring(1, 2, 1, 5).unwrap();
        let z = kl_ring(2, 1, 1, 5).unwrap();
        assert!((x - y).norm() < 1e-9);
        assert!((x - z).norm() < 1e-9);
        assert!((kl_unit_twist(1, 1, 2, 5).unwrap() - x).norm() < 1e-9);

        // a = 0: value depends on d only through d b
        for c in [7i64, 12] {
            for d in 1..c {
                if (d as u64).gcd(&(c as u64)) != 1 {
                    continue;
                }
                for b in 0..c {
                    let lhs = kl_ring(0, b, d, c).unwrap();
                    let rhs = kl_ring(0, (d * b).rem_euclid(c), 1, c).unwrap();
                    assert!((lhs - rhs).norm() < 1e-9);
                }
            }
        }

        // non-unit d rejected
        assert!(kl_unit_twist(1, 1, 2, 4).is_err());
        assert!((kl_unit_twist(1, 1, 1, 1).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn crt_multiplicativity() {
        // Kl(a,b,d;c1 c2) = prod_i Kl(a (c/ci)^{-1}, b (c/ci)^{-1}, d; ci)
        for (c1, c2) in [(3u64, 5), (4, 9), (7, 8), (5, 21)] {
            let c = c1 * c2;
            for (a, b, d) in [(1u64, 1, 1), (2, 5, 3), (0, 1, 6), (3, 3, 0)] {
                let whole = kl_ring(a as i64, b as i64, d as i64, c as i64).unwrap();
                let f1 = kl_crt_factor(a, b, d, c, c1).unwrap();
                let f2 = kl_crt_factor(a, b, d, c, c2).unwrap();
                assert!(
                    (whole - f1 * f2).norm() < 1e-8,
                    "c={c1}*{c2} (a,b,d)=({a},{b},{d}): {whole} vs {}",
                    f1 * f2
                );
            }
        }
        // CRT against the full prime-power factorization
        let (a, b, d, c) = (1u64, 1, 1, 15u64);
        let whole = kl_ring(a as i64, b as i64, d as i64, c as i64).unwrap();
        let mut prod = Complex64::new(1.0, 0.0);
        for (q, e) in factorize(c) {
            prod *= kl_crt_factor(a, b, d, c, q.pow(e)).unwrap();
        }
        assert!((whole - prod).norm() < 1e-9);
    }

    #[test]
    fn weil_bound_at_primes() {
        for p in (3u64..=199).filter(|&n| crate::ff::is_prime(n)) {
            for (a, b) in [(1u64, 1), (1, 2), (3, 5)] {
                let v = kl_ring(a as i64, b as i64, 1, p as i64).unwrap();
                assert!(
                    v.norm() <= 2.0 * (p as f64).sqrt() + 1e-9,
                    "p={p} a={a} b={b}: {}",
                    v.norm()
                );
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        for (a, b, d, c) in [(1i64, 2, 3, 10), (4, 1, 1, 21), (5, 5, 2, 16)] {
            let v = kl_ring(a, b, d, c).unwrap();
            let w = kl_ring(-a, -b, d, c).unwrap();
            assert!((w - v.conj()).norm() < 1e-10);
        }
    }
}
