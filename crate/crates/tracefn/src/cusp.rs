//! Coefficients of the discriminant cusp form: exact tau(n), normalized
//! Hecke eigenvalues lambda(n) = tau(n)/n^{11/2}, Satake parameters, and
//! the two amplifier weight choices.
//!
//! tau is read off the eta product q prod (1 - q^n)^24. With Jacobi's
//! identity prod (1 - q^n)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}, the
//! 24th power is the 8th power of a series with O(sqrt N) terms, so the
//! table extends to N in about 8 N sqrt(2N) integer operations. All
//! series arithmetic is checked 128-bit; the extent cap keeps the
//! Deligne bound d(n) n^{11/2} comfortably inside i128, and any
//! overflow is an error, never silent wraparound.
//!
//! The interface accepts any coefficient stream in principle, but the
//! discriminant form (weight 12, level 1) is the one concrete eigenform
//! built here.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{factorize, is_prime};

/// Hard cap on the table extent; far below any i128 overflow risk.
pub const MAX_EXTENT: usize = 1 << 20;

/// Magic header of the binary tau cache.
pub const CACHE_MAGIC: &[u8; 5] = b"TAUv1";

/// Exact tau table with lazy normalized eigenvalues.
#[derive(Clone, Debug)]
pub struct CuspFormCoeffs {
    /// tau[n] for 1 <= n <= extent; tau[0] is unused.
    tau: Vec<i128>,
}

impl CuspFormCoeffs {
    /// Expand the eta product far enough to know tau(1..n).
    pub fn extend_tau(n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(CuspFormCoeffs { tau: vec![0] });
        }
        if n > MAX_EXTENT {
            return Err(Error::ExtentTooLarge(n, MAX_EXTENT));
        }
        // Jacobi: prod (1-q^m)^3 = sum_{k>=0} (-1)^k (2k+1) q^{k(k+1)/2}
        let mut jacobi: Vec<(usize, i128)> = Vec::new();
        let mut k = 0usize;
        loop {
            let e = k * (k + 1) / 2;
            if e >= n {
                break;
            }
            let c = (2 * k + 1) as i128;
            jacobi.push((e, if k % 2 == 0 { c } else { -c }));
            k += 1;
        }

        // (eta^3)^8, truncated at degree n-1; tau(m) is coefficient m-1
        let mut acc = vec![0i128; n];
        acc[0] = 1;
        for _ in 0..8 {
            let mut next = vec![0i128; n];
            for (i, &a) in acc.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for &(e, c) in &jacobi {
                    let j = i + e;
                    if j >= n {
                        break;
                    }
                    let term = a
                        .checked_mul(c)
                        .ok_or(Error::ExtentTooLarge(n, MAX_EXTENT))?;
                    next[j] = next[j]
                        .checked_add(term)
                        .ok_or(Error::ExtentTooLarge(n, MAX_EXTENT))?;
                }
            }
            acc = next;
        }

        let mut tau = vec![0i128; n + 1];
        tau[1..].copy_from_slice(&acc[..n]);
        Ok(CuspFormCoeffs { tau })
    }

    /// Largest n with tau(n) tabulated.
    pub fn extent(&self) -> usize {
        self.tau.len().saturating_sub(1)
    }

    /// Exact tau(n) from the table.
    pub fn tau(&self, n: usize) -> Result<i128> {
        if n == 0 || n > self.extent() {
            return Err(Error::InsufficientExtent {
                have: self.extent(),
                need: n,
            });
        }
        Ok(self.tau[n])
    }

    /// Normalized eigenvalue lambda(n) = tau(n) / n^{11/2}.
    pub fn lambda(&self, n: usize) -> Result<f64> {
        Ok(self.tau(n)? as f64 / (n as f64).powf(5.5))
    }

    /// tau(p^e) by the Hecke recursion
    /// tau(p^{k+1}) = tau(p) tau(p^k) - p^11 tau(p^{k-1}),
    /// needing only tau(p) from the table. Prefers the table when it
    /// already reaches p^e.
    pub fn tau_prime_power(&self, p: u64, e: u32) -> Result<i128> {
        if !is_prime(p) {
            return Err(Error::ExpectedPrime(p));
        }
        let pe_checked = (p as u128).checked_pow(e);
        if let Some(pe) = pe_checked {
            if pe <= self.extent() as u128 {
                return self.tau(pe as usize);
            }
        }
        let tp = self.tau(p as usize)?;
        let p11 = (p as i128)
            .checked_pow(11)
            .ok_or(Error::ExtentTooLarge(p as usize, MAX_EXTENT))?;
        let (mut prev, mut cur) = (1i128, tp); // tau(p^0), tau(p^1)
        for _ in 1..e {
            let next = tp
                .checked_mul(cur)
                .and_then(|x| x.checked_sub(p11.checked_mul(prev)?))
                .ok_or(Error::ExtentTooLarge(p as usize, MAX_EXTENT))?;
            prev = cur;
            cur = next;
        }
        Ok(if e == 0 { 1 } else { cur })
    }

    /// tau at arbitrary n via multiplicativity over the factorization.
    pub fn tau_at(&self, n: u64) -> Result<i128> {
        if n == 0 {
            return Err(Error::InsufficientExtent { have: self.extent(), need: 0 });
        }
        if n as usize <= self.extent() {
            return self.tau(n as usize);
        }
        let mut acc = 1i128;
        for (p, e) in factorize(n) {
            acc = acc
                .checked_mul(self.tau_prime_power(p, e)?)
                .ok_or(Error::ExtentTooLarge(n as usize, MAX_EXTENT))?;
        }
        Ok(acc)
    }

    /// Binary cache: header "TAUv1", u64 LE count, then one
    /// length-prefixed little-endian signed integer per coefficient.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::with_capacity(16 * self.extent() + 16);
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&(self.extent() as u64).to_le_bytes());
        for n in 1..=self.extent() {
            let bytes = minimal_le_bytes(self.tau[n]);
            buf.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            buf.extend_from_slice(&bytes);
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > bytes.len() {
                return Err(Error::CacheFormat("truncated file".into()));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 5)? != CACHE_MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
        if count > MAX_EXTENT {
            return Err(Error::CacheFormat(format!("extent {count} too large")));
        }
        let mut tau = vec![0i128; count + 1];
        for t in tau.iter_mut().skip(1) {
            let len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
            if len == 0 || len > 16 {
                return Err(Error::CacheFormat(format!("bad integer width {len}")));
            }
            let raw = take(&mut pos, len)?;
            let negative = raw[len - 1] & 0x80 != 0;
            let mut wide = if negative { [0xFFu8; 16] } else { [0u8; 16] };
            wide[..len].copy_from_slice(raw);
            *t = i128::from_le_bytes(wide);
        }
        if pos != bytes.len() {
            return Err(Error::CacheFormat("trailing data".into()));
        }
        Ok(CuspFormCoeffs { tau })
    }
}

/// Minimal two's-complement little-endian encoding.
fn minimal_le_bytes(v: i128) -> Vec<u8> {
    let full = v.to_le_bytes();
    let mut len = 16;
    if v >= 0 {
        while len > 1 && full[len - 1] == 0 && full[len - 2] & 0x80 == 0 {
            len -= 1;
        }
    } else {
        while len > 1 && full[len - 1] == 0xFF && full[len - 2] & 0x80 != 0 {
            len -= 1;
        }
    }
    full[..len].to_vec()
}

/// Satake parameters at an unramified prime: the roots of
/// z^2 - lambda(p) z + 1, together with the residual of the forced
/// identity lambda(p)^2 - lambda(p^2) = 1.
#[derive(Clone, Debug)]
pub struct SatakeCheck {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub residual: f64,
}

pub fn satake_check(coeffs: &CuspFormCoeffs, p: u64) -> Result<SatakeCheck> {
    if !is_prime(p) {
        return Err(Error::ExpectedPrime(p));
    }
    let lam = coeffs.lambda(p as usize)?;
    // |lambda(p)| < 2 (Deligne), so the roots are conjugate on the unit circle
    let disc = (1.0 - lam * lam / 4.0).max(0.0).sqrt();
    let alpha = Complex64::new(lam / 2.0, disc);
    let beta = alpha.conj();
    let tau_p2 = coeffs.tau_prime_power(p, 2)?;
    let lam_p2 = tau_p2 as f64 / (p as f64).powf(11.0);
    let residual = (lam_p2 - (lam * lam - 1.0)).abs();
    Ok(SatakeCheck {
        alpha,
        beta,
        residual,
    })
}

/// Which amplifier to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplifierKind {
    /// x_l = sign(lambda(l)) on primes l in [L, 2L].
    Venkatesh,
    /// x_l = conj(lambda(l)) on primes, x_{l^2} = -1 on their squares.
    Dfi,
}

impl AmplifierKind {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "venkatesh" => Ok(AmplifierKind::Venkatesh),
            "dfi" => Ok(AmplifierKind::Dfi),
            other => Err(Error::Config(format!("unknown amplifier kind '{other}'"))),
        }
    }
}

/// Weights x_l indexed by l, plus the amplifier value A = sum x_l lambda(l).
#[derive(Clone, Debug, Serialize)]
pub struct AmplifierWeights {
    pub kind: AmplifierKind,
    pub scale: f64,
    /// (index, weight) pairs; indices are primes and, for DFI, their squares.
    pub weights: Vec<(u64, f64)>,
    pub value: f64,
}

/// Build the amplifier on primes in [L, 2L].
///
/// For DFI the value is computed through the exact integer identity
/// tau(l)^2 - tau(l^2) = l^11, so it equals the number of primes in the
/// window exactly.
pub fn amplifier_weights(
    kind: AmplifierKind,
    scale: f64,
    coeffs: &CuspFormCoeffs,
) -> Result<AmplifierWeights> {
    if scale < 2.0 {
        return Err(Error::Config(format!("amplifier length {scale} < 2")));
    }
    let lo = scale.ceil() as u64;
    let hi = (2.0 * scale).floor() as u64;
    if coeffs.extent() < hi as usize {
        return Err(Error::InsufficientExtent {
            have: coeffs.extent(),
            need: hi as usize,
        });
    }
    let primes: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
    let mut weights = Vec::new();
    let mut value = 0.0;
    match kind {
        AmplifierKind::Venkatesh => {
            for &l in &primes {
                let lam = coeffs.lambda(l as usize)?;
                let x = if lam > 0.0 {
                    1.0
                } else if lam < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                weights.push((l, x));
                value += x * lam;
            }
        }
        AmplifierKind::Dfi => {
            let mut exact = 0i64;
            for &l in &primes {
                let tl = coeffs.tau(l as usize)?;
                let tl2 = coeffs.tau_prime_power(l, 2)?;
                weights.push((l, coeffs.lambda(l as usize)?));
                weights.push((l * l, -1.0));
                // contribution (tau(l)^2 - tau(l^2)) / l^11, exactly
                let num = tl * tl - tl2;
                let den = (l as i128).pow(11);
                if num % den == 0 {
                    exact += (num / den) as i64;
                } else {
                    value += num as f64 / den as f64;
                }
            }
            value += exact as f64;
        }
    }
    Ok(AmplifierWeights {
        kind,
        scale,
        weights,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: direct expansion of q prod_{m<=n} (1-q^m)^24
    /// by naive polynomial multiplication.
    fn tau_by_direct_product(n: usize) -> Vec<i128> {
        let mut poly = vec![0i128; n];
        poly[0] = 1;
        for m in 1..n {
            for _ in 0..24 {
                // multiply by (1 - q^m)
                let mut next = poly.clone();
                for (i, &c) in poly.iter().enumerate() {
                    if i + m < n && c != 0 {
                        next[i + m] -= c;
                    }
                }
                poly = next;
            }
        }
        // tau(k) = coefficient of q^{k-1}
        let mut tau = vec![0i128; n + 1];
        tau[1..].copy_from_slice(&poly[..n]);
        tau
    }

    #[test]
    fn small_values_match_direct_expansion() {
        let c = CuspFormCoeffs::extend_tau(200).unwrap();
        let oracle = tau_by_direct_product(200);
        for n in 1..=199 {
            assert_eq!(c.tau(n).unwrap(), oracle[n], "tau({n})");
        }
        assert_eq!(c.tau(1).unwrap(), 1);
        assert_eq!(c.tau(2).unwrap(), -24);
        assert_eq!(c.tau(3).unwrap(), 252);
        assert_eq!(c.tau(4).unwrap(), -1472);
        assert_eq!(c.tau(5).unwrap(), 4830);
        assert_eq!(c.tau(6).unwrap(), -6048);
    }

    #[test]
    fn multiplicativity_and_recursion() {
        let n = 5000;
        let c = CuspFormCoeffs::extend_tau(n).unwrap();
        // tau(ab) = tau(a) tau(b) for coprime a, b
        for a in 2..=70usize {
            for b in 2..=70usize {
                if a * b > n || num_integer::gcd(a, b) != 1 {
                    continue;
                }
                assert_eq!(
                    c.tau(a * b).unwrap(),
                    c.tau(a).unwrap() * c.tau(b).unwrap(),
                    "tau({a}*{b})"
                );
            }
        }
        // Hecke recursion at prime powers
        for p in [2usize, 3, 5, 7, 11, 13] {
            let p11 = (p as i128).pow(11);
            let mut k = 1;
            while p.pow(k as u32 + 1) <= n {
                let lhs = c.tau(p.pow(k as u32 + 1)).unwrap();
                let rhs = c.tau(p).unwrap() * c.tau(p.pow(k as u32)).unwrap()
                    - p11 * c.tau(p.pow(k as u32 - 1)).unwrap();
                assert_eq!(lhs, rhs, "p={p} k={k}");
                k += 1;
            }
        }
        // tau(4) via the recursion from tau(2)
        assert_eq!(c.tau(4).unwrap(), (-24i128) * (-24) - (1i128 << 11));
    }

    #[test]
    fn prime_power_extension_agrees_with_table() {
        let c = CuspFormCoeffs::extend_tau(10_000).unwrap();
        for p in [2u64, 3, 5, 7, 11, 89, 97] {
            for e in 1..=3u32 {
                if (p as u128).pow(e) <= 10_000 {
                    assert_eq!(
                        c.tau_prime_power(p, e).unwrap(),
                        c.tau((p as usize).pow(e)).unwrap(),
                        "p={p} e={e}"
                    );
                }
            }
        }
        // beyond the table, the recursion still yields exact values
        let t = c.tau_prime_power(101, 2).unwrap();
        let tp = c.tau(101).unwrap();
        assert_eq!(t, tp * tp - (101i128).pow(11));
        assert!(c.tau_prime_power(6, 1).is_err());
    }

    #[test]
    fn deligne_bound() {
        let n = 10_000;
        let c = CuspFormCoeffs::extend_tau(n).unwrap();
        for m in 1..=n {
            let d = divisor_count(m as u64) as f64;
            let lam = c.lambda(m).unwrap().abs();
            assert!(lam <= d + 1e-9, "n={m}: |lambda| = {lam} > d(n) = {d}");
        }
    }

    fn divisor_count(n: u64) -> u64 {
        factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
    }

    #[test]
    fn satake_identities() {
        let c = CuspFormCoeffs::extend_tau(10_000).unwrap();
        // lambda(2) = -24 / 2^5.5, lambda(4) = -1472/4^5.5 = lambda(2)^2 - 1
        let s = satake_check(&c, 2).unwrap();
        let lam2 = -24.0 / 2f64.powf(5.5);
        assert!((s.alpha + s.beta - Complex64::new(lam2, 0.0)).norm() < 1e-12);
        assert!((s.alpha * s.beta - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(s.residual < 1e-9);
        for p in [3u64, 5, 7, 11, 13, 97] {
            let s = satake_check(&c, p).unwrap();
            assert!(s.residual < 1e-9, "p={p}: residual {}", s.residual);
            assert!((s.alpha.norm() - 1.0).abs() < 1e-9);
        }
        assert!(satake_check(&c, 4).is_err());
    }

    #[test]
    fn venkatesh_amplifier() {
        let c = CuspFormCoeffs::extend_tau(4000).unwrap();
        let a = amplifier_weights(AmplifierKind::Venkatesh, 10.0, &c).unwrap();
        // primes 11, 13, 17, 19; A = sum |lambda|
        assert_eq!(a.weights.len(), 4);
        let expect: f64 = [11usize, 13, 17, 19]
            .iter()
            .map(|&l| c.lambda(l).unwrap().abs())
            .sum();
        assert!((a.value - expect).abs() < 1e-12);
        assert!(a.value > 0.0);
    }

    #[test]
    fn dfi_amplifier_counts_primes_exactly() {
        let c = CuspFormCoeffs::extend_tau(4000).unwrap();
        let a10 = amplifier_weights(AmplifierKind::Dfi, 10.0, &c).unwrap();
        assert_eq!(a10.value, 4.0); // primes in [10, 20]
        let a100 = amplifier_weights(AmplifierKind::Dfi, 100.0, &c).unwrap();
        assert_eq!(a100.value, 21.0); // primes in [100, 200]
        // extent guard
        assert!(amplifier_weights(AmplifierKind::Dfi, 3000.0, &c).is_err());
        assert!(amplifier_weights(AmplifierKind::Dfi, 1.0, &c).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tau_100.bin");
        let c = CuspFormCoeffs::extend_tau(100).unwrap();
        c.write_cache(&path).unwrap();
        let d = CuspFormCoeffs::read_cache(&path).unwrap();
        assert_eq!(d.extent(), 100);
        for n in 1..=100 {
            assert_eq!(c.tau(n).unwrap(), d.tau(n).unwrap());
        }
        // header check
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(&raw[..5], CACHE_MAGIC);
        // corrupt magic rejected
        let bad = dir.path().join("bad.bin");
        std::fs::write(&bad, b"NOPEx").unwrap();
        assert!(CuspFormCoeffs::read_cache(&bad).is_err());
    }

    #[test]
    fn minimal_encoding_round_trips() {
        for v in [0i128, 1, -1, 127, 128, -128, -129, -24, 4830, i128::MAX, i128::MIN] {
            let b = minimal_le_bytes(v);
            let negative = b[b.len() - 1] & 0x80 != 0;
            let mut wide = if negative { [0xFFu8; 16] } else { [0u8; 16] };
            wide[..b.len()].copy_from_slice(&b);
            assert_eq!(i128::from_le_bytes(wide), v);
        }
    }
}
