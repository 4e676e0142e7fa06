//! Unitarily normalized Fourier transform on F_p and correlation sums.
//!
//! The transform is K^(x) = p^{-1/2} sum_y K(y) e(-xy/p). It is unitary
//! (Plancherel) and satisfies the involution K^^(x) = K(-x).
//!
//! The fast path delegates the length-p DFT to an FFT planner that
//! handles prime lengths internally; the naive O(p^2) evaluation is kept
//! as a fallback and serves as the correctness oracle in tests.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::trace::{KernelKind, TraceFunction};

/// Fast Fourier transform of a trace-function table, O(p log p).
pub fn fourier(k: &TraceFunction) -> TraceFunction {
    let p = k.p() as usize;
    let mut buf = k.values().to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(p).process(&mut buf);
    let scale = 1.0 / (p as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
    k.with_table(buf, KernelKind::Custom(format!("fourier({})", k.kind().label())))
}

/// Naive O(p^2) transform; the defining sum evaluated term by term.
pub fn fourier_naive(k: &TraceFunction) -> TraceFunction {
    let f = k.field();
    let p = k.p();
    // e(-jk/p) looked up from a root table indexed by jk mod p
    let roots: Vec<Complex64> = (0..p).map(|r| f.additive_character(r).conj()).collect();
    let scale = 1.0 / (p as f64).sqrt();
    let vals = k.values();
    let mut out = Vec::with_capacity(p as usize);
    for x in 0..p {
        let mut s = Complex64::new(0.0, 0.0);
        for y in 0..p {
            s += vals[y as usize] * roots[f.mul(x, y) as usize];
        }
        out.push(s * scale);
    }
    k.with_table(
        out,
        KernelKind::Custom(format!("fourier({})", k.kind().label())),
    )
}

/// Correlation sum C(K1, K2) = p^{-1} sum_a K1(a) conj(K2(a)).
pub fn correlate(k1: &TraceFunction, k2: &TraceFunction) -> Result<Complex64> {
    k1.same_field(k2)?;
    let s: Complex64 = k1
        .values()
        .iter()
        .zip(k2.values())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s / k1.p() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::PrimeField;
    use std::sync::Arc;

    fn field(p: u64) -> Arc<PrimeField> {
        Arc::new(PrimeField::new(p).unwrap())
    }

    fn zoo(p: u64) -> Vec<TraceFunction> {
        let f = field(p);
        let mut v = vec![
            TraceFunction::trivial(f.clone()),
            TraceFunction::legendre(f.clone()).unwrap(),
            TraceFunction::kloosterman(f.clone(), 2).unwrap(),
            TraceFunction::kloosterman(f.clone(), 3).unwrap(),
        ];
        if (p - 1) % 4 == 0 {
            v.push(TraceFunction::mult_char(f.clone(), 4).unwrap());
        }
        v.push(TraceFunction::additive(f, 1));
        v
    }

    #[test]
    fn transform_of_trivial_is_scaled_delta() {
        let k = TraceFunction::trivial(field(7));
        let hat = fourier(&k);
        assert!((hat.value(0) - Complex64::new(7f64.sqrt(), 0.0)).norm() < 1e-12);
        for x in 1..7 {
            assert!(hat.value(x).norm() < 1e-12);
        }
    }

    #[test]
    fn legendre_is_self_dual_at_p5() {
        // p = 5 = 1 mod 4: Gauss sum is +sqrt(5), so chi_2^ = chi_2.
        let f = field(5);
        let chi = TraceFunction::legendre(f.clone()).unwrap();
        let hat = fourier(&chi);
        // direct 5-term oracle
        for x in 0..5 {
            let mut s = Complex64::new(0.0, 0.0);
            for y in 0..5 {
                s += chi.value(y) * f.additive_character(f.mul(x, y)).conj();
            }
            s /= 5f64.sqrt();
            assert!((hat.value(x) - s).norm() < 1e-12);
        }
        for x in 0..5 {
            assert!((hat.value(x) - chi.value(x)).norm() < 1e-9);
        }
    }

    #[test]
    fn fast_matches_naive() {
        for p in [13u64, 101] {
            for k in zoo(p) {
                let fast = fourier(&k);
                let slow = fourier_naive(&k);
                for x in 0..p {
                    assert!(
                        (fast.value(x) - slow.value(x)).norm() < 1e-8,
                        "p={p} kind={} x={x}",
                        k.kind().label()
                    );
                }
            }
        }
    }

    #[test]
    fn plancherel_and_involution() {
        for p in [13u64, 53] {
            for k in zoo(p) {
                let hat = fourier(&k);
                assert!(
                    (hat.l2_norm_sq() - k.l2_norm_sq()).abs() < 1e-9 * k.l2_norm_sq().max(1.0),
                    "plancherel p={p} kind={}",
                    k.kind().label()
                );
                let hh = fourier(&hat);
                let f = k.field();
                for x in 0..p {
                    assert!(
                        (hh.value(x) - k.value(f.neg(x))).norm() < 1e-9,
                        "involution p={p} kind={} x={x}",
                        k.kind().label()
                    );
                }
            }
        }
    }

    #[test]
    fn correlation_basics() {
        let f = field(11);
        let t = TraceFunction::trivial(f.clone());
        let c = correlate(&t, &t).unwrap();
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // self-correlation of Kl_2 is real positive, at most 4
        let f13 = field(13);
        let k = TraceFunction::kloosterman(f13, 2).unwrap();
        let c = correlate(&k, &k).unwrap();
        assert!(c.im.abs() < 1e-12);
        assert!(c.re > 0.0 && c.re <= 4.0);
        // equals (1/p) sum |Kl2|^2
        assert!((c.re - k.l2_norm_sq() / 13.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_cancellation_vs_trivial() {
        // |C(Kl2, 1)| = |p^{-1} sum_a Kl2(a)| = p^{-3/2}
        let p = 101u64;
        let f = field(p);
        let k = TraceFunction::kloosterman(f.clone(), 2).unwrap();
        let t = TraceFunction::trivial(f);
        let c = correlate(&k, &t).unwrap();
        assert!(c.norm() <= 10.0 / (p as f64).sqrt());
        assert!((c.norm() - (p as f64).powf(-1.5)).abs() < 1e-10);
    }

    #[test]
    fn quasi_orthogonality_of_rescaled_kloosterman() {
        // K1 = Kl2, K2 = Kl2(c x) with c != 1: correlation is O(1/sqrt p)
        for p in [53u64, 101, 199, 499] {
            let f = field(p);
            let k1 = TraceFunction::kloosterman(f.clone(), 2).unwrap();
            for c in [2i64, 3, 5] {
                let map = crate::trace::RationalMap::new(&f, &[0, c], &[1]).unwrap();
                let k2 = k1.pullback(&map).unwrap();
                let corr = correlate(&k1, &k2).unwrap();
                assert!(
                    corr.norm() <= 20.0 / (p as f64).sqrt(),
                    "p={p} c={c}: |C| = {} vs {}",
                    corr.norm(),
                    20.0 / (p as f64).sqrt()
                );
            }
        }
    }
}
