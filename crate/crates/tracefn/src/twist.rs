//! The twisted-sum experiment: S_V(f, K; p) = sum_n lambda(n) K(n mod p) V(n/p)
//! across a grid of primes, with the trivial bound
//! |S_V| <= ||K||_inf sum_n |lambda(n) V(n/p)| checked row by row and a
//! least-squares fit of log |S_V| against log p.
//!
//! Writing |S_V| ~ p^{1 - delta}, the fitted delta_emp measures the
//! cancellation beyond the trivial bound; the Burgess-type benchmark is
//! delta = 1/8, and the fit is flagged PASS when
//! delta_emp >= 1/8 - 2 stderr.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

use crate::cusp::{amplifier_weights, AmplifierKind, CuspFormCoeffs};
use crate::error::{Error, Result};
use crate::ff::{is_prime, PrimeField};
use crate::kernel::KernelSpec;
use crate::trace::TraceFunction;

/// Terms with |V| below this are dropped from all sums.
pub const WINDOW_CUTOFF: f64 = 1e-12;

/// Smooth weight V(x) concentrated near x = 1.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum Window {
    /// exp(-sharpness (ln x)^2) for x > 0; the default sharpness 4 is
    /// effectively supported in [1/14, 14] at the 1e-12 cutoff.
    LogGaussian { sharpness: f64 },
}

impl Default for Window {
    fn default() -> Self {
        Window::LogGaussian { sharpness: 4.0 }
    }
}

impl Window {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Window::LogGaussian { sharpness } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let l = x.ln();
                    (-sharpness * l * l).exp()
                }
            }
        }
    }

    /// x-range outside which |V| < cutoff.
    pub fn support(&self, cutoff: f64) -> (f64, f64) {
        match self {
            Window::LogGaussian { sharpness } => {
                let l = ((1.0 / cutoff).ln() / sharpness).sqrt();
                ((-l).exp(), l.exp())
            }
        }
    }

    /// Largest coefficient index the sum at modulus p touches.
    pub fn required_extent(&self, p: u64) -> usize {
        let (_, hi) = self.support(WINDOW_CUTOFF);
        (p as f64 * hi).ceil() as usize
    }

    pub fn label(&self) -> String {
        match self {
            Window::LogGaussian { sharpness } => format!("log-gaussian:{sharpness}"),
        }
    }
}

/// S_V = sum_n lambda(n) K(n mod p) V(n/p), truncated at the window cutoff.
pub fn twisted_sum(
    coeffs: &CuspFormCoeffs,
    kernel: &TraceFunction,
    window: &Window,
) -> Result<Complex64> {
    let p = kernel.p();
    let (lo, hi) = range_for(window, p, coeffs)?;
    let mut s = Complex64::new(0.0, 0.0);
    for n in lo..=hi {
        let v = window.eval(n as f64 / p as f64);
        if v.abs() < WINDOW_CUTOFF {
            continue;
        }
        s += coeffs.lambda(n as usize)? * kernel.value(n % p) * v;
    }
    Ok(s)
}

/// ||K||_inf * sum |lambda(n) V(n/p)| over the same truncated range.
pub fn trivial_bound(
    coeffs: &CuspFormCoeffs,
    kernel: &TraceFunction,
    window: &Window,
) -> Result<f64> {
    let p = kernel.p();
    let (lo, hi) = range_for(window, p, coeffs)?;
    let mut s = 0.0;
    for n in lo..=hi {
        let v = window.eval(n as f64 / p as f64);
        if v.abs() < WINDOW_CUTOFF {
            continue;
        }
        s += (coeffs.lambda(n as usize)? * v).abs();
    }
    Ok(kernel.sup_norm() * s)
}

fn range_for(window: &Window, p: u64, coeffs: &CuspFormCoeffs) -> Result<(u64, u64)> {
    let (xlo, xhi) = window.support(WINDOW_CUTOFF);
    let lo = ((p as f64 * xlo).floor() as u64).max(1);
    let hi = (p as f64 * xhi).ceil() as u64;
    if coeffs.extent() < hi as usize {
        return Err(Error::InsufficientExtent {
            have: coeffs.extent(),
            need: hi as usize,
        });
    }
    Ok((lo, hi))
}

/// One prime's worth of results.
#[derive(Clone, Debug, Serialize)]
pub struct TwistRow {
    pub p: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub trivial: f64,
    pub ratio: f64,
}

/// A full run across a prime grid for one kernel family.
#[derive(Clone, Debug, Serialize)]
pub struct TwistRun {
    pub form: String,
    pub kernel: String,
    pub window: String,
    pub rows: Vec<TwistRow>,
}

/// Evaluate the twisted sums for one kernel spec across an ascending
/// prime grid. Per-prime work is independent and runs in parallel; row
/// order follows the input grid.
pub fn run_twist(
    coeffs: &CuspFormCoeffs,
    kernel_spec: &KernelSpec,
    primes: &[u64],
    window: &Window,
) -> Result<TwistRun> {
    for w in primes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Config("prime grid must be strictly ascending".into()));
        }
    }
    if let Some(&pmax) = primes.last() {
        let need = window.required_extent(pmax);
        if coeffs.extent() < need {
            return Err(Error::InsufficientExtent {
                have: coeffs.extent(),
                need,
            });
        }
    }
    let rows: Result<Vec<TwistRow>> = primes
        .par_iter()
        .map(|&p| {
            if !is_prime(p) {
                return Err(Error::ExpectedPrime(p));
            }
            let field = Arc::new(PrimeField::new(p)?);
            let kernel = kernel_spec.build(field)?;
            let s = twisted_sum(coeffs, &kernel, window)?;
            let bound = trivial_bound(coeffs, &kernel, window)?;
            Ok(TwistRow {
                p,
                re: s.re,
                im: s.im,
                abs: s.norm(),
                trivial: bound,
                ratio: if bound > 0.0 { s.norm() / bound } else { 0.0 },
            })
        })
        .collect();
    Ok(TwistRun {
        form: "delta".into(),
        kernel: kernel_spec.label(),
        window: window.label(),
        rows: rows?,
    })
}

/// Ordinary least squares of log |S| on log p, reported as the saving
/// exponent delta_emp = 1 - slope.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub delta_emp: f64,
    pub stderr: f64,
    /// delta_emp >= 1/8 - 2 stderr.
    pub pass: f64,
    pub used_rows: usize,
    pub dropped_rows: usize,
}

pub fn exponent_fit(run: &TwistRun) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = run
        .rows
        .iter()
        .filter(|r| r.abs >= 1e-12)
        .map(|r| ((r.p as f64).ln(), r.abs.ln()))
        .collect();
    let dropped = run.rows.len() - pts.len();
    if pts.len() < 5 {
        return Err(Error::DegenerateFit {
            need: 5,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    let delta_emp = 1.0 - slope;
    Ok(ExponentFit {
        delta_emp,
        stderr,
        pass: if delta_emp >= 0.125 - 2.0 * stderr {
            1.0
        } else {
            0.0
        },
        used_rows: pts.len(),
        dropped_rows: dropped,
    })
}

impl ExponentFit {
    pub fn passed(&self) -> bool {
        self.pass > 0.5
    }
}

/// Single-form amplified product |A|^2 |S_V|^2: the desk-scale stand-in
/// for one term of an amplified spectral average (no sum over a basis of
/// forms is attempted).
#[derive(Clone, Debug, Serialize)]
pub struct AmplifiedReport {
    pub kind: AmplifierKind,
    pub amplifier_length: f64,
    pub p: u64,
    pub amplifier_value: f64,
    pub s_re: f64,
    pub s_im: f64,
    pub amplified: f64,
}

pub fn amplified_second_moment_demo(
    coeffs: &CuspFormCoeffs,
    kernel: &TraceFunction,
    amplifier_length: f64,
    kind: AmplifierKind,
    window: &Window,
) -> Result<AmplifiedReport> {
    let amp = amplifier_weights(kind, amplifier_length, coeffs)?;
    let s = twisted_sum(coeffs, kernel, window)?;
    Ok(AmplifiedReport {
        kind,
        amplifier_length,
        p: kernel.p(),
        amplifier_value: amp.value,
        s_re: s.re,
        s_im: s.im,
        amplified: amp.value * amp.value * s.norm_sqr(),
    })
}
