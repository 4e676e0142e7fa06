//! Trace functions over prime fields and the analytic machinery around
//! them: unitary finite-field Fourier analysis, correlation scans over
//! PGL_2(F_p), ring Kloosterman sums, ideal-lattice point counting, and
//! twisted sums of Hecke eigenvalues with power-saving exponent fits.
//!
//! The crate is organized by subsystem:
//!
//! * [`ff`] — prime fields, primitive roots, discrete logs, characters
//! * [`trace`] — the kernel zoo: characters, hyper-Kloosterman sums,
//!   multiplicative convolution, pullbacks, products
//! * [`fourier`] — the unitary transform and correlation sums
//! * [`mobius`] — PGL_2(F_p), gamma-correlations, exhaustive symmetry scans
//! * [`kloosterman`] — complete exponential sums over Z/c
//! * [`nf`] / [`lattice`] — quadratic fields, ideal lattices, Poisson
//!   summation and unit/divisor counting
//! * [`cusp`] — exact Ramanujan tau coefficients, Satake parameters,
//!   amplifier weights
//! * [`twist`] — the twisted-sum experiment across prime grids
//! * [`kernel`] — a small spec language for composing kernels
//! * [`cli`] — the command-line front end
//!
//! The `examples/` directory has one runnable program per subsystem;
//! `cargo run --example fourier_mobius_scan` is a good starting point.

pub mod cli;
pub mod cusp;
pub mod error;
pub mod ff;
pub mod fourier;
pub mod kernel;
pub mod kloosterman;
pub mod lattice;
pub mod mobius;
pub mod nf;
pub mod trace;
pub mod twist;

pub use error::{Error, Result};
pub use ff::PrimeField;
pub use fourier::{correlate, fourier, fourier_naive};
pub use kernel::KernelSpec;
pub use kloosterman::{kl_ring, kl_unit_twist};
pub use lattice::{
    count_divisor_pairs, count_units_in_box, lattice_sum, shortest_vector_lower_bound,
    IdealLattice, Profile,
};
pub use mobius::{fm_scan, gamma_correlation, gamma_family_correlation, FmScanReport, MobiusMap};
pub use nf::{NfElement, NumberField};
pub use trace::{KernelKind, RationalMap, TraceFunction};
pub use twist::{exponent_fit, run_twist, twisted_sum, Window};
