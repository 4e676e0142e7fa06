//! The trace-function zoo: complex value tables on F_p with metadata.
//!
//! Every kernel is stored as its full table of p complex values together
//! with a declared conductor bound and a flag saying whether the kernel is
//! free of additive-character components (the condition under which its
//! Fourier transform is again a bounded trace function).
//!
//! Constructors cover the classical catalogue:
//!
//! * trivial kernel K = 1
//! * additive characters psi_a(x) = e(ax/p)
//! * multiplicative characters of any order dividing p - 1
//! * hyper-Kloosterman sums Kl_m, built as the (m-1)-fold multiplicative
//!   convolution of psi; Kl_m(a) = p^{-(m-1)/2} sum_{x_1...x_m = a} e((x_1+...+x_m)/p)
//! * pullbacks K(phi(x)) along rational maps and pointwise products
//!
//! Multiplicative convolution is computed in O(p log p) by reindexing
//! F_p^x through the discrete logarithm and cyclically convolving
//! length-(p-1) sequences with an FFT.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::ff::PrimeField;

/// Tag describing how a table was constructed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Trivial,
    /// psi_a with parameter a.
    Additive(u64),
    /// chi of the given order.
    Mult(u64),
    /// Kl_m.
    Kloosterman(u32),
    Product,
    Pullback,
    Custom(String),
}

impl KernelKind {
    /// Canonical label used in reports and file schemas.
    pub fn label(&self) -> String {
        match self {
            KernelKind::Trivial => "trivial".into(),
            KernelKind::Additive(a) => format!("additive:{a}"),
            KernelKind::Mult(2) => "legendre".into(),
            KernelKind::Mult(n) => format!("mult:{n}"),
            KernelKind::Kloosterman(m) => format!("kloosterman:{m}"),
            KernelKind::Product => "product".into(),
            KernelKind::Pullback => "pullback".into(),
            KernelKind::Custom(s) => s.clone(),
        }
    }
}

/// A complex-valued function on F_p, stored as its full value table.
#[derive(Clone, Debug)]
pub struct TraceFunction {
    field: Arc<PrimeField>,
    values: Vec<Complex64>,
    kind: KernelKind,
    conductor_bound: f64,
    fourier_eligible: bool,
}

impl TraceFunction {
    /// K = 1 everywhere. Conductor bound 1.
    pub fn trivial(field: Arc<PrimeField>) -> Self {
        let p = field.p() as usize;
        TraceFunction {
            field,
            values: vec![Complex64::new(1.0, 0.0); p],
            kind: KernelKind::Trivial,
            conductor_bound: 1.0,
            fourier_eligible: true,
        }
    }

    /// K(x) = e(ax/p). Not Fourier-eligible: its transform is a scaled
    /// delta, not a bounded table.
    pub fn additive(field: Arc<PrimeField>, a: u64) -> Self {
        let p = field.p();
        let a = a % p;
        let values = (0..p)
            .map(|x| field.additive_character(field.mul(a, x)))
            .collect();
        TraceFunction {
            field,
            values,
            kind: KernelKind::Additive(a),
            conductor_bound: 2.0,
            fourier_eligible: false,
        }
    }

    /// Multiplicative character of the given order (order | p - 1);
    /// chi(0) = 0.
    pub fn mult_char(field: Arc<PrimeField>, order: u64) -> Result<Self> {
        let p = field.p();
        let values = (0..p)
            .map(|x| field.mult_character(order, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(TraceFunction {
            field,
            values,
            kind: KernelKind::Mult(order),
            conductor_bound: 3.0,
            fourier_eligible: true,
        })
    }

    /// The quadratic character.
    pub fn legendre(field: Arc<PrimeField>) -> Result<Self> {
        Self::mult_char(field, 2)
    }

    /// Hyper-Kloosterman sum Kl_m, m >= 2, evaluated on all of F_p by
    /// (m-1)-fold multiplicative convolution of the additive character.
    /// The defining sum is empty at a = 0, so values[0] = 0.
    pub fn kloosterman(field: Arc<PrimeField>, m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::KloostermanRank(m));
        }
        let psi = Self::additive(field.clone(), 1);
        let mut acc = psi.clone();
        for _ in 1..m {
            acc = acc.mult_convolve(&psi)?;
        }
        Ok(TraceFunction {
            field,
            values: acc.values,
            kind: KernelKind::Kloosterman(m),
            // rank m plus the two singular points 0, infinity
            conductor_bound: (m + 2) as f64,
            fourier_eligible: true,
        })
    }

    /// Wrap an arbitrary table. The stored conductor bound is raised to
    /// the table's sup norm if the declared bound is smaller.
    pub fn custom(
        field: Arc<PrimeField>,
        values: Vec<Complex64>,
        label: impl Into<String>,
        conductor_bound: f64,
        fourier_eligible: bool,
    ) -> Self {
        assert_eq!(values.len(), field.p() as usize, "table length must be p");
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        TraceFunction {
            field,
            values,
            kind: KernelKind::Custom(label.into()),
            conductor_bound: conductor_bound.max(sup),
            fourier_eligible,
        }
    }

    /// Multiplicative convolution on F_p^x:
    /// result[a] = p^{-1/2} sum_{xy = a, x,y != 0} K1[x] K2[y], result[0] = 0.
    ///
    /// The p^{-1/2} per step makes the (m-1)-fold self-convolution of psi
    /// carry exactly the p^{-(m-1)/2} of the hyper-Kloosterman
    /// normalization.
    pub fn mult_convolve(&self, other: &TraceFunction) -> Result<TraceFunction> {
        let f = self.same_field(other)?;
        let p = f.p();
        let n = (p - 1) as usize;

        // reindex F_p^x by dlog: seq[k] = K[g^k]
        let mut a: Vec<Complex64> = Vec::with_capacity(n);
        let mut b: Vec<Complex64> = Vec::with_capacity(n);
        let mut x = 1u64;
        for _ in 0..n {
            a.push(self.values[x as usize]);
            b.push(other.values[x as usize]);
            x = f.mul(x, f.generator());
        }

        let conv = cyclic_convolve(&a, &b);

        let mut values = vec![Complex64::new(0.0, 0.0); p as usize];
        let scale = 1.0 / (p as f64).sqrt();
        let mut x = 1u64;
        for c in conv.iter().take(n) {
            values[x as usize] = c * scale;
            x = f.mul(x, f.generator());
        }

        Ok(TraceFunction {
            field: self.field.clone(),
            values,
            kind: KernelKind::Custom(format!(
                "conv({},{})",
                self.kind.label(),
                other.kind.label()
            )),
            conductor_bound: self.conductor_bound * other.conductor_bound,
            fourier_eligible: true,
        })
    }

    /// Pullback K(phi(x)) along a rational map; 0 at poles of phi.
    pub fn pullback(&self, map: &RationalMap) -> Result<TraceFunction> {
        let f = &self.field;
        if map.p != f.p() {
            return Err(Error::FieldMismatch(map.p, f.p()));
        }
        let p = f.p();
        let mut values = Vec::with_capacity(p as usize);
        for x in 0..p {
            match map.eval(f, x) {
                Some(y) => values.push(self.values[y as usize]),
                None => values.push(Complex64::new(0.0, 0.0)),
            }
        }
        Ok(TraceFunction {
            field: self.field.clone(),
            values,
            kind: KernelKind::Pullback,
            conductor_bound: self.conductor_bound * (1.0 + map.degree() as f64),
            fourier_eligible: self.fourier_eligible,
        })
    }

    /// Entrywise product; conductor bounds multiply.
    pub fn pointwise_product(&self, other: &TraceFunction) -> Result<TraceFunction> {
        self.same_field(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(TraceFunction {
            field: self.field.clone(),
            values,
            kind: KernelKind::Product,
            conductor_bound: self.conductor_bound * other.conductor_bound,
            fourier_eligible: self.fourier_eligible && other.fourier_eligible,
        })
    }

    /// Scale the table by a complex constant (metadata preserved except
    /// the conductor bound, which scales by |c|).
    pub fn scale(&self, c: Complex64) -> TraceFunction {
        TraceFunction {
            field: self.field.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            kind: self.kind.clone(),
            conductor_bound: self.conductor_bound * c.norm().max(f64::MIN_POSITIVE),
            fourier_eligible: self.fourier_eligible,
        }
    }

    pub(crate) fn with_table(&self, values: Vec<Complex64>, kind: KernelKind) -> TraceFunction {
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        TraceFunction {
            field: self.field.clone(),
            values,
            kind,
            conductor_bound: self.conductor_bound.max(sup),
            fourier_eligible: self.fourier_eligible,
        }
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, x: u64) -> Complex64 {
        self.values[(x % self.p()) as usize]
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn conductor_bound(&self) -> f64 {
        self.conductor_bound
    }

    pub fn fourier_eligible(&self) -> bool {
        self.fourier_eligible
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Squared L2 norm: sum_x |K(x)|^2.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub(crate) fn same_field<'a>(&'a self, other: &TraceFunction) -> Result<&'a PrimeField> {
        if self.field.p() != other.field.p() {
            return Err(Error::FieldMismatch(self.field.p(), other.field.p()));
        }
        Ok(&self.field)
    }
}

/// A rational map phi = num/den with polynomial coefficients over F_p,
/// coefficients in ascending degree order.
#[derive(Clone, Debug)]
pub struct RationalMap {
    p: u64,
    num: Vec<u64>,
    den: Vec<u64>,
}

impl RationalMap {
    pub fn new(field: &PrimeField, num: &[i64], den: &[i64]) -> Result<Self> {
        let p = field.p();
        let reduce = |c: &[i64]| -> Vec<u64> {
            let mut v: Vec<u64> = c.iter().map(|&x| field.element(x)).collect();
            while v.len() > 1 && *v.last().unwrap() == 0 {
                v.pop();
            }
            v
        };
        let num = reduce(num);
        let den = reduce(den);
        if den.iter().all(|&c| c == 0) {
            return Err(Error::DegenerateMap);
        }
        Ok(RationalMap { p, num, den })
    }

    /// The identity map x -> x.
    pub fn identity(field: &PrimeField) -> Self {
        RationalMap {
            p: field.p(),
            num: vec![0, 1],
            den: vec![1],
        }
    }

    pub fn degree(&self) -> usize {
        (self.num.len().max(self.den.len())).saturating_sub(1)
    }

    /// Evaluate at x; None marks a pole.
    pub fn eval(&self, f: &PrimeField, x: u64) -> Option<u64> {
        let horner = |c: &[u64]| -> u64 {
            let mut acc = 0u64;
            for &ci in c.iter().rev() {
                acc = f.add(f.mul(acc, x), ci);
            }
            acc
        };
        let d = horner(&self.den);
        if d == 0 {
            return None;
        }
        Some(f.mul(horner(&self.num), f.inv(d)))
    }
}

/// Cyclic convolution of two equal-length sequences via FFT.
pub(crate) fn cyclic_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    for x in fa.iter_mut() {
        *x *= scale;
    }
    fa
}
