//! Number fields of degree at most 2 with exact element arithmetic.
//!
//! A field is either Q or Q(sqrt(D)) for a squarefree integer D != 0, 1.
//! Elements are stored as x + y sqrt(D) with rational coordinates, so
//! norms, traces, integrality and divisibility tests are all exact.
//!
//! The real-quadratic fundamental unit is found from the continued
//! fraction of sqrt(D) (the classical Pell recurrence), refined for
//! D = 1 mod 4 by the +-4 Pell equation, since the unit of O_F may be a
//! proper root of the unit of Z[sqrt(D)] there.

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the lattice layer.
pub type Rat = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rat {
    Ratio::new(n, d)
}

/// An element x + y sqrt(D); y = 0 over the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NfElement {
    pub x: Rat,
    pub y: Rat,
}

impl NfElement {
    pub fn new(x: Rat, y: Rat) -> Self {
        NfElement { x, y }
    }

    pub fn from_int(n: i128) -> Self {
        NfElement {
            x: Rat::from_integer(n),
            y: Rat::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

impl std::fmt::Display for NfElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{} + {}*sqrt(D)", self.x, self.y)
        }
    }
}

/// Q or a quadratic field Q(sqrt(D)), with its classical invariants.
#[derive(Clone, Debug)]
pub struct NumberField {
    /// Squarefree datum; 0 encodes the rationals.
    d: i64,
    degree: u32,
    disc: i64,
    signature: (u32, u32),
    /// Integral basis is (1, omega); omega = (1 + sqrt(D))/2 when true,
    /// sqrt(D) otherwise.
    omega_half: bool,
    fundamental_unit: Option<NfElement>,
    roots_of_unity: u32,
}

impl NumberField {
    pub fn rationals() -> Self {
        NumberField {
            d: 0,
            degree: 1,
            disc: 1,
            signature: (1, 0),
            omega_half: false,
            fundamental_unit: None,
            roots_of_unity: 2,
        }
    }

    /// Q(sqrt(D)) for squarefree D != 0, 1.
    pub fn quadratic(d: i64) -> Result<Self> {
        if d == 0 || d == 1 || !is_squarefree(d) {
            return Err(Error::BadFieldDatum(d));
        }
        let omega_half = d.rem_euclid(4) == 1;
        let disc = if omega_half { d } else { 4 * d };
        let signature = if d > 0 { (2, 0) } else { (0, 1) };
        let fundamental_unit = if d > 0 {
            Some(fundamental_unit(d))
        } else {
            None
        };
        let roots_of_unity = match d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        };
        Ok(NumberField {
            d,
            degree: 2,
            disc,
            signature,
            omega_half,
            fundamental_unit,
            roots_of_unity,
        })
    }

    /// Build from the (degree, D) pair used in configuration files.
    pub fn from_spec(degree: u32, d: Option<i64>) -> Result<Self> {
        match degree {
            1 => Ok(Self::rationals()),
            2 => Self::quadratic(d.ok_or(Error::Config("degree 2 requires D".into()))?),
            n => Err(Error::Config(format!("unsupported degree {n} (need 1 or 2)"))),
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn datum(&self) -> i64 {
        self.d
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn signature(&self) -> (u32, u32) {
        self.signature
    }

    pub fn roots_of_unity_count(&self) -> u32 {
        self.roots_of_unity
    }

    /// Generator omega of the integral basis (1, omega).
    pub fn omega(&self) -> NfElement {
        if self.degree == 1 {
            NfElement::one()
        } else if self.omega_half {
            NfElement::new(rat(1, 2), rat(1, 2))
        } else {
            NfElement::new(Rat::zero(), Rat::one())
        }
    }

    /// Fundamental unit u > 1 (real quadratic fields only).
    pub fn unit(&self) -> Option<NfElement> {
        self.fundamental_unit
    }

    pub fn add(&self, a: NfElement, b: NfElement) -> NfElement {
        NfElement::new(a.x + b.x, a.y + b.y)
    }

    pub fn sub(&self, a: NfElement, b: NfElement) -> NfElement {
        NfElement::new(a.x - b.x, a.y - b.y)
    }

    pub fn neg(&self, a: NfElement) -> NfElement {
        NfElement::new(-a.x, -a.y)
    }

    pub fn mul(&self, a: NfElement, b: NfElement) -> NfElement {
        let d = Rat::from_integer(self.d as i128);
        NfElement::new(a.x * b.x + d * a.y * b.y, a.x * b.y + a.y * b.x)
    }

    pub fn conj(&self, a: NfElement) -> NfElement {
        NfElement::new(a.x, -a.y)
    }

    /// Field norm x^2 - D y^2 (just x over Q).
    pub fn norm(&self, a: NfElement) -> Rat {
        if self.degree == 1 {
            a.x
        } else {
            a.x * a.x - Rat::from_integer(self.d as i128) * a.y * a.y
        }
    }

    /// Field trace.
    pub fn trace(&self, a: NfElement) -> Rat {
        if self.degree == 1 {
            a.x
        } else {
            a.x + a.x
        }
    }

    pub fn inv(&self, a: NfElement) -> Result<NfElement> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let n = self.norm(a);
        let c = self.conj(a);
        Ok(NfElement::new(c.x / n, c.y / n))
    }

    pub fn div(&self, a: NfElement, b: NfElement) -> Result<NfElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Algebraic integer test: trace and norm both integral.
    pub fn is_integral(&self, a: NfElement) -> bool {
        if self.degree == 1 {
            return a.x.is_integer();
        }
        self.trace(a).is_integer() && self.norm(a).is_integer()
    }

    /// Real coordinates of the archimedean embeddings. For real fields
    /// these are the embeddings themselves; for an imaginary quadratic
    /// field they are (Re, Im) of the one complex embedding.
    pub fn embed(&self, a: NfElement) -> Vec<f64> {
        let xf = rat_to_f64(a.x);
        let yf = rat_to_f64(a.y);
        match (self.degree, self.d > 0) {
            (1, _) => vec![xf],
            (2, true) => {
                let s = (self.d as f64).sqrt();
                vec![xf + yf * s, xf - yf * s]
            }
            (2, false) => {
                let s = ((-self.d) as f64).sqrt();
                vec![xf, yf * s]
            }
            _ => unreachable!(),
        }
    }

    /// The L1 size |m|_inf = sum over all n embeddings of |sigma_i(m)|
    /// (conjugate pairs counted twice).
    pub fn abs_embedding_sum(&self, a: NfElement) -> f64 {
        match (self.degree, self.d > 0) {
            (1, _) => rat_to_f64(a.x).abs(),
            (2, true) => {
                let e = self.embed(a);
                e[0].abs() + e[1].abs()
            }
            (2, false) => {
                let e = self.embed(a);
                2.0 * (e[0] * e[0] + e[1] * e[1]).sqrt()
            }
            _ => unreachable!(),
        }
    }

    /// |Nm(a)| as f64.
    pub fn abs_norm_f64(&self, a: NfElement) -> f64 {
        rat_to_f64(self.norm(a)).abs()
    }
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn is_squarefree(d: i64) -> bool {
    let mut n = d.unsigned_abs();
    let mut q = 2u64;
    while q * q <= n {
        if n % (q * q) == 0 {
            return false;
        }
        while n % q == 0 {
            n /= q;
        }
        q += 1;
    }
    true
}

/// Fundamental solution of x^2 - D y^2 = +-1 over Z[sqrt(D)], from the
/// continued fraction of sqrt(D): when the denominator Q_k returns to 1
/// the period has closed and the previous convergent is the solution.
fn pell_fundamental(d: i64) -> (i128, i128) {
    let mut a0 = (d as f64).sqrt() as i64;
    while a0 * a0 > d {
        a0 -= 1;
    }
    while (a0 + 1) * (a0 + 1) <= d {
        a0 += 1;
    }
    let (mut p_prev, mut p_cur) = (1i128, a0 as i128);
    let (mut q_prev, mut q_cur) = (0i128, 1i128);
    let (mut m, mut q) = (0i64, 1i64);
    let mut a = a0;
    loop {
        m = a * q - m;
        q = (d - m * m) / q;
        if q == 1 {
            return (p_cur, q_cur);
        }
        a = (a0 + m) / q;
        (p_prev, p_cur) = (p_cur, a as i128 * p_cur + p_prev);
        (q_prev, q_cur) = (q_cur, a as i128 * q_cur + q_prev);
    }
}

/// Fundamental unit of O_F for real quadratic F = Q(sqrt(D)).
fn fundamental_unit(d: i64) -> NfElement {
    let (x, y) = pell_fundamental(d);
    if d.rem_euclid(4) == 1 {
        // the unit of O_F solves a^2 - D b^2 = +-4 with a = b mod 2
        for b in 1..=y {
            let db2 = d as i128 * b * b;
            for delta in [-4i128, 4] {
                let a2 = db2 + delta;
                if a2 <= 0 {
                    continue;
                }
                let a = integer_sqrt(a2);
                if a * a == a2 && (a - b) % 2 == 0 {
                    return NfElement::new(rat(a, 2), rat(b, 2));
                }
            }
        }
    }
    NfElement::new(Rat::from_integer(x), Rat::from_integer(y))
}

fn integer_sqrt(n: i128) -> i128 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn discriminants_match_classical_formula() {
        assert_eq!(NumberField::quadratic(2).unwrap().discriminant(), 8);
        assert_eq!(NumberField::quadratic(3).unwrap().discriminant(), 12);
        assert_eq!(NumberField::quadratic(5).unwrap().discriminant(), 5);
        assert_eq!(NumberField::quadratic(13).unwrap().discriminant(), 13);
        assert_eq!(NumberField::quadratic(-1).unwrap().discriminant(), -4);
        assert_eq!(NumberField::quadratic(-3).unwrap().discriminant(), -3);
        assert_eq!(NumberField::rationals().discriminant(), 1);
    }

    #[test]
    fn bad_data_rejected() {
        assert!(NumberField::quadratic(0).is_err());
        assert!(NumberField::quadratic(1).is_err());
        assert!(NumberField::quadratic(4).is_err());
        assert!(NumberField::quadratic(12).is_err());
        assert!(NumberField::from_spec(3, Some(2)).is_err());
    }

    #[test]
    fn signatures_and_roots_of_unity() {
        assert_eq!(NumberField::quadratic(2).unwrap().signature(), (2, 0));
        assert_eq!(NumberField::quadratic(-1).unwrap().signature(), (0, 1));
        assert_eq!(NumberField::quadratic(-1).unwrap().roots_of_unity_count(), 4);
        assert_eq!(NumberField::quadratic(-3).unwrap().roots_of_unity_count(), 6);
        assert_eq!(NumberField::quadratic(-7).unwrap().roots_of_unity_count(), 2);
    }

    #[test]
    fn fundamental_units_known_values() {
        // (D, expected unit as (x, y) in x + y sqrt(D))
        let cases = [
            (2i64, rat(1, 1), rat(1, 1)),    // 1 + sqrt(2)
            (3, rat(2, 1), rat(1, 1)),       // 2 + sqrt(3)
            (5, rat(1, 2), rat(1, 2)),       // (1 + sqrt(5))/2
            (6, rat(5, 1), rat(2, 1)),       // 5 + 2 sqrt(6)
            (13, rat(3, 2), rat(1, 2)),      // (3 + sqrt(13))/2
        ];
        for (d, x, y) in cases {
            let f = NumberField::quadratic(d).unwrap();
            let u = f.unit().unwrap();
            assert_eq!((u.x, u.y), (x, y), "D = {d}");
            // |Nm(u)| = 1 and u > 1 in the first embedding
            assert_eq!(f.norm(u).abs(), Rat::one());
            assert!(f.embed(u)[0] > 1.0);
            assert!(f.is_integral(u));
        }
    }

    #[test]
    fn element_arithmetic() {
        let f = NumberField::quadratic(2).unwrap();
        let a = NfElement::new(rat(1, 1), rat(1, 1)); // 1 + sqrt(2)
        let b = NfElement::new(rat(3, 1), rat(-1, 1)); // 3 - sqrt(2)
        let ab = f.mul(a, b);
        // (1+s)(3-s) = 3 - s + 3s - 2 = 1 + 2s
        assert_eq!(ab, NfElement::new(rat(1, 1), rat(2, 1)));
        assert_eq!(f.norm(a), rat(-1, 1));
        assert_eq!(f.trace(a), rat(2, 1));
        let inv = f.inv(a).unwrap();
        assert_eq!(f.mul(a, inv), NfElement::one());
        assert!(f.inv(NfElement::zero()).is_err());
    }

    #[test]
    fn integrality() {
        let f5 = NumberField::quadratic(5).unwrap();
        assert!(f5.is_integral(f5.omega())); // (1+sqrt5)/2
        assert!(!f5.is_integral(NfElement::new(rat(1, 2), Rat::zero())));
        let f2 = NumberField::quadratic(2).unwrap();
        assert!(f2.is_integral(NfElement::new(rat(3, 1), rat(4, 1))));
        assert!(!f2.is_integral(NfElement::new(rat(1, 2), rat(1, 2))));
    }

    #[test]
    fn embeddings_and_l1_size() {
        let f = NumberField::quadratic(2).unwrap();
        let one = NfElement::one();
        assert!((f.abs_embedding_sum(one) - 2.0).abs() < 1e-12);
        let s2 = NfElement::new(Rat::zero(), Rat::one());
        assert!((f.abs_embedding_sum(s2) - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        // AM-GM: |m|_inf >= n |Nm(m)|^{1/n}
        for (x, y) in [(1i128, 1i128), (3, -2), (7, 5), (-4, 1)] {
            let m = NfElement::new(Rat::from_integer(x), Rat::from_integer(y));
            if m.is_zero() {
                continue;
            }
            let l1 = f.abs_embedding_sum(m);
            let bound = 2.0 * f.abs_norm_f64(m).sqrt();
            assert!(l1 >= bound - 1e-9, "({x},{y}): {l1} < {bound}");
        }

        // imaginary quadratic counts the conjugate pair twice
        let fi = NumberField::quadratic(-1).unwrap();
        let i1 = NfElement::new(rat(3, 1), rat(4, 1));
        assert!((fi.abs_embedding_sum(i1) - 10.0).abs() < 1e-12);
    }
}
