//! The fractional-linear action of PGL_2(F_p) and correlation scans.
//!
//! A [`MobiusMap`] is a nonsingular 2x2 matrix over F_p normalized so the
//! first nonzero entry in row-major order is 1; two matrices represent
//! the same PGL_2 class iff their normalized forms are equal. It acts on
//! F_p by x -> (ax+b)/(cx+d), with a pole where cx+d = 0.
//!
//! [`gamma_correlation`] computes
//!
//!   C(K, gamma) = p^{-1} sum_{a : gamma(a) defined} K^(a) conj(K^(gamma(a)))
//!
//! where K^ is the unitary Fourier transform of K; the at most one pole
//! term is skipped. Elements whose class preserves the transform
//! correlate at size ~1, all others at O(p^{-1/2}), so thresholding |C|
//! over the whole group recovers the set of symmetries of K^ empirically:
//! that is [`fm_scan`].

use std::collections::HashSet;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::PrimeField;
use crate::fourier::fourier;
use crate::trace::TraceFunction;

/// A normalized element of PGL_2(F_p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MobiusMap {
    p: u64,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl MobiusMap {
    /// Build from integer entries, reducing mod p, checking the
    /// determinant and normalizing the representative.
    pub fn new(field: &PrimeField, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let p = field.p();
        let (a, b, c, d) = (
            field.element(a),
            field.element(b),
            field.element(c),
            field.element(d),
        );
        let det = field.sub(field.mul(a, d), field.mul(b, c));
        if det == 0 {
            return Err(Error::SingularMatrix(a, b, c, d));
        }
        Ok(Self { p, a, b, c, d }.normalized(field))
    }

    pub fn identity(field: &PrimeField) -> Self {
        MobiusMap {
            p: field.p(),
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        }
    }

    fn normalized(self, field: &PrimeField) -> Self {
        let lead = if self.a != 0 { self.a } else { self.b };
        debug_assert!(lead != 0, "a = b = 0 forces det = 0");
        let s = field.inv(lead);
        MobiusMap {
            p: self.p,
            a: field.mul(self.a, s),
            b: field.mul(self.b, s),
            c: field.mul(self.c, s),
            d: field.mul(self.d, s),
        }
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Apply as a fractional linear map; None marks the pole.
    pub fn apply(&self, field: &PrimeField, x: u64) -> Option<u64> {
        let den = field.add(field.mul(self.c, x), self.d);
        if den == 0 {
            return None;
        }
        let num = field.add(field.mul(self.a, x), self.b);
        Some(field.mul(num, field.inv(den)))
    }

    /// Group law in PGL_2 (matrix product, renormalized).
    pub fn compose(&self, field: &PrimeField, other: &MobiusMap) -> MobiusMap {
        let m = |x, y| field.mul(x, y);
        MobiusMap {
            p: self.p,
            a: field.add(m(self.a, other.a), m(self.b, other.c)),
            b: field.add(m(self.a, other.b), m(self.b, other.d)),
            c: field.add(m(self.c, other.a), m(self.d, other.c)),
            d: field.add(m(self.c, other.b), m(self.d, other.d)),
        }
        .normalized(field)
    }

    pub fn inverse(&self, field: &PrimeField) -> MobiusMap {
        MobiusMap {
            p: self.p,
            a: self.d,
            b: field.neg(self.b),
            c: field.neg(self.c),
            d: self.a,
        }
        .normalized(field)
    }

    /// Upper-triangular (standard Borel) test on the normalized form.
    pub fn is_upper_triangular(&self) -> bool {
        self.c == 0
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0 && self.c == 0 && self.d == 1
    }
}

impl std::fmt::Display for MobiusMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Number of elements of PGL_2(F_p): p(p^2 - 1).
pub fn pgl2_order(p: u64) -> u64 {
    p * (p * p - 1)
}

/// The i-th normalized representative in row-major lexicographic order
/// on (a, b, c, d): first the b = 1 block [[0,1],[c,d]] with c in 1..p,
/// d in 0..p, then the a = 1 block [[1,b],[c,d]] with d != bc.
pub fn pgl2_element(field: &PrimeField, index: u64) -> MobiusMap {
    let p = field.p();
    debug_assert!(index < pgl2_order(p));
    let block_a = p * (p - 1); // matrices with a = 0
    if index < block_a {
        let c = 1 + index / p;
        let d = index % p;
        MobiusMap { p, a: 0, b: 1, c, d }
    } else {
        let i = index - block_a;
        let q = i / (p - 1);
        let r = i % (p - 1);
        let b = q / p;
        let c = q % p;
        let bc = field.mul(b, c);
        let d = if r < bc { r } else { r + 1 };
        MobiusMap { p, a: 1, b, c, d }
    }
}

/// Iterate all of PGL_2(F_p) in the canonical order.
pub fn pgl2_elements(field: &PrimeField) -> impl Iterator<Item = MobiusMap> + '_ {
    (0..pgl2_order(field.p())).map(move |i| pgl2_element(field, i))
}

/// Correlation of the Fourier transform of K with its gamma-pullback.
/// Requires a Fourier-eligible kernel.
pub fn gamma_correlation(k: &TraceFunction, gamma: &MobiusMap) -> Result<Complex64> {
    if !k.fourier_eligible() {
        return Err(Error::NonFourierKernel);
    }
    let hat = fourier(k);
    let inv = inverse_table(k.field());
    Ok(gamma_correlation_precomputed(
        k.field(),
        hat.values(),
        &inv,
        gamma,
    ))
}

/// C(K, gamma_{m,n}(mu)) for the matrix [[m, mu - mn], [1, -n]], whose
/// determinant is -mu; mu = 0 is rejected as singular.
pub fn gamma_family_correlation(
    k: &TraceFunction,
    m: u64,
    n: u64,
    mu: u64,
) -> Result<Complex64> {
    let gamma = gamma_family_matrix(k.field(), m, n, mu)?;
    gamma_correlation(k, &gamma)
}

/// The two-parameter family gamma_{m,n}(mu) = [[m, mu - mn], [1, -n]].
/// Its lower-left entry is 1, so no member is upper-triangular.
pub fn gamma_family_matrix(field: &PrimeField, m: u64, n: u64, mu: u64) -> Result<MobiusMap> {
    let p = field.p();
    let (m, n, mu) = (m % p, n % p, mu % p);
    if mu == 0 {
        let b = field.sub(0, field.mul(m, n));
        return Err(Error::SingularMatrix(m, b, 1, field.neg(n)));
    }
    let b = field.sub(mu, field.mul(m, n));
    MobiusMap::new(field, m as i64, b as i64, 1, field.neg(n) as i64)
}

fn inverse_table(field: &PrimeField) -> Vec<u64> {
    let p = field.p();
    let mut inv = vec![0u64; p as usize];
    for x in 1..p {
        inv[x as usize] = field.inv(x);
    }
    inv
}

fn gamma_correlation_precomputed(
    field: &PrimeField,
    hat: &[Complex64],
    inv: &[u64],
    gamma: &MobiusMap,
) -> Complex64 {
    let p = field.p();
    let [a, b, c, d] = gamma.entries();
    let mut s = Complex64::new(0.0, 0.0);
    for x in 0..p {
        let den = field.add(field.mul(c, x), d);
        if den == 0 {
            continue;
        }
        let gx = field.mul(field.add(field.mul(a, x), b), inv[den as usize]);
        s += hat[x as usize] * hat[gx as usize].conj();
    }
    s / p as f64
}

/// Result of an exhaustive correlation scan over PGL_2(F_p).
#[derive(Clone, Debug, Serialize)]
pub struct FmScanReport {
    pub p: u64,
    pub kind: String,
    pub tau: f64,
    /// Normalized matrices with |C| >= tau, in canonical scan order.
    pub members: Vec<[u64; 4]>,
    /// |C| for each member, same order.
    pub values: Vec<f64>,
    /// Largest |C| among non-members.
    pub max_nonmember: f64,
    pub elapsed_ms: u64,
}

impl FmScanReport {
    pub fn member_maps(&self, field: &PrimeField) -> Vec<MobiusMap> {
        self.members
            .iter()
            .map(|&[a, b, c, d]| MobiusMap {
                p: field.p(),
                a,
                b,
                c,
                d,
            })
            .collect()
    }

    /// Exact closure of the detected set under composition and inverse.
    pub fn closed_under_group_law(&self, field: &PrimeField) -> bool {
        let maps = self.member_maps(field);
        let set: HashSet<[u64; 4]> = maps.iter().map(|m| m.entries()).collect();
        for g in &maps {
            if !set.contains(&g.inverse(field).entries()) {
                return false;
            }
            for h in &maps {
                if !set.contains(&g.compose(field, h).entries()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn min_member_value(&self) -> Option<f64> {
        self.values.iter().cloned().reduce(f64::min)
    }

    /// Empirical separation check: smallest member correlation at least
    /// twice the largest non-member one. A violation is a warning, not
    /// an error; small p or large conductor can shrink the gap.
    pub fn threshold_gap_ok(&self) -> bool {
        match self.min_member_value() {
            Some(m) => m >= 2.0 * self.max_nonmember,
            None => false,
        }
    }

    /// Same report with the wall-clock field zeroed, for byte-level
    /// comparisons between runs.
    pub fn canonical(&self) -> FmScanReport {
        let mut r = self.clone();
        r.elapsed_ms = 0;
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Exhaustive scan of PGL_2(F_p): computes |C(K, gamma)| for every class
/// and returns those above the threshold, in canonical order. The scan
/// parallelizes over group elements; output order is independent of the
/// thread count.
pub fn fm_scan(k: &TraceFunction, tau: f64) -> Result<FmScanReport> {
    if !(0.0 < tau && tau < 1.0) {
        return Err(Error::InvalidThreshold(tau));
    }
    if !k.fourier_eligible() {
        return Err(Error::NonFourierKernel);
    }
    let start = Instant::now();
    let field = k.field();
    let p = field.p();
    let hat = fourier(k);
    let inv = inverse_table(field);
    let total = pgl2_order(p);

    let correlations: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| {
            let gamma = pgl2_element(field, i);
            gamma_correlation_precomputed(field, hat.values(), &inv, &gamma).norm()
        })
        .collect();

    let mut members = Vec::new();
    let mut values = Vec::new();
    let mut max_nonmember: f64 = 0.0;
    for (i, &c) in correlations.iter().enumerate() {
        if c >= tau {
            members.push(pgl2_element(field, i as u64).entries());
            values.push(c);
        } else {
            max_nonmember = max_nonmember.max(c);
        }
    }

    Ok(FmScanReport {
        p,
        kind: k.kind().label(),
        tau,
        members,
        values,
        max_nonmember,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn field(p: u64) -> Arc<PrimeField> {
        Arc::new(PrimeField::new(p).unwrap())
    }

    #[test]
    fn normalization_is_canonical() {
        let f = field(13);
        // scalar multiples collapse to the same representative
        let m1 = MobiusMap::new(&f, 2, 4, 6, 10).unwrap();
        let m2 = MobiusMap::new(&f, 1, 2, 3, 5).unwrap();
        assert_eq!(m1, m2);
        let m3 = MobiusMap::new(&f, 0, 5, 5, 0).unwrap();
        let m4 = MobiusMap::new(&f, 0, 1, 1, 0).unwrap();
        assert_eq!(m3, m4);
        assert!(MobiusMap::new(&f, 2, 4, 1, 2).is_err()); // det = 0
    }

    #[test]
    fn apply_examples() {
        let f = field(5);
        let id = MobiusMap::identity(&f);
        for x in 0..5 {
            assert_eq!(id.apply(&f, x), Some(x));
        }
        // [[0,-1],[1,0]]: x -> -1/x; at x=2, -1/2 = -3 = 2 mod 5
        let w = MobiusMap::new(&f, 0, -1, 1, 0).unwrap();
        assert_eq!(w.apply(&f, 2), Some(2));
        assert_eq!(w.apply(&f, 0), None); // pole

        // translation sends p-1 to 0
        let f7 = field(7);
        let t = MobiusMap::new(&f7, 1, 1, 0, 1).unwrap();
        assert_eq!(t.apply(&f7, 6), Some(0));
    }

    #[test]
    fn group_law_round_trips() {
        let f = field(13);
        for i in [0u64, 5, 100, 1000, 2000] {
            let g = pgl2_element(&f, i);
            let ginv = g.inverse(&f);
            assert!(g.compose(&f, &ginv).is_identity());
            assert!(ginv.compose(&f, &g).is_identity());
        }
        // composition agrees with applying maps in sequence
        let g = MobiusMap::new(&f, 1, 2, 3, 4).unwrap();
        let h = MobiusMap::new(&f, 0, 1, 1, 5).unwrap();
        let gh = g.compose(&f, &h);
        for x in 0..13 {
            let via_seq = h.apply(&f, x).and_then(|y| g.apply(&f, y));
            if let (Some(y1), Some(y2)) = (via_seq, gh.apply(&f, x)) {
                assert_eq!(y1, y2, "x = {x}");
            }
        }
    }

    #[test]
    fn enumeration_is_the_whole_group_in_lex_order() {
        let f = field(13);
        let all: Vec<_> = pgl2_elements(&f).collect();
        assert_eq!(all.len(), 2184); // 13 * (169 - 1)
        let mut seen = HashSet::new();
        let mut prev: Option<[u64; 4]> = None;
        for m in &all {
            let e = m.entries();
            // every element is already normalized
            let renorm = MobiusMap::new(&f, e[0] as i64, e[1] as i64, e[2] as i64, e[3] as i64)
                .unwrap()
                .entries();
            assert_eq!(e, renorm);
            if let Some(p) = prev {
                assert!(p < e, "lex order violated: {p:?} then {e:?}");
            }
            prev = Some(e);
            seen.insert(e);
        }
        assert_eq!(seen.len(), 2184);
    }

    #[test]
    fn identity_correlation_is_plancherel() {
        let f = field(13);
        let k = TraceFunction::legendre(f.clone()).unwrap();
        let c = gamma_correlation(&k, &MobiusMap::identity(&f)).unwrap();
        assert!(c.im.abs() < 1e-12);
        assert!((c.re - k.l2_norm_sq() / 13.0).abs() < 1e-10);
        assert!(c.re > 0.0);
    }

    #[test]
    fn kummer_torus_correlations() {
        // Legendre at p=13: diagonal with lambda a QR gives |C| within 2/13 of 1
        let f = field(13);
        let k = TraceFunction::legendre(f.clone()).unwrap();
        let gamma = MobiusMap::new(&f, 4, 0, 0, 1).unwrap(); // 4 = 2^2 is a QR
        let c = gamma_correlation(&k, &gamma).unwrap();
        assert!((c.norm() - 1.0).abs() <= 2.0 / 13.0);
    }

    #[test]
    fn kloosterman_translation_is_small() {
        let f = field(53);
        let k = TraceFunction::kloosterman(f.clone(), 2).unwrap();
        let gamma = MobiusMap::new(&f, 1, 1, 0, 1).unwrap();
        let c = gamma_correlation(&k, &gamma).unwrap();
        assert!(c.norm() <= 16.0 / 53f64.sqrt());
    }

    #[test]
    fn additive_kernel_rejected() {
        let f = field(13);
        let psi = TraceFunction::additive(f.clone(), 1);
        assert!(matches!(
            gamma_correlation(&psi, &MobiusMap::identity(&f)),
            Err(Error::NonFourierKernel)
        ));
        assert!(fm_scan(&psi, 0.5).is_err());
    }

    #[test]
    fn gamma_family_shape_and_values() {
        let f = field(13);
        // m=n=0, mu=1 is the inversion [[0,1],[1,0]]
        let g = gamma_family_matrix(&f, 0, 0, 1).unwrap();
        assert_eq!(g.entries(), [0, 1, 1, 0]);
        let k = TraceFunction::legendre(f.clone()).unwrap();
        let c = gamma_family_correlation(&k, 0, 0, 1).unwrap();
        assert!((c.norm() - 1.0).abs() <= 2.0 / 13.0);

        // mu = 0 is singular
        assert!(gamma_family_correlation(&k, 1, 1, 0).is_err());

        // never upper-triangular
        for m in 0..5u64 {
            for n in 0..5u64 {
                for mu in 1..5u64 {
                    let g = gamma_family_matrix(&f, m, n, mu).unwrap();
                    assert!(!g.is_upper_triangular());
                }
            }
        }

        // square-root cancellation along the family for Kl_2
        let f53 = field(53);
        let k53 = TraceFunction::kloosterman(f53, 2).unwrap();
        let c = gamma_family_correlation(&k53, 1, 1, 2).unwrap();
        assert!(c.norm() <= 16.0 / 53f64.sqrt());
    }

    #[test]
    fn legendre_scan_finds_torus_normalizer() {
        let f = field(13);
        let k = TraceFunction::legendre(f.clone()).unwrap();
        let report = fm_scan(&k, 0.5).unwrap();
        assert_eq!(report.members.len(), 24);
        assert!(report.closed_under_group_law(&f));
        // exactly the diagonal plus antidiagonal classes
        for m in report.member_maps(&f) {
            let [a, b, c, d] = m.entries();
            let diagonal = b == 0 && c == 0;
            let antidiag = a == 0 && d == 0;
            assert!(diagonal || antidiag, "unexpected member {m}");
        }
    }

    #[test]
    fn order_four_scan_finds_torus_only() {
        let f = field(13);
        let k = TraceFunction::mult_char(f.clone(), 4).unwrap();
        let report = fm_scan(&k, 0.5).unwrap();
        assert_eq!(report.members.len(), 12);
        assert!(report.closed_under_group_law(&f));
        for m in report.member_maps(&f) {
            let [_, b, c, _] = m.entries();
            assert!(b == 0 && c == 0, "unexpected member {m}");
        }
    }

    #[test]
    fn scan_member_set_invariant_under_unimodular_scaling() {
        let f = field(13);
        let k = TraceFunction::legendre(f).unwrap();
        let rotated = k.scale(Complex64::from_polar(1.0, 1.234));
        let r1 = fm_scan(&k, 0.5).unwrap();
        let r2 = fm_scan(&rotated, 0.5).unwrap();
        assert_eq!(r1.members, r2.members);
    }

    #[test]
    fn kloosterman_scan_detects_lower_unipotent_symmetries() {
        // The transform of Kl_2 is psi(1/x) + 1/p, which is preserved by
        // exactly the maps x -> x/(cx+1): the scan finds that subgroup
        // (plus possible near-threshold strays at small p).
        let f = field(13);
        let k = TraceFunction::kloosterman(f.clone(), 2).unwrap();
        let report = fm_scan(&k, 0.5).unwrap();
        let member_set: HashSet<[u64; 4]> = report.members.iter().cloned().collect();
        for c in 0..13i64 {
            let g = MobiusMap::new(&f, 1, 0, c, 1).unwrap();
            assert!(
                member_set.contains(&g.entries()),
                "lower unipotent {g} not detected"
            );
        }
        assert!(report.members.len() >= 13);
    }

    #[test]
    fn report_json_schema() {
        let f = field(13);
        let k = TraceFunction::legendre(f).unwrap();
        let report = fm_scan(&k, 0.5).unwrap();
        let json = report.canonical().to_json();
        assert!(json.starts_with("{\"p\":13,\"kind\":\"legendre\",\"tau\":0.5,\"members\":[["));
        assert!(json.contains("\"max_nonmember\":"));
        assert!(json.contains("\"elapsed_ms\":0"));
    }
}
