//! Ideal lattices and the counting estimates they satisfy.
//!
//! A fractional ideal I of a degree-n field (n <= 2) embeds as a real
//! lattice via its archimedean embeddings, with covolume
//! Nm(I) sqrt(|disc|) / 2^s. Three counting routines live here:
//!
//! * [`lattice_sum`]: sums a smooth profile over the lattice and checks
//!   it against the Poisson dual sum. With the transform normalized by
//!   the self-dual measure of the trace pairing,
//!
//!     sum_{m in I} f(sigma(m)/R) = (R^n / Nm(I)) sum_{m* in I*} f^(R sigma(m*)),
//!
//!   an exact identity; the m* = 0 term (R^n / Nm(I)) f^(0) is the main
//!   term and the tail is controlled by the shortest dual vector, which
//!   AM-GM bounds below by n |Nm(I*)|^{1/n}.
//! * [`count_units_in_box`]: generators of a principal ideal (m0) with
//!   |m|_inf < R, via the unit group +-u^k (O(log R) of them).
//! * [`count_divisor_pairs`]: ordered pairs m, n in I with mn = k and
//!   both factors in the box, via ideal divisors and unit translates.
//!
//! |m|_inf always means the L1 norm of the embedding vector,
//! sum_i |sigma_i(m)|, the convention under which the AM-GM step is a
//! literal inequality.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nf::{rat_to_f64, NfElement, NumberField, Rat};

/// Named smooth test profiles with closed-form Fourier transforms.
///
/// `Gaussian` is exp(-pi |x|^2), its own transform. `Bump` is the
/// compactly supported raised cosine prod_i cos^2(pi x_i / 2) on
/// [-1, 1]^n, with transform sinc(2t) + (sinc(2t-1) + sinc(2t+1))/2
/// per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Gaussian,
    Bump,
}

impl Profile {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Profile::Gaussian),
            "bump" => Ok(Profile::Bump),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Gaussian => "gaussian",
            Profile::Bump => "bump",
        }
    }

    pub fn eval1(&self, x: f64) -> f64 {
        match self {
            Profile::Gaussian => (-std::f64::consts::PI * x * x).exp(),
            Profile::Bump => {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    let c = (std::f64::consts::PI * x / 2.0).cos();
                    c * c
                }
            }
        }
    }

    /// One-dimensional Lebesgue Fourier transform at frequency t.
    pub fn hat1(&self, t: f64) -> f64 {
        match self {
            Profile::Gaussian => (-std::f64::consts::PI * t * t).exp(),
            Profile::Bump => sinc(2.0 * t) + 0.5 * (sinc(2.0 * t - 1.0) + sinc(2.0 * t + 1.0)),
        }
    }

    pub fn eval(&self, xs: &[f64]) -> f64 {
        xs.iter().map(|&x| self.eval1(x)).product()
    }

    pub fn hat(&self, ts: &[f64]) -> f64 {
        ts.iter().map(|&t| self.hat1(t)).product()
    }

    /// Per-axis radius outside which |f| < cutoff.
    pub fn support_radius(&self, cutoff: f64) -> f64 {
        match self {
            Profile::Gaussian => ((1.0 / cutoff).ln() / std::f64::consts::PI).sqrt(),
            Profile::Bump => 1.0,
        }
    }

    /// Per-axis radius outside which |f^| < cutoff.
    pub fn hat_support_radius(&self, cutoff: f64) -> f64 {
        match self {
            Profile::Gaussian => ((1.0 / cutoff).ln() / std::f64::consts::PI).sqrt(),
            // |hat1(t)| <= 1/(2 pi |t| (4t^2 - 1)) for |t| > 1/2
            Profile::Bump => (1.0 / (8.0 * std::f64::consts::PI * cutoff)).cbrt().max(1.0),
        }
    }

    /// L1 norm of the k-th derivative (as a measure, so jump masses of
    /// the highest classical derivative are included for the bump).
    pub fn deriv_l1(&self, order: u32) -> f64 {
        use std::f64::consts::PI;
        match (self, order) {
            (_, 0) => 1.0,
            (_, 1) => 2.0,
            (Profile::Bump, 2) => 2.0 * PI,
            (Profile::Bump, 3) => 3.0 * PI * PI,
            (Profile::Gaussian, 2) => {
                simpson(|x| (4.0 * PI * PI * x * x - 2.0 * PI).abs() * self.eval1(x), 12.0)
            }
            (Profile::Gaussian, 3) => simpson(
                |x| ((8.0 * PI.powi(3) * x.powi(3) - 12.0 * PI * PI * x).abs()) * self.eval1(x),
                12.0,
            ),
            _ => panic!("derivative order {order} not tabulated"),
        }
    }

    /// Sobolev norm ||f||_{1,k}: sum over multi-indices |alpha| <= k of
    /// the L1 norms of the partials (profiles are separable products).
    pub fn sobolev_norm(&self, k: u32, dim: u32) -> f64 {
        match dim {
            1 => (0..=k).map(|j| self.deriv_l1(j)).sum(),
            2 => {
                let mut s = 0.0;
                for i in 0..=k {
                    for j in 0..=(k - i) {
                        s += self.deriv_l1(i) * self.deriv_l1(j);
                    }
                }
                s
            }
            _ => panic!("dimension {dim} not supported"),
        }
    }
}

fn sinc(u: f64) -> f64 {
    let x = std::f64::consts::PI * u;
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn simpson(f: impl Fn(f64) -> f64, half_width: f64) -> f64 {
    let n = 48_000usize; // even
    let a = -half_width;
    let h = 2.0 * half_width / n as f64;
    let mut s = f(a) + f(half_width);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// A fractional ideal realized as a lattice: exact Z-basis plus the
/// real embedding matrix.
#[derive(Clone, Debug)]
pub struct IdealLattice {
    field: NumberField,
    generators: (NfElement, NfElement),
    /// Z-basis, `degree` elements.
    basis: Vec<NfElement>,
    norm: Rat,
}

impl IdealLattice {
    /// The principal ideal (g).
    pub fn principal(field: NumberField, g: NfElement) -> Result<Self> {
        if g.is_zero() {
            return Err(Error::ZeroElement);
        }
        Self::from_generators(field, &[g])
    }

    /// The module g1 O_F + g2 O_F.
    pub fn two_generator(field: NumberField, g1: NfElement, g2: NfElement) -> Result<Self> {
        if g1.is_zero() && g2.is_zero() {
            return Err(Error::ZeroElement);
        }
        Self::from_generators(field, &[g1, g2])
    }

    fn from_generators(field: NumberField, gens: &[NfElement]) -> Result<Self> {
        let nonzero: Vec<NfElement> = gens.iter().cloned().filter(|g| !g.is_zero()).collect();
        if nonzero.is_empty() {
            return Err(Error::ZeroElement);
        }
        let g1 = nonzero[0];
        let g2 = *nonzero.get(1).unwrap_or(&NfElement::zero());

        if field.degree() == 1 {
            // gcd of the rational generators
            let q = nonzero
                .iter()
                .map(|g| g.x)
                .fold(Rat::zero(), rat_gcd)
                .abs();
            return Ok(IdealLattice {
                field,
                generators: (g1, g2),
                basis: vec![NfElement::new(q, Rat::zero())],
                norm: q,
            });
        }

        // rows g * 1, g * omega in integral-basis coordinates
        let omega = field.omega();
        let mut rows_q: Vec<(Rat, Rat)> = Vec::new();
        for g in &nonzero {
            rows_q.push(basis_coords(&field, *g));
            rows_q.push(basis_coords(&field, field.mul(*g, omega)));
        }
        let den: i128 = rows_q
            .iter()
            .fold(1i128, |acc, (a, b)| lcm128(acc, lcm128(*a.denom(), *b.denom())));
        let rows: Vec<(i128, i128)> = rows_q
            .iter()
            .map(|(a, b)| {
                (
                    *(a * Rat::from_integer(den)).numer(),
                    *(b * Rat::from_integer(den)).numer(),
                )
            })
            .collect();
        let ((a, _), (b1, c)) = hnf_two_columns(&rows);

        let den_r = Rat::from_integer(den);
        let e1 = from_basis_coords(&field, Rat::from_integer(a) / den_r, Rat::zero());
        let e2 = from_basis_coords(
            &field,
            Rat::from_integer(b1) / den_r,
            Rat::from_integer(c) / den_r,
        );
        let norm = Rat::from_integer(a * c) / (den_r * den_r);
        Ok(IdealLattice {
            field,
            generators: (g1, g2),
            basis: vec![e1, e2],
            norm,
        })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn generators(&self) -> (NfElement, NfElement) {
        self.generators
    }

    pub fn basis(&self) -> &[NfElement] {
        &self.basis
    }

    /// Nm(I), exact.
    pub fn norm(&self) -> Rat {
        self.norm
    }

    pub fn norm_f64(&self) -> f64 {
        rat_to_f64(self.norm)
    }

    /// M[i][j] = sigma_i(basis_j) in real coordinates.
    pub fn embedding_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.field.degree() as usize;
        let cols: Vec<Vec<f64>> = self.basis.iter().map(|b| self.field.embed(*b)).collect();
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect()
    }

    /// |det| of the embedding matrix: Nm(I) sqrt(|disc|) / 2^s.
    pub fn covolume(&self) -> f64 {
        let m = self.embedding_matrix();
        det(&m).abs()
    }

    /// Exact membership test via the basis coordinates.
    pub fn contains(&self, e: NfElement) -> bool {
        self.coords(e).map_or(false, |(x, y)| {
            x.is_integer() && y.is_integer()
        })
    }

    /// Rational coordinates of e with respect to the Z-basis.
    fn coords(&self, e: NfElement) -> Option<(Rat, Rat)> {
        if self.field.degree() == 1 {
            return Some((e.x / self.basis[0].x, Rat::zero()));
        }
        let (a, b) = basis_coords(&self.field, e);
        let (a1, b1) = basis_coords(&self.field, self.basis[0]);
        let (a2, b2) = basis_coords(&self.field, self.basis[1]);
        let d = a1 * b2 - b1 * a2;
        if d.is_zero() {
            return None;
        }
        Some(((a * b2 - b * a2) / d, (a1 * b - b1 * a) / d))
    }

    /// Lattice element with the given integer coordinates.
    pub fn element(&self, coords: &[i128]) -> NfElement {
        let mut e = NfElement::zero();
        for (c, b) in coords.iter().zip(&self.basis) {
            let t = NfElement::new(b.x * Rat::from_integer(*c), b.y * Rat::from_integer(*c));
            e = self.field.add(e, t);
        }
        e
    }

    /// The ideal I^2 (module generated by products of the generators).
    pub fn square(&self) -> Result<IdealLattice> {
        let f = &self.field;
        let (g1, g2) = self.generators;
        let gens = [f.mul(g1, g1), f.mul(g1, g2), f.mul(g2, g2)];
        Self::from_generators(f.clone(), &gens)
    }

    /// All lattice elements with per-axis embedding bounds |sigma_i| <= b_i.
    fn enumerate_box(&self, bounds: &[f64]) -> Vec<NfElement> {
        let n = self.field.degree() as usize;
        if n == 1 {
            let q = rat_to_f64(self.basis[0].x).abs();
            let kmax = (bounds[0] / q).floor() as i128;
            return (-kmax..=kmax).map(|k| self.element(&[k])).collect();
        }
        let m = self.embedding_matrix();
        let mi = inverse2(&m);
        let bx = (mi[0][0].abs() * bounds[0] + mi[0][1].abs() * bounds[1]).floor() as i128 + 1;
        let by = (mi[1][0].abs() * bounds[0] + mi[1][1].abs() * bounds[1]).floor() as i128 + 1;
        let mut out = Vec::new();
        for x in -bx..=bx {
            for y in -by..=by {
                let e = self.element(&[x, y]);
                let emb = self.field.embed(e);
                if emb[0].abs() <= bounds[0] + 1e-12 && emb[1].abs() <= bounds[1] + 1e-12 {
                    out.push(e);
                }
            }
        }
        out
    }

    /// All lattice elements with |m|_inf < r (L1 ball; exact elements).
    pub fn enumerate_l1_ball(&self, r: f64) -> Vec<NfElement> {
        let n = self.field.degree() as usize;
        let per_axis = vec![r; n];
        self.enumerate_box(&per_axis)
            .into_iter()
            .filter(|e| self.field.abs_embedding_sum(*e) < r)
            .collect()
    }
}

fn basis_coords(field: &NumberField, e: NfElement) -> (Rat, Rat) {
    // coordinates of x + y sqrt(D) over (1, omega)
    if field.degree() == 1 {
        return (e.x, Rat::zero());
    }
    let omega = field.omega();
    if omega.y == Rat::one() {
        (e.x, e.y)
    } else {
        // omega = (1 + sqrt D)/2: x + y sqrt D = (x - y) + 2y omega
        (e.x - e.y, e.y + e.y)
    }
}

fn from_basis_coords(field: &NumberField, a: Rat, b: Rat) -> NfElement {
    let omega = field.omega();
    NfElement::new(a + b * omega.x, b * omega.y)
}

fn rat_gcd(a: Rat, b: Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    Rat::new(num, a.denom() * b.denom())
}

fn lcm128(a: i128, b: i128) -> i128 {
    (a / a.gcd(&b) * b).abs()
}

/// Hermite form of the row lattice spanned by 2-column integer rows:
/// returns ((a, 0), (b, c)) with a, c > 0 and 0 <= b < a.
fn hnf_two_columns(rows: &[(i128, i128)]) -> ((i128, i128), (i128, i128)) {
    let mut firsts: Vec<i128> = Vec::new();
    let mut w: Option<(i128, i128)> = None;
    for &(r1, r2) in rows {
        if r2 == 0 {
            firsts.push(r1);
            continue;
        }
        match w {
            None => w = Some((r1, r2)),
            Some((w1, w2)) => {
                // combine to gcd in the second column
                let (g, s, t) = egcd(w2, r2);
                let new = (s * w1 + t * r1, g);
                // the eliminated combination lands in the first column
                firsts.push((r2 / g) * w1 - (w2 / g) * r1);
                w = Some(new);
            }
        }
    }
    let (mut w1, mut w2) = w.expect("rank-2 row set");
    if w2 < 0 {
        w1 = -w1;
        w2 = -w2;
    }
    let a = firsts.iter().fold(0i128, |acc, &x| acc.gcd(&x));
    assert!(a > 0, "rank-2 row set expected");
    w1 = w1.rem_euclid(a);
    ((a, 0), (w1, w2))
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        let s = if a < 0 { -1 } else { 1 };
        return (a.abs(), s, 0);
    }
    let (g, s, t) = egcd(b, a % b);
    (g, t, s - (a / b) * t)
}

fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => unreachable!(),
    }
}

fn inverse2(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = det(m);
    vec![
        vec![m[1][1] / d, -m[0][1] / d],
        vec![-m[1][0] / d, m[0][0] / d],
    ]
}

/// Everything [`lattice_sum`] reports.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeSumReport {
    /// Direct sum over lattice points (tails below 1e-14 dropped).
    pub value: f64,
    /// (R^n / Nm(I)) f^(0), transform in the self-dual normalization.
    pub main_term: f64,
    /// Full dual-side sum; `value - dual_total` is the Poisson residual.
    pub dual_total: f64,
    /// Lemma-shaped tail bound from the AM-GM shortest-vector estimate.
    pub error_bound: f64,
    pub direct_terms: u64,
    pub dual_terms: u64,
    /// value / (||f||_{1,n+1} R^n / Nm(I)); the counting-lemma constant.
    pub lemma_ratio: f64,
}

impl LatticeSumReport {
    pub fn residual(&self) -> f64 {
        (self.value - self.dual_total).abs()
    }
}

const TAIL_CUTOFF: f64 = 1e-14;

/// Sum f(sigma(m)/R) over the ideal lattice and compare with the Poisson
/// dual sum.
pub fn lattice_sum(lat: &IdealLattice, profile: Profile, r: f64) -> Result<LatticeSumReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    let field = lat.field();
    let n = field.degree();
    let disc = field.discriminant().unsigned_abs() as f64;
    let s_places = field.signature().1;
    // transform w.r.t. the self-dual measure of the trace pairing
    let transform_const = 2f64.powi(s_places as i32) / disc.sqrt();

    // direct side
    let radius = r * profile.support_radius(TAIL_CUTOFF);
    let bounds = vec![radius; n as usize];
    let mut value = 0.0;
    let mut direct_terms = 0u64;
    for e in lat.enumerate_box(&bounds) {
        let emb = field.embed(e);
        let scaled: Vec<f64> = emb.iter().map(|v| v / r).collect();
        let fv = profile.eval(&scaled);
        if fv.abs() >= TAIL_CUTOFF {
            value += fv;
            direct_terms += 1;
        }
    }

    // dual side: Euclidean dual of the embedded lattice
    let nm = lat.norm_f64();
    let scale = r.powi(n as i32) / nm * transform_const;
    let (dual_sum, dual_terms) = dual_side_sum(lat, profile, r);
    let main_term = scale * profile.hat(&vec![0.0; n as usize]);
    let dual_total = scale * dual_sum;

    // tail estimate: ||f||_{1,n+1} / (R min L*)^{n+1}, min L* >= n |Nm(I*)|^{1/n}
    let sobolev = profile.sobolev_norm(n + 1, n);
    let nm_dual = 1.0 / (disc * nm);
    let min_dual = n as f64 * nm_dual.powf(1.0 / n as f64);
    let error_bound =
        r.powi(n as i32) / nm * sobolev / (r * min_dual).powi(n as i32 + 1).max(f64::MIN_POSITIVE);

    let lemma_ratio = value / (sobolev * r.powi(n as i32) / nm);

    Ok(LatticeSumReport {
        value,
        main_term,
        dual_total,
        error_bound,
        direct_terms,
        dual_terms,
        lemma_ratio,
    })
}

fn dual_side_sum(lat: &IdealLattice, profile: Profile, r: f64) -> (f64, u64) {
    let field = lat.field();
    let n = field.degree() as usize;
    let t_rad = profile.hat_support_radius(TAIL_CUTOFF);
    if n == 1 {
        let q = rat_to_f64(lat.basis()[0].x).abs();
        let spacing = 1.0 / q; // dual of qZ
        let kmax = (t_rad / (r * spacing)).floor() as i64;
        let mut s = 0.0;
        let mut terms = 0u64;
        for k in -kmax..=kmax {
            let fv = profile.hat1(r * spacing * k as f64);
            if fv.abs() >= TAIL_CUTOFF {
                s += fv;
                terms += 1;
            }
        }
        return (s, terms);
    }
    let m = lat.embedding_matrix();
    let mi = inverse2(&m);
    // dual basis vectors are the columns of (M^{-1})^T, i.e. rows of M^{-1}
    let d1 = [mi[0][0], mi[0][1]];
    let d2 = [mi[1][0], mi[1][1]];
    // coordinate bounds: (j, k) = M^T w, |w_i| <= t_rad / r
    let wb = t_rad / r;
    let jmax = ((m[0][0].abs() + m[1][0].abs()) * wb).floor() as i64 + 1;
    let kmax = ((m[0][1].abs() + m[1][1].abs()) * wb).floor() as i64 + 1;
    let mut s = 0.0;
    let mut terms = 0u64;
    for j in -jmax..=jmax {
        for k in -kmax..=kmax {
            let w = [
                j as f64 * d1[0] + k as f64 * d2[0],
                j as f64 * d1[1] + k as f64 * d2[1],
            ];
            let fv = profile.hat(&[r * w[0], r * w[1]]);
            if fv.abs() >= TAIL_CUTOFF {
                s += fv;
                terms += 1;
            }
        }
    }
    (s, terms)
}

/// n Nm(I)^{1/n}: AM-GM lower bound for the L1 norm of any nonzero
/// lattice vector.
pub fn shortest_vector_lower_bound(lat: &IdealLattice) -> f64 {
    let n = lat.field().degree() as f64;
    n * lat.norm_f64().powf(1.0 / n)
}

/// Count generators m of the principal ideal (m0) with |m|_inf < r.
pub fn count_units_in_box(field: &NumberField, m0: NfElement, r: f64) -> Result<u64> {
    if m0.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mu = field.roots_of_unity_count() as u64;
    match field.unit() {
        None => {
            // unit group is just the roots of unity
            Ok(if field.abs_embedding_sum(m0) < r { mu } else { 0 })
        }
        Some(u) => {
            let u1 = field.embed(u)[0].abs();
            let a = field.embed(m0)[0].abs();
            let b = field.embed(m0)[1].abs();
            // |u^k m0|_inf = a u1^k + b u1^{-k}; both addends must stay < r
            if r <= 0.0 {
                return Ok(0);
            }
            let k_hi = ((r / a).ln() / u1.ln()).floor() as i64 + 2;
            let k_lo = -(((r / b).ln() / u1.ln()).floor() as i64 + 2);
            let mut count = 0u64;
            let mut m = unit_power(field, u, k_lo);
            let m0_exact = m0;
            m = field.mul(m, m0_exact);
            for _k in k_lo..=k_hi {
                if field.abs_embedding_sum(m) < r {
                    count += mu;
                }
                m = field.mul(m, u);
            }
            Ok(count)
        }
    }
}

fn unit_power(field: &NumberField, u: NfElement, k: i64) -> NfElement {
    let base = if k >= 0 {
        u
    } else {
        field.inv(u).expect("unit is invertible")
    };
    let mut acc = NfElement::one();
    for _ in 0..k.unsigned_abs() {
        acc = field.mul(acc, base);
    }
    acc
}

/// Count ordered pairs (m, n), both in I, with m n = k and
/// |m|_inf < r, |n|_inf < r. Requires k in I^2.
pub fn count_divisor_pairs(lat: &IdealLattice, k: NfElement, r: f64) -> Result<u64> {
    let field = lat.field();
    if k.is_zero() {
        return Err(Error::ZeroElement);
    }
    if !lat.square()?.contains(k) {
        return Err(Error::NotInIdeal(format!("{k} not in the ideal squared")));
    }

    if field.degree() == 1 {
        let q = lat.basis()[0].x;
        let kp = k.x / (q * q);
        debug_assert!(kp.is_integer());
        let kp = kp.numer() / kp.denom();
        let mut count = 0u64;
        for d in divisors(kp.unsigned_abs()) {
            let d = d as i128;
            for m_red in [d, -d] {
                let n_red = kp / m_red;
                let m = q * Rat::from_integer(m_red);
                let n = q * Rat::from_integer(n_red);
                if rat_to_f64(m).abs() < r && rat_to_f64(n).abs() < r {
                    count += 1;
                }
            }
        }
        return Ok(count);
    }

    // |Nm(m)| = Nm(I) t with t dividing |Nm(k)| / Nm(I)^2
    let t_max = (field.norm(k) / (lat.norm() * lat.norm())).abs();
    debug_assert!(t_max.is_integer());
    let t_max = (t_max.numer() / t_max.denom()).unsigned_abs();

    let mut count = 0u64;
    for t in divisors(t_max) {
        let target = lat.norm() * Rat::from_integer(t as i128);
        for rep in norm_class_representatives(lat, target) {
            let n_elt = field.div(k, rep)?;
            if !lat.contains(n_elt) {
                continue;
            }
            count += count_box_translates(field, rep, n_elt, r);
        }
    }
    Ok(count)
}

/// Representatives, one per class under multiplication by units, of the
/// lattice elements with |Nm| equal to the exact target.
fn norm_class_representatives(lat: &IdealLattice, target: Rat) -> Vec<NfElement> {
    let field = lat.field();
    let span = match field.unit() {
        Some(u) => field.embed(u)[0].abs(),
        None => 1.0,
    };
    let bound = rat_to_f64(target).sqrt() * span * 1.0001;
    let candidates: Vec<NfElement> = lat
        .enumerate_box(&[bound, bound])
        .into_iter()
        .filter(|e| !e.is_zero() && field.norm(*e).abs() == target)
        .collect();

    // group into associate classes by exact unit-quotient tests
    let mut reps: Vec<NfElement> = Vec::new();
    'cand: for c in candidates {
        for r in &reps {
            if let Ok(q) = field.div(c, *r) {
                if field.is_integral(q) && field.norm(q).abs() == Rat::one() {
                    continue 'cand;
                }
            }
        }
        reps.push(c);
    }
    reps
}

/// Count unit multiples zeta u^j (m, n/u^j... ) keeping both factors in
/// the box.
fn count_box_translates(field: &NumberField, m: NfElement, n: NfElement, r: f64) -> u64 {
    let mu = field.roots_of_unity_count() as u64;
    match field.unit() {
        None => {
            if field.abs_embedding_sum(m) < r && field.abs_embedding_sum(n) < r {
                mu
            } else {
                0
            }
        }
        Some(u) => {
            // |sigma_1(u^j m)| = |sigma_1(m)| u1^j forces j upward-bounded,
            // |sigma_2(u^j m)| = |sigma_2(m)| u1^{-j} downward; pad by 2
            let u1 = field.embed(u)[0].abs();
            let em = field.embed(m);
            let k_hi = ((r / em[0].abs()).ln() / u1.ln()).floor() as i64 + 2;
            let k_lo = -(((r / em[1].abs()).ln() / u1.ln()).floor() as i64 + 2);
            let uinv = field.inv(u).expect("unit");
            let mut mj = field.mul(m, unit_power(field, u, k_lo));
            let mut nj = field.mul(n, unit_power(field, uinv, k_lo));
            let mut count = 0u64;
            for _j in k_lo..=k_hi {
                if field.abs_embedding_sum(mj) < r && field.abs_embedding_sum(nj) < r {
                    // zeta = +-1 gives the distinct pairs (zeta m, zeta n)
                    count += mu;
                }
                mj = field.mul(mj, u);
                nj = field.mul(nj, uinv);
            }
            count
        }
    }
}

fn divisors(n: u128) -> Vec<u128> {
    if n == 0 {
        return vec![];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u128;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}
