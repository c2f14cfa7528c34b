//! Number fields `K = Q[X]/mu(X)`, norms by resultants, and the integer
//! identities for `nu(z) = N(psi(z) - 1)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::abgroup::{FgAbelianGroup, GroupElement};
use crate::groupalg::{CoeffRing, GroupRingElement};
use crate::linalg::{EchelonBasis, ScalarField};
use crate::poly::Poly;
use crate::primes;

const Q: ScalarField = ScalarField::Rational;

// Irreducibility is decided exactly up to this degree.
pub const IRREDUCIBILITY_DEGREE: usize = 6;

// Kronecker search gives up after this many divisor combinations.
const KRONECKER_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumFieldError {
    #[error("defining polynomial must be monic of degree >= 1, got {0}")]
    NotMonic(String),
    #[error("defining polynomial {0} is reducible over Q")]
    Reducible(String),
    #[error("irreducibility of {0} (degree > {IRREDUCIBILITY_DEGREE}) must be asserted by the caller")]
    IrreducibilityUnverified(String),
    #[error("irreducibility search for {0} ran out of budget")]
    IrreducibilityUndecided(String),
    #[error("expected one image per generator of A ({expected}), found {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("image of generator {0} is not invertible")]
    NotInvertible(usize),
    #[error("image of torsion generator {generator} does not have order dividing {order}")]
    TorsionOrder { generator: usize, order: BigInt },
    #[error("ideal generator {0} does not map to 0")]
    IdealNotKilled(usize),
    #[error("group ring element over the wrong group or ring")]
    Domain,
    #[error("element is not in the augmentation ideal")]
    NotInAugmentationIdeal,
    #[error("no primitive element among the first {0} candidates")]
    SearchExhausted(usize),
    #[error("polynomial must have integer coefficients")]
    NotIntegral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Verified,
    Asserted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    mu: Poly,
    irreducibility: Irreducibility,
}

/// An element of `K`, as a polynomial of degree `< d` in the generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement(Poly);

impl FieldElement {
    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl NumberField {
    /// Checks irreducibility exactly for degree up to 6; above that the
    /// caller has to pass `asserted_irreducible`.
    pub fn new(mu: Poly, asserted_irreducible: bool) -> Result<Self, NumFieldError> {
        let mu = Poly::new(Q, mu.coeffs().to_vec());
        if mu.degree().unwrap_or(0) == 0 || !mu.is_monic() {
            return Err(NumFieldError::NotMonic(mu.to_string()));
        }
        let d = mu.degree().unwrap();
        let irreducibility = if d <= IRREDUCIBILITY_DEGREE {
            match is_irreducible(&mu) {
                Some(true) => Irreducibility::Verified,
                Some(false) => return Err(NumFieldError::Reducible(mu.to_string())),
                None if asserted_irreducible => Irreducibility::Asserted,
                None => return Err(NumFieldError::IrreducibilityUndecided(mu.to_string())),
            }
        } else if asserted_irreducible {
            Irreducibility::Asserted
        } else {
            return Err(NumFieldError::IrreducibilityUnverified(mu.to_string()));
        };
        Ok(Self { mu, irreducibility })
    }

    pub fn from_int_coeffs(coeffs: &[i64]) -> Result<Self, NumFieldError> {
        Self::new(Poly::from_ints(Q, coeffs), false)
    }

    pub fn mu(&self) -> &Poly {
        &self.mu
    }

    pub fn degree(&self) -> usize {
        self.mu.degree().unwrap()
    }

    pub fn irreducibility(&self) -> Irreducibility {
        self.irreducibility
    }

    pub fn element(&self, p: Poly) -> FieldElement {
        let p = Poly::new(Q, p.coeffs().to_vec());
        FieldElement(p.div_rem(&self.mu).1)
    }

    pub fn from_rationals(&self, coeffs: Vec<BigRational>) -> FieldElement {
        self.element(Poly::new(Q, coeffs))
    }

    pub fn from_ints(&self, coeffs: &[i64]) -> FieldElement {
        self.element(Poly::from_ints(Q, coeffs))
    }

    pub fn constant(&self, c: BigRational) -> FieldElement {
        self.element(Poly::constant(Q, c))
    }

    pub fn one(&self) -> FieldElement {
        self.constant(BigRational::one())
    }

    pub fn generator(&self) -> FieldElement {
        self.element(Poly::x(Q))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(a.0.add(&b.0))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(a.0.sub(&b.0))
    }

    pub fn scale(&self, a: &FieldElement, c: &BigRational) -> FieldElement {
        FieldElement(a.0.scale(c))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.element(a.0.mul(&b.0))
    }

    /// Inverse through the extended Euclidean algorithm.
    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        let (g, _, t) = ext_gcd(&self.mu, &a.0);
        (g.degree() == Some(0)).then(|| {
            let c = g.leading().recip();
            self.element(t.scale(&c))
        })
    }

    pub fn pow(&self, a: &FieldElement, e: &BigInt) -> Option<FieldElement> {
        let base = if e.is_negative() { self.inv(a)? } else { a.clone() };
        let mut e = e.abs();
        let mut acc = self.one();
        let mut sq = base;
        while e.is_positive() {
            if e.is_odd() {
                acc = self.mul(&acc, &sq);
            }
            sq = self.mul(&sq, &sq);
            e >>= 1;
        }
        Some(acc)
    }

    /// `N(alpha) = Res(mu, alpha) = prod alpha(xi_j)`.
    pub fn norm(&self, a: &FieldElement) -> BigRational {
        resultant(&self.mu, &a.0)
    }

    /// Minimal polynomial of `a` over `Q`, from the first linear dependence
    /// among `1, a, a^2, ...`.
    pub fn minimal_polynomial(&self, a: &FieldElement) -> Poly {
        let d = self.degree();
        let coords = |x: &FieldElement| (0..d).map(|i| x.0.coeff(i)).collect::<Vec<_>>();
        let mut basis = EchelonBasis::new(Q);
        let mut p = self.one();
        loop {
            match basis.insert(&coords(&p)) {
                Ok(_) => p = self.mul(&p, a),
                Err(c) => {
                    let mut coeffs: Vec<BigRational> = c.iter().map(|x| -x).collect();
                    coeffs.push(BigRational::one());
                    return Poly::new(Q, coeffs);
                }
            }
        }
    }
}

/// `(g, s, t)` with `g = s a + t b`.
fn ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let f = a.field();
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (Poly::one(f), Poly::zero(f));
    let (mut t0, mut t1) = (Poly::zero(f), Poly::one(f));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s = s0.sub(&q.mul(&s1));
        let t = t0.sub(&q.mul(&t1));
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, s);
        (t0, t1) = (t1, t);
    }
    (r0, s0, t0)
}

/// Resultant by the Euclidean recursion
/// `Res(f, g) = (-1)^(mn) lc(g)^(m - k) Res(g, f mod g)`, `k = deg(f mod g)`.
pub fn resultant(f: &Poly, g: &Poly) -> BigRational {
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else {
        return BigRational::zero();
    };
    if n == 0 {
        return pow_rat(&g.leading(), m);
    }
    if m == 0 {
        return pow_rat(&f.leading(), n);
    }
    let r = f.div_rem(g).1;
    let Some(k) = r.degree() else {
        return BigRational::zero();
    };
    let sign = if m * n % 2 == 1 { -BigRational::one() } else { BigRational::one() };
    sign * pow_rat(&g.leading(), m - k) * resultant(g, &r)
}

fn pow_rat(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

fn integer_coeffs(p: &Poly) -> Result<Vec<BigInt>, NumFieldError> {
    p.coeffs().iter().map(|c| c.is_integer().then(|| c.to_integer()).ok_or(NumFieldError::NotIntegral)).collect()
}

/// Primitive integer polynomial with the same roots.
fn primitive_part(p: &Poly) -> Vec<BigInt> {
    let den = p.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * &den).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    ints.into_iter().map(|c| c / &content).collect()
}

fn eval_int(p: &[BigInt], x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// `Some(true)` if irreducible over `Q`, `Some(false)` if reducible, `None`
/// if the search budget ran out.
pub fn is_irreducible(mu: &Poly) -> Option<bool> {
    let d = mu.degree()?;
    if d <= 1 {
        return Some(d == 1);
    }
    let p = primitive_part(mu);
    if p[0].is_zero() {
        return Some(false);
    }
    let mut possible: BTreeSet<usize> = (1..=d / 2).collect();
    for q in primes::primes().take(40) {
        if possible.is_empty() {
            return Some(true);
        }
        let Some(degs) = factor_degrees_mod(&p, q) else { continue };
        let mut sums = BTreeSet::from([0usize]);
        for k in degs {
            sums = sums.iter().flat_map(|s| [*s, s + k]).collect();
        }
        possible.retain(|k| sums.contains(k) || sums.contains(&(d - k)));
    }
    if possible.is_empty() {
        return Some(true);
    }
    let mut budget = KRONECKER_BUDGET;
    for k in possible {
        match kronecker_factor(&p, k, &mut budget) {
            Some(true) => return Some(false),
            Some(false) => {}
            None => return None,
        }
    }
    Some(true)
}

/// Degrees of the irreducible factors of `p mod q`, when `p` stays
/// squarefree of the same degree modulo `q`.
fn factor_degrees_mod(p: &[BigInt], q: u64) -> Option<Vec<usize>> {
    let f = ScalarField::Prime(q);
    let fp = Poly::from_bigints(f, p);
    let d = p.len() - 1;
    if fp.degree() != Some(d) {
        return None;
    }
    let fp = fp.monic();
    let deriv = Poly::new(
        f,
        fp.coeffs().iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(i.into())).collect(),
    );
    if fp.gcd(&deriv).degree() != Some(0) {
        return None;
    }
    let mut degs = Vec::new();
    let mut rest = fp;
    let x = Poly::x(f);
    let mut h = x.clone();
    let mut i = 0;
    while rest.degree().unwrap_or(0) > 0 {
        i += 1;
        if 2 * i > rest.degree().unwrap() {
            degs.push(rest.degree().unwrap());
            break;
        }
        h = pow_mod(&h, q, &rest);
        let g = h.sub(&x).gcd(&rest);
        let gd = g.degree().unwrap_or(0);
        for _ in 0..gd / i {
            degs.push(i);
        }
        if gd > 0 {
            rest = rest.div_rem(&g).0;
            h = h.div_rem(&rest).1;
        }
    }
    Some(degs)
}

fn pow_mod(b: &Poly, mut e: u64, m: &Poly) -> Poly {
    let mut acc = Poly::one(b.field());
    let mut sq = b.div_rem(m).1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&sq).div_rem(m).1;
        }
        sq = sq.mul(&sq).div_rem(m).1;
        e >>= 1;
    }
    acc
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    let mut out = vec![1u64];
    for (p, e) in primes::factor(n) {
        let cur = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(cur.iter().map(|c| c * pk));
        }
    }
    Some(out.into_iter().flat_map(|v| [BigInt::from(v), -BigInt::from(v)]).collect())
}

/// Kronecker's method: looks for an integer factor of degree `k`.
fn kronecker_factor(p: &[BigInt], k: usize, budget: &mut u64) -> Option<bool> {
    let mut points: Vec<(BigInt, BigInt)> = Vec::new();
    let mut x = 0i64;
    // points with small nonzero values keep the divisor lists short
    let mut candidates: Vec<(BigInt, BigInt)> = (-12i64..=12)
        .map(|t| {
            let t = BigInt::from(t);
            let v = eval_int(p, &t);
            (t, v)
        })
        .collect();
    if candidates.iter().any(|(_, v)| v.is_zero()) {
        return Some(true);
    }
    candidates.sort_by_key(|(t, v)| (v.abs(), t.abs()));
    while points.len() <= k {
        if x as usize >= candidates.len() {
            return None;
        }
        points.push(candidates[x as usize].clone());
        x += 1;
    }
    let divs: Vec<Vec<BigInt>> = points.iter().map(|(_, v)| divisors(v)).collect::<Option<_>>()?;
    let target = Poly::from_bigints(Q, p);
    let mut idx = vec![0usize; k + 1];
    loop {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        // fix the sign of the first value to skip associates
        if divs[0][idx[0]].is_positive() {
            let vals: Vec<(BigRational, BigRational)> = points
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(j, ((t, _), &i))| {
                    (BigRational::from_integer(t.clone()), BigRational::from_integer(divs[j][i].clone()))
                })
                .collect();
            let g = interpolate(&vals);
            if g.degree() == Some(k) && g.coeffs().iter().all(|c| c.is_integer()) && target.div_rem(&g).1.is_zero() {
                return Some(true);
            }
        }
        let mut j = 0;
        loop {
            if j > k {
                return Some(false);
            }
            idx[j] += 1;
            if idx[j] < divs[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn interpolate(points: &[(BigRational, BigRational)]) -> Poly {
    let mut acc = Poly::zero(Q);
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut term = Poly::constant(Q, yi.clone());
        for (j, (xj, _)) in points.iter().enumerate() {
            if i != j {
                term = term.mul(&Poly::linear_root(Q, xj)).scale(&(xi - xj).recip());
            }
        }
        acc = acc.add(&term);
    }
    acc
}

/// `psi: Q[A] -> K` given by images of the generators of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraMapPsi {
    field: NumberField,
    group: FgAbelianGroup,
    images: Vec<FieldElement>,
    inverses: Vec<FieldElement>,
    ideal: Vec<GroupRingElement>,
}

impl AlgebraMapPsi {
    pub fn new(
        field: NumberField,
        group: FgAbelianGroup,
        images: Vec<FieldElement>,
        ideal: Vec<GroupRingElement>,
    ) -> Result<Self, NumFieldError> {
        if images.len() != group.ngens() {
            return Err(NumFieldError::ImageCount { expected: group.ngens(), found: images.len() });
        }
        let mut inverses = Vec::new();
        for (i, x) in images.iter().enumerate() {
            inverses.push(field.inv(x).ok_or(NumFieldError::NotInvertible(i))?);
            if let Some(d) = group.generator_order(i) {
                if field.pow(x, d) != Some(field.one()) {
                    return Err(NumFieldError::TorsionOrder { generator: i, order: d.clone() });
                }
            }
        }
        let psi = Self { field, group, images, inverses, ideal: Vec::new() };
        for (i, g) in ideal.iter().enumerate() {
            if !psi.apply(g)?.is_zero() {
                return Err(NumFieldError::IdealNotKilled(i));
            }
        }
        Ok(Self { ideal, ..psi })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn images(&self) -> &[FieldElement] {
        &self.images
    }

    pub fn ideal_generators(&self) -> &[GroupRingElement] {
        &self.ideal
    }

    pub fn image_of(&self, a: &GroupElement) -> FieldElement {
        let k = &self.field;
        a.coords().iter().enumerate().fold(k.one(), |acc, (i, e)| {
            let base = if e.is_negative() { &self.inverses[i] } else { &self.images[i] };
            k.mul(&acc, &k.pow(base, &e.abs()).expect("invertible"))
        })
    }

    /// `psi(z)` for `z` with integer or rational coefficients.
    pub fn apply(&self, z: &GroupRingElement) -> Result<FieldElement, NumFieldError> {
        if z.group() != &self.group || matches!(z.ring(), CoeffRing::ModP(_)) {
            return Err(NumFieldError::Domain);
        }
        let k = &self.field;
        Ok(z.terms().fold(k.constant(BigRational::zero()), |acc, (a, c)| k.add(&acc, &k.scale(&self.image_of(a), c))))
    }
}

/// `nu(z) = N(psi(z) - 1)`
pub fn nu(psi: &AlgebraMapPsi, z: &GroupRingElement) -> Result<BigRational, NumFieldError> {
    let k = psi.field();
    Ok(k.norm(&k.sub(&psi.apply(z)?, &k.one())))
}

/// `(-n)^d mu(1/n) = (-1)^d sum_k c_k n^(d-k)` for integral monic `mu`.
pub fn nu_scaled(mu: &[BigInt], n: &BigInt) -> BigInt {
    let d = mu.len() - 1;
    let rev = mu.iter().fold(BigInt::zero(), |acc, c| acc * n + c);
    if d % 2 == 1 {
        -rev
    } else {
        rev
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimalityReport {
    pub n: BigInt,
    pub value: BigInt,
    pub residue: BigInt,
    pub expected_residue: BigInt,
    pub gcd: BigInt,
    /// `(prime, exponent)` pairs found so far.
    pub prime_factors: Vec<(BigInt, u32)>,
    /// Part of `|value|` left unfactored (1 when complete).
    pub cofactor: BigInt,
    pub complete: bool,
}

impl CoprimalityReport {
    pub fn residue_ok(&self) -> bool {
        self.residue == self.expected_residue
    }

    pub fn coprime(&self) -> bool {
        self.gcd.is_one()
    }

    pub fn passed(&self) -> bool {
        self.residue_ok() && self.coprime()
    }
}

/// Prime factors of `|v|`; values above `2^64` are trial divided by small
/// primes and otherwise left as a cofactor.
pub fn factor_bigint(v: &BigInt) -> (Vec<(BigInt, u32)>, BigInt) {
    let mut m = v.abs();
    if m.is_zero() {
        return (vec![], BigInt::zero());
    }
    let mut out = Vec::new();
    if let Some(u) = m.to_u64() {
        return (primes::factor(u).into_iter().map(|(p, e)| (BigInt::from(p), e)).collect(), BigInt::one());
    }
    for p in primes::primes().take_while(|p| *p < 1 << 16) {
        let bp = BigInt::from(p);
        let mut e = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        if let Some(u) = m.to_u64() {
            out.extend(primes::factor(u).into_iter().map(|(p, e)| (BigInt::from(p), e)));
            return (out, BigInt::one());
        }
    }
    (out, m)
}

pub fn coprimality_report(mu: &[BigInt], n: &BigInt) -> CoprimalityReport {
    let d = mu.len() - 1;
    let value = nu_scaled(mu, n);
    let sign = if d % 2 == 1 { -BigInt::one() } else { BigInt::one() };
    let (prime_factors, cofactor) = factor_bigint(&value);
    CoprimalityReport {
        n: n.clone(),
        residue: value.mod_floor(n),
        expected_residue: sign.mod_floor(n),
        gcd: value.gcd(n),
        complete: cofactor.is_one(),
        value,
        prime_factors,
        cofactor,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativityReport {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub passed: bool,
}

/// Checks `nu(a * u) = N(psi(a)) nu(u)` for `u` in the augmentation ideal.
pub fn multiplicativity_check(
    psi: &AlgebraMapPsi,
    a: &GroupElement,
    u: &GroupRingElement,
) -> Result<MultiplicativityReport, NumFieldError> {
    if !u.augmentation().is_zero() {
        return Err(NumFieldError::NotInAugmentationIdeal);
    }
    let au = u.canonical_act(a).map_err(|_| NumFieldError::Domain)?;
    let lhs = nu(psi, &au)?;
    let rhs = psi.field().norm(&psi.image_of(a)) * nu(psi, u)?;
    Ok(MultiplicativityReport { passed: lhs == rhs, lhs, rhs })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveElement {
    /// Coefficients `c` with `z = sum c_i (1 - a_i)`.
    pub combination: Vec<BigInt>,
    pub z: GroupRingElement,
    pub minimal_polynomial: Poly,
    pub scale: BigInt,
    /// `m z`, whose image is an algebraic integer generating `K`.
    pub x: GroupRingElement,
    pub scaled_minimal_polynomial: Vec<BigInt>,
    pub candidates_tried: usize,
}

/// Vectors of the given L1 norm, lexicographically.
fn vectors_of_norm(len: usize, norm: i64) -> Vec<Vec<i64>> {
    if len == 0 {
        return if norm == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in -norm..=norm {
        for mut rest in vectors_of_norm(len - 1, norm - first.abs()) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Least `m > 0` making the minimal polynomial of `m alpha` integral.
pub fn integral_scale(minpoly: &Poly) -> BigInt {
    let d = minpoly.degree().unwrap_or(0);
    let mut m = BigInt::one();
    let mut dens: BTreeSet<BigInt> = BTreeSet::new();
    for c in minpoly.coeffs() {
        if !c.denom().is_one() {
            dens.insert(c.denom().clone());
        }
    }
    let mut ps: BTreeSet<BigInt> = BTreeSet::new();
    for den in &dens {
        let (f, rest) = factor_bigint(den);
        ps.extend(f.into_iter().map(|(p, _)| p));
        if !rest.is_one() {
            // unfactored: fall back to the whole cofactor as a single "prime"
            ps.insert(rest);
        }
    }
    for p in ps {
        let mut need = 0u32;
        for (k, c) in minpoly.coeffs().iter().enumerate().take(d) {
            let mut v = 0u32;
            let mut den = c.denom().clone();
            while (&den % &p).is_zero() {
                den /= &p;
                v += 1;
            }
            let gap = (d - k) as u32;
            need = need.max(v.div_ceil(gap));
        }
        m *= num_traits::pow(p, need as usize);
    }
    m
}

pub fn primitive_element_search(psi: &AlgebraMapPsi, budget: usize) -> Result<PrimitiveElement, NumFieldError> {
    let k = psi.field();
    let d = k.degree();
    let a = psi.group();
    let r = a.ngens();
    let one = GroupRingElement::one(a, CoeffRing::Int);
    let mut tried = 0;
    for norm in 1.. {
        let vecs = vectors_of_norm(r, norm);
        if vecs.is_empty() {
            break;
        }
        for c in vecs {
            if tried >= budget {
                return Err(NumFieldError::SearchExhausted(budget));
            }
            tried += 1;
            let mut z = GroupRingElement::zero(a, CoeffRing::Int);
            for (i, ci) in c.iter().enumerate() {
                let t = one
                    .sub(&GroupRingElement::monomial(a, CoeffRing::Int, a.generator(i), BigRational::one()))
                    .expect("same ring");
                let scaled = GroupRingElement::from_terms(
                    a,
                    CoeffRing::Int,
                    t.terms().map(|(g, x)| (g.clone(), x * BigRational::from_integer((*ci).into()))),
                )
                .expect("integral");
                z = z.add(&scaled).expect("same ring");
            }
            let image = psi.apply(&z)?;
            let f = k.minimal_polynomial(&image);
            if f.degree() != Some(d) {
                continue;
            }
            let m = integral_scale(&f);
            let mq = BigRational::from_integer(m.clone());
            let x = GroupRingElement::from_terms(a, CoeffRing::Int, z.terms().map(|(g, v)| (g.clone(), v * &mq)))
                .expect("integral");
            let scaled = Poly::new(Q, f.coeffs().iter().enumerate().map(|(i, c)| c * pow_rat(&mq, d - i)).collect());
            return Ok(PrimitiveElement {
                combination: c.into_iter().map(BigInt::from).collect(),
                z,
                minimal_polynomial: f,
                scale: m,
                x,
                scaled_minimal_polynomial: integer_coeffs(&scaled).expect("scale clears denominators"),
                candidates_tried: tried,
            });
        }
        if r == 0 {
            break;
        }
    }
    Err(NumFieldError::SearchExhausted(tried))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootVerdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootCheck {
    pub verdict: RootVerdict,
    pub roots: Vec<Complex64>,
    pub min_modulus: f64,
}

pub const ROOT_TOLERANCE: f64 = 1e-9;
pub const ROOT_MARGIN: f64 = 0.01;

/// Complex roots of a monic polynomial by Aberth iteration. Numeric only.
pub fn complex_roots(mu: &Poly) -> Vec<Complex64> {
    let c: Vec<f64> = mu.coeffs().iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    let d = c.len() - 1;
    if d == 0 {
        return vec![];
    }
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let radius = 1.0 + c[..d].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius * 0.5 + 0.1, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect();
    for _ in 0..2000 {
        let mut change: f64 = 0.0;
        for i in 0..d {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            change = change.max(w.norm());
        }
        if change < ROOT_TOLERANCE * 1e-3 {
            break;
        }
    }
    z
}

/// Whether every root has modulus above `bound`, with a margin of 0.01.
pub fn root_magnitude_check(mu: &Poly, bound: f64) -> RootCheck {
    let roots = complex_roots(mu);
    let min_modulus = roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let verdict = if roots.iter().any(|z| (z.norm() - bound).abs() <= ROOT_MARGIN) {
        RootVerdict::Indeterminate
    } else if min_modulus > bound + ROOT_MARGIN {
        RootVerdict::Pass
    } else {
        RootVerdict::Fail
    };
    RootCheck { verdict, roots, min_modulus }
}

/// Prime divisors of `nu(n x)` for `n = 1..=n_max` compared with the finite
/// set coming from the norms of `psi(a_i)` and the values `nu(u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapingPrimesReport {
    pub finite_set: BTreeSet<BigInt>,
    pub values: Vec<(u64, BigInt)>,
    pub escaping: BTreeSet<BigInt>,
    pub complete: bool,
}

pub fn escaping_primes_report(
    psi: &AlgebraMapPsi,
    x: &GroupRingElement,
    units: &[GroupRingElement],
    n_max: u64,
) -> Result<EscapingPrimesReport, NumFieldError> {
    let k = psi.field();
    let mut complete = true;
    let mut add_primes = |set: &mut BTreeSet<BigInt>, v: &BigInt| {
        let (f, rest) = factor_bigint(v);
        complete &= rest.is_one() || rest.is_zero();
        set.extend(f.into_iter().map(|(p, _)| p));
    };
    let mut finite_set = BTreeSet::new();
    for img in psi.images() {
        let n = k.norm(img);
        add_primes(&mut finite_set, n.numer());
        add_primes(&mut finite_set, n.denom());
    }
    for u in units {
        let v = nu(psi, u)?;
        add_primes(&mut finite_set, v.numer());
        add_primes(&mut finite_set, v.denom());
    }
    let mut values = Vec::new();
    let mut escaping = BTreeSet::new();
    for n in 1..=n_max {
        let nq = BigRational::from_integer(n.into());
        let nx = GroupRingElement::from_terms(psi.group(), x.ring(), x.terms().map(|(g, c)| (g.clone(), c * &nq)))
            .map_err(|_| NumFieldError::Domain)?;
        let v = nu(psi, &nx)?;
        let mut ps = BTreeSet::new();
        add_primes(&mut ps, v.numer());
        escaping.extend(ps.into_iter().filter(|p| !finite_set.contains(p)));
        values.push((n, v.to_integer()));
    }
    Ok(EscapingPrimesReport { finite_set, values, escaping, complete })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn ints(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    // determinant of the multiplication-by-alpha matrix, as an independent norm
    fn det_norm(k: &NumberField, a: &FieldElement) -> BigRational {
        let d = k.degree();
        let mut m: Vec<Vec<BigRational>> = (0..d)
            .map(|j| {
                let col = k.mul(a, &k.element(Poly::x(Q).pow(j as u64)));
                (0..d).map(|i| col.poly().coeff(i)).collect()
            })
            .collect();
        let mut det = BigRational::one();
        for c in 0..d {
            let Some(p) = (c..d).find(|&r| !m[r][c].is_zero()) else { return BigRational::zero() };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det *= m[c][c].clone();
            let (top, rest) = m.split_at_mut(c + 1);
            let pivot = &top[c];
            for row in rest.iter_mut() {
                let f = &row[c] / &pivot[c];
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= y * &f;
                }
            }
        }
        det
    }

    fn sqrt5() -> NumberField {
        NumberField::from_int_coeffs(&[-5, 0, 1]).unwrap()
    }

    #[test]
    fn norm_examples() {
        let k = sqrt5();
        assert_eq!(k.norm(&k.generator()), r(-5));
        assert_eq!(k.norm(&k.one()), r(1));
        assert_eq!(k.norm(&k.from_ints(&[2])), r(4));
        let k3 = NumberField::from_int_coeffs(&[7, -2, 0, 1]).unwrap();
        for a in [vec![1, 2, 3], vec![-4, 0, 1], vec![0, 5], vec![3, -1, 2]] {
            let x = k3.from_ints(&a);
            assert_eq!(k3.norm(&x), det_norm(&k3, &x));
        }
    }

    #[test]
    fn irreducibility() {
        assert!(NumberField::from_int_coeffs(&[-5, 0, 1]).is_ok());
        assert!(matches!(NumberField::from_int_coeffs(&[-4, 0, 1]), Err(NumFieldError::Reducible(_))));
        assert!(NumberField::from_int_coeffs(&[1, 0, -10, 0, 1]).is_ok());
        // (x^2 + 1)(x^2 + x + 3) has no rational root
        assert!(matches!(NumberField::from_int_coeffs(&[3, 1, 4, 1, 1]), Err(NumFieldError::Reducible(_))));
        assert!(NumberField::from_int_coeffs(&[2, 0, 0, 1, 0, 0, 1]).is_ok());
        assert!(matches!(
            NumberField::from_int_coeffs(&[1, 1, 0, 0, 0, 0, 0, 1]),
            Err(NumFieldError::IrreducibilityUnverified(_))
        ));
        assert!(NumberField::new(Poly::from_ints(Q, &[1, 1, 0, 0, 0, 0, 0, 1]), true).is_ok());
        assert!(matches!(NumberField::from_int_coeffs(&[1, 2]), Err(NumFieldError::NotMonic(_))));
    }

    fn psi_sqrt5(image: &[i64]) -> AlgebraMapPsi {
        let k = sqrt5();
        let x = k.from_ints(image);
        AlgebraMapPsi::new(k, FgAbelianGroup::free(1), vec![x], vec![]).unwrap()
    }

    fn mono(a: &FgAbelianGroup, terms: &[(i64, i64)]) -> GroupRingElement {
        GroupRingElement::from_terms(
            a,
            CoeffRing::Int,
            terms.iter().map(|(e, c)| (a.element_i64(&[*e]).unwrap(), r(*c))),
        )
        .unwrap()
    }

    #[test]
    fn nu_examples() {
        let psi = psi_sqrt5(&[0, 1]);
        let a = psi.group().clone();
        assert_eq!(nu(&psi, &mono(&a, &[(0, 1)])).unwrap(), r(0));
        assert_eq!(nu(&psi, &mono(&a, &[(1, 1)])).unwrap(), r(-4));
        assert_eq!(nu(&psi, &mono(&a, &[(1, 2)])).unwrap(), r(-19));
    }

    #[test]
    fn nu_scaled_examples() {
        assert_eq!(nu_scaled(&ints(&[-5, 0, 1]), &2.into()), BigInt::from(-19));
        assert_eq!(nu_scaled(&ints(&[-2, 1]), &1.into()), BigInt::from(1));
        let v = nu_scaled(&ints(&[7, -2, 0, 1]), &5.into());
        assert_eq!(v, BigInt::from(-826));
        assert_eq!(v.mod_floor(&5.into()), BigInt::from(-1).mod_floor(&5.into()));
    }

    #[test]
    fn nu_scaled_matches_norm_route() {
        let psi = psi_sqrt5(&[0, 1]);
        let a = psi.group().clone();
        for n in 1..8 {
            let z = mono(&a, &[(1, n)]);
            assert_eq!(nu(&psi, &z).unwrap(), BigRational::from_integer(nu_scaled(&ints(&[-5, 0, 1]), &n.into())));
        }
    }

    #[test]
    fn coprimality_examples() {
        let mu = ints(&[-5, 0, 1]);
        let rep = coprimality_report(&mu, &2.into());
        assert_eq!(rep.value, BigInt::from(-19));
        assert!(rep.passed() && rep.complete);
        assert_eq!(rep.prime_factors, vec![(BigInt::from(19), 1)]);
        assert!(coprimality_report(&mu, &1.into()).coprime());
        let rep = coprimality_report(&mu, &3.into());
        assert_eq!(rep.value, BigInt::from(-44));
        assert!(rep.passed());
        assert_eq!(rep.prime_factors, vec![(BigInt::from(2), 2), (BigInt::from(11), 1)]);
    }

    #[test]
    fn big_values_are_partially_factored() {
        let big = BigInt::from(u64::MAX) * BigInt::from(1_000_003u64) * 4;
        let (f, rest) = factor_bigint(&big);
        assert!(rest.is_one());
        assert_eq!(f[0], (BigInt::from(2), 2));
        let p = BigInt::from(18446744073709551557u64);
        let (_, rest) = factor_bigint(&(&p * &p));
        assert_eq!(rest, &p * &p);
    }

    #[test]
    fn multiplicativity_examples() {
        let psi = psi_sqrt5(&[2, 1]);
        let a = psi.group().clone();
        assert_eq!(psi.field().norm(&psi.images()[0]), r(-1));
        let u = mono(&a, &[(0, 1), (1, -1)]);
        for e in [0, 1, -2, 3] {
            let rep = multiplicativity_check(&psi, &a.element_i64(&[e]).unwrap(), &u).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        assert_eq!(
            multiplicativity_check(&psi, &a.zero(), &mono(&a, &[(1, 1)])).unwrap_err(),
            NumFieldError::NotInAugmentationIdeal
        );
    }

    #[test]
    fn primitive_element_examples() {
        let k = NumberField::from_int_coeffs(&[0, 1]).unwrap();
        let psi = AlgebraMapPsi::new(k.clone(), FgAbelianGroup::free(1), vec![k.from_ints(&[3])], vec![]).unwrap();
        let pe = primitive_element_search(&psi, 10).unwrap();
        assert_eq!(pe.minimal_polynomial.degree(), Some(1));

        let psi = psi_sqrt5(&[0, 1]);
        let pe = primitive_element_search(&psi, 10).unwrap();
        assert_eq!(pe.combination, ints(&[-1]));
        let pe1 = primitive_element_search(&psi, 10).unwrap();
        assert_eq!(pe, pe1);
        assert_eq!(pe.minimal_polynomial.degree(), Some(2));

        let half = Poly::new(Q, vec![BigRational::new((-5).into(), 4.into()), r(0), r(1)]);
        assert_eq!(integral_scale(&half), BigInt::from(2));
    }

    #[test]
    fn root_examples() {
        assert_eq!(root_magnitude_check(&Poly::from_ints(Q, &[-5, 0, 1]), 2.0).verdict, RootVerdict::Pass);
        assert_eq!(root_magnitude_check(&Poly::from_ints(Q, &[-1, 1]), 2.0).verdict, RootVerdict::Fail);
        assert_eq!(root_magnitude_check(&Poly::from_ints(Q, &[-2, 1]), 2.0).verdict, RootVerdict::Indeterminate);
        let roots = complex_roots(&Poly::from_ints(Q, &[7, -2, 0, 1]));
        for z in roots {
            let v = z * z * z - 2.0 * z + 7.0;
            assert!(v.norm() < 1e-9);
        }
    }

    #[test]
    fn escaping_primes() {
        let psi = psi_sqrt5(&[2, 1]);
        let a = psi.group().clone();
        let pe = primitive_element_search(&psi, 10).unwrap();
        let u = mono(&a, &[(0, 1), (1, -1)]);
        let rep = escaping_primes_report(&psi, &pe.x, &[u], 6).unwrap();
        assert_eq!(rep.values.len(), 6);
        assert!(!rep.escaping.is_empty());
    }
}
