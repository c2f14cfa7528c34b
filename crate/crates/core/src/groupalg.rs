//! Group rings `R[A]`, finite-dimensional quotients `R[A]/J` over a field,
//! and polynomials `f` with `f(a) in J`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::abgroup::{integer_relation, AbGroupError, FgAbelianGroup, GroupElement, IntegerMatrix};
use crate::affine::{enumerate_with_transversal, AffineAction, AffineError, DEFAULT_ELEMENT_CAP};
use crate::linalg::{self, EchelonBasis, Mat, ScalarField};
use crate::modact::{Derivation, ZAModule};
use crate::poly::Poly;
use crate::primes;

pub const DEFAULT_DIM_CAP: usize = 512;

// Largest monomial box tried while looking for a presentation of R[A]/J.
const BOX_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffRing {
    Int,
    ModP(u64),
    Rat,
}

impl CoeffRing {
    pub fn field(self) -> Option<ScalarField> {
        match self {
            CoeffRing::Int => None,
            CoeffRing::ModP(p) => Some(ScalarField::Prime(p)),
            CoeffRing::Rat => Some(ScalarField::Rational),
        }
    }

    pub fn from_field(f: ScalarField) -> Self {
        match f {
            ScalarField::Prime(p) => CoeffRing::ModP(p),
            ScalarField::Rational => CoeffRing::Rat,
        }
    }

    fn normalize(self, c: BigRational) -> Result<BigRational, GroupAlgError> {
        match self {
            CoeffRing::Int if !c.is_integer() => Err(GroupAlgError::BadCoefficient(c.to_string(), self)),
            CoeffRing::ModP(p) => {
                ScalarField::Prime(p).try_normalize(c.clone()).ok_or(GroupAlgError::BadCoefficient(c.to_string(), self))
            }
            _ => Ok(c),
        }
    }

    fn reduce(self, c: BigRational) -> BigRational {
        match self {
            CoeffRing::ModP(p) => ScalarField::Prime(p).normalize(c),
            _ => c,
        }
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRing::Int => write!(f, "Z"),
            CoeffRing::ModP(p) => write!(f, "Z_{p}"),
            CoeffRing::Rat => write!(f, "Q"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupAlgError {
    #[error("coefficient rings differ: {0} and {1}")]
    RingMismatch(CoeffRing, CoeffRing),
    #[error("group ring elements live over different groups")]
    GroupMismatch,
    #[error("coefficient {0} is not an element of {1}")]
    BadCoefficient(String, CoeffRing),
    #[error(transparent)]
    Element(#[from] AbGroupError),
    #[error("quotient algebras need field coefficients (Z_p or Q)")]
    NotAField,
    #[error("no finite-codimension presentation of the quotient found within dimension cap {cap}")]
    DimensionCapExceeded { cap: usize },
    #[error("the canonical affine action is only finite over Z_p")]
    NotFinite,
    #[error("no certificate after trying {tried} primes")]
    BudgetExhausted { tried: usize },
    #[error("polynomial coefficients live in {0:?}, algebra in {1:?}")]
    FieldMismatch(ScalarField, ScalarField),
    #[error(transparent)]
    Orbits(#[from] AffineError),
}

/// A finitely supported combination of elements of `A`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupRingElement {
    group: FgAbelianGroup,
    ring: CoeffRing,
    terms: BTreeMap<GroupElement, BigRational>,
}

impl GroupRingElement {
    pub fn zero(group: &FgAbelianGroup, ring: CoeffRing) -> Self {
        Self { group: group.clone(), ring, terms: BTreeMap::new() }
    }

    pub fn one(group: &FgAbelianGroup, ring: CoeffRing) -> Self {
        Self::monomial(group, ring, group.zero(), BigRational::one())
    }

    /// `c * g`; panics if `c` is not a coefficient of `ring` or `g` is not reduced.
    pub fn monomial(group: &FgAbelianGroup, ring: CoeffRing, g: GroupElement, c: BigRational) -> Self {
        Self::from_terms(group, ring, [(g, c)]).expect("valid monomial")
    }

    /// Sums the given terms; repeated elements are combined.
    pub fn from_terms<I>(group: &FgAbelianGroup, ring: CoeffRing, terms: I) -> Result<Self, GroupAlgError>
    where
        I: IntoIterator<Item = (GroupElement, BigRational)>,
    {
        let mut out = Self::zero(group, ring);
        for (g, c) in terms {
            group.check(&g)?;
            let c = ring.normalize(c)?;
            out.accumulate(g, c);
        }
        Ok(out)
    }

    fn accumulate(&mut self, g: GroupElement, c: BigRational) {
        let entry = self.terms.entry(g).or_insert_with(BigRational::zero);
        *entry = self.ring.reduce(&*entry + c);
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, g: &GroupElement) -> BigRational {
        self.terms.get(g).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn augmentation(&self) -> BigRational {
        self.ring.reduce(self.terms.values().sum())
    }

    fn compatible(&self, other: &Self) -> Result<(), GroupAlgError> {
        if self.ring != other.ring {
            return Err(GroupAlgError::RingMismatch(self.ring, other.ring));
        }
        if self.group != other.group {
            return Err(GroupAlgError::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, GroupAlgError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.accumulate(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GroupAlgError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.group, self.ring);
        for (g, c) in &self.terms {
            out.accumulate(g.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GroupAlgError> {
        self.compatible(other)?;
        let mut out = Self::zero(&self.group, self.ring);
        for (g, c) in &self.terms {
            for (h, d) in &other.terms {
                out.accumulate(self.group.add(g, h), c * d);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.group, self.ring);
        for _ in 0..e {
            out = out.mul(self).expect("same ring");
        }
        out
    }

    /// `a * u = a u + 1 - a`
    pub fn canonical_act(&self, a: &GroupElement) -> Result<Self, GroupAlgError> {
        self.group.check(a)?;
        let ag = Self::monomial(&self.group, self.ring, a.clone(), BigRational::one());
        let one = Self::one(&self.group, self.ring);
        ag.mul(self)?.add(&one)?.sub(&ag)
    }

    /// The same combination over another ring (integer coefficients only
    /// move from `Z`).
    pub fn change_ring(&self, ring: CoeffRing) -> Result<Self, GroupAlgError> {
        if self.ring != ring && self.ring != CoeffRing::Int {
            return Err(GroupAlgError::RingMismatch(self.ring, ring));
        }
        Self::from_terms(&self.group, ring, self.terms.clone())
    }
}

fn generator_name(i: usize, n: usize) -> String {
    if n <= 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("a{}", i + 1)
    }
}

fn monomial_string(g: &GroupElement) -> String {
    let n = g.len();
    let parts: Vec<String> = g
        .coords()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_zero())
        .map(|(i, e)| {
            let name = generator_name(i, n);
            if e.is_one() {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect();
    parts.join("")
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (g, c)) in self.terms.iter().enumerate() {
            let (neg, abs) = (c.is_negative(), c.abs());
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let m = monomial_string(g);
            match (m.is_empty(), abs.is_one()) {
                (true, _) => write!(f, "{abs}")?,
                (false, true) => write!(f, "{m}")?,
                (false, false) => write!(f, "{abs}{m}")?,
            }
        }
        Ok(())
    }
}

/// `(a - 1)^q`, expanded with binomial coefficients reduced in `ring`.
pub fn f_q_element(
    group: &FgAbelianGroup,
    ring: CoeffRing,
    a: &GroupElement,
    q: u64,
) -> Result<GroupRingElement, GroupAlgError> {
    group.check(a)?;
    let mut out = GroupRingElement::zero(group, ring);
    let mut binom = BigInt::one();
    for k in 0..=q {
        let sign = if (q - k).is_multiple_of(2) { 1 } else { -1 };
        let c = BigRational::from_integer(&binom * sign);
        out.accumulate(group.scale(a, &BigInt::from(k)), c);
        binom = binom * (q - k) / (k + 1);
    }
    Ok(out)
}

/// `Lambda = F[A]/J` with a basis of images of monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDimAlgebra {
    field: ScalarField,
    group: FgAbelianGroup,
    labels: Vec<GroupElement>,
    gens: Vec<Mat>,
    inv_gens: Vec<Mat>,
    augmentation: Option<Vec<BigRational>>,
    ideal: Vec<GroupRingElement>,
}

impl FiniteDimAlgebra {
    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Basis vector `k` is the coset of `labels()[k]`.
    pub fn labels(&self) -> &[GroupElement] {
        &self.labels
    }

    /// Multiplication by the `i`-th generator of `A`.
    pub fn generator_matrix(&self, i: usize) -> &Mat {
        &self.gens[i]
    }

    pub fn inverse_matrix(&self, i: usize) -> &Mat {
        &self.inv_gens[i]
    }

    /// The all-ones functional, present when every generator of `J` has
    /// augmentation 0.
    pub fn augmentation_functional(&self) -> Option<&[BigRational]> {
        self.augmentation.as_deref()
    }

    pub fn ideal_generators(&self) -> &[GroupRingElement] {
        &self.ideal
    }

    /// The coset of 1 (the zero vector when `J` is the whole ring).
    pub fn one(&self) -> Vec<BigRational> {
        if self.dim() == 0 {
            return vec![];
        }
        linalg::unit_vec(self.dim(), 0)
    }

    pub fn zero(&self) -> Vec<BigRational> {
        linalg::zero_vec(self.dim())
    }

    pub fn augment(&self, x: &[BigRational]) -> Option<BigRational> {
        let f = self.field;
        self.augmentation.as_ref().map(|e| e.iter().zip(x).fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b))))
    }

    /// `g x` for a group element `g`.
    pub fn act(&self, g: &GroupElement, x: &[BigRational]) -> Vec<BigRational> {
        act_with(self.field, &self.gens, &self.inv_gens, g, x)
    }

    /// Matrix of multiplication by `g`.
    pub fn element_matrix(&self, g: &GroupElement) -> Mat {
        let n = self.dim();
        let cols: Vec<Vec<BigRational>> = (0..n).map(|j| self.act(g, &linalg::unit_vec(n, j))).collect();
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Image of a group ring element.
    pub fn reduce(&self, z: &GroupRingElement) -> Result<Vec<BigRational>, GroupAlgError> {
        if z.group() != &self.group {
            return Err(GroupAlgError::GroupMismatch);
        }
        let z = z.change_ring(CoeffRing::from_field(self.field))?;
        let f = self.field;
        let one = self.one();
        let mut acc = self.zero();
        for (g, c) in z.terms() {
            acc = linalg::vec_add(f, &acc, &linalg::vec_scale(f, &self.act(g, &one), c));
        }
        Ok(acc)
    }

    pub fn mul(&self, x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
        let f = self.field;
        let mut acc = self.zero();
        for (k, c) in x.iter().enumerate() {
            if !c.is_zero() {
                acc = linalg::vec_add(f, &acc, &linalg::vec_scale(f, &self.act(&self.labels[k], y), c));
            }
        }
        acc
    }

    /// `g * x = g x + 1 - g`
    pub fn canonical_act(&self, g: &GroupElement, x: &[BigRational]) -> Vec<BigRational> {
        let f = self.field;
        let one = self.one();
        let gx = self.act(g, x);
        let g1 = self.act(g, &one);
        linalg::vec_sub(f, &linalg::vec_add(f, &gx, &one), &g1)
    }
}

fn act_with(f: ScalarField, gens: &[Mat], invs: &[Mat], g: &GroupElement, x: &[BigRational]) -> Vec<BigRational> {
    let mut v = x.to_vec();
    for (i, e) in g.coords().iter().enumerate() {
        let m = if e.is_negative() { &invs[i] } else { &gens[i] };
        let k = e.abs();
        if k <= BigInt::from(2 * x.len().max(1)) {
            for _ in 0..k.to_u64().unwrap() {
                v = linalg::mat_vec(f, m, &v);
            }
        } else {
            v = linalg::mat_vec(f, &mat_pow(f, m, &k), &v);
        }
    }
    v
}

fn mat_pow(f: ScalarField, m: &Mat, e: &BigInt) -> Mat {
    let mut result = linalg::identity(m.len());
    let mut base = m.clone();
    let mut e = e.clone();
    while e.is_positive() {
        if e.is_odd() {
            result = linalg::mat_mul(f, &result, &base);
        }
        base = linalg::mat_mul(f, &base, &base);
        e >>= 1;
    }
    result
}

type Mono = Vec<i64>;
type SparseRow = BTreeMap<usize, BigRational>;

struct MonomialBox {
    free: usize,
    moduli: Vec<i64>,
    k: i64,
    monomials: Vec<Mono>,
    index: HashMap<Mono, usize>,
}

impl MonomialBox {
    fn new(free: usize, moduli: &[i64], k: i64) -> Self {
        let mut monomials: Vec<Mono> = vec![vec![]];
        for i in 0..free + moduli.len() {
            let range: Vec<i64> = if i < free { (-k..=k).collect() } else { (0..moduli[i - free]).collect() };
            monomials = monomials
                .into_iter()
                .flat_map(|m| {
                    range.iter().map(move |&c| {
                        let mut m = m.clone();
                        m.push(c);
                        m
                    })
                })
                .collect();
        }
        // Far monomials last, so they become pivots and the standard set
        // stays near the origin.
        monomials.sort_by_key(|m| (m[..free].iter().map(|c| c.abs()).sum::<i64>(), m.clone()));
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Self { free, moduli: moduli.to_vec(), k, monomials, index }
    }

    fn shift(&self, m: &[i64], by: &[i64]) -> Option<usize> {
        let t: Mono = m
            .iter()
            .zip(by)
            .enumerate()
            .map(|(i, (a, b))| if i < self.free { a + b } else { (a + b).rem_euclid(self.moduli[i - self.free]) })
            .collect();
        if t[..self.free].iter().any(|c| c.abs() > self.k) {
            return None;
        }
        self.index.get(&t).copied()
    }
}

fn box_size(free: usize, moduli: &[i64], k: i64) -> Option<usize> {
    let mut s: usize = 1;
    for _ in 0..free {
        s = s.checked_mul((2 * k + 1) as usize)?;
    }
    for d in moduli {
        s = s.checked_mul(*d as usize)?;
    }
    Some(s)
}

/// Finds a basis of `F[A]/J` by row-reducing the multiples of the
/// generators of `J` supported in growing boxes of monomials, and accepts
/// a box once the resulting multiplication matrices are verified to define
/// a cyclic `F[A]`-module killed by `J`.
pub fn build_quotient_algebra(
    group: &FgAbelianGroup,
    field: ScalarField,
    generators: &[GroupRingElement],
    dim_cap: usize,
) -> Result<FiniteDimAlgebra, GroupAlgError> {
    let ring = CoeffRing::from_field(field);
    let ideal = generators
        .iter()
        .map(|g| {
            if g.group() != group {
                return Err(GroupAlgError::GroupMismatch);
            }
            g.change_ring(ring)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let free = group.free_rank();
    let moduli: Vec<i64> = group
        .torsion()
        .iter()
        .map(|d| d.to_i64().filter(|d| (*d as usize) <= BOX_LIMIT))
        .collect::<Option<_>>()
        .ok_or(GroupAlgError::DimensionCapExceeded { cap: dim_cap })?;
    let terms: Vec<Vec<(Mono, BigRational)>> = ideal
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.terms().map(|(e, c)| (e.to_i64().expect("exponent fits i64"), c.clone())).collect())
        .collect();
    let mut k = 1i64;
    loop {
        match box_size(free, &moduli, k) {
            Some(s) if s <= BOX_LIMIT => {}
            _ => return Err(GroupAlgError::DimensionCapExceeded { cap: dim_cap }),
        }
        let bx = MonomialBox::new(free, &moduli, k);
        if let Some((labels, gens, inv_gens)) = attempt(field, &bx, &terms, dim_cap)? {
            let augmentation =
                ideal.iter().all(|g| g.augmentation().is_zero()).then(|| vec![BigRational::one(); labels.len()]);
            let labels = labels.into_iter().map(|m| group.element_i64(&m).expect("box monomial is reduced")).collect();
            return Ok(FiniteDimAlgebra { field, group: group.clone(), labels, gens, inv_gens, augmentation, ideal });
        }
        if free == 0 {
            // the box already holds all of A, so J was captured completely
            unreachable!("finite group algebra quotient failed verification");
        }
        k *= 2;
    }
}

type Attempt = Option<(Vec<Mono>, Vec<Mat>, Vec<Mat>)>;

fn attempt(
    f: ScalarField,
    bx: &MonomialBox,
    terms: &[Vec<(Mono, BigRational)>],
    dim_cap: usize,
) -> Result<Attempt, GroupAlgError> {
    let ncols = bx.monomials.len();
    let mut pivots: BTreeMap<usize, SparseRow> = BTreeMap::new();
    for g in terms {
        for m in &bx.monomials {
            let mut row = SparseRow::new();
            let mut inside = true;
            for (e, c) in g {
                match bx.shift(m, e) {
                    Some(col) => {
                        let v = f.add(row.get(&col).unwrap_or(&f.zero()), c);
                        row.insert(col, v);
                    }
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if inside {
                insert_row(f, &mut pivots, row);
            }
        }
    }
    let standard: Vec<usize> = (0..ncols).filter(|c| !pivots.contains_key(c)).collect();
    if standard.len() > dim_cap && bx.free == 0 {
        return Err(GroupAlgError::DimensionCapExceeded { cap: dim_cap });
    }
    let n = standard.len();
    let pos: HashMap<usize, usize> = standard.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let reduce = |col: usize| -> Vec<BigRational> {
        let mut v = linalg::zero_vec(n);
        match pivots.get(&col) {
            None => v[pos[&col]] = f.one(),
            Some(row) => {
                for (c, x) in row {
                    if *c != col {
                        v[pos[c]] = f.neg(x);
                    }
                }
            }
        }
        v
    };
    let ngens = bx.free + bx.moduli.len();
    let mut gens = Vec::new();
    let mut invs = Vec::new();
    for i in 0..ngens {
        for (sign, out) in [(1i64, &mut gens), (-1, &mut invs)] {
            let mut step = vec![0i64; ngens];
            step[i] = sign;
            let mut cols = Vec::with_capacity(n);
            for &s in &standard {
                match bx.shift(&bx.monomials[s], &step) {
                    Some(t) => cols.push(reduce(t)),
                    None => return Ok(None),
                }
            }
            out.push(transpose(n, &cols));
        }
    }
    let origin = bx.index[&vec![0i64; ngens]];
    let one = reduce(origin);

    // The matrices must give a module structure, kill J on 1 and be cyclic.
    let id = linalg::identity(n);
    for i in 0..ngens {
        if linalg::mat_mul(f, &gens[i], &invs[i]) != id || linalg::mat_mul(f, &invs[i], &gens[i]) != id {
            return Ok(None);
        }
        for j in 0..i {
            if linalg::mat_mul(f, &gens[i], &gens[j]) != linalg::mat_mul(f, &gens[j], &gens[i]) {
                return Ok(None);
            }
        }
        if i >= bx.free && mat_pow(f, &gens[i], &BigInt::from(bx.moduli[i - bx.free])) != id {
            return Ok(None);
        }
    }
    let act_mono = |m: &Mono, v: &[BigRational]| {
        let g = GroupElement::from_raw(m.iter().map(|&c| BigInt::from(c)).collect());
        act_with(f, &gens, &invs, &g, v)
    };
    for g in terms {
        let mut acc = linalg::zero_vec(n);
        for (e, c) in g {
            acc = linalg::vec_add(f, &acc, &linalg::vec_scale(f, &act_mono(e, &one), c));
        }
        if !linalg::is_zero_vec(&acc) {
            return Ok(None);
        }
    }
    if n == 0 {
        return Ok(Some((vec![], vec![vec![]; ngens], vec![vec![]; ngens])));
    }
    if n > dim_cap {
        // verified, so the dimension really exceeds the cap
        return Err(GroupAlgError::DimensionCapExceeded { cap: dim_cap });
    }

    // Re-base in discovery order: 1, then products by a_1, a_1^-1, a_2, ...
    let mut basis = EchelonBasis::new(f);
    let mut vecs: Vec<Vec<BigRational>> = Vec::new();
    let mut labels: Vec<Mono> = Vec::new();
    basis.insert(&one).expect("1 is nonzero in a nonzero algebra");
    vecs.push(one);
    labels.push(vec![0; ngens]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(j) = queue.pop_front() {
        if vecs.len() == n {
            break;
        }
        for i in 0..ngens {
            let dirs: &[i64] = if i < bx.free { &[1, -1] } else { &[1] };
            for &s in dirs {
                let m = if s == 1 { &gens[i] } else { &invs[i] };
                let v = linalg::mat_vec(f, m, &vecs[j]);
                if basis.insert(&v).is_ok() {
                    let mut label = labels[j].clone();
                    label[i] += s;
                    if i >= bx.free {
                        label[i] = label[i].rem_euclid(bx.moduli[i - bx.free]);
                    }
                    vecs.push(v);
                    labels.push(label);
                    queue.push_back(vecs.len() - 1);
                }
            }
        }
    }
    if vecs.len() < n {
        return Ok(None);
    }
    let p = transpose(n, &vecs);
    let pinv = linalg::inverse(f, &p).expect("basis of independent vectors");
    let conj = |m: &Mat| linalg::mat_mul(f, &pinv, &linalg::mat_mul(f, m, &p));
    let gens = gens.iter().map(conj).collect();
    let invs = invs.iter().map(conj).collect();
    Ok(Some((labels, gens, invs)))
}

fn transpose(n: usize, cols: &[Vec<BigRational>]) -> Mat {
    (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

// Keeps `pivots` in reduced row echelon form with the pivot at the largest column.
fn insert_row(f: ScalarField, pivots: &mut BTreeMap<usize, SparseRow>, mut row: SparseRow) {
    let present: Vec<usize> = row.keys().copied().filter(|c| pivots.contains_key(c)).collect();
    for c in present {
        let Some(x) = row.get(&c).cloned() else { continue };
        if x.is_zero() {
            continue;
        }
        for (col, y) in &pivots[&c] {
            let v = f.sub(row.get(col).unwrap_or(&f.zero()), &f.mul(&x, y));
            row.insert(*col, v);
        }
    }
    row.retain(|_, v| !v.is_zero());
    let Some((&p, lead)) = row.iter().next_back() else { return };
    let inv = f.inv(lead).expect("nonzero");
    for v in row.values_mut() {
        *v = f.mul(v, &inv);
    }
    for other in pivots.values_mut() {
        if let Some(x) = other.get(&p).cloned() {
            for (col, y) in &row {
                let v = f.sub(other.get(col).unwrap_or(&f.zero()), &f.mul(&x, y));
                other.insert(*col, v);
            }
            other.retain(|_, v| !v.is_zero());
        }
    }
    pivots.insert(p, row);
}

/// `f(a)` as a vector in the basis of `Lambda`, by Horner's rule.
pub fn evaluate_in_algebra(
    f: &Poly,
    a: &GroupElement,
    alg: &FiniteDimAlgebra,
) -> Result<Vec<BigRational>, GroupAlgError> {
    if f.field() != alg.field() {
        return Err(GroupAlgError::FieldMismatch(f.field(), alg.field()));
    }
    alg.group().check(a)?;
    let field = alg.field();
    let one = alg.one();
    let mut v = alg.zero();
    for c in f.coeffs().iter().rev() {
        v = linalg::vec_add(field, &alg.act(a, &v), &linalg::vec_scale(field, &one, c));
    }
    Ok(v)
}

/// Least-degree monic `f` with `f(a) = 0` in `Lambda`.
pub fn minimal_polynomial(alg: &FiniteDimAlgebra, a: &GroupElement) -> Result<Poly, GroupAlgError> {
    alg.group().check(a)?;
    let f = alg.field();
    if alg.dim() == 0 {
        return Ok(Poly::one(f));
    }
    let mut basis = EchelonBasis::new(f);
    let mut v = alg.one();
    loop {
        match basis.insert(&v) {
            Ok(_) => v = alg.act(a, &v),
            Err(c) => {
                let mut coeffs: Vec<BigRational> = c.iter().map(|x| f.neg(x)).collect();
                coeffs.push(f.one());
                return Ok(Poly::new(f, coeffs));
            }
        }
    }
}

/// The affine action `a * (x + J) = (a x + 1 - a) + J` on the image of `I`
/// in `Lambda`. When `J` lies in `I` this image is `I/J`, identified with
/// `Z_p^(n-1)` through the basis `e_k - e_0`; otherwise it is all of
/// `Lambda` in its own basis.
#[derive(Clone, Debug)]
pub struct CanonicalAction {
    pub action: AffineAction,
    field: ScalarField,
    dim: usize,
    whole: bool,
}

impl CanonicalAction {
    /// Whether `J` fails to lie in `I`, so the image of `I` is all of `Lambda`.
    pub fn is_whole_algebra(&self) -> bool {
        self.whole
    }

    /// Module coordinates of an algebra element; `None` outside the image of `I`.
    pub fn to_module(&self, x: &[BigRational]) -> Option<GroupElement> {
        if x.len() != self.dim {
            return None;
        }
        let coords = if self.whole {
            x.iter().map(|c| c.to_integer()).collect()
        } else {
            let f = self.field;
            if !x.iter().fold(f.zero(), |acc, c| f.add(&acc, c)).is_zero() {
                return None;
            }
            x[1..].iter().map(|c| c.to_integer()).collect()
        };
        self.action.group().element(coords).ok()
    }

    pub fn from_module(&self, v: &GroupElement) -> Vec<BigRational> {
        let f = self.field;
        let tail = v.coords().iter().map(|c| f.from_int(c.clone()));
        if self.whole {
            return tail.collect();
        }
        let mut x: Vec<BigRational> = std::iter::once(f.zero()).chain(tail).collect();
        let s = x[1..].iter().fold(f.zero(), |acc, c| f.add(&acc, c));
        x[0] = f.neg(&s);
        x
    }
}

pub fn canonical_affine_action(alg: &FiniteDimAlgebra) -> Result<CanonicalAction, GroupAlgError> {
    let ScalarField::Prime(p) = alg.field() else {
        return Err(GroupAlgError::NotFinite);
    };
    let f = alg.field();
    let n = alg.dim();
    let whole = alg.augmentation_functional().is_none();
    // first coordinate of the algebra that survives in the module
    let lo = if whole { 0 } else { 1 };
    let m = n.saturating_sub(lo);
    let group = FgAbelianGroup::from_u64(0, &vec![p; m])?;
    let acting = alg.group().clone();
    let mut matrices = Vec::new();
    let mut values = Vec::new();
    for i in 0..acting.ngens() {
        let g = alg.generator_matrix(i);
        let rows: Vec<Vec<BigInt>> = (lo..n)
            .map(|r| {
                (lo..n).map(|c| if whole { g[r][c].clone() } else { f.sub(&g[r][c], &g[r][0]) }.to_integer()).collect()
            })
            .collect();
        matrices.push(IntegerMatrix::from_rows_with_cols(&rows, m));
        let shift = (lo..n)
            .map(|r| {
                let e0 = if r == 0 { f.one() } else { f.zero() };
                f.sub(&e0, &g[r][0]).to_integer()
            })
            .collect();
        values.push(group.element(shift)?);
    }
    let module = ZAModule::new(acting, group, matrices).expect("multiplication action is a module");
    let derivation = Derivation::new(&module, values).expect("canonical derivation");
    let action = AffineAction::new(module, derivation).expect("canonical derivation");
    Ok(CanonicalAction { action, field: f, dim: n, whole })
}

/// Data for `f = g_1 - g_2` with `f(a) in J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionCertificate {
    pub element: GroupElement,
    pub q: Vec<u64>,
    pub r: Vec<u64>,
    pub witnesses: Vec<GroupElement>,
    pub t: Vec<BigInt>,
    pub g1: Poly,
    pub g2: Poly,
    pub f: Poly,
}

/// Each certificate clause, checked on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateChecks {
    pub primes_distinct: bool,
    pub exponents_valid: bool,
    pub relation_holds: bool,
    pub f_nonzero: bool,
    pub f_vanishes: bool,
    pub collisions_hold: Vec<bool>,
}

impl CertificateChecks {
    pub fn all(&self) -> bool {
        self.primes_distinct
            && self.exponents_valid
            && self.relation_holds
            && self.f_nonzero
            && self.f_vanishes
            && self.collisions_hold.iter().all(|b| *b)
    }
}

fn f_q_poly(field: ScalarField, q: u64) -> Poly {
    Poly::from_ints(field, &[-1, 1]).pow(q)
}

fn g_poly(field: ScalarField, primes: &[u64], t: &[BigInt]) -> Poly {
    primes.iter().zip(t).fold(Poly::one(field), |acc, (q, e)| {
        let base = f_q_poly(field, *q).sub(&Poly::one(field));
        acc.mul(&base.pow(e.to_u64().expect("small exponent")))
    })
}

impl CollisionCertificate {
    pub fn check(&self, alg: &FiniteDimAlgebra) -> CertificateChecks {
        let field = alg.field();
        let group = alg.group();
        let mut all: Vec<u64> = self.q.iter().chain(&self.r).copied().collect();
        all.sort_unstable();
        let primes_distinct = all.windows(2).all(|w| w[0] != w[1])
            && all.iter().all(|&q| primes::is_prime(q) && q != field.characteristic());
        let exponents_valid = self.t.len() == self.q.len()
            && self.t.iter().all(|t| !t.is_negative())
            && self.t.iter().any(|t| !t.is_zero());
        let relation =
            self.witnesses.iter().zip(&self.t).fold(group.zero(), |acc, (a, t)| group.add(&acc, &group.scale(a, t)));
        let f_nonzero = !self.f.is_zero();
        let f_vanishes =
            evaluate_in_algebra(&self.f, &self.element, alg).map(|v| linalg::is_zero_vec(&v)).unwrap_or(false);
        let collisions_hold = self
            .q
            .iter()
            .zip(&self.r)
            .zip(&self.witnesses)
            .map(|((q, r), w)| {
                let fq = evaluate_in_algebra(&f_q_poly(field, *q), &self.element, alg);
                let fr = evaluate_in_algebra(&f_q_poly(field, *r), &self.element, alg);
                match (fq, fr) {
                    (Ok(fq), Ok(fr)) => fq == alg.canonical_act(w, &fr),
                    _ => false,
                }
            })
            .collect();
        CertificateChecks {
            primes_distinct,
            exponents_valid,
            relation_holds: relation.is_zero(),
            f_nonzero,
            f_vanishes,
            collisions_hold,
        }
    }
}

/// Searches the first `prime_budget` primes other than `p` for orbit
/// collisions of `f_q(a) + J` until the collision witnesses satisfy an
/// integer relation.
pub fn collision_poly(
    alg: &FiniteDimAlgebra,
    a: &GroupElement,
    prime_budget: usize,
) -> Result<CollisionCertificate, GroupAlgError> {
    collision_poly_capped(alg, a, prime_budget, DEFAULT_ELEMENT_CAP)
}

pub fn collision_poly_capped(
    alg: &FiniteDimAlgebra,
    a: &GroupElement,
    prime_budget: usize,
    cap: u64,
) -> Result<CollisionCertificate, GroupAlgError> {
    alg.group().check(a)?;
    let canon = canonical_affine_action(alg)?;
    let field = alg.field();
    let p = field.characteristic();
    let (partition, transversal) = enumerate_with_transversal(&canon.action, cap)?;
    let n = canon.action.group().clone();
    let acting = alg.group().clone();

    let mut unpaired: HashMap<usize, (u64, GroupElement)> = HashMap::new();
    let (mut qs, mut rs, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for q in primes::primes().filter(|&q| q != p).take(prime_budget) {
        let x = evaluate_in_algebra(&f_q_poly(field, q), a, alg)?;
        let v = canon.to_module(&x).expect("f_q(a) lies in the image of I");
        let idx = n.index_of(&v);
        let orbit = partition.orbit_of_index(idx);
        let w = transversal.witness(idx);
        let Some((q0, w0)) = unpaired.remove(&orbit) else {
            unpaired.insert(orbit, (q, w));
            continue;
        };
        qs.push(q0);
        rs.push(q);
        ws.push(acting.sub(&w0, &w));
        let Some(t) = integer_relation(&acting, &ws) else { continue };
        let (mut q1, mut r1, mut w1, mut t1) = (qs.clone(), rs.clone(), ws.clone(), t);
        for j in 0..t1.len() {
            if t1[j].is_negative() {
                std::mem::swap(&mut q1[j], &mut r1[j]);
                w1[j] = acting.neg(&w1[j]);
                t1[j] = -&t1[j];
            }
        }
        let g1 = g_poly(field, &q1, &t1);
        let g2 = g_poly(field, &r1, &t1);
        let cert =
            CollisionCertificate { element: a.clone(), f: g1.sub(&g2), q: q1, r: r1, witnesses: w1, t: t1, g1, g2 };
        if cert.check(alg).all() {
            return Ok(cert);
        }
    }
    Err(GroupAlgError::BudgetExhausted { tried: prime_budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(g: &FgAbelianGroup, c: &[i64]) -> GroupElement {
        g.element_i64(c).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// Laurent polynomial in one variable from `(exponent, coefficient)` pairs.
    fn laurent(ring: CoeffRing, terms: &[(i64, i64)]) -> GroupRingElement {
        let a = FgAbelianGroup::free(1);
        GroupRingElement::from_terms(&a, ring, terms.iter().map(|(e, c)| (el(&a, &[*e]), q(*c)))).unwrap()
    }

    #[test]
    fn ring_examples() {
        let a = FgAbelianGroup::free(1);
        let x = laurent(CoeffRing::Int, &[(0, 1), (1, -1)]);
        assert!(x.augmentation().is_zero());
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq, laurent(CoeffRing::Int, &[(0, 1), (1, -2), (2, 1)]));
        assert!(sq.augmentation().is_zero());
        let y = laurent(CoeffRing::ModP(2), &[(1, 1), (0, 1)]);
        assert_eq!(y.mul(&y).unwrap(), laurent(CoeffRing::ModP(2), &[(2, 1), (0, 1)]));
        assert!(matches!(x.add(&y), Err(GroupAlgError::RingMismatch(CoeffRing::Int, CoeffRing::ModP(2)))));
        assert_eq!(GroupRingElement::zero(&a, CoeffRing::Int).to_string(), "0");
        assert_eq!(sq.to_string(), "1 - 2a + a^2");
    }

    #[test]
    fn torsion_exponents_reduce() {
        let c3 = FgAbelianGroup::cyclic(3);
        let a = GroupRingElement::monomial(&c3, CoeffRing::Int, el(&c3, &[1]), q(1));
        assert_eq!(a.pow(3), GroupRingElement::one(&c3, CoeffRing::Int));
    }

    #[test]
    fn f_q_examples() {
        let a = FgAbelianGroup::free(1);
        let g = el(&a, &[1]);
        assert_eq!(
            f_q_element(&a, CoeffRing::Int, &g, 2).unwrap(),
            laurent(CoeffRing::Int, &[(2, 1), (1, -2), (0, 1)])
        );
        assert_eq!(f_q_element(&a, CoeffRing::ModP(3), &g, 3).unwrap(), laurent(CoeffRing::ModP(3), &[(3, 1), (0, 2)]));
        assert_eq!(f_q_element(&a, CoeffRing::ModP(2), &g, 2).unwrap(), laurent(CoeffRing::ModP(2), &[(2, 1), (0, 1)]));
        for p in [2u64, 3, 5, 7] {
            assert!(f_q_element(&a, CoeffRing::Int, &g, p).unwrap().augmentation().is_zero());
        }
    }

    #[test]
    fn canonical_act_identity() {
        let a = FgAbelianGroup::free(1);
        let g = el(&a, &[3]);
        let u = laurent(CoeffRing::Int, &[(0, 2), (1, -1), (-2, -1)]);
        let one = GroupRingElement::one(&a, CoeffRing::Int);
        let ga = GroupRingElement::monomial(&a, CoeffRing::Int, g.clone(), q(1));
        let lhs = u.canonical_act(&g).unwrap().sub(&one).unwrap();
        let rhs = ga.mul(&u.sub(&one).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    fn z2_cubic() -> FiniteDimAlgebra {
        let a = FgAbelianGroup::free(1);
        let j = laurent(CoeffRing::ModP(2), &[(2, 1), (1, 1), (0, 1)]);
        build_quotient_algebra(&a, ScalarField::Prime(2), &[j], DEFAULT_DIM_CAP).unwrap()
    }

    #[test]
    fn quotient_examples() {
        let a = FgAbelianGroup::free(1);
        let alg = z2_cubic();
        assert_eq!(alg.dim(), 2);
        assert_eq!(alg.labels(), &[el(&a, &[0]), el(&a, &[1])]);

        let j = laurent(CoeffRing::Rat, &[(1, 1), (0, -1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Rational, &[j], DEFAULT_DIM_CAP).unwrap();
        assert_eq!(alg.dim(), 1);

        let zero = GroupRingElement::zero(&a, CoeffRing::Rat);
        assert_eq!(
            build_quotient_algebra(&a, ScalarField::Rational, &[zero], 50).unwrap_err(),
            GroupAlgError::DimensionCapExceeded { cap: 50 }
        );
    }

    #[test]
    fn quotient_kills_generators_and_commutes() {
        let a = FgAbelianGroup::free(2);
        let f = ScalarField::Prime(3);
        let r = CoeffRing::ModP(3);
        let gens = vec![
            GroupRingElement::from_terms(&a, r, [(el(&a, &[2, 0]), q(1)), (el(&a, &[0, 0]), q(-1))]).unwrap(),
            GroupRingElement::from_terms(&a, r, [(el(&a, &[0, 1]), q(1)), (el(&a, &[1, 0]), q(-1))]).unwrap(),
        ];
        let alg = build_quotient_algebra(&a, f, &gens, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(alg.dim(), 2);
        for g in &gens {
            assert!(linalg::is_zero_vec(&alg.reduce(g).unwrap()));
        }
        let (m0, m1) = (alg.generator_matrix(0), alg.generator_matrix(1));
        assert_eq!(linalg::mat_mul(f, m0, m1), linalg::mat_mul(f, m1, m0));
    }

    #[test]
    fn quotient_of_finite_group_ring() {
        let c4 = FgAbelianGroup::cyclic(4);
        let alg = build_quotient_algebra(&c4, ScalarField::Rational, &[], DEFAULT_DIM_CAP).unwrap();
        assert_eq!(alg.dim(), 4);
        let f = minimal_polynomial(&alg, &el(&c4, &[1])).unwrap();
        assert_eq!(f, Poly::from_ints(ScalarField::Rational, &[-1, 0, 0, 0, 1]));
    }

    #[test]
    fn minimal_polynomial_examples() {
        let a = FgAbelianGroup::free(1);
        let g = el(&a, &[1]);
        assert_eq!(minimal_polynomial(&z2_cubic(), &g).unwrap(), Poly::from_ints(ScalarField::Prime(2), &[1, 1, 1]));
        let j = laurent(CoeffRing::ModP(3), &[(1, 1), (0, -1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Prime(3), &[j], DEFAULT_DIM_CAP).unwrap();
        assert_eq!(minimal_polynomial(&alg, &g).unwrap(), Poly::from_ints(ScalarField::Prime(3), &[-1, 1]));
        let j = laurent(CoeffRing::Rat, &[(2, 1), (0, -5)]);
        let alg = build_quotient_algebra(&a, ScalarField::Rational, &[j], DEFAULT_DIM_CAP).unwrap();
        assert_eq!(minimal_polynomial(&alg, &g).unwrap(), Poly::from_ints(ScalarField::Rational, &[-5, 0, 1]));
    }

    #[test]
    fn evaluate_examples() {
        let a = FgAbelianGroup::free(1);
        let g = el(&a, &[1]);
        let alg = z2_cubic();
        let f2 = ScalarField::Prime(2);
        assert_eq!(evaluate_in_algebra(&Poly::one(f2), &g, &alg).unwrap(), alg.one());
        assert_eq!(evaluate_in_algebra(&Poly::from_ints(f2, &[0, 1, 1]), &g, &alg).unwrap(), alg.one());
        let m = minimal_polynomial(&alg, &g).unwrap();
        assert!(linalg::is_zero_vec(&evaluate_in_algebra(&m, &g, &alg).unwrap()));
    }

    #[test]
    fn canonical_action_examples() {
        // a^2 + a + 1 has augmentation 1 over Z_2, so I + J is the whole
        // ring and the image of I is all of Lambda
        let alg = z2_cubic();
        let canon = canonical_affine_action(&alg).unwrap();
        assert!(canon.is_whole_algebra());
        assert_eq!(canon.action.group().order(), Some(4.into()));
        let a = FgAbelianGroup::free(1);
        let j = laurent(CoeffRing::ModP(2), &[(3, 1), (0, 1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Prime(2), &[j], DEFAULT_DIM_CAP).unwrap();
        let canon = canonical_affine_action(&alg).unwrap();
        assert!(!canon.is_whole_algebra());
        assert_eq!(canon.action.group().order(), Some(4.into()));
        let j = laurent(CoeffRing::ModP(5), &[(1, 1), (0, -1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Prime(5), &[j], DEFAULT_DIM_CAP).unwrap();
        let canon = canonical_affine_action(&alg).unwrap();
        assert_eq!(canon.action.group().order(), Some(1.into()));
        let j = laurent(CoeffRing::ModP(3), &[(2, 1), (0, -1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Prime(3), &[j], DEFAULT_DIM_CAP).unwrap();
        let canon = canonical_affine_action(&alg).unwrap();
        assert_eq!(canon.action.group().order(), Some(3.into()));
        let j = laurent(CoeffRing::Rat, &[(1, 1), (0, -1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Rational, &[j], DEFAULT_DIM_CAP).unwrap();
        assert_eq!(canonical_affine_action(&alg).unwrap_err(), GroupAlgError::NotFinite);
    }

    #[test]
    fn canonical_action_matches_algebra() {
        let a = FgAbelianGroup::free(1);
        let j = laurent(CoeffRing::ModP(2), &[(3, 1), (0, 1)]);
        let sub = build_quotient_algebra(&a, ScalarField::Prime(2), &[j], DEFAULT_DIM_CAP).unwrap();
        for alg in [z2_cubic(), sub] {
            let canon = canonical_affine_action(&alg).unwrap();
            for e in [-1, 1, 2] {
                let g = el(alg.group(), &[e]);
                for v in canon.action.group().elements() {
                    let x = canon.from_module(&v);
                    assert_eq!(canon.to_module(&x), Some(v.clone()));
                    let lhs = canon.to_module(&alg.canonical_act(&g, &x)).unwrap();
                    assert_eq!(lhs, canon.action.apply(&g, &v).unwrap());
                }
            }
        }
    }

    #[test]
    fn collision_examples() {
        let alg = z2_cubic();
        let g = el(alg.group(), &[1]);
        let cert = collision_poly(&alg, &g, 10).unwrap();
        assert!(cert.check(&alg).all());
        assert!(!cert.f.is_zero());

        let a = FgAbelianGroup::free(1);
        let j = laurent(CoeffRing::ModP(5), &[(1, 1), (0, -1)]);
        let alg = build_quotient_algebra(&a, ScalarField::Prime(5), &[j], DEFAULT_DIM_CAP).unwrap();
        let cert = collision_poly(&alg, &g, 4).unwrap();
        assert!(cert.check(&alg).all());
        assert_eq!(cert.q.len(), 1);
    }

    #[test]
    fn collision_budget_exhausted() {
        let alg = z2_cubic();
        let g = el(alg.group(), &[1]);
        assert_eq!(collision_poly(&alg, &g, 1).unwrap_err(), GroupAlgError::BudgetExhausted { tried: 1 });
    }

    #[test]
    fn tampered_certificate_fails_checks() {
        let alg = z2_cubic();
        let g = el(alg.group(), &[1]);
        let mut cert = collision_poly(&alg, &g, 10).unwrap();
        cert.f = cert.f.add(&Poly::one(alg.field()));
        let c = cert.check(&alg);
        assert!(!c.f_vanishes);
        assert!(c.primes_distinct);
    }
}
