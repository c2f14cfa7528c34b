//! Random instance generators. Module groups have order at most `10^4`,
//! torsion invariants at most 16 and `A` has rank at most 3. Candidate
//! action matrices are drawn entrywise and rejected unless they define an
//! automorphism.

use dcoset_core::abgroup::{FgAbelianGroup, GroupElement, IntegerMatrix};
use dcoset_core::affine::AffineAction;
use dcoset_core::groupalg::{build_quotient_algebra, CoeffRing, FiniteDimAlgebra, GroupRingElement};
use dcoset_core::linalg::ScalarField;
use dcoset_core::modact::{Derivation, Submodule, ZAModule};
use dcoset_core::numfield::{AlgebraMapPsi, NumberField};
use dcoset_core::poly::Poly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type GenRng = ChaCha8Rng;

pub const MAX_MODULE_ORDER: u64 = 10_000;
pub const MAX_TORSION: u64 = 16;
pub const MAX_ACTING_RANK: usize = 3;

// Matrix orders above this are rejected when a finite `A` is needed.
const ORDER_LIMIT: u64 = 5_000;

pub fn rng(seed: u64, stream: u64) -> GenRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// A divisibility chain of invariants in `[2, 16]`, at most three of them.
fn torsion_chain(rng: &mut GenRng, max_order: u64) -> Vec<u64> {
    loop {
        let s = rng.random_range(1..=3);
        let mut ds = vec![rng.random_range(2..=MAX_TORSION)];
        for _ in 1..s {
            let last = *ds.last().unwrap();
            let multiples: Vec<u64> = (1..).map(|k| last * k).take_while(|&m| m <= MAX_TORSION).collect();
            ds.push(multiples[rng.random_range(0..multiples.len())]);
        }
        if ds.iter().product::<u64>() <= max_order {
            return ds;
        }
    }
}

pub fn finite_group(rng: &mut GenRng, max_order: u64) -> FgAbelianGroup {
    FgAbelianGroup::from_u64(0, &torsion_chain(rng, max_order.min(MAX_MODULE_ORDER))).unwrap()
}

/// `Z^r x (finite part)` with `1 <= r <= 2`.
pub fn infinite_group(rng: &mut GenRng) -> FgAbelianGroup {
    let r = rng.random_range(1..=2);
    let t = if rng.random_bool(0.5) { torsion_chain(rng, 256) } else { Vec::new() };
    FgAbelianGroup::from_u64(r, &t).unwrap()
}

pub fn element(rng: &mut GenRng, g: &FgAbelianGroup, bound: i64) -> GroupElement {
    let coords = (0..g.ngens())
        .map(|i| match g.modulus(i) {
            Some(d) => BigInt::from(rng.random_range(0..d.to_u64().unwrap())),
            None => BigInt::from(rng.random_range(-bound..=bound)),
        })
        .collect();
    g.element(coords).unwrap()
}

/// An automorphism of `g`, as its matrix and inverse.
pub fn automorphism(rng: &mut GenRng, g: &FgAbelianGroup) -> (IntegerMatrix, IntegerMatrix) {
    let n = g.ngens();
    for _ in 0..2_000 {
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match g.modulus(i) {
                        Some(d) => rng.random_range(0..d.to_i64().unwrap()),
                        // maps from torsion into a free coordinate are always zero
                        None if j >= g.free_rank() => 0,
                        None => rng.random_range(-2..=2),
                    })
                    .collect()
            })
            .collect();
        let m = IntegerMatrix::from_rows_with_cols(&rows, n);
        if g.check_endomorphism(&m).is_err() {
            continue;
        }
        if let Some(inv) = g.automorphism_inverse(&m) {
            return (g.normalize_endomorphism(&m), inv);
        }
    }
    (IntegerMatrix::identity(n), IntegerMatrix::identity(n))
}

/// Order of an automorphism of a finite group, if at most `limit`.
pub fn matrix_order(g: &FgAbelianGroup, m: &IntegerMatrix, limit: u64) -> Option<u64> {
    let id = IntegerMatrix::identity(g.ngens());
    let mut p = g.normalize_endomorphism(m);
    for k in 1..=limit {
        if p == id {
            return Some(k);
        }
        p = g.compose(&p, m);
    }
    None
}

#[derive(Clone, Copy, Debug)]
pub struct ActionShape {
    pub finite_module: bool,
    pub finite_acting: bool,
    pub max_module: u64,
    /// Bound on `|N| |A|` when both are finite.
    pub max_total: u64,
}

impl ActionShape {
    /// Finite `N` and finite `A` with `|N| |A| <= max_total`.
    pub fn finite(max_total: u64) -> Self {
        Self { finite_module: true, finite_acting: true, max_module: max_total / 2, max_total }
    }

    /// Finite `N`, arbitrary `A`.
    pub fn finite_module(max_module: u64) -> Self {
        Self { finite_module: true, finite_acting: false, max_module, max_total: u64::MAX }
    }

    /// Anything: `N` may be infinite.
    pub fn any() -> Self {
        Self { finite_module: false, finite_acting: false, max_module: MAX_MODULE_ORDER, max_total: u64::MAX }
    }
}

/// A random module whose generators act by powers of one automorphism, so
/// the actions commute.
pub fn module(rng: &mut GenRng, shape: ActionShape) -> ZAModule {
    loop {
        let n = if shape.finite_module || rng.random_bool(0.5) {
            finite_group(rng, shape.max_module)
        } else {
            infinite_group(rng)
        };
        let (m, minv) = automorphism(rng, &n);
        let rank = rng.random_range(1..=MAX_ACTING_RANK);
        let mats: Vec<IntegerMatrix> =
            (0..rank).map(|_| n.endomorphism_pow(&m, &minv, &BigInt::from(rng.random_range(-2..=3)))).collect();
        let free = if shape.finite_acting { 0 } else { rng.random_range(0..=rank) };
        let Some(acting) = acting_group(rng, &n, &mats, free) else {
            continue;
        };
        if shape.finite_module && shape.finite_acting {
            let total = n.order_u64().unwrap().saturating_mul(acting.order_u64().unwrap());
            if total > shape.max_total {
                continue;
            }
        }
        if let Ok(module) = ZAModule::new(acting, n, mats) {
            return module;
        }
    }
}

// Free generators first, then a divisibility chain of orders each a
// multiple of the order of its matrix.
fn acting_group(rng: &mut GenRng, n: &FgAbelianGroup, mats: &[IntegerMatrix], free: usize) -> Option<FgAbelianGroup> {
    let torsion_mats = &mats[free..];
    if torsion_mats.is_empty() {
        return Some(FgAbelianGroup::free(free));
    }
    if !n.is_finite() {
        // orders of automorphisms of infinite groups are not bounded; only
        // the identity is safe for a torsion generator
        if torsion_mats.iter().any(|m| !m.is_identity()) {
            return None;
        }
    }
    let mut base = 1;
    for m in torsion_mats {
        let o = if m.is_identity() { 1 } else { matrix_order(n, m, ORDER_LIMIT)? };
        base = lcm(base, o);
    }
    if base == 1 {
        base = rng.random_range(2..=4);
    }
    let mut ds = Vec::new();
    let mut d = base;
    for _ in torsion_mats {
        d *= rng.random_range(1..=2);
        ds.push(d);
    }
    if d > MAX_TORSION {
        return None;
    }
    FgAbelianGroup::from_u64(free, &ds).ok()
}

/// A derivation found by sampling generator values; falls back to an inner
/// derivation when sampling keeps failing the consistency conditions.
pub fn derivation(rng: &mut GenRng, m: &ZAModule) -> Derivation {
    for _ in 0..30 {
        let values = (0..m.acting().ngens()).map(|_| element(rng, m.group(), 3)).collect();
        if let Ok(d) = Derivation::new(m, values) {
            return d;
        }
    }
    Derivation::inner(m, &element(rng, m.group(), 3))
}

pub fn affine_action(rng: &mut GenRng, shape: ActionShape) -> AffineAction {
    let m = module(rng, shape);
    let d = derivation(rng, &m);
    AffineAction::new(m, d).unwrap()
}

/// The submodule generated by one or two random elements, scaled by small
/// factors. Prefers a proper nontrivial submodule when a few draws find one.
pub fn submodule(rng: &mut GenRng, m: &ZAModule) -> Submodule {
    let mut last = None;
    for _ in 0..10 {
        let k = rng.random_range(1..=2);
        let seeds: Vec<GroupElement> = (0..k)
            .map(|_| {
                let x = element(rng, m.group(), 3);
                m.group().scale(&x, &BigInt::from(rng.random_range(1..=4)))
            })
            .collect();
        let sub = m.submodule_generated(&seeds).unwrap();
        let s = sub.subgroup();
        if !s.is_trivial() && !s.is_whole() {
            return sub;
        }
        last = Some(sub);
    }
    last.unwrap()
}

/// A random element of the group ring with small integer coefficients.
pub fn group_ring_element(rng: &mut GenRng, g: &FgAbelianGroup, ring: CoeffRing, terms: usize) -> GroupRingElement {
    let ts: Vec<(GroupElement, BigRational)> = (0..terms)
        .map(|_| (element(rng, g, 2), BigRational::from_integer(BigInt::from(rng.random_range(-3..=3)))))
        .collect();
    let ts = ts
        .into_iter()
        .map(|(x, c)| {
            let c = match ring {
                CoeffRing::ModP(p) => ScalarField::Prime(p).normalize(c),
                _ => c,
            };
            (x, c)
        })
        .collect::<Vec<_>>();
    GroupRingElement::from_terms(g, ring, ts).unwrap()
}

/// A random element of the augmentation ideal.
pub fn augmentation_element(rng: &mut GenRng, g: &FgAbelianGroup, ring: CoeffRing, terms: usize) -> GroupRingElement {
    let z = group_ring_element(rng, g, ring, terms);
    let eps = GroupRingElement::monomial(g, ring, g.zero(), z.augmentation());
    z.sub(&eps).unwrap()
}

fn poly_in_generator(g: &FgAbelianGroup, ring: CoeffRing, gen: usize, coeffs: &[i64]) -> GroupRingElement {
    let terms = coeffs.iter().enumerate().map(|(i, &c)| {
        let mut e = vec![BigInt::from(0); g.ngens()];
        e[gen] = BigInt::from(i);
        (g.element(e).unwrap(), BigRational::from_integer(BigInt::from(c)))
    });
    GroupRingElement::from_terms(g, ring, terms.collect::<Vec<_>>()).unwrap()
}

fn reduce_mod(c: i64, p: u64) -> i64 {
    c.rem_euclid(p as i64)
}

/// A quotient `Z_p[A]/J` with `p` in {2, 3, 5}, small enough that the
/// canonical affine action can be enumerated, plus an element of `A`.
pub fn algebra(rng: &mut GenRng) -> (FiniteDimAlgebra, GroupElement) {
    loop {
        let p = [2u64, 3, 5][rng.random_range(0..3)];
        // keep p^dim around 2^14 at most
        let max_dim = match p {
            2 => 14,
            3 => 9,
            _ => 6,
        };
        let ring = CoeffRing::ModP(p);
        let field = ScalarField::Prime(p);
        let shape = rng.random_range(0..3);
        let (group, deg_h, extra) = match shape {
            0 => (FgAbelianGroup::free(1), rng.random_range(1..=max_dim), 1),
            1 => (FgAbelianGroup::free(2), rng.random_range(1..=max_dim.min(5)), 1),
            _ => {
                let m = rng.random_range(2..=3);
                let g = FgAbelianGroup::from_u64(1, &[m]).unwrap();
                (g, rng.random_range(1..=max_dim / m as usize), m as usize)
            }
        };
        if deg_h * extra > 20 {
            continue;
        }
        let h = random_h(rng, p, deg_h);
        let mut ideal = vec![poly_in_generator(&group, ring, 0, &h)];
        if shape == 1 {
            let k = [-1i64, 1, 2][rng.random_range(0..3)];
            let b = group.generator(1);
            let ak = group.element_i64(&[k, 0]).unwrap();
            let t = GroupRingElement::from_terms(
                &group,
                ring,
                vec![
                    (b, BigRational::from_integer(1.into())),
                    (ak, field.normalize(BigRational::from_integer((-1).into()))),
                ],
            )
            .unwrap();
            ideal.push(t);
        }
        let Ok(alg) = build_quotient_algebra(&group, field, &ideal, 64) else {
            continue;
        };
        if alg.dim() == 0 {
            continue;
        }
        let a = element(rng, &group, 2);
        return (alg, a);
    }
}

// Monic `h` of the given degree with `h(0) != 0`; half the time divisible by `X - 1`.
fn random_h(rng: &mut GenRng, p: u64, deg: usize) -> Vec<i64> {
    let field = ScalarField::Prime(p);
    let through_one = rng.random_bool(0.5) && deg >= 1;
    let inner_deg = if through_one { deg - 1 } else { deg };
    loop {
        let mut c: Vec<i64> = (0..inner_deg).map(|_| rng.random_range(0..p as i64)).collect();
        c.push(1);
        let g = Poly::from_ints(field, &c);
        let h = if through_one { g.mul(&Poly::from_ints(field, &[-1, 1])) } else { g };
        let coeffs: Vec<i64> = h.coeffs().iter().map(|x| reduce_mod(x.to_integer().to_i64().unwrap(), p)).collect();
        if coeffs[0] != 0 {
            return coeffs;
        }
    }
}

/// A random monic irreducible integer polynomial of degree `1..=max_deg`,
/// constant term first.
pub fn monic_irreducible(rng: &mut GenRng, min_deg: usize, max_deg: usize) -> Vec<i64> {
    loop {
        let d = rng.random_range(min_deg..=max_deg);
        let mut c: Vec<i64> = (0..d).map(|_| rng.random_range(-9..=9)).collect();
        c.push(1);
        if c[0] == 0 {
            continue;
        }
        if NumberField::from_int_coeffs(&c).is_ok() {
            return c;
        }
    }
}

/// `psi: Q[A] -> K` for `A = Z^r` with nonzero images of small height in a
/// field of degree `degree`.
pub fn psi(rng: &mut GenRng, degree: usize) -> AlgebraMapPsi {
    let mu = monic_irreducible(rng, degree, degree);
    let k = NumberField::from_int_coeffs(&mu).unwrap();
    let r = rng.random_range(1..=2);
    let images = (0..r)
        .map(|_| loop {
            let c: Vec<i64> = (0..degree).map(|_| rng.random_range(-3..=3)).collect();
            let x = k.from_ints(&c);
            if !x.is_zero() {
                break x;
            }
        })
        .collect();
    AlgebraMapPsi::new(k, FgAbelianGroup::free(r), images, Vec::new()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_actions_respect_the_bounds() {
        let mut r = rng(7, 0);
        for _ in 0..20 {
            let act = affine_action(&mut r, ActionShape::finite(5000));
            let n = act.group().order_u64().unwrap();
            let a = act.acting().order_u64().unwrap();
            assert!(n * a <= 5000);
            assert!(act.acting().ngens() <= MAX_ACTING_RANK);
            assert!(act.group().torsion().iter().all(|d| d <= &BigInt::from(MAX_TORSION)));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = affine_action(&mut rng(3, 1), ActionShape::any());
        let b = affine_action(&mut rng(3, 1), ActionShape::any());
        assert_eq!(a, b);
    }

    #[test]
    fn algebras_have_bounded_dimension() {
        let mut r = rng(11, 0);
        for _ in 0..10 {
            let (alg, a) = algebra(&mut r);
            assert!(alg.dim() >= 1 && alg.dim() <= 20);
            assert!(alg.group().contains(&a));
        }
    }
}
