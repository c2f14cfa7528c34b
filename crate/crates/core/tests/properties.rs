use std::collections::BTreeSet;

use dcoset_core::abgroup::{integer_relation, smith_normal_form, FgAbelianGroup, GroupElement, IntegerMatrix};
use dcoset_core::affine::{enumerate_orbits, induced_action, scalar_orbit_count, AffineAction};
use dcoset_core::groupalg::{build_quotient_algebra, minimal_polynomial, CoeffRing, GroupRingElement};
use dcoset_core::linalg::ScalarField;
use dcoset_core::modact::{Derivation, ZAModule};
use dcoset_core::numfield::{coprimality_report, nu_scaled, NumberField};
use dcoset_core::poly::Poly;
use dcoset_core::semidirect::SemidirectGroup;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// `Z_m` with one free generator acting by `s` and `delta(a) = c`.
fn scalar_action(m: u64, s: i64, c: i64) -> AffineAction {
    let module = ZAModule::scalar(FgAbelianGroup::free(1), m, &[s]).unwrap();
    let d = Derivation::new(&module, vec![module.group().element_i64(&[c]).unwrap()]).unwrap();
    AffineAction::new(module, d).unwrap()
}

// (modulus, unit) pairs
fn unit_mod() -> impl Strategy<Value = (u64, i64)> {
    (2u64..60).prop_flat_map(|m| {
        let units: Vec<i64> = (1..m as i64).filter(|&s| gcd(s, m as i64) == 1).collect();
        (Just(m), proptest::sample::select(units))
    })
}

fn ring_element(terms: Vec<(i64, i64, i64)>) -> GroupRingElement {
    let g = FgAbelianGroup::free(2);
    let ts = terms
        .into_iter()
        .map(|(x, y, c)| (g.element_i64(&[x, y]).unwrap(), BigRational::from_integer(c.into())))
        .collect::<Vec<_>>();
    GroupRingElement::from_terms(&g, CoeffRing::Int, ts).unwrap()
}

fn terms() -> impl Strategy<Value = Vec<(i64, i64, i64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3, -5i64..=5), 0..5)
}

/// Orbits of `x -> s x + c` on `Z_m`, by following cycles.
fn naive_orbits(m: u64, s: i64, c: i64) -> BTreeSet<BTreeSet<u64>> {
    let step = |x: u64| ((s as i128 * x as i128 + c as i128).rem_euclid(m as i128)) as u64;
    let mut seen = vec![false; m as usize];
    let mut out = BTreeSet::new();
    for x in 0..m {
        if seen[x as usize] {
            continue;
        }
        let mut orbit = BTreeSet::new();
        let mut y = x;
        while orbit.insert(y) {
            seen[y as usize] = true;
            y = step(y);
        }
        out.insert(orbit);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_is_a_unimodular_diagonalisation(
        rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 3), 1..4)
    ) {
        let m = IntegerMatrix::from_rows(&rows);
        let sf = smith_normal_form(&m);
        prop_assert_eq!(&(&sf.u * &m) * &sf.v, sf.s.clone());
        prop_assert!(sf.u.determinant().abs().is_one());
        prop_assert!(sf.v.determinant().abs().is_one());
        let d = sf.diagonal();
        for w in d.windows(2) {
            prop_assert!(w[1].is_zero() || w[1].is_multiple_of(&w[0]));
        }
    }

    #[test]
    fn augmentation_is_a_ring_map(x in terms(), y in terms()) {
        let (x, y) = (ring_element(x), ring_element(y));
        prop_assert_eq!(x.add(&y).unwrap().augmentation(), x.augmentation() + y.augmentation());
        prop_assert_eq!(x.mul(&y).unwrap().augmentation(), x.augmentation() * y.augmentation());
    }

    #[test]
    fn affine_action_law((m, s) in unit_mod(), c in 0i64..60, e1 in -6i64..=6, e2 in -6i64..=6, v in 0i64..60) {
        let act = scalar_action(m, s, c);
        let (a, n) = (act.acting().clone(), act.group().clone());
        let (a1, a2) = (a.element_i64(&[e1]).unwrap(), a.element_i64(&[e2]).unwrap());
        let v = n.element_i64(&[v]).unwrap();
        let lhs = act.apply(&a1, &act.apply(&a2, &v).unwrap()).unwrap();
        prop_assert_eq!(lhs, act.apply(&a.add(&a1, &a2), &v).unwrap());
    }

    #[test]
    fn orbits_match_cycle_following((m, s) in unit_mod(), c in 0i64..60) {
        let act = scalar_action(m, s, c);
        let p = enumerate_orbits(&act).unwrap();
        prop_assert_eq!(p.as_set_family(), naive_orbits(m, s, c));
        prop_assert_eq!(p.sizes().iter().sum::<u64>(), m);
        let linear = enumerate_orbits(&AffineAction::linear(act.module().clone())).unwrap();
        prop_assert_eq!(scalar_orbit_count(act.module()).unwrap(), linear.len());
        prop_assert_eq!(linear.as_set_family(), naive_orbits(m, s, 0));
    }

    #[test]
    fn induced_orbits_are_no_more_numerous((m, s) in unit_mod(), c in 0i64..60, k in 1i64..6) {
        let act = scalar_action(m, s, c);
        let n = act.group().clone();
        let sub = act.module().submodule_generated(&[n.element_i64(&[k]).unwrap()]).unwrap();
        let ind = induced_action(&act, &sub).unwrap();
        let before = enumerate_orbits(&act).unwrap().len();
        let after = enumerate_orbits(&ind.action).unwrap().len();
        prop_assert!(after <= before);
    }

    #[test]
    fn theta_is_a_homomorphism_onto_a_complement((m, s) in unit_mod(), c in 0i64..60, e1 in -5i64..=5, e2 in -5i64..=5, v in 0i64..60) {
        let act = scalar_action(m, s, c);
        let g = SemidirectGroup::from_action(&act);
        let (a, n) = (act.acting().clone(), act.group().clone());
        let (a1, a2) = (a.element_i64(&[e1]).unwrap(), a.element_i64(&[e2]).unwrap());
        let prod = g.mul(&g.theta(&a1).unwrap(), &g.theta(&a2).unwrap()).unwrap();
        prop_assert_eq!(g.theta(&a.add(&a1, &a2)).unwrap(), prod);
        // theta(a) lies in N only for a = 1, where it is the identity
        prop_assert_eq!(g.theta(&a.zero()).unwrap(), g.identity());
        let x = g.element(n.element_i64(&[v]).unwrap(), a1.clone()).unwrap();
        let nf = g.coset_normal_form(&x).unwrap();
        prop_assert_eq!(g.mul(&g.from_normal(nf), &g.theta(&a1).unwrap()).unwrap(), x);
    }

    #[test]
    fn derivation_hom_roundtrip((m, s) in unit_mod(), c in 0i64..60) {
        let act = scalar_action(m, s, c);
        let (module, d) = (act.module(), act.derivation());
        prop_assert_eq!(&d.as_hom(module).to_derivation().unwrap(), d);
    }

    #[test]
    fn norm_is_multiplicative(dd in 2i64..30, x in prop::collection::vec(-6i64..=6, 2), y in prop::collection::vec(-6i64..=6, 2)) {
        let root = (dd as f64).sqrt() as i64;
        prop_assume!(root * root != dd && (root + 1) * (root + 1) != dd);
        let k = NumberField::from_int_coeffs(&[-dd, 0, 1]).unwrap();
        let (x, y) = (k.from_ints(&x), k.from_ints(&y));
        prop_assert_eq!(k.norm(&k.mul(&x, &y)), k.norm(&x) * k.norm(&y));
        // N(p + q sqrt D) = p^2 - D q^2
        let (p, q) = (x.poly().coeff(0), x.poly().coeff(1));
        prop_assert_eq!(k.norm(&x), &p * &p - BigRational::from_integer(dd.into()) * &q * &q);
    }

    #[test]
    fn nu_scaled_congruence_and_coprimality(mut mu in prop::collection::vec(-20i64..=20, 1..7), n in 1u64..1000) {
        mu.push(1);
        let big: Vec<BigInt> = mu.iter().map(|&c| BigInt::from(c)).collect();
        let nb = BigInt::from(n);
        let v = nu_scaled(&big, &nb);
        let d = mu.len() - 1;
        // direct evaluation of (-n)^d mu(1/n)
        let q = ScalarField::Rational;
        let at = Poly::from_ints(q, &mu).eval(&BigRational::new(BigInt::one(), nb.clone()));
        let direct = at * BigRational::from_integer(num_traits::pow(-nb.clone(), d));
        prop_assert_eq!(BigRational::from_integer(v.clone()), direct);
        let sign = if d % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        prop_assert!((&v - sign).mod_floor(&nb).is_zero());
        prop_assert!(v.gcd(&nb).is_one());
        prop_assert!(coprimality_report(&big, &nb).passed());
    }

    #[test]
    fn minimal_polynomial_of_the_generator_is_h(p in prop::sample::select(vec![2u64, 3, 5, 7]), mut h in prop::collection::vec(0i64..7, 1..9)) {
        h[0] = h[0].rem_euclid(p as i64 - 1) + 1;
        h.push(1);
        let f = ScalarField::Prime(p);
        let g = FgAbelianGroup::free(1);
        let ring = CoeffRing::ModP(p);
        let terms = h.iter().enumerate().map(|(i, &c)| (g.element_i64(&[i as i64]).unwrap(), f.normalize(BigRational::from_integer(c.into()))));
        let j = GroupRingElement::from_terms(&g, ring, terms.collect::<Vec<_>>()).unwrap();
        let alg = build_quotient_algebra(&g, f, &[j], 64).unwrap();
        let mp = minimal_polynomial(&alg, &g.generator(0)).unwrap();
        prop_assert_eq!(alg.dim(), h.len() - 1);
        prop_assert_eq!(mp, Poly::from_ints(f, &h));
    }

    #[test]
    fn integer_relations_are_relations(vs in prop::collection::vec(prop::collection::vec(-8i64..=8, 2), 3..5)) {
        let g = FgAbelianGroup::from_u64(1, &[6]).unwrap();
        let els: Vec<GroupElement> = vs.iter().map(|v| g.element_i64(v).unwrap()).collect();
        let t = integer_relation(&g, &els).expect("3+ vectors in rank 1 are dependent");
        prop_assert!(t.iter().any(|x| !x.is_zero()));
        let sum = els.iter().zip(&t).fold(g.zero(), |acc, (v, k)| g.add(&acc, &g.scale(v, k)));
        prop_assert!(sum.is_zero());
    }
}
