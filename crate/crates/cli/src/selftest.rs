//! Randomized invariant suites. Each suite draws from its own ChaCha8
//! stream derived from the seed, so suites can run on separate threads and
//! the assembled report does not depend on scheduling.

use dcoset_core::abgroup::{FgAbelianGroup, GroupElement};
use dcoset_core::affine::{check_restrict_properties, enumerate_orbits_capped, AffineAction};
use dcoset_core::groupalg::{
    canonical_affine_action, collision_poly, evaluate_in_algebra, minimal_polynomial, CoeffRing, FiniteDimAlgebra,
    GroupAlgError, GroupRingElement,
};
use dcoset_core::linalg::{self, ScalarField};
use dcoset_core::numfield::{coprimality_report, multiplicativity_check, nu, nu_scaled, AlgebraMapPsi, NumberField};
use dcoset_core::semidirect::{verify_bijection, SemidirectGroup};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::gen::{self, ActionShape, GenRng};
use crate::instance::{self, IdealSpec, InstanceFile, RingTag};

pub const DEFAULT_BUDGET: usize = 20;

// Caps used inside the suites; generated instances stay well below them.
const ELEMENT_CAP: u64 = 1_000_000;
const PRIME_BUDGET: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Multiply in `N x| A` as if it were the direct product.
    Untwisted,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub seed: u64,
    pub budget: usize,
    pub mutation: Option<Mutation>,
}

enum Outcome {
    Pass,
    Inconclusive,
    Fail { message: String, witness: Value },
}

fn fail(message: impl Into<String>, witness: Value) -> Outcome {
    Outcome::Fail { message: message.into(), witness }
}

type Suite = fn(&mut GenRng, &Options) -> Outcome;

const SUITES: &[(&str, Suite)] = &[
    ("action_law", action_law),
    ("affine_poly", affine_poly),
    ("augmentation", augmentation),
    ("derivation_hom", derivation_hom),
    ("multiplicativity", multiplicativity),
    ("norm_identities", norm_identities),
    ("orbit_partition", orbit_partition),
    ("restrict", restrict),
    ("twin_complement", twin_complement),
    ("verify_bijection", bijection),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs every suite for `budget` cases. Returns the results object and
/// whether everything passed.
pub fn run(opts: &Options) -> (Value, bool) {
    let outcomes: Vec<Value> = if opts.budget == 0 {
        Vec::new()
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = SUITES
                .iter()
                .enumerate()
                .map(|(i, (_, suite))| s.spawn(move || run_suite(*suite, i as u64, opts)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("suite thread")).collect()
        })
    };
    let mut suites = Map::new();
    let mut all = true;
    for ((name, _), v) in SUITES.iter().zip(outcomes) {
        all &= v["failed"] == 0;
        suites.insert((*name).to_string(), v);
    }
    let mutation = opts.mutation.map(|Mutation::Untwisted| "untwisted");
    let results = json!({
        "all_passed": all,
        "budget": opts.budget,
        "mutation": mutation,
        "suites": suites,
    });
    (results, all)
}

fn run_suite(suite: Suite, stream: u64, opts: &Options) -> Value {
    let mut rng = gen::rng(opts.seed, stream);
    let (mut passed, mut failed, mut inconclusive) = (0usize, 0usize, 0usize);
    let mut first = Value::Null;
    for case in 0..opts.budget {
        match suite(&mut rng, opts) {
            Outcome::Pass => passed += 1,
            Outcome::Inconclusive => inconclusive += 1,
            Outcome::Fail { message, witness } => {
                failed += 1;
                if first.is_null() {
                    first = json!({"case": case, "message": message, "witness": witness});
                }
            }
        }
    }
    json!({
        "cases": opts.budget,
        "passed": passed,
        "failed": failed,
        "inconclusive": inconclusive,
        "first_failure": first,
    })
}

fn instance_json(act: &AffineAction) -> Value {
    serde_json::to_value(instance::instance_from_action(act)).expect("serialisable")
}

fn el(x: &GroupElement) -> Value {
    Value::Array(x.coords().iter().map(|c| Value::from(c.to_string())).collect())
}

fn action_law(rng: &mut GenRng, _: &Options) -> Outcome {
    let act = gen::affine_action(rng, ActionShape::any());
    let (a, n) = (act.acting().clone(), act.group().clone());
    for _ in 0..20 {
        let a1 = gen::element(rng, &a, 3);
        let a2 = gen::element(rng, &a, 3);
        let v = gen::element(rng, &n, 5);
        let inner = act.apply(&a2, &v).and_then(|w| act.apply(&a1, &w));
        let outer = act.apply(&a.add(&a1, &a2), &v);
        if inner.is_err() || inner != outer {
            return fail(
                "a1 * (a2 * v) != (a1 a2) * v",
                json!({"instance": instance_json(&act), "a1": el(&a1), "a2": el(&a2), "v": el(&v)}),
            );
        }
    }
    Outcome::Pass
}

/// Orbits via the library against a union-find over generator moves.
fn orbit_partition(rng: &mut GenRng, _: &Options) -> Outcome {
    let act = gen::affine_action(rng, ActionShape::finite_module(2_000));
    for act in [act.clone(), AffineAction::linear(act.module().clone())] {
        let part = match enumerate_orbits_capped(&act, ELEMENT_CAP) {
            Ok(p) => p,
            Err(e) => return fail(e.to_string(), json!({"instance": instance_json(&act)})),
        };
        let n = act.group();
        let size = n.order_u64().unwrap() as usize;
        let mut uf = UnionFind::new(size);
        for g in act.acting().generators() {
            for (i, x) in n.elements().enumerate() {
                let y = act.apply(&g, &x).unwrap();
                uf.union(i, n.index_of(&y) as usize);
            }
        }
        let expected = uf.family();
        let reps_minimal =
            part.orbit_indices().iter().zip(part.representative_indices()).all(|(o, r)| o.iter().min() == Some(r));
        if part.as_set_family() != expected || !reps_minimal || part.sizes().iter().sum::<u64>() as usize != size {
            return fail("orbit partition disagrees with union-find", json!({"instance": instance_json(&act)}));
        }
    }
    Outcome::Pass
}

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    pub fn family(&mut self) -> std::collections::BTreeSet<std::collections::BTreeSet<u64>> {
        let mut classes: std::collections::BTreeMap<usize, std::collections::BTreeSet<u64>> = Default::default();
        for i in 0..self.0.len() {
            let r = self.find(i);
            classes.entry(r).or_default().insert(i as u64);
        }
        classes.into_values().collect()
    }
}

fn bijection(rng: &mut GenRng, opts: &Options) -> Outcome {
    let act = gen::affine_action(rng, ActionShape::finite(5_000));
    let mut g = SemidirectGroup::from_action(&act);
    if opts.mutation == Some(Mutation::Untwisted) {
        g = g.untwisted();
    }
    match verify_bijection(&g, ELEMENT_CAP) {
        Ok(r) if r.passed && r.coset_count == r.orbit_count => Outcome::Pass,
        Ok(r) => fail(
            format!(
                "{} double cosets, {} orbits; {}",
                r.coset_count,
                r.orbit_count,
                r.failures.first().cloned().unwrap_or_default()
            ),
            json!({"instance": instance_json(&act)}),
        ),
        Err(e) => fail(e.to_string(), json!({"instance": instance_json(&act)})),
    }
}

fn twin_complement(rng: &mut GenRng, _: &Options) -> Outcome {
    let act = gen::affine_action(rng, ActionShape::any());
    let g = SemidirectGroup::from_action(&act);
    let (a, n) = (act.acting().clone(), act.group().clone());
    let witness = || json!({"instance": instance_json(&act)});
    if g.theta(&a.zero()).ok() != Some(g.identity()) {
        return fail("theta(1) is not the identity", witness());
    }
    for _ in 0..10 {
        let a1 = gen::element(rng, &a, 3);
        let a2 = gen::element(rng, &a, 3);
        let lhs = g.theta(&a.add(&a1, &a2)).unwrap();
        let rhs = g.mul(&g.theta(&a1).unwrap(), &g.theta(&a2).unwrap()).unwrap();
        if lhs != rhs {
            return fail(
                "theta is not a homomorphism",
                json!({"instance": instance_json(&act), "a1": el(&a1), "a2": el(&a2)}),
            );
        }
        // every (v, a) factors as (v + delta(a)) theta(a), so G = N B
        let v = gen::element(rng, &n, 5);
        let x = g.element(v.clone(), a1.clone()).unwrap();
        let shifted = n.add(&v, &act.derivation().delta_of(act.module(), &a1).unwrap());
        let prod = g.mul(&g.from_normal(shifted.clone()), &g.theta(&a1).unwrap()).unwrap();
        if prod != x || g.coset_normal_form(&x).ok() != Some(shifted) {
            return fail(
                "N B factorisation fails",
                json!({"instance": instance_json(&act), "v": el(&v), "a": el(&a1)}),
            );
        }
        let y = g.element(gen::element(rng, &n, 5), a2.clone()).unwrap();
        let z = g.element(gen::element(rng, &n, 5), gen::element(rng, &a, 3)).unwrap();
        let l = g.mul(&g.mul(&x, &y).unwrap(), &z).unwrap();
        let r = g.mul(&x, &g.mul(&y, &z).unwrap()).unwrap();
        if l != r || g.mul(&x, &g.inv(&x).unwrap()).unwrap() != g.identity() {
            return fail("group law fails", witness());
        }
    }
    Outcome::Pass
}

fn derivation_hom(rng: &mut GenRng, _: &Options) -> Outcome {
    let act = gen::affine_action(rng, ActionShape::any());
    let (m, d) = (act.module(), act.derivation());
    let a = act.acting().clone();
    let phi = d.as_hom(m);
    match phi.to_derivation() {
        Ok(back) if &back == d => {}
        _ => return fail("delta -> phi -> delta is not the identity", json!({"instance": instance_json(&act)})),
    }
    for _ in 0..5 {
        let u = gen::augmentation_element(rng, &a, CoeffRing::Int, 4);
        let g = gen::element(rng, &a, 2);
        let gu = GroupRingElement::monomial(&a, CoeffRing::Int, g.clone(), BigRational::one()).mul(&u).unwrap();
        let lhs = phi.apply(&gu).unwrap();
        let rhs = m.act(&g, &phi.apply(&u).unwrap()).unwrap();
        if lhs != rhs {
            return fail(
                "phi is not A-linear",
                json!({"instance": instance_json(&act), "u": u.to_string(), "a": el(&g)}),
            );
        }
    }
    Outcome::Pass
}

fn restrict(rng: &mut GenRng, _: &Options) -> Outcome {
    let act = gen::affine_action(rng, ActionShape::finite_module(2_000));
    let sub = gen::submodule(rng, act.module());
    let witness = || {
        let mut file = instance::instance_from_action(&act);
        file.submodule = Some(instance::submodule_spec(&sub));
        json!({"instance": file})
    };
    match check_restrict_properties(&act, &sub, ELEMENT_CAP) {
        Ok(r) if r.passed() && r.images.found_orbits <= enumerate_orbits_capped(&act, ELEMENT_CAP).unwrap().len() => {
            Outcome::Pass
        }
        Ok(r) => fail(
            format!("restriction: intersections {}, images {}", r.intersections.passed, r.images.passed),
            witness(),
        ),
        Err(e) => fail(e.to_string(), witness()),
    }
}

pub fn algebra_instance(alg: &FiniteDimAlgebra, a: &GroupElement) -> InstanceFile {
    let g = alg.group();
    let trivial = dcoset_core::modact::ZAModule::trivial(g.clone(), FgAbelianGroup::trivial());
    let mut file = instance::instance_from_action(&AffineAction::linear(trivial));
    let (ring, p) = match alg.field() {
        ScalarField::Prime(p) => (RingTag::Zp, Some(p)),
        ScalarField::Rational => (RingTag::Q, None),
    };
    file.ideal =
        Some(IdealSpec { ring, p, generators: alg.ideal_generators().iter().map(instance::term_list).collect() });
    file.element = Some(a.coords().iter().map(instance::Int::from).collect());
    file
}

/// Whether `1, a, ..., a^(k-1)` are linearly independent in the algebra.
pub fn powers_independent(alg: &FiniteDimAlgebra, a: &GroupElement, k: usize) -> bool {
    let mut v = alg.one();
    let mut vs = Vec::new();
    for _ in 0..k {
        vs.push(v.clone());
        v = alg.act(a, &v);
    }
    linalg::rank(alg.field(), &vs) == k
}

fn affine_poly(rng: &mut GenRng, _: &Options) -> Outcome {
    let (alg, a) = gen::algebra(rng);
    let witness = || json!({"instance": algebra_instance(&alg, &a)});
    let f = match minimal_polynomial(&alg, &a) {
        Ok(f) => f,
        Err(e) => return fail(e.to_string(), witness()),
    };
    let deg = f.degree().unwrap_or(0);
    let vanishes = evaluate_in_algebra(&f, &a, &alg).map(|v| linalg::is_zero_vec(&v));
    if f.is_zero() || vanishes != Ok(true) || deg > alg.dim() || !powers_independent(&alg, &a, deg) {
        return fail(format!("minimal polynomial {f} is wrong"), witness());
    }
    if canonical_affine_action(&alg).is_err() {
        return fail("canonical action unavailable over Z_p", witness());
    }
    match collision_poly(&alg, &a, PRIME_BUDGET) {
        Ok(cert) => {
            let checks = cert.check(&alg);
            let f_zero = evaluate_in_algebra(&cert.f, &a, &alg).map(|v| linalg::is_zero_vec(&v));
            if checks.all() && f_zero == Ok(true) {
                Outcome::Pass
            } else {
                fail(format!("invalid certificate: {checks:?}"), witness())
            }
        }
        Err(GroupAlgError::BudgetExhausted { .. }) => Outcome::Inconclusive,
        Err(e) => fail(e.to_string(), witness()),
    }
}

fn augmentation(rng: &mut GenRng, _: &Options) -> Outcome {
    let g = if rng.random_bool(0.5) { gen::finite_group(rng, 100) } else { gen::infinite_group(rng) };
    let ring = match rng.random_range(0..3) {
        0 => CoeffRing::Int,
        1 => CoeffRing::ModP([2, 3, 5, 7][rng.random_range(0..4)]),
        _ => CoeffRing::Rat,
    };
    let x = gen::group_ring_element(rng, &g, ring, 4);
    let y = gen::group_ring_element(rng, &g, ring, 4);
    let reduce = |c: BigRational| match ring {
        CoeffRing::ModP(p) => ScalarField::Prime(p).normalize(c),
        _ => c,
    };
    let (ex, ey) = (x.augmentation(), y.augmentation());
    let sum_ok = x.add(&y).unwrap().augmentation() == reduce(&ex + &ey);
    let prod_ok = x.mul(&y).unwrap().augmentation() == reduce(&ex * &ey);
    if sum_ok && prod_ok {
        Outcome::Pass
    } else {
        fail(
            "augmentation is not a ring map",
            json!({"group": g.to_string(), "ring": ring.to_string(), "x": x.to_string(), "y": y.to_string()}),
        )
    }
}

/// `nu(n (1 - a))` for `psi(a) = 1 - X`, so that `psi(1 - a) = X`.
pub fn nu_via_resultant(mu: &[i64], n: u64) -> Option<BigRational> {
    let k = NumberField::from_int_coeffs(mu).ok()?;
    let a = FgAbelianGroup::free(1);
    let image = k.from_ints(&[1, -1]);
    let psi = AlgebraMapPsi::new(k, a.clone(), vec![image], Vec::new()).ok()?;
    let x = GroupRingElement::from_terms(
        &a,
        CoeffRing::Int,
        vec![
            (a.zero(), BigRational::from_integer(n.into())),
            (a.generator(0), BigRational::from_integer(-BigInt::from(n))),
        ],
    )
    .ok()?;
    nu(&psi, &x).ok()
}

fn norm_identities(rng: &mut GenRng, _: &Options) -> Outcome {
    let mu = loop {
        let mu = gen::monic_irreducible(rng, 1, 6);
        // psi(a) = 1 - X must be invertible
        if mu != [-1, 1] {
            break mu;
        }
    };
    let n: u64 = rng.random_range(1..=1000);
    let big: Vec<BigInt> = mu.iter().map(|&c| BigInt::from(c)).collect();
    let scaled = nu_scaled(&big, &BigInt::from(n));
    let witness = json!({"mu": mu, "n": n});
    match nu_via_resultant(&mu, n) {
        Some(v) if v == BigRational::from_integer(scaled.clone()) => {}
        _ => return fail("nu_scaled disagrees with the resultant norm", witness),
    }
    let r = coprimality_report(&big, &BigInt::from(n));
    if !r.residue_ok() || !r.coprime() {
        return fail(format!("nu = {} fails the congruence or coprimality with n", r.value), witness);
    }
    Outcome::Pass
}

fn multiplicativity(rng: &mut GenRng, _: &Options) -> Outcome {
    let degree = rng.random_range(2..=3);
    let psi = gen::psi(rng, degree);
    let g = psi.group().clone();
    let a = gen::element(rng, &g, 2);
    let u = gen::augmentation_element(rng, &g, CoeffRing::Int, 3);
    match multiplicativity_check(&psi, &a, &u) {
        Ok(r) if r.passed => Outcome::Pass,
        Ok(r) => fail(
            format!("nu(a u) = {} but N(psi(a)) nu(u) = {}", r.lhs, r.rhs),
            json!({"mu": psi.field().mu().coeff_strings(), "a": el(&a), "u": u.to_string()}),
        ),
        Err(e) => fail(e.to_string(), json!({"mu": psi.field().mu().coeff_strings()})),
    }
}
