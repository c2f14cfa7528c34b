//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use dcoset_cli::gen::{self, ActionShape, GenRng};
use dcoset_core::abgroup::{FgAbelianGroup, GroupElement};
use dcoset_core::affine::{check_restrict_properties, AffineAction};
use dcoset_core::groupalg::{
    collision_poly, minimal_polynomial, CoeffRing, FiniteDimAlgebra, GroupAlgError, GroupRingElement,
};
use dcoset_core::linalg::{self, ScalarField};
use dcoset_core::numfield::{multiplicativity_check, nu, nu_scaled, resultant, AlgebraMapPsi, NumberField};
use dcoset_core::poly::Poly;
use dcoset_core::semidirect::{double_cosets_bruteforce, double_cosets_via_orbits, verify_bijection, SemidirectGroup};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

const SEED: u64 = 20_240_601;
const CAP: u64 = 1_000_000;

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "double cosets vs affine orbits", Some(Duration::from_secs(60)), criterion_1),
        (2, "affine action law", None, criterion_2),
        (3, "restriction to submodules", None, criterion_3),
        (4, "annihilating polynomials in Z_p[A]/J", Some(Duration::from_secs(30)), criterion_4),
        (5, "norm identities for nu_scaled", Some(Duration::from_secs(30)), criterion_5),
        (6, "multiplicativity of nu", None, criterion_6),
        (7, "derivation/hom roundtrip", None, criterion_7),
        (8, "selftest determinism", None, criterion_8),
    ];
    let mut all = true;
    for (n, name, limit, f) in criteria {
        let start = Instant::now();
        let mut o = f();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.passed = false;
                o.detail.push_str(&format!("; over the {}s limit", limit.as_secs()));
            }
        }
        all &= o.passed;
        println!(
            "criterion {n} ({name}): {} - {} [{:.2}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    if !all {
        std::process::exit(1);
    }
}

fn rng(stream: u64) -> GenRng {
    gen::rng(SEED, stream)
}

// Union-find over indices, for oracle partitions.
struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }

    fn classes(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// Counts double cosets `A g B` by closing under generators, with the
/// product `(v1, a1)(v2, a2) = (v1 + a1.v2, a1 a2)` written out here rather
/// than taken from the library.
fn oracle_double_coset_count(act: &AffineAction) -> usize {
    let (m, d) = (act.module(), act.derivation());
    let (n, a) = (act.group(), act.acting());
    let (on, oa) = (n.order_u64().unwrap(), a.order_u64().unwrap());
    let idx = |v: &GroupElement, x: &GroupElement| (n.index_of(v) * oa + a.index_of(x)) as usize;
    let mul = |(v1, a1): (&GroupElement, &GroupElement), (v2, a2): (&GroupElement, &GroupElement)| {
        (n.add(v1, &m.act(a1, v2).unwrap()), a.add(a1, a2))
    };
    let mut dsu = Dsu((0..(on * oa) as usize).collect());
    let gens = a.generators();
    let thetas: Vec<(GroupElement, GroupElement)> =
        gens.iter().map(|g| (n.neg(&d.delta_of(m, g).unwrap()), g.clone())).collect();
    for v in n.elements() {
        for x in a.elements() {
            let here = idx(&v, &x);
            for (g, (tv, ta)) in gens.iter().zip(&thetas) {
                let (lv, la) = mul((&n.zero(), g), (&v, &x));
                dsu.union(here, idx(&lv, &la));
                let (rv, ra) = mul((&v, &x), (tv, ta));
                dsu.union(here, idx(&rv, &ra));
            }
        }
    }
    dsu.classes()
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let total = 100;
    let mut bad = Vec::new();
    let mut nontrivial = 0;
    let mut largest = 0;
    for i in 0..total {
        let act = gen::affine_action(&mut r, ActionShape::finite(5_000));
        let size = act.group().order_u64().unwrap() * act.acting().order_u64().unwrap();
        largest = largest.max(size);
        if act.derivation().values().iter().any(|v| !v.is_zero()) {
            nontrivial += 1;
        }
        let g = SemidirectGroup::from_action(&act);
        let brute = double_cosets_bruteforce(&g, CAP).unwrap().count();
        let orbits = double_cosets_via_orbits(&g, CAP).unwrap().count;
        let report = verify_bijection(&g, CAP).unwrap();
        let oracle = oracle_double_coset_count(&act);
        if !(brute == orbits && orbits == oracle && report.passed) {
            bad.push(format!("#{i}: brute {brute}, orbits {orbits}, oracle {oracle}, verify {}", report.passed));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{total} instances (|G| <= {largest}, {nontrivial} with nonzero derivation), {} mismatches {:?}",
            bad.len(),
            bad.first()
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (instances, triples) = (50, 1000);
    let mut failures = 0;
    let mut infinite = 0;
    for _ in 0..instances {
        let act = gen::affine_action(&mut r, ActionShape::any());
        let (a, n) = (act.acting().clone(), act.group().clone());
        if !n.is_finite() {
            infinite += 1;
        }
        // a * v = a.v + delta(a), assembled from the module action and the derivation
        let star = |x: &GroupElement, v: &GroupElement| {
            n.add(&act.module().act(x, v).unwrap(), &act.derivation().delta_of(act.module(), x).unwrap())
        };
        for _ in 0..triples {
            let a1 = gen::element(&mut r, &a, 4);
            let a2 = gen::element(&mut r, &a, 4);
            let v = gen::element(&mut r, &n, 6);
            let lhs = star(&a1, &star(&a2, &v));
            let rhs = star(&a.add(&a1, &a2), &v);
            if lhs != rhs || act.apply(&a1, &v).unwrap() != star(&a1, &v) {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{instances} instances ({infinite} with infinite N) x {triples} triples, {failures} failures"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let pairs = 60;
    let mut failures = 0;
    let mut proper = 0;
    for _ in 0..pairs {
        let act = gen::affine_action(&mut r, ActionShape::finite_module(2_000));
        let sub = gen::submodule(&mut r, act.module());
        let s = sub.subgroup();
        if !s.is_trivial() && !s.is_whole() {
            proper += 1;
        }
        match check_restrict_properties(&act, &sub, CAP) {
            Ok(rep) if rep.passed() => {}
            _ => failures += 1,
        }
    }
    outcome(
        failures == 0 && proper > 0,
        format!("{pairs} pairs ({proper} proper nontrivial submodules), {failures} failures"),
    )
}

fn horner(alg: &FiniteDimAlgebra, f: &Poly, a: &GroupElement) -> Vec<BigRational> {
    let field = alg.field();
    let mut v = alg.zero();
    for c in f.coeffs().iter().rev() {
        v = linalg::vec_add(field, &alg.act(a, &v), &linalg::vec_scale(field, &alg.one(), c));
    }
    v
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let total = 30;
    let (mut certified, mut exhausted, mut failures) = (0, 0, Vec::new());
    let mut max_dim = 0;
    let mut primes_seen = BTreeSet::new();
    for i in 0..total {
        let (alg, a) = gen::algebra(&mut r);
        max_dim = max_dim.max(alg.dim());
        primes_seen.insert(alg.field().characteristic());
        let f = minimal_polynomial(&alg, &a).unwrap();
        let deg = f.degree().unwrap_or(0);
        if f.is_zero() || !linalg::is_zero_vec(&horner(&alg, &f, &a)) || deg > alg.dim() {
            failures.push(format!("#{i}: minimal polynomial {f}"));
            continue;
        }
        match collision_poly(&alg, &a, 25) {
            Ok(cert) => {
                let checks = cert.check(&alg);
                // the minimal polynomial divides every polynomial killing a
                let divisible = cert.f.div_rem(&f).1.is_zero();
                if checks.all() && linalg::is_zero_vec(&horner(&alg, &cert.f, &a)) && divisible {
                    certified += 1;
                } else {
                    failures.push(format!("#{i}: certificate {checks:?}, divisible {divisible}"));
                }
            }
            Err(GroupAlgError::BudgetExhausted { .. }) => exhausted += 1,
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{total} algebras over p in {primes_seen:?} (dim <= {max_dim}): {certified} certified, {exhausted} budget exhausted, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let total = 120;
    let mut failures = Vec::new();
    let q = ScalarField::Rational;
    let mut by_degree = BTreeMap::new();
    for _ in 0..total {
        let mu = loop {
            let mu = gen::monic_irreducible(&mut r, 1, 6);
            if mu != [-1, 1] {
                break mu;
            }
        };
        *by_degree.entry(mu.len() - 1).or_insert(0) += 1;
        let d = mu.len() - 1;
        let n: u64 = r.random_range(1..=1000);
        let big: Vec<BigInt> = mu.iter().map(|&c| BigInt::from(c)).collect();
        let nb = BigInt::from(n);
        let scaled = nu_scaled(&big, &nb);

        // route 1: nu(n (1 - a)) with psi(a) = 1 - X, so psi(n (1 - a)) = n X
        let k = NumberField::from_int_coeffs(&mu).unwrap();
        let group = FgAbelianGroup::free(1);
        let psi = AlgebraMapPsi::new(
            k,
            group.clone(),
            vec![NumberField::from_int_coeffs(&mu).unwrap().from_ints(&[1, -1])],
            vec![],
        )
        .unwrap();
        let x = GroupRingElement::from_terms(
            &group,
            CoeffRing::Int,
            vec![
                (group.zero(), BigRational::from_integer(nb.clone())),
                (group.generator(0), BigRational::from_integer(-nb.clone())),
            ],
        )
        .unwrap();
        let via_nu = nu(&psi, &x).unwrap();
        // route 2: Res(mu, nX - 1) directly
        let lin = Poly::new(q, vec![-BigRational::one(), BigRational::from_integer(nb.clone())]);
        let via_res = resultant(&Poly::from_ints(q, &mu), &lin);

        let sign = if d % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let congruent = (&scaled - &sign).mod_floor(&nb).is_zero();
        let coprime = scaled.gcd(&nb).is_one();
        let exact = BigRational::from_integer(scaled.clone());
        if via_nu != exact || via_res != exact || !congruent || !coprime {
            failures.push(format!("mu {mu:?} n {n}: {scaled} vs {via_nu} / {via_res}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{total} pairs (mu, n), degrees {by_degree:?}, {} failures {:?}", failures.len(), failures.first()),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let total = 60;
    let mut failures = 0;
    let mut nonunit = 0;
    for i in 0..total {
        let degree = 2 + (i % 2);
        let psi = gen::psi(&mut r, degree);
        let g = psi.group().clone();
        let a = gen::element(&mut r, &g, 2);
        let u = gen::augmentation_element(&mut r, &g, CoeffRing::Int, 3);
        let k = psi.field();
        if !k.norm(&psi.image_of(&a)).abs().is_one() {
            nonunit += 1;
        }
        match multiplicativity_check(&psi, &a, &u) {
            Ok(rep) if rep.passed && rep.lhs == rep.rhs => {}
            _ => failures += 1,
        }
    }
    outcome(
        failures == 0,
        format!(
            "{total} triples over quadratic and cubic fields ({nonunit} with N(psi(a)) != +-1), {failures} failures"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let total = 120;
    let mut failures = 0;
    let mut nonzero = 0;
    for _ in 0..total {
        let act = gen::affine_action(&mut r, ActionShape::any());
        let (m, d) = (act.module(), act.derivation());
        if d.values().iter().any(|v| !v.is_zero()) {
            nonzero += 1;
        }
        match d.as_hom(m).to_derivation() {
            Ok(back) if &back == d => {}
            _ => failures += 1,
        }
    }
    outcome(failures == 0, format!("{total} validated derivations ({nonzero} nonzero), {failures} failures"))
}

fn criterion_8() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_dcoset");
    let run = || Command::new(exe).args(["selftest", "--seed", "42"]).output().expect("binary runs");
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    let ok = a.status.code() == Some(0) && b.status.code() == Some(0);
    outcome(
        same && ok,
        format!(
            "two runs, {} bytes each, identical: {same}, exit codes {:?}/{:?}",
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ),
    )
}
