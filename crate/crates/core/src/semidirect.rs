//! Semidirect products `G = N x| A`, the complement `B = theta(A)` given by a
//! derivation, and double cosets `A g B`.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::abgroup::{FgAbelianGroup, GroupElement};
use crate::affine::{enumerate_orbits_capped, AffineAction, AffineError};
use crate::modact::{Derivation, DerivationViolation, ModActError, ZAModule};

pub const DEFAULT_BRUTEFORCE_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemidirectError {
    #[error("element does not belong to this semidirect product")]
    ParentMismatch,
    #[error("brute force needs a finite acting group, got {0}")]
    InfiniteActing(FgAbelianGroup),
    #[error("brute force needs a finite module, got {0}")]
    InfiniteModule(FgAbelianGroup),
    #[error("|G| = {size} exceeds the cap of {cap}")]
    CapExceeded { size: BigInt, cap: u64 },
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    ModAct(#[from] ModActError),
    #[error(transparent)]
    Derivation(#[from] DerivationViolation),
}

/// `(n, a)`, standing for the product `n a` in `G`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SdElement {
    pub n: GroupElement,
    pub a: GroupElement,
}

impl std::fmt::Display for SdElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.n, self.a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Twisted,
    // Direct product multiplication; only used to check that the verifier
    // notices a broken group law.
    Untwisted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemidirectGroup {
    module: ZAModule,
    derivation: Derivation,
    rule: Rule,
}

impl SemidirectGroup {
    pub fn new(module: ZAModule, derivation: Derivation) -> Result<Self, SemidirectError> {
        crate::modact::validate_derivation(&module, derivation.values())?;
        Ok(Self { module, derivation, rule: Rule::Twisted })
    }

    pub fn from_action(act: &AffineAction) -> Self {
        Self { module: act.module().clone(), derivation: act.derivation().clone(), rule: Rule::Twisted }
    }

    /// Same data with `(n1, a1)(n2, a2) = (n1 + n2, a1 a2)`.
    #[doc(hidden)]
    pub fn untwisted(mut self) -> Self {
        self.rule = Rule::Untwisted;
        self
    }

    pub fn module(&self) -> &ZAModule {
        &self.module
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn acting(&self) -> &FgAbelianGroup {
        self.module.acting()
    }

    pub fn normal(&self) -> &FgAbelianGroup {
        self.module.group()
    }

    pub fn affine_action(&self) -> AffineAction {
        AffineAction::new(self.module.clone(), self.derivation.clone()).expect("validated")
    }

    pub fn element(&self, n: GroupElement, a: GroupElement) -> Result<SdElement, SemidirectError> {
        let g = SdElement { n, a };
        self.check(&g)?;
        Ok(g)
    }

    fn check(&self, g: &SdElement) -> Result<(), SemidirectError> {
        if self.normal().contains(&g.n) && self.acting().contains(&g.a) {
            Ok(())
        } else {
            Err(SemidirectError::ParentMismatch)
        }
    }

    pub fn identity(&self) -> SdElement {
        SdElement { n: self.normal().zero(), a: self.acting().zero() }
    }

    pub fn from_normal(&self, n: GroupElement) -> SdElement {
        SdElement { n, a: self.acting().zero() }
    }

    pub fn from_acting(&self, a: GroupElement) -> SdElement {
        SdElement { n: self.normal().zero(), a }
    }

    fn act(&self, a: &GroupElement, v: &GroupElement) -> GroupElement {
        match self.rule {
            Rule::Twisted => self.module.act(a, v).expect("checked element"),
            Rule::Untwisted => v.clone(),
        }
    }

    /// `(n1, a1)(n2, a2) = (n1 + a1.n2, a1 a2)`
    pub fn mul(&self, g: &SdElement, h: &SdElement) -> Result<SdElement, SemidirectError> {
        self.check(g)?;
        self.check(h)?;
        Ok(SdElement { n: self.normal().add(&g.n, &self.act(&g.a, &h.n)), a: self.acting().add(&g.a, &h.a) })
    }

    /// `(n, a)^-1 = (-a^-1.n, a^-1)`
    pub fn inv(&self, g: &SdElement) -> Result<SdElement, SemidirectError> {
        self.check(g)?;
        let ai = self.acting().neg(&g.a);
        Ok(SdElement { n: self.normal().neg(&self.act(&ai, &g.n)), a: ai })
    }

    /// `theta(a) = (-delta(a), a)`, the element of `B` lying over `a`.
    pub fn theta(&self, a: &GroupElement) -> Result<SdElement, SemidirectError> {
        let d = self.derivation.delta_of(&self.module, a)?;
        Ok(SdElement { n: self.normal().neg(&d), a: a.clone() })
    }

    /// Element of `N` in `A g B`: for `g = (n, a)` it is `n + delta(a)`.
    pub fn coset_normal_form(&self, g: &SdElement) -> Result<GroupElement, SemidirectError> {
        self.check(g)?;
        let d = self.derivation.delta_of(&self.module, &g.a)?;
        Ok(self.normal().add(&g.n, &d))
    }

    fn finite_sizes(&self, cap: u64) -> Result<(u64, u64), SemidirectError> {
        let a = self.acting();
        let n = self.normal();
        let oa = a.order().ok_or_else(|| SemidirectError::InfiniteActing(a.clone()))?;
        let on = n.order().ok_or_else(|| SemidirectError::InfiniteModule(n.clone()))?;
        let size = &oa * &on;
        match size.to_u64() {
            Some(s) if s <= cap => Ok((on.to_u64().unwrap(), oa.to_u64().unwrap())),
            _ => Err(SemidirectError::CapExceeded { size, cap }),
        }
    }
}

/// Double cosets counted through the affine orbits on `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDoubleCosets {
    pub count: usize,
    pub representatives: Vec<GroupElement>,
    pub orbits: Vec<Vec<GroupElement>>,
}

pub fn double_cosets_via_orbits(g: &SemidirectGroup, cap: u64) -> Result<OrbitDoubleCosets, SemidirectError> {
    let p = enumerate_orbits_capped(&g.affine_action(), cap)?;
    Ok(OrbitDoubleCosets { count: p.len(), representatives: p.representatives(), orbits: p.orbits() })
}

/// The partition of a finite `G` into sets `A g B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceDoubleCosets {
    /// Each class sorted, classes sorted by their least element.
    pub classes: Vec<Vec<SdElement>>,
}

impl BruteForceDoubleCosets {
    pub fn count(&self) -> usize {
        self.classes.len()
    }
}

/// Closes each unvisited `g` under left multiplication by `A` and right
/// multiplication by `theta(A)`, working directly with the group law.
pub fn double_cosets_bruteforce(g: &SemidirectGroup, cap: u64) -> Result<BruteForceDoubleCosets, SemidirectError> {
    let (on, oa) = g.finite_sizes(cap)?;
    let (ng, ag) = (g.normal(), g.acting());
    let index = |x: &SdElement| ng.index_of(&x.n) * oa + ag.index_of(&x.a);
    let decode = |i: u64| SdElement { n: ng.element_at(i / oa), a: ag.element_at(i % oa) };
    let left: Vec<SdElement> = ag.generators().into_iter().map(|a| g.from_acting(a)).collect();
    let right: Vec<SdElement> = ag.generators().iter().map(|a| g.theta(a)).collect::<Result<_, _>>()?;
    let size = (on * oa) as usize;
    let mut seen = vec![false; size];
    let mut classes = Vec::new();
    for start in 0..size {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut class = vec![start as u64];
        let mut queue = VecDeque::from([start as u64]);
        while let Some(i) = queue.pop_front() {
            let x = decode(i);
            let nexts = left.iter().map(|l| g.mul(l, &x)).chain(right.iter().map(|r| g.mul(&x, r)));
            for y in nexts {
                let j = index(&y?);
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    class.push(j);
                    queue.push_back(j);
                }
            }
        }
        class.sort_unstable();
        classes.push(class.into_iter().map(decode).collect());
    }
    Ok(BruteForceDoubleCosets { classes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport {
    pub passed: bool,
    pub coset_count: usize,
    pub orbit_count: usize,
    /// `(double coset index, orbit index)` for every matched pair.
    pub matching: Vec<(usize, usize)>,
    /// Whether `n + delta(a)` lies in `A g B ∩ N` for every `g = (n, a)`.
    pub normal_form_holds: bool,
    pub failures: Vec<String>,
}

/// Matches each double coset with the orbit equal to its intersection with
/// `N`, elementwise, and checks the matching is a bijection.
pub fn verify_bijection(g: &SemidirectGroup, cap: u64) -> Result<BijectionReport, SemidirectError> {
    let brute = double_cosets_bruteforce(g, cap)?;
    let orbits = enumerate_orbits_capped(&g.affine_action(), cap)?;
    let ng = g.normal();
    let orbit_sets: Vec<BTreeSet<u64>> = orbits.orbit_indices().into_iter().map(|o| o.into_iter().collect()).collect();
    let mut failures = Vec::new();
    let mut matching = Vec::new();
    let mut hit = vec![0usize; orbit_sets.len()];
    let mut normal_form_holds = true;
    for (ci, class) in brute.classes.iter().enumerate() {
        let meet: BTreeSet<u64> = class.iter().filter(|x| x.a.is_zero()).map(|x| ng.index_of(&x.n)).collect();
        let Some(&first) = meet.iter().next() else {
            failures.push(format!("double coset {ci} does not meet N"));
            continue;
        };
        let oi = orbits.orbit_of_index(first);
        if meet != orbit_sets[oi] {
            failures.push(format!(
                "double coset {ci} meets N in {} elements, orbit {oi} has {}",
                meet.len(),
                orbit_sets[oi].len()
            ));
        }
        hit[oi] += 1;
        matching.push((ci, oi));
        for x in class {
            let nf = ng.index_of(&g.coset_normal_form(x)?);
            if !meet.contains(&nf) {
                normal_form_holds = false;
            }
        }
    }
    for (oi, h) in hit.iter().enumerate() {
        if *h != 1 {
            failures.push(format!("orbit {oi} matched by {h} double cosets"));
        }
    }
    if !normal_form_holds {
        failures.push("n + delta(a) is not always in the double coset of (n, a)".into());
    }
    Ok(BijectionReport {
        passed: failures.is_empty(),
        coset_count: brute.count(),
        orbit_count: orbits.len(),
        matching,
        normal_form_holds,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(g: &FgAbelianGroup, c: &[i64]) -> GroupElement {
        g.element_i64(c).unwrap()
    }

    fn z5_z(acting: FgAbelianGroup) -> SemidirectGroup {
        let m = ZAModule::scalar(acting, 5, &[2]).unwrap();
        let d = Derivation::new(&m, vec![el(m.group(), &[1])]).unwrap();
        SemidirectGroup::new(m, d).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let g = z5_z(FgAbelianGroup::free(1));
        let (n, a) = (g.normal().clone(), g.acting().clone());
        let x = g.element(el(&n, &[1]), el(&a, &[1])).unwrap();
        assert_eq!(g.mul(&g.identity(), &x).unwrap(), x);
        assert_eq!(g.mul(&x, &x).unwrap(), g.element(el(&n, &[3]), el(&a, &[2])).unwrap());
        assert_eq!(g.mul(&x, &g.inv(&x).unwrap()).unwrap(), g.identity());
        let bad = SdElement { n: el(&FgAbelianGroup::free(2), &[0, 0]), a: el(&a, &[0]) };
        assert_eq!(g.mul(&bad, &x).unwrap_err(), SemidirectError::ParentMismatch);
    }

    #[test]
    fn theta_examples() {
        let g = z5_z(FgAbelianGroup::free(1));
        let (n, a) = (g.normal().clone(), g.acting().clone());
        assert_eq!(g.theta(&el(&a, &[1])).unwrap(), g.element(el(&n, &[4]), el(&a, &[1])).unwrap());
        assert_eq!(g.theta(&el(&a, &[2])).unwrap(), g.element(el(&n, &[2]), el(&a, &[2])).unwrap());
        for i in -3..4 {
            for j in -3..4 {
                let (x, y) = (el(&a, &[i]), el(&a, &[j]));
                let lhs = g.theta(&a.add(&x, &y)).unwrap();
                let rhs = g.mul(&g.theta(&x).unwrap(), &g.theta(&y).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
                let q = g.mul(&g.from_acting(x.clone()), &g.inv(&g.theta(&x).unwrap()).unwrap()).unwrap();
                assert!(q.a.is_zero());
            }
        }
        let m = ZAModule::trivial(FgAbelianGroup::free(1), FgAbelianGroup::cyclic(3));
        let g0 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        assert_eq!(g0.theta(&el(&a, &[1])).unwrap(), g0.from_acting(el(&a, &[1])));
    }

    #[test]
    fn orbit_route_examples() {
        let g = z5_z(FgAbelianGroup::free(1));
        let r = double_cosets_via_orbits(&g, 1000).unwrap();
        assert_eq!(r.count, 2);
        let n = g.normal().clone();
        assert_eq!(r.representatives, vec![el(&n, &[0]), el(&n, &[4])]);
        let m = ZAModule::trivial(FgAbelianGroup::free(1), FgAbelianGroup::cyclic(6));
        let g0 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        assert_eq!(double_cosets_via_orbits(&g0, 1000).unwrap().count, 6);
        let m = ZAModule::scalar(FgAbelianGroup::free(1), 7, &[3]).unwrap();
        let g7 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        assert_eq!(double_cosets_via_orbits(&g7, 1000).unwrap().count, 2);
    }

    #[test]
    fn bruteforce_examples() {
        let g = z5_z(FgAbelianGroup::cyclic(4));
        let b = double_cosets_bruteforce(&g, 1000).unwrap();
        assert_eq!(b.count(), 2);
        assert_eq!(b.classes.iter().map(Vec::len).sum::<usize>(), 20);

        let m = ZAModule::trivial(FgAbelianGroup::trivial(), FgAbelianGroup::cyclic(6));
        let g0 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        assert_eq!(double_cosets_bruteforce(&g0, 1000).unwrap().count(), 6);

        let m = ZAModule::trivial(FgAbelianGroup::cyclic(6), FgAbelianGroup::trivial());
        let g1 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        assert_eq!(double_cosets_bruteforce(&g1, 1000).unwrap().count(), 1);

        assert!(matches!(
            double_cosets_bruteforce(&z5_z(FgAbelianGroup::free(1)), 1000),
            Err(SemidirectError::InfiniteActing(_))
        ));
        assert!(matches!(double_cosets_bruteforce(&g, 10), Err(SemidirectError::CapExceeded { .. })));
    }

    #[test]
    fn bijection_examples() {
        let g = z5_z(FgAbelianGroup::cyclic(4));
        let r = verify_bijection(&g, 1000).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!((r.coset_count, r.orbit_count), (2, 2));

        let m = ZAModule::scalar(FgAbelianGroup::cyclic(6), 7, &[3]).unwrap();
        let g7 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        assert!(verify_bijection(&g7, 1000).unwrap().passed);

        let m = ZAModule::trivial(FgAbelianGroup::cyclic(3), FgAbelianGroup::trivial());
        let g0 = SemidirectGroup::new(m.clone(), Derivation::zero(&m)).unwrap();
        let r = verify_bijection(&g0, 1000).unwrap();
        assert!(r.passed);
        assert_eq!(r.coset_count, 1);
    }

    #[test]
    fn untwisted_law_is_caught() {
        let g = z5_z(FgAbelianGroup::cyclic(4)).untwisted();
        assert!(!verify_bijection(&g, 1000).unwrap().passed);
    }
}
