//! `Z[A]`-modules, derivations `A -> N` and the correspondence between
//! derivations and homomorphisms out of the augmentation ideal.
//!
//! A module is an [`FgAbelianGroup`] `N` with one automorphism matrix per
//! generator of the acting group `A`. Derivations are stored only on the
//! generators of `A`; values on other elements are computed through
//! [`AffineMap`] composition.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::abgroup::{
    AbGroupError, EndoViolation, FgAbelianGroup, GroupElement, IntegerMatrix, QuotientPresentation, Subgroup,
    SubgroupPresentation,
};
use crate::groupalg::{CoeffRing, GroupRingElement};

/// The first invariant a candidate module fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModuleViolation {
    #[error("expected one action matrix per generator of A ({expected}), found {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error("action of generator {generator}: {source}")]
    Endomorphism { generator: usize, source: EndoViolation },
    #[error("action of generator {generator} is not invertible on N")]
    NotInvertible { generator: usize },
    #[error("actions of generators {first} and {second} do not commute")]
    NotCommuting { first: usize, second: usize },
    #[error("generator {generator} has order {order} in A but its action raised to that power is not the identity")]
    TorsionOrder { generator: usize, order: BigInt },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationViolation {
    #[error("expected one value per generator of A ({expected}), found {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error("value for generator {generator}: {source}")]
    Value { generator: usize, source: AbGroupError },
    #[error("commutation consistency fails for generators {first} and {second}: {lhs} != {rhs}")]
    Commutation { first: usize, second: usize, lhs: GroupElement, rhs: GroupElement },
    #[error("torsion consistency fails for generator {generator} of order {order}: norm element gives {value}")]
    TorsionNorm { generator: usize, order: BigInt, value: GroupElement },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModActError {
    #[error(transparent)]
    Shape(#[from] AbGroupError),
    #[error(transparent)]
    Module(#[from] ModuleViolation),
    #[error(transparent)]
    Derivation(#[from] DerivationViolation),
    #[error("group ring element has augmentation {0}, expected 0")]
    NotInAugmentationIdeal(String),
    #[error("expected integral group ring coefficients")]
    NonIntegral,
    #[error("subgroup is not closed under the action of generator {generator}")]
    NotActionClosed { generator: usize },
    #[error("acting groups differ")]
    ActingGroupMismatch,
}

/// A `Z[A]`-module: the group `N` with commuting automorphisms, one per
/// generator of `A`. Always validated on construction.
#[derive(Clone, PartialEq, Eq)]
pub struct ZAModule {
    acting: FgAbelianGroup,
    group: FgAbelianGroup,
    action: Vec<IntegerMatrix>,
    inverses: Vec<IntegerMatrix>,
}

impl fmt::Debug for ZAModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZAModule")
            .field("acting", &self.acting)
            .field("group", &self.group)
            .field("action", &self.action)
            .finish()
    }
}

/// Checks every module invariant, reporting the first failure.
pub fn validate_module(
    acting: &FgAbelianGroup,
    group: &FgAbelianGroup,
    action: &[IntegerMatrix],
) -> Result<Vec<IntegerMatrix>, ModuleViolation> {
    if action.len() != acting.ngens() {
        return Err(ModuleViolation::GeneratorCount { expected: acting.ngens(), found: action.len() });
    }
    let mut inverses = Vec::with_capacity(action.len());
    for (i, m) in action.iter().enumerate() {
        group.check_endomorphism(m).map_err(|source| ModuleViolation::Endomorphism { generator: i, source })?;
        let inv = group.automorphism_inverse(m).ok_or(ModuleViolation::NotInvertible { generator: i })?;
        inverses.push(inv);
    }
    let normal: Vec<IntegerMatrix> = action.iter().map(|m| group.normalize_endomorphism(m)).collect();
    for i in 0..normal.len() {
        for j in i + 1..normal.len() {
            if group.compose(&normal[i], &normal[j]) != group.compose(&normal[j], &normal[i]) {
                return Err(ModuleViolation::NotCommuting { first: i, second: j });
            }
        }
    }
    for (i, m) in normal.iter().enumerate() {
        if let Some(order) = acting.generator_order(i) {
            let p = group.endomorphism_pow(m, &inverses[i], order);
            if p != IntegerMatrix::identity(group.ngens()) {
                return Err(ModuleViolation::TorsionOrder { generator: i, order: order.clone() });
            }
        }
    }
    Ok(inverses)
}

impl ZAModule {
    pub fn new(
        acting: FgAbelianGroup,
        group: FgAbelianGroup,
        action: Vec<IntegerMatrix>,
    ) -> Result<Self, ModuleViolation> {
        let inverses = validate_module(&acting, &group, &action)?;
        let action = action.iter().map(|m| group.normalize_endomorphism(m)).collect();
        Ok(Self { acting, group, action, inverses })
    }

    /// Every generator acts as the identity.
    pub fn trivial(acting: FgAbelianGroup, group: FgAbelianGroup) -> Self {
        let id = IntegerMatrix::identity(group.ngens());
        let action = vec![id; acting.ngens()];
        Self::new(acting, group, action).expect("trivial action is valid")
    }

    /// Cyclic module `Z_modulus` on which every generator acts by the given scalar.
    pub fn scalar(acting: FgAbelianGroup, modulus: u64, scalars: &[i64]) -> Result<Self, ModuleViolation> {
        let group = FgAbelianGroup::cyclic(modulus);
        let action = scalars
            .iter()
            .map(
                |&s| {
                    if group.ngens() == 0 {
                        IntegerMatrix::zeros(0, 0)
                    } else {
                        IntegerMatrix::from_rows(&[vec![s]])
                    }
                },
            )
            .collect();
        Self::new(acting, group, action)
    }

    pub fn acting(&self) -> &FgAbelianGroup {
        &self.acting
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn action(&self, i: usize) -> &IntegerMatrix {
        &self.action[i]
    }

    pub fn actions(&self) -> &[IntegerMatrix] {
        &self.action
    }

    pub fn inverse_action(&self, i: usize) -> &IntegerMatrix {
        &self.inverses[i]
    }

    /// Matrix by which `a` acts on `N`.
    pub fn endomorphism(&self, a: &GroupElement) -> IntegerMatrix {
        let mut acc = IntegerMatrix::identity(self.group.ngens());
        for (i, k) in a.coords().iter().enumerate() {
            if k.is_zero() {
                continue;
            }
            let p = self.group.endomorphism_pow(&self.action[i], &self.inverses[i], k);
            acc = self.group.compose(&acc, &p);
        }
        acc
    }

    /// The module action `a . v`.
    pub fn act(&self, a: &GroupElement, v: &GroupElement) -> Result<GroupElement, ModActError> {
        self.acting.check(a)?;
        self.group.check(v)?;
        Ok(self.group.apply(&self.endomorphism(a), v))
    }

    /// Checks that `sub` is closed under the action and wraps it.
    pub fn submodule(&self, sub: Subgroup) -> Result<Submodule, ModActError> {
        assert_eq!(sub.ambient(), &self.group, "subgroup of a different group");
        for (i, m) in self.action.iter().enumerate() {
            for g in sub.generators() {
                if !sub.contains(&self.group.apply(m, &g)) {
                    return Err(ModActError::NotActionClosed { generator: i });
                }
            }
        }
        Ok(Submodule(sub))
    }

    /// Smallest action-closed subgroup containing `seeds`: the lattice is
    /// enlarged by the images of its basis under every generator and inverse
    /// until the Hermite basis stops changing.
    pub fn submodule_generated(&self, seeds: &[GroupElement]) -> Result<Submodule, ModActError> {
        for s in seeds {
            self.group.check(s)?;
        }
        let mut current = Subgroup::generated(&self.group, seeds);
        loop {
            let gens = current.generators();
            let mut next_gens = gens.clone();
            for g in &gens {
                for i in 0..self.action.len() {
                    next_gens.push(self.group.apply(&self.action[i], g));
                    next_gens.push(self.group.apply(&self.inverses[i], g));
                }
            }
            let next = Subgroup::generated(&self.group, &next_gens);
            if next == current {
                return Ok(Submodule(current));
            }
            current = next;
        }
    }

    /// The Z-torsion subgroup `N_0`, always a submodule.
    pub fn torsion_submodule(&self) -> Submodule {
        let gens: Vec<GroupElement> =
            (self.group.free_rank()..self.group.ngens()).map(|i| self.group.generator(i)).collect();
        self.submodule(Subgroup::generated(&self.group, &gens)).expect("torsion subgroup is characteristic")
    }

    /// `IN`, spanned by `(M_i - 1) e_j` over generators `i` of `A` and `j` of `N`.
    pub fn augmentation_submodule(&self) -> Submodule {
        let n = self.group.ngens();
        let mut gens = Vec::new();
        for m in &self.action {
            for j in 0..n {
                let col: Vec<BigInt> = (0..n)
                    .map(|i| {
                        let x = m.get(i, j).clone();
                        if i == j {
                            x - 1
                        } else {
                            x
                        }
                    })
                    .collect();
                gens.push(self.group.normalize(&col));
            }
        }
        self.submodule(Subgroup::generated(&self.group, &gens)).expect("IN is a submodule")
    }

    /// `N / IN` with its (trivial) induced action.
    pub fn coinvariants(&self) -> QuotientModule {
        self.quotient(&self.augmentation_submodule())
    }

    /// `N / M_0` with the induced action.
    pub fn quotient(&self, sub: &Submodule) -> QuotientModule {
        let pres = sub.0.quotient();
        let action =
            self.action.iter().map(|m| pres.group.normalize_endomorphism(&(&(&pres.proj * m) * &pres.lift))).collect();
        let module = ZAModule::new(self.acting.clone(), pres.group.clone(), action)
            .expect("induced action on a quotient by a submodule is valid");
        QuotientModule { module, presentation: pres }
    }

    /// `M_0` as a module in its own right, with its embedding into `N`.
    pub fn restrict_to(&self, sub: &Submodule) -> SubmoduleView {
        let pres = sub.0.presentation();
        let action = self.action.iter().map(|m| restrict_endomorphism(&self.group, &pres, m)).collect();
        let module = ZAModule::new(self.acting.clone(), pres.group().clone(), action)
            .expect("restricted action on a submodule is valid");
        SubmoduleView { module, presentation: pres }
    }

    /// The affine map `v -> a.v + delta(a)` for the given derivation.
    pub fn affine_map(&self, derivation: &Derivation, a: &GroupElement) -> AffineMap {
        let mut acc = AffineMap::identity(&self.group);
        for (i, k) in a.coords().iter().enumerate() {
            if k.is_zero() {
                continue;
            }
            let base = if k.is_negative() {
                AffineMap {
                    linear: self.inverses[i].clone(),
                    shift: self.group.neg(&self.group.apply(&self.inverses[i], &derivation.values[i])),
                }
            } else {
                AffineMap { linear: self.action[i].clone(), shift: derivation.values[i].clone() }
            };
            acc = acc.compose(&self.group, &base.pow(&self.group, &k.abs()));
        }
        acc
    }
}

/// Matrix on the subgroup's own coordinates of an endomorphism preserving it.
pub(crate) fn restrict_endomorphism(
    group: &FgAbelianGroup,
    pres: &SubgroupPresentation,
    m: &IntegerMatrix,
) -> IntegerMatrix {
    let sub = pres.group();
    let cols: Vec<Vec<BigInt>> = sub
        .generators()
        .iter()
        .map(|g| {
            let image = group.apply(m, &pres.embed(g));
            pres.restrict(&image).expect("endomorphism preserves the subgroup").into_coords()
        })
        .collect();
    sub.normalize_endomorphism(&IntegerMatrix::from_columns(&cols, sub.ngens()))
}

/// An action-closed subgroup of a module.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Submodule(Subgroup);

impl Submodule {
    pub fn subgroup(&self) -> &Subgroup {
        &self.0
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.0.contains(x)
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        self.0.generators()
    }
}

/// `N / M_0` as a module, with the projection from `N`.
#[derive(Clone, Debug)]
pub struct QuotientModule {
    pub module: ZAModule,
    pub presentation: QuotientPresentation,
}

impl QuotientModule {
    pub fn project(&self, x: &GroupElement) -> GroupElement {
        self.presentation.project(x)
    }
}

/// `M_0` as a module, with the embedding into `N`.
#[derive(Clone, Debug)]
pub struct SubmoduleView {
    pub module: ZAModule,
    pub presentation: SubgroupPresentation,
}

impl SubmoduleView {
    pub fn embed(&self, y: &GroupElement) -> GroupElement {
        self.presentation.embed(y)
    }

    pub fn restrict(&self, x: &GroupElement) -> Option<GroupElement> {
        self.presentation.restrict(x)
    }
}

/// `v -> linear . v + shift` on a group `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub linear: IntegerMatrix,
    pub shift: GroupElement,
}

impl AffineMap {
    pub fn identity(group: &FgAbelianGroup) -> Self {
        Self { linear: IntegerMatrix::identity(group.ngens()), shift: group.zero() }
    }

    pub fn apply(&self, group: &FgAbelianGroup, v: &GroupElement) -> GroupElement {
        group.add(&group.apply(&self.linear, v), &self.shift)
    }

    /// `self` after `other`.
    pub fn compose(&self, group: &FgAbelianGroup, other: &AffineMap) -> AffineMap {
        AffineMap { linear: group.compose(&self.linear, &other.linear), shift: self.apply(group, &other.shift) }
    }

    pub fn pow(&self, group: &FgAbelianGroup, k: &BigInt) -> AffineMap {
        debug_assert!(!k.is_negative());
        let mut e = k.clone();
        let mut acc = AffineMap::identity(group);
        let mut sq = self.clone();
        let two = BigInt::from(2);
        while !e.is_zero() {
            if e.is_odd() {
                acc = acc.compose(group, &sq);
            }
            e /= &two;
            if !e.is_zero() {
                sq = sq.compose(group, &sq);
            }
        }
        acc
    }
}

/// A derivation `delta: A -> N`, given by its values on the generators of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    values: Vec<GroupElement>,
}

/// Checks the two well-definedness conditions for derivation values on an
/// abelian `A`: commutation consistency and torsion consistency.
pub fn validate_derivation(m: &ZAModule, values: &[GroupElement]) -> Result<(), DerivationViolation> {
    let k = m.acting.ngens();
    if values.len() != k {
        return Err(DerivationViolation::GeneratorCount { expected: k, found: values.len() });
    }
    let g = &m.group;
    for (i, v) in values.iter().enumerate() {
        g.check(v).map_err(|source| DerivationViolation::Value { generator: i, source })?;
    }
    for i in 0..k {
        for j in i + 1..k {
            let lhs = g.add(&values[i], &g.apply(&m.action[i], &values[j]));
            let rhs = g.add(&values[j], &g.apply(&m.action[j], &values[i]));
            if lhs != rhs {
                return Err(DerivationViolation::Commutation { first: i, second: j, lhs, rhs });
            }
        }
    }
    for (i, v) in values.iter().enumerate() {
        if let Some(order) = m.acting.generator_order(i) {
            let step = AffineMap { linear: m.action[i].clone(), shift: v.clone() };
            let value = step.pow(g, order).shift;
            if !value.is_zero() {
                return Err(DerivationViolation::TorsionNorm { generator: i, order: order.clone(), value });
            }
        }
    }
    Ok(())
}

impl Derivation {
    pub fn new(m: &ZAModule, values: Vec<GroupElement>) -> Result<Self, DerivationViolation> {
        validate_derivation(m, &values)?;
        Ok(Self { values })
    }

    pub fn zero(m: &ZAModule) -> Self {
        Self { values: vec![m.group.zero(); m.acting.ngens()] }
    }

    /// The inner derivation `a -> a.v - v`.
    pub fn inner(m: &ZAModule, v: &GroupElement) -> Self {
        let g = &m.group;
        let values = m.action.iter().map(|mat| g.sub(&g.apply(mat, v), v)).collect();
        Self { values }
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.values
    }

    /// `delta(a)`, extended from the generators by the Leibniz rule.
    pub fn delta_of(&self, m: &ZAModule, a: &GroupElement) -> Result<GroupElement, ModActError> {
        m.acting.check(a)?;
        Ok(m.affine_map(self, a).shift)
    }

    /// The homomorphism `I -> N` corresponding to this derivation.
    pub fn as_hom<'a>(&'a self, module: &'a ZAModule) -> AugmentationHomView<'a> {
        AugmentationHomView { module, derivation: self }
    }
}

/// A derivation seen as the `Z[A]`-homomorphism `phi: I -> N` with
/// `phi(1 - a) = delta(a)`.
#[derive(Clone, Copy, Debug)]
pub struct AugmentationHomView<'a> {
    pub module: &'a ZAModule,
    pub derivation: &'a Derivation,
}

impl AugmentationHomView<'_> {
    /// `phi(z)` for `z = sum c_a a` with `sum c_a = 0`, via
    /// `z = -sum c_a (1 - a)`.
    pub fn apply(&self, z: &GroupRingElement) -> Result<GroupElement, ModActError> {
        if z.ring() != CoeffRing::Int {
            return Err(ModActError::NonIntegral);
        }
        if z.group() != self.module.acting() {
            return Err(ModActError::ActingGroupMismatch);
        }
        let eps = z.augmentation();
        if !eps.is_zero() {
            return Err(ModActError::NotInAugmentationIdeal(eps.to_string()));
        }
        let g = self.module.group();
        let mut acc = g.zero();
        for (a, c) in z.terms() {
            let c = c.to_integer();
            let d = self.derivation.delta_of(self.module, a)?;
            acc = g.sub(&acc, &g.scale(&d, &c));
        }
        Ok(acc)
    }

    /// Recovers the derivation values from `phi(1 - a_i)`.
    pub fn to_derivation(&self) -> Result<Derivation, ModActError> {
        let acting = self.module.acting();
        let values = acting
            .generators()
            .iter()
            .map(|a| {
                let z = GroupRingElement::one(acting, CoeffRing::Int)
                    .sub(&GroupRingElement::monomial(acting, CoeffRing::Int, a.clone(), BigInt::one().into()))
                    .expect("same ring");
                self.apply(&z)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation::new(self.module, values)?)
    }
}
