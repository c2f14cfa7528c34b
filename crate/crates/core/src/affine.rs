//! Affine actions `a * v = a.v + delta(a)` and their orbits.
//!
//! Orbits are enumerated on finite modules only. Elements are addressed by
//! their position in lexicographic order of reduced coordinates, so the
//! smallest index in an orbit is its order-minimal representative.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::abgroup::{FgAbelianGroup, GroupElement, Index, Subgroup, SubgroupPresentation};
use crate::modact::{
    restrict_endomorphism, validate_derivation, AffineMap, Derivation, DerivationViolation, ModActError,
    QuotientModule, Submodule, SubmoduleView, ZAModule,
};

pub const DEFAULT_ELEMENT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("module is infinite ({0}); orbit enumeration needs a finite module")]
    InfiniteModule(FgAbelianGroup),
    #[error("module has {size} elements, above the cap of {cap}")]
    CapExceeded { size: BigInt, cap: u64 },
    #[error("quotient by the submodule is infinite ({0})")]
    InfiniteQuotient(FgAbelianGroup),
    #[error(transparent)]
    ModAct(#[from] ModActError),
    #[error(transparent)]
    Derivation(#[from] DerivationViolation),
}

/// A module together with a derivation into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineAction {
    module: ZAModule,
    derivation: Derivation,
}

impl AffineAction {
    pub fn new(module: ZAModule, derivation: Derivation) -> Result<Self, DerivationViolation> {
        validate_derivation(&module, derivation.values())?;
        Ok(Self { module, derivation })
    }

    /// The pure automorphism action (zero derivation).
    pub fn linear(module: ZAModule) -> Self {
        let derivation = Derivation::zero(&module);
        Self { module, derivation }
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

    pub fn group(&self) -> &FgAbelianGroup {
        self.module.group()
    }

    pub fn map_of(&self, a: &GroupElement) -> AffineMap {
        self.module.affine_map(&self.derivation, a)
    }

    /// `a * v`
    pub fn apply(&self, a: &GroupElement, v: &GroupElement) -> Result<GroupElement, ModActError> {
        self.acting().check(a)?;
        self.group().check(v)?;
        Ok(self.map_of(a).apply(self.group(), v))
    }
}

/// Small-integer form of the generator moves on a finite module.
#[derive(Clone, Debug)]
pub(crate) struct FiniteTable {
    moduli: Vec<u64>,
    size: u64,
    /// Per generator of `A`: forward move, then backward move.
    moves: Vec<SmallAffine>,
}

#[derive(Clone, Debug)]
struct SmallAffine {
    linear: Vec<Vec<u64>>,
    shift: Vec<u64>,
}

impl FiniteTable {
    pub(crate) fn new(act: &AffineAction, cap: u64) -> Result<Self, AffineError> {
        let group = act.group();
        let Some(order) = group.order() else {
            return Err(AffineError::InfiniteModule(group.clone()));
        };
        let size = match order.to_u64() {
            Some(s) if s <= cap => s,
            _ => return Err(AffineError::CapExceeded { size: order, cap }),
        };
        let moduli: Vec<u64> = group.torsion().iter().map(|d| d.to_u64().expect("fits")).collect();
        let module = act.module();
        let to_small = |m: &AffineMap| SmallAffine {
            linear: m
                .linear
                .to_rows()
                .iter()
                .map(|r| r.iter().map(|x| x.to_u64().expect("reduced entry")).collect())
                .collect(),
            shift: m.shift.coords().iter().map(|x| x.to_u64().expect("reduced")).collect(),
        };
        let mut moves = Vec::new();
        for i in 0..act.acting().ngens() {
            let fwd = AffineMap { linear: module.action(i).clone(), shift: act.derivation().values()[i].clone() };
            let inv_lin = module.inverse_action(i).clone();
            let bwd = AffineMap { shift: group.neg(&group.apply(&inv_lin, &fwd.shift)), linear: inv_lin };
            moves.push(to_small(&fwd));
            moves.push(to_small(&bwd));
        }
        Ok(Self { moduli, size, moves })
    }

    pub(crate) fn size(&self) -> u64 {
        self.size
    }

    pub(crate) fn move_count(&self) -> usize {
        self.moves.len()
    }

    fn decode(&self, mut idx: u64, out: &mut [u64]) {
        for (c, d) in out.iter_mut().zip(&self.moduli).rev() {
            *c = idx % d;
            idx /= d;
        }
    }

    fn encode(&self, coords: &[u64]) -> u64 {
        coords.iter().zip(&self.moduli).fold(0, |acc, (c, d)| acc * d + c)
    }

    pub(crate) fn apply(&self, mv: usize, idx: u64, scratch: &mut [u64], out: &mut [u64]) -> u64 {
        let m = &self.moves[mv];
        self.decode(idx, scratch);
        for (i, d) in self.moduli.iter().enumerate() {
            let d = *d as u128;
            let mut acc = m.shift[i] as u128;
            for (l, x) in m.linear[i].iter().zip(scratch.iter()) {
                acc += (*l as u128) * (*x as u128) % d;
            }
            out[i] = (acc % d) as u64;
        }
        self.encode(out)
    }
}

/// Partition of a finite module into orbits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPartition {
    group: FgAbelianGroup,
    orbit_of: Vec<u32>,
    representatives: Vec<u64>,
    sizes: Vec<u64>,
}

impl OrbitPartition {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    /// Representatives, one per orbit, in increasing order.
    pub fn representatives(&self) -> Vec<GroupElement> {
        self.representatives.iter().map(|&i| self.group.element_at(i)).collect()
    }

    pub fn representative_indices(&self) -> &[u64] {
        &self.representatives
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Which orbit `x` lies in.
    pub fn orbit_index(&self, x: &GroupElement) -> usize {
        self.orbit_of[self.group.index_of(x) as usize] as usize
    }

    pub fn orbit_of_index(&self, idx: u64) -> usize {
        self.orbit_of[idx as usize] as usize
    }

    /// Element indices per orbit, orbits sorted by representative.
    pub fn orbit_indices(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.len()];
        for (idx, &o) in self.orbit_of.iter().enumerate() {
            out[o as usize].push(idx as u64);
        }
        out
    }

    pub fn orbits(&self) -> Vec<Vec<GroupElement>> {
        self.orbit_indices().into_iter().map(|o| o.into_iter().map(|i| self.group.element_at(i)).collect()).collect()
    }

    /// The partition as a set of sets of element indices.
    pub fn as_set_family(&self) -> BTreeSet<BTreeSet<u64>> {
        self.orbit_indices().into_iter().map(|o| o.into_iter().collect()).collect()
    }
}

/// Breadth-first spanning forest of the orbits, for recovering an element
/// `w` of `A` with `w * rep = x`.
#[derive(Clone, Debug)]
pub struct Transversal {
    acting: FgAbelianGroup,
    parent: Vec<u64>,
    via: Vec<u8>,
}

const ROOT: u8 = u8::MAX;

impl Transversal {
    /// `w` with `w * representative(x) = x`, where `x` is given by index.
    pub fn witness(&self, mut idx: u64) -> GroupElement {
        let mut coords = vec![BigInt::zero(); self.acting.ngens()];
        while self.via[idx as usize] != ROOT {
            let mv = self.via[idx as usize] as usize;
            if mv.is_multiple_of(2) {
                coords[mv / 2] += 1;
            } else {
                coords[mv / 2] -= 1;
            }
            idx = self.parent[idx as usize];
        }
        self.acting.normalize(&coords)
    }
}

/// Orbits of the affine action on a finite module, with the default cap.
pub fn enumerate_orbits(act: &AffineAction) -> Result<OrbitPartition, AffineError> {
    enumerate_orbits_capped(act, DEFAULT_ELEMENT_CAP)
}

pub fn enumerate_orbits_capped(act: &AffineAction, cap: u64) -> Result<OrbitPartition, AffineError> {
    enumerate_with_transversal(act, cap).map(|(p, _)| p)
}

/// Scans elements in increasing order; each unvisited element starts a new
/// orbit, which is closed by BFS under every generator move and its inverse.
pub fn enumerate_with_transversal(act: &AffineAction, cap: u64) -> Result<(OrbitPartition, Transversal), AffineError> {
    let table = FiniteTable::new(act, cap)?;
    let size = table.size() as usize;
    let n = act.group().ngens();
    let mut orbit_of = vec![u32::MAX; size];
    let mut parent = vec![0u64; size];
    let mut via = vec![ROOT; size];
    let mut representatives = Vec::new();
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    let (mut scratch, mut out) = (vec![0u64; n], vec![0u64; n]);
    for start in 0..size {
        if orbit_of[start] != u32::MAX {
            continue;
        }
        let id = representatives.len() as u32;
        representatives.push(start as u64);
        orbit_of[start] = id;
        queue.push_back(start as u64);
        let mut count = 0u64;
        while let Some(x) = queue.pop_front() {
            count += 1;
            for mv in 0..table.move_count() {
                let y = table.apply(mv, x, &mut scratch, &mut out);
                if orbit_of[y as usize] == u32::MAX {
                    orbit_of[y as usize] = id;
                    parent[y as usize] = x;
                    via[y as usize] = mv as u8;
                    queue.push_back(y);
                }
            }
        }
        sizes.push(count);
    }
    let partition = OrbitPartition { group: act.group().clone(), orbit_of, representatives, sizes };
    let transversal = Transversal { acting: act.acting().clone(), parent, via };
    Ok((partition, transversal))
}

/// Orbit count of the automorphism action (zero derivation).
pub fn scalar_orbit_count(m: &ZAModule) -> Result<usize, AffineError> {
    Ok(enumerate_orbits(&AffineAction::linear(m.clone()))?.len())
}

/// The affine action induced on `N / M_0`.
#[derive(Clone, Debug)]
pub struct InducedAction {
    pub quotient: QuotientModule,
    pub action: AffineAction,
}

pub fn induced_action(act: &AffineAction, sub: &Submodule) -> Result<InducedAction, AffineError> {
    let sub = act.module().submodule(sub.subgroup().clone())?;
    let quotient = act.module().quotient(&sub);
    let values = act.derivation().values().iter().map(|d| quotient.project(d)).collect();
    let derivation = Derivation::new(&quotient.module, values)?;
    let action = AffineAction::new(quotient.module.clone(), derivation)?;
    Ok(InducedAction { quotient, action })
}

/// The restricted affine action of `A_0 = delta^{-1}(M_0)` on `M_0`.
#[derive(Clone, Debug)]
pub struct Restriction {
    /// `A_0` as a finite-index subgroup of `A`, by its lattice of exponent vectors.
    pub stabilizer: Subgroup,
    pub index: BigInt,
    /// `A_0` as an abstract group with its embedding into `A`.
    pub acting: SubgroupPresentation,
    pub submodule: SubmoduleView,
    pub action: AffineAction,
}

/// Computes `A_0` as the stabiliser of `0 + M_0` in the induced action on the
/// finite quotient `N / M_0` (Schreier generators of the orbit of 0), then
/// restricts the action to `M_0`.
pub fn restrict_action(act: &AffineAction, sub: &Submodule) -> Result<Restriction, AffineError> {
    restrict_action_capped(act, sub, DEFAULT_ELEMENT_CAP)
}

pub fn restrict_action_capped(act: &AffineAction, sub: &Submodule, cap: u64) -> Result<Restriction, AffineError> {
    let induced = induced_action(act, sub)?;
    let qgroup = induced.action.group().clone();
    if !qgroup.is_finite() {
        return Err(AffineError::InfiniteQuotient(qgroup));
    }
    let acting = act.acting().clone();
    let table = FiniteTable::new(&induced.action, cap)?;
    let n = qgroup.ngens();
    let (mut scratch, mut out) = (vec![0u64; n], vec![0u64; n]);

    // BFS over forward moves only: on a finite set they generate the group.
    let mut witness: std::collections::HashMap<u64, GroupElement> = Default::default();
    witness.insert(0, acting.zero());
    let mut queue = VecDeque::from([0u64]);
    let mut schreier = Vec::new();
    while let Some(x) = queue.pop_front() {
        let wx = witness[&x].clone();
        for i in 0..acting.ngens() {
            let y = table.apply(2 * i, x, &mut scratch, &mut out);
            let step = acting.add(&wx, &acting.generator(i));
            match witness.get(&y) {
                Some(wy) => schreier.push(acting.sub(&step, wy)),
                None => {
                    witness.insert(y, step);
                    queue.push_back(y);
                }
            }
        }
    }
    let stabilizer = Subgroup::generated(&acting, &schreier);
    let index = match stabilizer.index() {
        Index::Finite(i) => i,
        Index::Infinite => unreachable!("stabiliser of a point in a finite orbit has finite index"),
    };
    debug_assert_eq!(index, BigInt::from(witness.len()));

    let module = act.module();
    let pres = stabilizer.presentation();
    let view = module.restrict_to(sub);
    let mut matrices = Vec::new();
    let mut values = Vec::new();
    for g in pres.embedded_generators() {
        let e = module.endomorphism(&g);
        matrices.push(restrict_endomorphism(module.group(), &view.presentation, &e));
        let d = act.derivation().delta_of(module, &g)?;
        values.push(view.restrict(&d).expect("delta(A_0) lies in M_0"));
    }
    let rmodule =
        ZAModule::new(pres.group().clone(), view.module.group().clone(), matrices).map_err(ModActError::from)?;
    let derivation = Derivation::new(&rmodule, values)?;
    let action = AffineAction::new(rmodule, derivation)?;
    Ok(Restriction { stabilizer, index, acting: pres, submodule: view, action })
}

/// Outcome of comparing two orbit partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionComparison {
    pub passed: bool,
    pub expected_orbits: usize,
    pub found_orbits: usize,
    /// A block present in one family but not the other, as ambient elements.
    pub witness: Option<Vec<GroupElement>>,
}

impl PartitionComparison {
    fn compare(group: &FgAbelianGroup, expected: &BTreeSet<BTreeSet<u64>>, found: &BTreeSet<BTreeSet<u64>>) -> Self {
        let witness =
            expected.symmetric_difference(found).next().map(|b| b.iter().map(|&i| group.element_at(i)).collect());
        Self { passed: witness.is_none(), expected_orbits: expected.len(), found_orbits: found.len(), witness }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictReport {
    /// Orbits of `A_0` on `M_0` versus nonempty `O ∩ M_0`.
    pub intersections: PartitionComparison,
    /// Orbits of `A` on `N / M_0` versus images of orbits on `N`.
    pub images: PartitionComparison,
    pub stabilizer_index: BigInt,
}

impl RestrictReport {
    pub fn passed(&self) -> bool {
        self.intersections.passed && self.images.passed
    }
}

/// Compares both sides of the restriction and quotient statements exactly.
pub fn check_restrict_properties(act: &AffineAction, sub: &Submodule, cap: u64) -> Result<RestrictReport, AffineError> {
    let n = act.group().clone();
    let full = enumerate_orbits_capped(act, cap)?;
    let restriction = restrict_action_capped(act, sub, cap)?;
    let induced = induced_action(act, sub)?;

    let sub_orbits = enumerate_orbits_capped(&restriction.action, cap)?;
    let found3: BTreeSet<BTreeSet<u64>> = sub_orbits
        .orbits()
        .iter()
        .map(|o| o.iter().map(|y| n.index_of(&restriction.submodule.embed(y))).collect())
        .collect();
    let in_sub: Vec<bool> = n.elements().map(|x| sub.contains(&x)).collect();
    let expected3: BTreeSet<BTreeSet<u64>> = full
        .orbit_indices()
        .into_iter()
        .map(|o| o.into_iter().filter(|&i| in_sub[i as usize]).collect::<BTreeSet<u64>>())
        .filter(|s| !s.is_empty())
        .collect();

    let q = induced.action.group().clone();
    let proj: Vec<u64> = n.elements().map(|x| q.index_of(&induced.quotient.project(&x))).collect();
    let expected4: BTreeSet<BTreeSet<u64>> =
        full.orbit_indices().into_iter().map(|o| o.into_iter().map(|i| proj[i as usize]).collect()).collect();
    let found4 = enumerate_orbits_capped(&induced.action, cap)?.as_set_family();

    Ok(RestrictReport {
        intersections: PartitionComparison::compare(&n, &expected3, &found3),
        images: PartitionComparison::compare(&q, &expected4, &found4),
        stabilizer_index: restriction.index,
    })
}
