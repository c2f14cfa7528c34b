use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::normal_form::{hermite_normal_form, hnf_solve, smith_normal_form};
use super::{FgAbelianGroup, GroupElement, IntegerMatrix};

/// Index of a subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Index {
    Finite(BigInt),
    Infinite,
}

/// A subgroup `H = L / R` of `G = Z^n / R`, stored as the Hermite basis of
/// the lattice `L`, which always contains the relation lattice `R` of `G`.
///
/// Because the basis is canonical, two subgroups are equal iff their
/// `Subgroup` values are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    ambient: FgAbelianGroup,
    basis: IntegerMatrix,
}

impl Subgroup {
    pub fn generated(ambient: &FgAbelianGroup, gens: &[GroupElement]) -> Self {
        let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| g.coords().to_vec()).collect();
        Self::from_lattice_rows(ambient, &rows)
    }

    /// Subgroup for the lattice spanned by `rows` together with the relations.
    pub fn from_lattice_rows(ambient: &FgAbelianGroup, rows: &[Vec<BigInt>]) -> Self {
        let mut all = rows.to_vec();
        all.extend(ambient.relation_rows());
        let m = IntegerMatrix::from_rows_with_cols(&all, ambient.ngens());
        Self { ambient: ambient.clone(), basis: hermite_normal_form(&m) }
    }

    pub fn trivial(ambient: &FgAbelianGroup) -> Self {
        Self::generated(ambient, &[])
    }

    pub fn whole(ambient: &FgAbelianGroup) -> Self {
        Self::generated(ambient, &ambient.generators())
    }

    pub fn ambient(&self) -> &FgAbelianGroup {
        &self.ambient
    }

    /// Hermite basis of the lattice `L`.
    pub fn lattice_basis(&self) -> &IntegerMatrix {
        &self.basis
    }

    /// Nonzero generators of `H` in normal form, one per basis row.
    pub fn generators(&self) -> Vec<GroupElement> {
        (0..self.basis.rows()).map(|i| self.ambient.normalize(self.basis.row(i))).filter(|g| !g.is_zero()).collect()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        hnf_solve(&self.basis, x.coords()).is_some()
    }

    pub fn is_trivial(&self) -> bool {
        self.generators().is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.index() == Index::Finite(BigInt::one())
    }

    pub fn index(&self) -> Index {
        if self.basis.rows() < self.ambient.ngens() {
            return Index::Infinite;
        }
        Index::Finite((0..self.basis.rows()).map(|i| self.basis.get(i, i)).product())
    }

    pub fn join(&self, other: &Subgroup) -> Subgroup {
        let mut rows = self.basis.to_rows();
        rows.extend(other.basis.to_rows());
        Self::from_lattice_rows(&self.ambient, &rows)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        (0..self.basis.rows()).all(|i| hnf_solve(&other.basis, self.basis.row(i)).is_some())
    }

    /// `G / H` together with projection and section maps.
    pub fn quotient(&self) -> QuotientPresentation {
        QuotientPresentation::of_lattice(&self.basis)
    }

    /// `H` as an abstract group, with its embedding into `G`.
    pub fn presentation(&self) -> SubgroupPresentation {
        let k = self.basis.rows();
        let rel_coords: Vec<Vec<BigInt>> = self
            .ambient
            .relation_rows()
            .iter()
            .map(|r| hnf_solve(&self.basis, r).expect("relations lie in the subgroup lattice"))
            .collect();
        let rel = hermite_normal_form(&IntegerMatrix::from_rows_with_cols(&rel_coords, k));
        SubgroupPresentation {
            ambient: self.ambient.clone(),
            basis: self.basis.clone(),
            coords: QuotientPresentation::of_lattice_in(&rel, k),
        }
    }
}

/// Presentation of `Z^n / L` in invariant-factor form.
#[derive(Clone, Debug)]
pub struct QuotientPresentation {
    pub group: FgAbelianGroup,
    /// `q x n`: reduced coordinates in `group` of an ambient vector.
    pub proj: IntegerMatrix,
    /// `n x q`: a section of `proj`.
    pub lift: IntegerMatrix,
}

impl QuotientPresentation {
    fn of_lattice(basis: &IntegerMatrix) -> Self {
        Self::of_lattice_in(basis, basis.cols())
    }

    /// `basis` is a Hermite basis (full row rank) of a lattice in `Z^n`.
    fn of_lattice_in(basis: &IntegerMatrix, n: usize) -> Self {
        let k = basis.rows();
        let sf = smith_normal_form(basis);
        let diag = sf.diagonal();
        let vt = sf.v.transpose();
        let mut order: Vec<usize> = (k..n).collect();
        let mut torsion = Vec::new();
        for (i, d) in diag.iter().enumerate() {
            debug_assert!(!d.is_zero());
            if !d.is_one() {
                order.push(i);
                torsion.push(d.clone());
            }
        }
        let proj_rows: Vec<Vec<BigInt>> = order.iter().map(|&i| vt.row(i).to_vec()).collect();
        let lift_cols: Vec<Vec<BigInt>> = order.iter().map(|&i| sf.v_inv.row(i).to_vec()).collect();
        let group = FgAbelianGroup::new(n - k, torsion).expect("Smith diagonal is a divisibility chain");
        Self {
            group,
            proj: IntegerMatrix::from_rows_with_cols(&proj_rows, n),
            lift: IntegerMatrix::from_columns(&lift_cols, n),
        }
    }

    pub fn project(&self, x: &GroupElement) -> GroupElement {
        self.project_coords(x.coords())
    }

    pub fn project_coords(&self, x: &[BigInt]) -> GroupElement {
        self.group.normalize(&self.proj.mul_vec(x))
    }

    /// A preimage of `y` in `Z^n`, not reduced.
    pub fn lift_coords(&self, y: &GroupElement) -> Vec<BigInt> {
        self.lift.mul_vec(y.coords())
    }
}

/// A subgroup `H` as an abstract group together with its embedding.
#[derive(Clone, Debug)]
pub struct SubgroupPresentation {
    ambient: FgAbelianGroup,
    basis: IntegerMatrix,
    coords: QuotientPresentation,
}

impl SubgroupPresentation {
    pub fn group(&self) -> &FgAbelianGroup {
        &self.coords.group
    }

    pub fn embed(&self, y: &GroupElement) -> GroupElement {
        let c = self.coords.lift_coords(y);
        let x = self.basis.transpose().mul_vec(&c);
        self.ambient.normalize(&x)
    }

    /// Coordinates of `x` in `H`, or `None` if `x` is not in the subgroup.
    pub fn restrict(&self, x: &GroupElement) -> Option<GroupElement> {
        hnf_solve(&self.basis, x.coords()).map(|c| self.coords.project_coords(&c))
    }

    /// Images of the generators of `H` in `G`.
    pub fn embedded_generators(&self) -> Vec<GroupElement> {
        self.group().generators().iter().map(|g| self.embed(g)).collect()
    }
}

/// A nonzero `t` with `sum t_j v_j = 0` in `group`, or `None`.
///
/// The answer is the lexicographically least vector of absolute values
/// (zeros count as small, so the latest possible leading position wins),
/// with a positive leading entry. That vector is the last row of the
/// Hermite basis of the relation lattice.
pub fn integer_relation(group: &FgAbelianGroup, vectors: &[GroupElement]) -> Option<Vec<BigInt>> {
    let n = vectors.len();
    let dim = group.ngens();
    let mut cols: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    for r in group.relation_rows() {
        cols.push(r);
    }
    let k = IntegerMatrix::from_columns(&cols, dim);
    let sf = smith_normal_form(&k);
    let rank = sf.rank();
    let kernel: Vec<Vec<BigInt>> = (rank..cols.len()).map(|j| sf.v.column(j)[..n].to_vec()).collect();
    let h = hermite_normal_form(&IntegerMatrix::from_rows_with_cols(&kernel, n));
    (h.rows() > 0).then(|| h.row(h.rows() - 1).to_vec())
}

/// Index in `group` of the subgroup generated by `gens`.
pub fn subgroup_index(group: &FgAbelianGroup, gens: &[GroupElement]) -> Index {
    Subgroup::generated(group, gens).index()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(g: &FgAbelianGroup, c: &[i64]) -> GroupElement {
        g.element_i64(c).unwrap()
    }

    #[test]
    fn relation_examples() {
        let z = FgAbelianGroup::free(1);
        let r = integer_relation(&z, &[el(&z, &[1]), el(&z, &[1])]);
        assert_eq!(r, Some(vec![1.into(), (-1).into()]));
        let r = integer_relation(&z, &[el(&z, &[2]), el(&z, &[3])]);
        assert_eq!(r, Some(vec![3.into(), (-2).into()]));
        let z2 = FgAbelianGroup::free(2);
        assert_eq!(integer_relation(&z2, &[el(&z2, &[1, 0]), el(&z2, &[0, 1])]), None);
    }

    #[test]
    fn relation_prefers_late_support() {
        let z = FgAbelianGroup::free(1);
        let r = integer_relation(&z, &[el(&z, &[5]), el(&z, &[0])]).unwrap();
        assert_eq!(r, vec![0.into(), 1.into()]);
    }

    #[test]
    fn relation_with_torsion() {
        let g = FgAbelianGroup::from_u64(0, &[6]).unwrap();
        let r = integer_relation(&g, &[el(&g, &[2])]).unwrap();
        assert_eq!(r, vec![3.into()]);
    }

    #[test]
    fn index_examples() {
        let z = FgAbelianGroup::free(1);
        assert_eq!(subgroup_index(&z, &[el(&z, &[2])]), Index::Finite(2.into()));
        let z2 = FgAbelianGroup::free(2);
        assert_eq!(subgroup_index(&z2, &[el(&z2, &[1, 0]), el(&z2, &[0, 1])]), Index::Finite(1.into()));
        assert_eq!(subgroup_index(&z2, &[el(&z2, &[1, 0])]), Index::Infinite);
        let t = FgAbelianGroup::from_u64(0, &[2, 6]).unwrap();
        assert_eq!(subgroup_index(&t, &[el(&t, &[0, 2])]), Index::Finite(4.into()));
    }

    #[test]
    fn quotient_and_subgroup_presentations() {
        let g = FgAbelianGroup::from_u64(1, &[4]).unwrap();
        let h = Subgroup::generated(&g, &[el(&g, &[2, 2])]);
        let q = h.quotient();
        assert_eq!(q.group.order(), Some(8.into()));
        assert_eq!(q.group.torsion(), &[BigInt::from(2), BigInt::from(4)]);
        assert!(q.project(&el(&g, &[2, 2])).is_zero());
        assert!(!q.project(&el(&g, &[1, 1])).is_zero());

        let p = h.presentation();
        assert_eq!(p.group(), &FgAbelianGroup::free(1));
        let gen = p.group().generator(0);
        let x = p.embed(&gen);
        assert!(h.contains(&x));
        assert_eq!(p.restrict(&x), Some(gen));
        assert_eq!(p.restrict(&el(&g, &[1, 0])), None);
    }

    #[test]
    fn torsion_subgroup_presentation() {
        let g = FgAbelianGroup::from_u64(0, &[2, 6]).unwrap();
        let h = Subgroup::generated(&g, &[el(&g, &[1, 3])]);
        let p = h.presentation();
        assert_eq!(p.group().order(), Some(2.into()));
        let q = h.quotient();
        assert_eq!(q.group.order(), Some(6.into()));
        for x in g.elements() {
            let lifted = g.normalize(&q.lift_coords(&q.project(&x)));
            assert!(h.contains(&g.sub(&x, &lifted)));
        }
    }
}
