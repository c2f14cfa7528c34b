use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use super::normal_form::smith_normal_form;
use super::{FgAbelianGroup, GroupElement, IntegerMatrix};

/// Why an integer matrix fails to define an automorphism of a group.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndoViolation {
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape { rows: usize, cols: usize, expected: usize },
    #[error("column {column} does not respect the relation of its generator")]
    NotWellDefined { column: usize },
    #[error("endomorphism is not surjective, hence not invertible")]
    NotInvertible,
}

impl FgAbelianGroup {
    /// Checks that `m` (acting on coordinate columns) maps the relation
    /// lattice into itself, so that it induces an endomorphism.
    pub fn check_endomorphism(&self, m: &IntegerMatrix) -> Result<(), EndoViolation> {
        let n = self.ngens();
        if m.rows() != n || m.cols() != n {
            return Err(EndoViolation::Shape { rows: m.rows(), cols: m.cols(), expected: n });
        }
        for (j, d) in self.torsion().iter().enumerate() {
            let c = self.free_rank() + j;
            for i in 0..n {
                let x = m.get(i, c);
                let ok = match self.modulus(i) {
                    None => x.is_zero(),
                    Some(di) => (x * d).is_multiple_of(di),
                };
                if !ok {
                    return Err(EndoViolation::NotWellDefined { column: c });
                }
            }
        }
        Ok(())
    }

    /// Reduces torsion rows modulo their invariant: the canonical matrix of a
    /// well-defined endomorphism.
    pub fn normalize_endomorphism(&self, m: &IntegerMatrix) -> IntegerMatrix {
        let mut out = m.clone();
        for i in self.free_rank()..self.ngens() {
            let d = self.modulus(i).expect("torsion row");
            for j in 0..self.ngens() {
                let x = out.get(i, j).mod_floor(d);
                out.set(i, j, x);
            }
        }
        out
    }

    pub fn compose(&self, a: &IntegerMatrix, b: &IntegerMatrix) -> IntegerMatrix {
        self.normalize_endomorphism(&(a * b))
    }

    pub fn apply(&self, m: &IntegerMatrix, x: &GroupElement) -> GroupElement {
        self.normalize(&m.mul_vec(x.coords()))
    }

    /// Inverse of the automorphism induced by `m`, or `None` if `m` is not
    /// surjective. A surjective endomorphism of a finitely generated abelian
    /// group is injective, so surjectivity is the whole test.
    ///
    /// `m` must already pass [`FgAbelianGroup::check_endomorphism`].
    pub fn automorphism_inverse(&self, m: &IntegerMatrix) -> Option<IntegerMatrix> {
        let n = self.ngens();
        let rel_cols: Vec<Vec<BigInt>> = self.relation_rows();
        let d = IntegerMatrix::from_columns(&rel_cols, n);
        let k = m.hcat(&d);
        let sf = smith_normal_form(&k);
        let diag = sf.diagonal();
        if diag.len() < n || diag.iter().take(n).any(|x| !x.is_one()) {
            return None;
        }
        let inv = &sf.v.submatrix(0, n, 0, n) * &sf.u;
        let inv = self.normalize_endomorphism(&inv);
        debug_assert!(self.compose(m, &inv) == IntegerMatrix::identity(n) || n == 0);
        Some(inv)
    }

    /// Matrix power with the exponent's sign honoured via `inverse`.
    pub fn endomorphism_pow(&self, m: &IntegerMatrix, inverse: &IntegerMatrix, k: &BigInt) -> IntegerMatrix {
        let base = if k < &BigInt::zero() { inverse } else { m };
        let mut e = num_traits::Signed::abs(k);
        let mut acc = IntegerMatrix::identity(self.ngens());
        let mut sq = base.clone();
        let two = BigInt::from(2);
        while !e.is_zero() {
            if e.is_odd() {
                acc = self.compose(&acc, &sq);
            }
            e /= &two;
            if !e.is_zero() {
                sq = self.compose(&sq, &sq);
            }
        }
        acc
    }
}
