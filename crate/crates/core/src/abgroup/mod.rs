//! Finitely generated abelian groups and exact integer linear algebra.

mod endo;
mod group;
mod matrix;
mod normal_form;
mod subgroup;

use num_bigint::BigInt;
use thiserror::Error;

pub use endo::EndoViolation;
pub use group::{FgAbelianGroup, GroupElement};
pub use matrix::IntegerMatrix;
pub use normal_form::{hermite_normal_form, hnf_pivots, hnf_solve, smith_normal_form, SmithForm};
pub use subgroup::{integer_relation, subgroup_index, Index, QuotientPresentation, Subgroup, SubgroupPresentation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbGroupError {
    #[error("torsion invariant {index} is {value}, expected at least 2")]
    BadTorsion { index: usize, value: BigInt },
    #[error("torsion invariant {index} ({value}) is not a multiple of the previous one ({prev})")]
    DivisibilityChain { index: usize, prev: BigInt, value: BigInt },
    #[error("expected {expected} coordinates, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("element {0} is not in normal form")]
    NotReduced(String),
}
