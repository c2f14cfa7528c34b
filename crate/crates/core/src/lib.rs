//! Exact computational algebra for affine actions of finitely generated
//! abelian groups on modules.
//!
//! The crate is organised bottom-up:
//!
//! * [`abgroup`]: finitely generated abelian groups, integer matrices, Smith
//!   and Hermite normal forms, subgroups and their presentations.
//! * [`modact`]: `Z[A]`-modules, derivations and the derivation/homomorphism
//!   correspondence.
//! * [`affine`]: affine actions `a * v = a.v + delta(a)`, orbit enumeration
//!   and restriction to submodules.
//! * [`groupalg`]: group rings, finite-dimensional quotient algebras and
//!   polynomials killing a group element modulo an ideal.
//! * [`semidirect`]: semidirect products `N x| A`, the twin complement and
//!   double cosets.
//! * [`numfield`]: number fields, resultant norms and the norm identities.

pub mod abgroup;
pub mod affine;
pub mod groupalg;
pub mod linalg;
pub mod modact;
pub mod numfield;
pub mod poly;
pub mod primes;
pub mod semidirect;
