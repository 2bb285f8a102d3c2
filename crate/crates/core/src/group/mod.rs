//! Permutation groups in the sum / product / wreath grammar, their
//! generators, orbits and equivariant bases.

mod expr;
pub(crate) mod generators;
mod partition;
mod perm;
mod theorem;

use thiserror::Error;

pub use expr::{parse_group_expr, GroupExpr, DEFAULT_MAX_DEGREE};
pub use generators::{generator_set, orbit_labels, orbits, GeneratorSet};
pub use partition::{pair_orbits, BasisNorm, PairPartition, SymBasis};
pub use perm::Perm;
pub use theorem::basis_from_theorem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("degree {degree} exceeds the configured maximum {max} (at byte {pos})")]
    DegreeOverflow { degree: usize, max: usize, pos: usize },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("invalid permutation: {0}")]
    InvalidPerm(String),
    #[error("partition is not closed under transposition")]
    NotSymmetric,
}

/// Pair partition of the group `{σ g σ⁻¹ : g ∈ G}` built from the expression.
pub fn conjugated_basis(g: &GroupExpr, sigma: &Perm) -> Result<PairPartition, GroupError> {
    basis_from_theorem(g, DEFAULT_MAX_DEGREE.max(g.degree()))?.conjugate(sigma)
}
