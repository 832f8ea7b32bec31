//! Residual pole spaces of root-system rational forms, the residue cascade,
//! enveloping denominators and the E8 special-line vanishing check.
//!
//! All arithmetic is exact. The linear algebra in [`linalg`] is generic over
//! the field; the geometric layers are fixed to [`Q`].

pub mod cascade;
pub mod denominators;
pub mod special_e8;
pub mod linalg;
pub mod polespaces;
pub mod rootsys;
pub mod store;

use num_rational::{BigRational, Ratio};

/// Machine rational used throughout the geometric layers.
pub type Q = Ratio<i64>;
/// Arbitrary precision rational, for callers that need it.
pub type BigQ = BigRational;

pub use rootsys::{build_root_datum, RootDatum, RootType, WeylElement};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown root system type {0:?}")]
    InvalidType(String),
    #[error("invalid rank {1} for type {0}")]
    InvalidRank(RootType, usize),
    #[error("Levi index {0} out of range 1..={1}")]
    LeviIndex(usize, usize),
    #[error("inconsistent linear system: empty intersection")]
    Inconsistent,
    #[error("space is not residual")]
    NotResidual,
    #[error("density factors must be positive")]
    BadFactors,
    #[error("density has a pole along coroot #{0}")]
    DensityPole(usize),
    #[error("segment endpoint is at infinity where a finite point is required")]
    FormalSegment,
    #[error("segment endpoint does not lie on the space")]
    OffSpace,
    #[error("phase {0} has no input rows")]
    MissingPhase(usize),
    #[error("space is not regular")]
    NotRegular,
    #[error("Weyl element is not minimal in its coset")]
    NotMinimal,
    #[error("substitution into the standard envelope is inconsistent")]
    Substitution,
    #[error("no good regular envelope exists")]
    NoGoodEnvelope,
    #[error("space has positive order")]
    PositiveOrder,
    #[error("special line data mismatch: {0}")]
    SpecialData(&'static str),
}
