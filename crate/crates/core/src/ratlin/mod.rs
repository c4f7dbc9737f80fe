//! Exact rational linear algebra: matrices over `Q`, canonical subspaces,
//! integer Smith normal form, and small prime-field reductions.
//!
//! Everything downstream works with values from this module. All types are
//! immutable values and all operations are pure functions, so they can be
//! shared freely across threads.

mod fp;
mod matrix;
mod subspace;

pub use fp::{mod_p_reduce, subspace_count, FpMatrix, FpSubspaceIter};
pub use matrix::{rref, smith_normal_form, IntMatrix, RatMatrix, RrefResult, SmithResult};
pub use subspace::{
    image, kernel, quotient_map, restrict_map, solve_in_rowspace, Subspace,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact rational scalar. Always stored in lowest terms with a positive
/// denominator (`num_rational` maintains both invariants).
pub type Rat = BigRational;

/// Shorthand rational constructor, mostly for tests and fixtures.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Integer-valued rational.
pub fn rat_int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

/// Parse `"a/b"` or `"a"` into an exact rational. Rejects zero denominators
/// and anything `BigRational`'s parser rejects (floats in particular).
pub fn parse_rat(text: &str) -> Result<Rat, RatlinError> {
    text.trim()
        .parse::<Rat>()
        .map_err(|_| RatlinError::BadRational(text.to_string()))
}

/// Canonical string form, `"a"` for integers and `"a/b"` otherwise.
pub fn rat_to_string(value: &Rat) -> String {
    value.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatlinError {
    #[error("cannot parse `{0}` as an exact rational")]
    BadRational(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("image of the domain is not contained in the target subspace")]
    ImageNotInTarget,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {p} divides a denominator of the matrix")]
    BadPrimeDenominator { p: u64 },
    #[error("rank over F_{p} drops from {rational_rank} to {fp_rank}")]
    BadPrimeRankDrop {
        p: u64,
        rational_rank: usize,
        fp_rank: usize,
    },
}

#[cfg(test)]
mod tests;
