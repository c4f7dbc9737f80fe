//! Subspace functionals and the feasibility decision.
//!
//! Feasibility of every mode reduces to the sign of one or two functionals
//! evaluated over all subspaces of the ambient space:
//!
//! - `f1(V) = Σ_j t_j·dim ℓ_j(V) − dim V`, the large-scale side. `V` is
//!   critical when `f1(V) = 0`, supercritical when `f1(V) < 0`, subcritical
//!   when `f1(V) > 0`.
//! - `f2(V) = codim(V) − Σ_j t_j·codim(ℓ_j(V))`, the small-scale side.
//!   Pointwise, `f2 = f1 + c` where `c` is the homogeneity gap.
//!
//! No finite procedure enumerates all rational subspaces, so the engine
//! combines a lattice closure of distinguished subspaces, exhaustive scans
//! of the finite Grassmannians over small prime fields with exact rational
//! re-verification of lifted candidates, and seeded random sampling. Verified
//! violations are conclusive; absence of violations is conclusive only up to
//! the exhaustiveness the scans achieved, which the verdict reports.

mod decide;
mod explore;

pub use decide::{
    critical_subspaces, decide, grassmannian_scan_mod_p, min_f1, Diagnostics, FeasibleEvidence,
    MinF1, ScanOutcome, Verdict,
};
pub use explore::{explore, lattice_closure, lift_witness, Exploration, FpProfile, PrimeScan};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::datum::CheckedDatum;
use crate::ratlin::{image, Rat, RatlinError, Subspace};

/// The dimension tuple of one subspace: its own dimension and the dimensions
/// of its images under every factor map. All feasibility conditions and all
/// polytope constraints are built from these.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DimProfile {
    pub dim_v: usize,
    pub image_dims: Vec<usize>,
    pub within_kernel0: bool,
}

impl DimProfile {
    /// `Σ_j t_j·image_dims[j] − dim_v`, exactly.
    pub fn f1(&self, t: &[Rat]) -> Rat {
        assert_eq!(t.len(), self.image_dims.len());
        let weighted: Rat = t
            .iter()
            .zip(&self.image_dims)
            .map(|(tj, &d)| tj * Rat::from_integer(BigInt::from(d)))
            .sum();
        weighted - Rat::from_integer(BigInt::from(self.dim_v))
    }
}

/// Exact dimension profile of a subspace under the datum's maps.
pub fn profile(datum: &CheckedDatum, v: &Subspace) -> Result<DimProfile, RatlinError> {
    let mut image_dims = Vec::with_capacity(datum.factor_count());
    for j in 0..datum.factor_count() {
        image_dims.push(image(datum.map(j), v)?.dim());
    }
    Ok(DimProfile {
        dim_v: v.dim(),
        image_dims,
        within_kernel0: datum.kernel0().contains(v),
    })
}

/// `f1(V) = Σ_j t_j·dim ℓ_j(V) − dim V`.
pub fn f1(datum: &CheckedDatum, v: &Subspace) -> Result<Rat, RatlinError> {
    Ok(profile(datum, v)?.f1(datum.exponents().as_slice()))
}

/// `f2(V) = codim(V) − Σ_j t_j·codim(ℓ_j(V)) = f1(V) + c`.
pub fn f2(datum: &CheckedDatum, v: &Subspace) -> Result<Rat, RatlinError> {
    Ok(f1(datum, v)? + datum.homogeneity_gap())
}

/// Which family of subspaces a search ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    AllOfH,
    WithinKernel0,
}

/// Resource limits for the subspace search. The defaults are sized for desk
/// instances: the full Grassmannian of `F_2^6` enumerates in well under a
/// second, and random sampling is capped so exact arithmetic stays snappy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_lattice_size: usize,
    pub max_closure_rounds: usize,
    pub primes: Vec<u64>,
    pub max_ambient_for_exhaustive_scan: usize,
    pub rng_seed: u64,
    pub random_subspace_samples: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_lattice_size: 4096,
            max_closure_rounds: 16,
            primes: vec![2, 3, 5],
            max_ambient_for_exhaustive_scan: 6,
            rng_seed: 0,
            random_subspace_samples: 2000,
        }
    }
}

impl SearchBudget {
    /// A trimmed budget for bulk test sweeps: same scans, fewer random
    /// samples.
    pub fn light() -> Self {
        SearchBudget {
            random_subspace_samples: 64,
            ..SearchBudget::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("ambient dimension {n} exceeds the exhaustive-scan limit {max}")]
    AmbientTooLarge { n: usize, max: usize },
    #[error(transparent)]
    Ratlin(#[from] RatlinError),
}

pub(crate) fn is_zero_rat(r: &Rat) -> bool {
    r.is_zero()
}

#[cfg(test)]
mod tests;
