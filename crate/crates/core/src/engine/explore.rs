//! Assemble the explored family of subspaces: lattice closure of the
//! distinguished seeds, exhaustive prime-field scans with rational lifts,
//! and seeded random samples.
//!
//! An [`Exploration`] is independent of the exponent vector: it stores raw
//! dimension data, and every exponent-dependent quantity (minima, witnesses,
//! exhaustiveness) is evaluated on top of it. Callers that sweep many
//! exponent vectors over the same maps reuse one exploration.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datum::CheckedDatum;
use crate::ratlin::{
    kernel, mod_p_reduce, FpMatrix, FpSubspaceIter, Rat, RatMatrix, Subspace,
};

use super::{profile, DimProfile, Domain, SearchBudget};

/// One distinct `F_p` dimension profile found by a full Grassmannian scan,
/// with the index (into the exploration's subspace list) of the exact
/// rational lift of its first representative.
#[derive(Clone, Debug)]
pub struct FpProfile {
    pub dim_v: usize,
    pub image_dims: Vec<usize>,
    pub lifted_index: usize,
}

/// Outcome of scanning one prime.
#[derive(Clone, Debug)]
pub struct PrimeScan {
    pub p: u64,
    /// All scanned maps kept their rational rank mod `p`.
    pub good: bool,
    /// The full Grassmannian was enumerated (always true when `good` and the
    /// ambient dimension is within budget).
    pub completed: bool,
    pub subspaces_enumerated: u64,
    pub profiles: Vec<FpProfile>,
}

/// The explored family of subspaces for one datum and one search domain,
/// with exact profiles. Subspaces are canonical, deduplicated, and sorted by
/// dimension then lexicographically by basis, so every downstream choice is
/// deterministic.
#[derive(Clone, Debug)]
pub struct Exploration {
    pub domain: Domain,
    pub subspaces: Vec<Subspace>,
    pub profiles: Vec<DimProfile>,
    pub scans: Vec<PrimeScan>,
    pub truncated: bool,
}

impl Exploration {
    /// Minimum of `f1` over the explored family for the given exponents,
    /// with all indices attaining it (sorted), and whether the scans certify
    /// the value as a global minimum candidate: every completed good-prime
    /// scan must agree, meaning each scan's minimum is attained and each
    /// minimizing `F_p` profile lifts to a rational subspace with the same
    /// `f1` value.
    pub fn evaluate(&self, t: &[Rat]) -> EvaluatedMin {
        let mut min: Option<Rat> = None;
        let mut argmins: Vec<usize> = Vec::new();
        for (i, p) in self.profiles.iter().enumerate() {
            let value = p.f1(t);
            match &min {
                Some(cur) if value > *cur => {}
                Some(cur) if value == *cur => argmins.push(i),
                _ => {
                    min = Some(value);
                    argmins = vec![i];
                }
            }
        }
        let min = min.expect("exploration always contains the zero subspace");

        let completed: Vec<&PrimeScan> =
            self.scans.iter().filter(|s| s.good && s.completed).collect();
        let mut exhaustive = completed.len() >= 2 && !self.truncated;
        for scan in &completed {
            if !exhaustive {
                break;
            }
            let mut scan_min: Option<Rat> = None;
            let mut scan_argmins: Vec<&FpProfile> = Vec::new();
            for fp in &scan.profiles {
                let value = DimProfile {
                    dim_v: fp.dim_v,
                    image_dims: fp.image_dims.clone(),
                    within_kernel0: true,
                }
                .f1(t);
                match &scan_min {
                    Some(cur) if value > *cur => {}
                    Some(cur) if value == *cur => scan_argmins.push(fp),
                    _ => {
                        scan_min = Some(value);
                        scan_argmins = vec![fp];
                    }
                }
            }
            let scan_min = scan_min.expect("a completed scan saw the zero subspace");
            // Image dimensions can only drop mod p, so the scan minimum is a
            // lower bound for the explored minimum; equality plus verified
            // lifts is the certification condition.
            if scan_min != min {
                exhaustive = false;
                break;
            }
            for fp in scan_argmins {
                if self.profiles[fp.lifted_index].f1(t) != min {
                    exhaustive = false;
                    break;
                }
            }
        }

        EvaluatedMin {
            min,
            argmin_indices: argmins,
            exhaustive,
        }
    }

    /// Explored subspaces with `f1 = 0`, excluding the zero subspace and the
    /// full space; sorted by dimension then canonical basis order.
    pub fn critical_proper_nonzero(&self, t: &[Rat], ambient_dim: usize) -> Vec<usize> {
        (0..self.subspaces.len())
            .filter(|&i| {
                let v = &self.subspaces[i];
                v.dim() > 0 && v.dim() < ambient_dim && super::is_zero_rat(&self.profiles[i].f1(t))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct EvaluatedMin {
    pub min: Rat,
    pub argmin_indices: Vec<usize>,
    pub exhaustive: bool,
}

/// Close a seed family under pairwise sum and intersection, deduplicating by
/// canonical form. Truncation by budget is reported, not an error.
pub fn lattice_closure(seeds: &[Subspace], budget: &SearchBudget) -> (Vec<Subspace>, bool) {
    let mut family: BTreeSet<Subspace> = seeds.iter().cloned().collect();
    let mut truncated = false;
    for _ in 0..budget.max_closure_rounds {
        let snapshot: Vec<Subspace> = family.iter().cloned().collect();
        let mut grew = false;
        'outer: for i in 0..snapshot.len() {
            for j in i + 1..snapshot.len() {
                let a = &snapshot[i];
                let b = &snapshot[j];
                let s = a.sum(b).expect("seeds share an ambient space");
                let x = a.intersect(b).expect("seeds share an ambient space");
                for candidate in [s, x] {
                    if family.len() >= budget.max_lattice_size {
                        truncated = true;
                        break 'outer;
                    }
                    grew |= family.insert(candidate);
                }
            }
        }
        if !grew || truncated {
            break;
        }
    }
    if family.len() > budget.max_lattice_size {
        truncated = true;
    }
    (family.into_iter().collect(), truncated)
}

/// Scan every subspace of `F_p^n` against the reduced maps, recording the
/// distinct dimension profiles and the first representative of each.
fn scan_prime(maps: &[RatMatrix], n: usize, p: u64) -> (PrimeScan, Vec<FpMatrix>) {
    let mut reduced = Vec::with_capacity(maps.len());
    for m in maps {
        match mod_p_reduce(m, p) {
            Ok(f) => reduced.push(f),
            Err(_) => {
                return (
                    PrimeScan {
                        p,
                        good: false,
                        completed: false,
                        subspaces_enumerated: 0,
                        profiles: Vec::new(),
                    },
                    Vec::new(),
                );
            }
        }
    }
    let mut seen: BTreeMap<(usize, Vec<usize>), FpMatrix> = BTreeMap::new();
    let mut count = 0u64;
    for basis in FpSubspaceIter::new(p, n) {
        count += 1;
        let dims: Vec<usize> = reduced.iter().map(|m| m.image_dim(&basis)).collect();
        seen.entry((basis.rows(), dims)).or_insert(basis);
    }
    let mut profiles = Vec::with_capacity(seen.len());
    let mut reps = Vec::with_capacity(seen.len());
    for ((dim_v, image_dims), rep) in seen {
        profiles.push(FpProfile {
            dim_v,
            image_dims,
            lifted_index: usize::MAX, // patched after the global dedup
        });
        reps.push(rep);
    }
    (
        PrimeScan {
            p,
            good: true,
            completed: true,
            subspaces_enumerated: count,
            profiles,
        },
        reps,
    )
}

/// Build the explored family for a datum.
///
/// `Domain::WithinKernel0` runs the whole search inside the coordinates of
/// `kernel(ℓ_0)` (a restricted problem of smaller ambient dimension) rather
/// than filtering a full search; explored subspaces are reported back in
/// ambient coordinates.
pub fn explore(datum: &CheckedDatum, domain: Domain, budget: &SearchBudget) -> Exploration {
    let embedding = match domain {
        Domain::AllOfH => None,
        Domain::WithinKernel0 => Some(datum.kernel0().clone()),
    };
    let working_dim = embedding
        .as_ref()
        .map_or(datum.ambient_dim(), |k| k.dim());

    // Maps in working coordinates.
    let working_maps: Vec<RatMatrix> = (0..datum.factor_count())
        .map(|j| match &embedding {
            None => datum.map(j).clone(),
            Some(k) => datum.map(j).mul(&k.basis().transpose()),
        })
        .collect();

    // Seeds: zero, the whole working space, the kernel of every factor map,
    // and (searching all of H in gut mode) the kernel of the bounded map.
    let mut seeds = vec![Subspace::zero(working_dim), Subspace::full(working_dim)];
    for m in &working_maps {
        seeds.push(kernel(m));
    }
    if domain == Domain::AllOfH && !datum.kernel0().is_full() {
        seeds.push(datum.kernel0().clone());
    }
    let (lattice, truncated) = lattice_closure(&seeds, budget);

    let mut working: BTreeSet<Subspace> = lattice.into_iter().collect();

    // Exhaustive prime-field scans, in parallel, merged in prime order.
    let mut scans: Vec<PrimeScan> = Vec::new();
    let mut scan_reps: Vec<Vec<FpMatrix>> = Vec::new();
    if working_dim <= budget.max_ambient_for_exhaustive_scan {
        let results: Vec<(PrimeScan, Vec<FpMatrix>)> = budget
            .primes
            .par_iter()
            .map(|&p| scan_prime(&working_maps, working_dim, p))
            .collect();
        for (scan, reps) in results {
            scans.push(scan);
            scan_reps.push(reps);
        }
    }
    for reps in &scan_reps {
        for rep in reps {
            working.insert(rep.lift_to_subspace());
        }
    }

    // Seeded random sampling with small integer entries.
    if working_dim >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.rng_seed);
        for _ in 0..budget.random_subspace_samples {
            let dim = rng.gen_range(1..working_dim);
            let rows: Vec<Vec<Rat>> = (0..dim)
                .map(|_| {
                    (0..working_dim)
                        .map(|_| Rat::from_integer(BigInt::from(rng.gen_range(-3i64..=3))))
                        .collect()
                })
                .collect();
            working.insert(Subspace::from_rows(working_dim, rows));
        }
    }

    // Back to ambient coordinates, then dedup again (distinct working
    // subspaces stay distinct under the embedding, but canonical forms are
    // recomputed).
    let subspaces: Vec<Subspace> = match &embedding {
        None => working.into_iter().collect(),
        Some(k) => working
            .into_iter()
            .map(|v| Subspace::from_spanning(&v.basis().mul(k.basis())))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };

    let profiles: Vec<DimProfile> = subspaces
        .iter()
        .map(|v| profile(datum, v).expect("explored subspaces live in the ambient space"))
        .collect();

    // Patch the lift indices now that the final ordering is fixed.
    let index_of = |s: &Subspace| {
        subspaces
            .binary_search(s)
            .expect("every lifted representative was inserted")
    };
    for (scan, reps) in scans.iter_mut().zip(&scan_reps) {
        for (fp, rep) in scan.profiles.iter_mut().zip(reps) {
            let lifted = rep.lift_to_subspace();
            let ambient = match &embedding {
                None => lifted,
                Some(k) => Subspace::from_spanning(&lifted.basis().mul(k.basis())),
            };
            fp.lifted_index = index_of(&ambient);
        }
    }

    Exploration {
        domain,
        subspaces,
        profiles,
        scans,
        truncated,
    }
}

/// Lift a scan representative and keep it only if the exact rational value
/// certifies the same strict violation (`f1 < 0`). A returned subspace is
/// unconditionally a valid witness candidate.
pub fn lift_witness(datum: &CheckedDatum, rep: &FpMatrix) -> Option<Subspace> {
    let lifted = rep.lift_to_subspace();
    if lifted.ambient_dim() != datum.ambient_dim() {
        return None;
    }
    let value = super::f1(datum, &lifted).ok()?;
    if value < Rat::from_integer(BigInt::from(0)) {
        Some(lifted)
    } else {
        None
    }
}
