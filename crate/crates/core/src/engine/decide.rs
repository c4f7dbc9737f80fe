//! Mode dispatch: evaluate the conditions of the relevant finiteness
//! theorem over the explored family and produce a verdict.

use num_traits::{Signed, Zero};

use crate::certificate::{build_certificate_with_exploration, build_witness, Certificate, ScalingWitness};
use crate::datum::{CheckedDatum, Mode};
use crate::ratlin::{mod_p_reduce, FpMatrix, Rat, Subspace};

use super::explore::{explore, Exploration};
use super::{DimProfile, Domain, EngineError, SearchBudget};

/// Evidence attached to a `Feasible` verdict. Global mode always carries a
/// verified certificate; the other modes carry the exhaustiveness level the
/// scans achieved.
#[derive(Clone, Debug)]
pub enum FeasibleEvidence {
    Certificate(Box<Certificate>),
    ConditionsVerified { scanned_primes: Vec<u64> },
}

/// What the engine explored before giving up, for `Undecided` verdicts.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub explored_subspaces: usize,
    pub truncated: bool,
    pub best_min_f1: Option<Rat>,
    pub best_min_f2: Option<Rat>,
    pub scanned_primes: Vec<u64>,
    pub reason: String,
}

/// The decision trichotomy. `Infeasible` always carries a rationally
/// re-verified witness; `Feasible` always carries either a certificate or an
/// exhaustiveness marker; everything else is an honest `Undecided`.
#[derive(Clone, Debug)]
pub enum Verdict {
    Feasible(FeasibleEvidence),
    Infeasible(ScalingWitness),
    Undecided(Diagnostics),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Feasible(_) => "feasible",
            Verdict::Infeasible(_) => "infeasible",
            Verdict::Undecided(_) => "undecided",
        }
    }
}

/// Result of a minimum-of-`f1` search.
#[derive(Clone, Debug)]
pub struct MinF1 {
    pub explored_min: Rat,
    pub witnesses: Vec<Subspace>,
    pub exhaustive: bool,
}

/// Minimum of `f1` over the explored family: lattice closure, verified
/// prime-field scan lifts, and random samples. `exhaustive` is set only when
/// at least two good-prime full scans completed and every scan minimizer
/// lifted with equal exact value.
pub fn min_f1(datum: &CheckedDatum, domain: Domain, budget: &SearchBudget) -> MinF1 {
    let ex = explore(datum, domain, budget);
    let eval = ex.evaluate(datum.exponents().as_slice());
    MinF1 {
        explored_min: eval.min,
        witnesses: eval
            .argmin_indices
            .iter()
            .map(|&i| ex.subspaces[i].clone())
            .collect(),
        exhaustive: eval.exhaustive,
    }
}

/// All explored proper nonzero critical subspaces, sorted by dimension then
/// canonical basis order.
pub fn critical_subspaces(datum: &CheckedDatum, budget: &SearchBudget) -> Vec<Subspace> {
    let ex = explore(datum, Domain::AllOfH, budget);
    ex.critical_proper_nonzero(datum.exponents().as_slice(), datum.ambient_dim())
        .into_iter()
        .map(|i| ex.subspaces[i].clone())
        .collect()
}

/// Outcome of one full Grassmannian scan of `F_p^n`.
#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub min_f1: Rat,
    pub argmin_profiles: Vec<DimProfile>,
    pub representatives: Vec<FpMatrix>,
    pub subspaces_enumerated: u64,
}

/// Enumerate every subspace of `F_p^n` and evaluate the `f1` analogue with
/// the reduced maps. The prime must be good for the datum (no denominator
/// hits, no rank drops) and the ambient dimension within the exhaustive-scan
/// limit.
pub fn grassmannian_scan_mod_p(
    datum: &CheckedDatum,
    p: u64,
) -> Result<ScanOutcome, EngineError> {
    let n = datum.ambient_dim();
    let max = SearchBudget::default().max_ambient_for_exhaustive_scan;
    if n > max {
        return Err(EngineError::AmbientTooLarge { n, max });
    }
    let mut reduced = Vec::with_capacity(datum.factor_count());
    for j in 0..datum.factor_count() {
        reduced.push(mod_p_reduce(datum.map(j), p)?);
    }
    let t = datum.exponents().as_slice();
    let mut best: Option<Rat> = None;
    let mut argmins: Vec<(DimProfile, FpMatrix)> = Vec::new();
    let mut count = 0u64;
    for basis in crate::ratlin::FpSubspaceIter::new(p, n) {
        count += 1;
        let profile = DimProfile {
            dim_v: basis.rows(),
            image_dims: reduced.iter().map(|m| m.image_dim(&basis)).collect(),
            within_kernel0: false,
        };
        let value = profile.f1(t);
        match &best {
            Some(cur) if value > *cur => {}
            Some(cur) if value == *cur => {
                if !argmins.iter().any(|(p0, _)| p0 == &profile) {
                    argmins.push((profile, basis));
                }
            }
            _ => {
                best = Some(value);
                argmins = vec![(profile, basis)];
            }
        }
    }
    let (argmin_profiles, representatives) = argmins.into_iter().unzip();
    Ok(ScanOutcome {
        min_f1: best.expect("the scan always sees the zero subspace"),
        argmin_profiles,
        representatives,
        subspaces_enumerated: count,
    })
}

fn scanned_primes(ex: &Exploration) -> Vec<u64> {
    ex.scans
        .iter()
        .filter(|s| s.good && s.completed)
        .map(|s| s.p)
        .collect()
}

fn infeasible_at(datum: &CheckedDatum, v: &Subspace) -> Option<Verdict> {
    build_witness(datum, v).ok().map(Verdict::Infeasible)
}

/// Decide feasibility. Mode dispatch:
///
/// - global: homogeneity gap must vanish and `f1 ≥ 0` on all subspaces;
///   passing conditions trigger a certificate build.
/// - local: `f2 ≥ 0` on all subspaces.
/// - gut: `f1 ≥ 0` on subspaces of `kernel(ℓ_0)` and `f2 ≥ 0` everywhere.
/// - discrete/amalgam: `f1 ≥ 0` on all subspaces, no homogeneity constraint.
///
/// Every `Infeasible` carries a witness re-verified over `Q` on emission.
pub fn decide(datum: &CheckedDatum, budget: &SearchBudget) -> Verdict {
    match datum.mode() {
        Mode::Global => decide_global(datum, budget),
        Mode::Local => decide_small_scale_only(datum, budget),
        Mode::Gut(_) => decide_gut(datum, budget),
        Mode::Discrete | Mode::Amalgam => decide_large_scale_only(datum, budget),
    }
}

fn decide_global(datum: &CheckedDatum, budget: &SearchBudget) -> Verdict {
    let gap = datum.homogeneity_gap();
    let n = datum.ambient_dim();
    if gap.is_positive() {
        // f1(H) = −c < 0: the whole space is supercritical.
        if let Some(v) = infeasible_at(datum, &Subspace::full(n)) {
            return v;
        }
    }
    if gap.is_negative() {
        // f2({0}) = c < 0: scaling kills the inequality at small radii.
        if let Some(v) = infeasible_at(datum, &Subspace::zero(n)) {
            return v;
        }
    }
    let ex = explore(datum, Domain::AllOfH, budget);
    let eval = ex.evaluate(datum.exponents().as_slice());
    if eval.min.is_negative() {
        if let Some(v) = infeasible_at(datum, &ex.subspaces[eval.argmin_indices[0]]) {
            return v;
        }
    }
    if !gap.is_zero() || eval.min.is_negative() {
        // A violation exists but witness construction failed; report
        // honestly rather than claiming feasibility.
        return Verdict::Undecided(Diagnostics {
            explored_subspaces: ex.subspaces.len(),
            truncated: ex.truncated,
            best_min_f1: Some(eval.min),
            best_min_f2: None,
            scanned_primes: scanned_primes(&ex),
            reason: "violation found but witness construction failed".into(),
        });
    }
    match build_certificate_with_exploration(datum, &ex, budget) {
        Some(cert) => Verdict::Feasible(FeasibleEvidence::Certificate(Box::new(cert))),
        None => Verdict::Undecided(Diagnostics {
            explored_subspaces: ex.subspaces.len(),
            truncated: ex.truncated,
            best_min_f1: Some(eval.min),
            best_min_f2: None,
            scanned_primes: scanned_primes(&ex),
            reason: "conditions hold on the explored family but no certificate was found".into(),
        }),
    }
}

fn decide_small_scale_only(datum: &CheckedDatum, budget: &SearchBudget) -> Verdict {
    let gap = datum.homogeneity_gap();
    let ex = explore(datum, Domain::AllOfH, budget);
    let eval = ex.evaluate(datum.exponents().as_slice());
    let min_f2 = &eval.min + &gap;
    if min_f2.is_negative() {
        if let Some(v) = infeasible_at(datum, &ex.subspaces[eval.argmin_indices[0]]) {
            return v;
        }
    }
    if eval.exhaustive && !min_f2.is_negative() {
        return Verdict::Feasible(FeasibleEvidence::ConditionsVerified {
            scanned_primes: scanned_primes(&ex),
        });
    }
    Verdict::Undecided(Diagnostics {
        explored_subspaces: ex.subspaces.len(),
        truncated: ex.truncated,
        best_min_f1: Some(eval.min.clone()),
        best_min_f2: Some(min_f2),
        scanned_primes: scanned_primes(&ex),
        reason: "conditions hold on the explored family but the scan is not exhaustive".into(),
    })
}

fn decide_gut(datum: &CheckedDatum, budget: &SearchBudget) -> Verdict {
    let gap = datum.homogeneity_gap();
    let t = datum.exponents().as_slice();

    // Large-scale condition: f1 ≥ 0 inside kernel(ℓ_0).
    let ex0 = explore(datum, Domain::WithinKernel0, budget);
    let eval0 = ex0.evaluate(t);
    if eval0.min.is_negative() {
        if let Some(v) = infeasible_at(datum, &ex0.subspaces[eval0.argmin_indices[0]]) {
            return v;
        }
    }

    // Small-scale condition: f2 ≥ 0 everywhere.
    let ex = explore(datum, Domain::AllOfH, budget);
    let eval = ex.evaluate(t);
    let min_f2 = &eval.min + &gap;
    if min_f2.is_negative() {
        if let Some(v) = infeasible_at(datum, &ex.subspaces[eval.argmin_indices[0]]) {
            return v;
        }
    }

    if !eval0.min.is_negative() && !min_f2.is_negative() && eval0.exhaustive && eval.exhaustive {
        return Verdict::Feasible(FeasibleEvidence::ConditionsVerified {
            scanned_primes: scanned_primes(&ex),
        });
    }
    Verdict::Undecided(Diagnostics {
        explored_subspaces: ex0.subspaces.len() + ex.subspaces.len(),
        truncated: ex0.truncated || ex.truncated,
        best_min_f1: Some(eval0.min),
        best_min_f2: Some(min_f2),
        scanned_primes: scanned_primes(&ex),
        reason: "conditions hold on the explored family but the scan is not exhaustive".into(),
    })
}

fn decide_large_scale_only(datum: &CheckedDatum, budget: &SearchBudget) -> Verdict {
    let ex = explore(datum, Domain::AllOfH, budget);
    let eval = ex.evaluate(datum.exponents().as_slice());
    if eval.min.is_negative() {
        if let Some(v) = infeasible_at(datum, &ex.subspaces[eval.argmin_indices[0]]) {
            return v;
        }
    }
    if eval.exhaustive && !eval.min.is_negative() {
        return Verdict::Feasible(FeasibleEvidence::ConditionsVerified {
            scanned_primes: scanned_primes(&ex),
        });
    }
    Verdict::Undecided(Diagnostics {
        explored_subspaces: ex.subspaces.len(),
        truncated: ex.truncated,
        best_min_f1: Some(eval.min),
        best_min_f2: None,
        scanned_primes: scanned_primes(&ex),
        reason: "conditions hold on the explored family but the scan is not exhaustive".into(),
    })
}
