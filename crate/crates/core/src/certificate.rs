//! Feasibility certificates and infeasibility witnesses.
//!
//! A certificate is a tree that replays the inductive proof of the global
//! inequality: Hölder base cases on one-dimensional spaces, splits along
//! critical subspaces, deletion of factors with zero exponent, and exact
//! convex interpolation between extreme exponent vectors. Every node stores
//! the datum it certifies, so the verifier re-derives each construction
//! locally and never searches.
//!
//! A scaling witness is a subspace whose dimension data violate the relevant
//! condition, stored together with the two blow-up exponents that quantify
//! how fast the ratio degenerates at large or small radii.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::datum::{
    datum_to_file, parse_datum_file, validate, CheckedDatum, DatumFile, Mode, ParsedDatum,
};
use crate::engine::{explore, f1, f2, Domain, Exploration, SearchBudget};
use crate::polytope::{constraints_from_profiles, convex_weights, enumerate_vertices};
use crate::ratlin::{
    image, kernel, parse_rat, quotient_map, rat_to_string, restrict_map, Rat, Subspace,
};

pub const CERT_FORMAT_VERSION: &str = "blcert-1";

/// One node of a feasibility proof tree, together with the datum it
/// certifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub datum: CheckedDatum,
    pub node: CertNode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertNode {
    /// One-dimensional ambient space with exponent reciprocals summing to
    /// one: the scalar Hölder inequality.
    HolderBase,
    /// A single factor with exponent one and an invertible map: a change of
    /// variables.
    InvertibleBase,
    /// Split along a proper nonzero critical subspace: the inner child works
    /// on the subspace, the outer child on its coordinate complement with
    /// the quotient maps. Factors whose image inside the subspace is zero
    /// are carried entirely by the outer child and vice versa; the retained
    /// indices are recorded so the verifier can re-derive both children.
    CriticalSplit {
        witness: Subspace,
        inner_factors: Vec<usize>,
        outer_factors: Vec<usize>,
        inner: Box<Certificate>,
        outer: Box<Certificate>,
    },
    /// A factor with exponent zero contributes only its supremum norm, so it
    /// can be deleted.
    DropFactor {
        factor: usize,
        child: Box<Certificate>,
    },
    /// Exact convex interpolation: the exponent vector is a weighted average
    /// of the children's exponent vectors over the same maps. The verifier
    /// checks only the weight arithmetic; interpolation of the underlying
    /// integrals is Hölder's inequality.
    ConvexCombination { terms: Vec<ConvexTerm> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexTerm {
    pub weight: Rat,
    pub exponents: Vec<Rat>,
    pub child: Certificate,
}

impl Certificate {
    pub fn depth(&self) -> usize {
        1 + match &self.node {
            CertNode::HolderBase | CertNode::InvertibleBase => 0,
            CertNode::CriticalSplit { inner, outer, .. } => inner.depth().max(outer.depth()),
            CertNode::DropFactor { child, .. } => child.depth(),
            CertNode::ConvexCombination { terms } => {
                terms.iter().map(|t| t.child.depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match &self.node {
            CertNode::HolderBase | CertNode::InvertibleBase => 0,
            CertNode::CriticalSplit { inner, outer, .. } => {
                inner.node_count() + outer.node_count()
            }
            CertNode::DropFactor { child, .. } => child.node_count(),
            CertNode::ConvexCombination { terms } => {
                terms.iter().map(|t| t.child.node_count()).sum()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Certificate construction
// ---------------------------------------------------------------------------

/// Both restricted problems induced by a critical subspace, with the parent
/// factor indices each child retains.
pub(crate) struct SplitData {
    pub inner: CheckedDatum,
    pub outer: CheckedDatum,
    pub inner_factors: Vec<usize>,
    pub outer_factors: Vec<usize>,
}

/// Construct the inner (restriction to `w`) and outer (quotient on the
/// coordinate complement of `w`) problems. Deterministic: all bases are the
/// canonical ones.
pub(crate) fn split_datum(datum: &CheckedDatum, w: &Subspace) -> Option<SplitData> {
    let m = datum.factor_count();
    let complement = w.complement();

    let mut inner_maps = Vec::new();
    let mut inner_t = Vec::new();
    let mut inner_factors = Vec::new();
    let mut outer_maps = Vec::new();
    let mut outer_t = Vec::new();
    let mut outer_factors = Vec::new();

    for j in 0..m {
        let map = datum.map(j);
        let u = image(map, w).ok()?;
        if u.dim() > 0 {
            inner_maps.push(restrict_map(map, w, &u).ok()?);
            inner_t.push(datum.t(j).clone());
            inner_factors.push(j);
        }
        if u.dim() < datum.target_dim(j) {
            let (quotient, _) = quotient_map(map, &u).ok()?;
            outer_maps.push(quotient.mul(&complement.basis().transpose()));
            outer_t.push(datum.t(j).clone());
            outer_factors.push(j);
        }
    }

    let inner = validate(crate::datum::BLDatum::new(
        w.dim(),
        inner_maps,
        crate::datum::ExponentVector::new(inner_t),
        Mode::Global,
    ))
    .ok()?;
    let outer = validate(crate::datum::BLDatum::new(
        complement.dim(),
        outer_maps,
        crate::datum::ExponentVector::new(outer_t),
        Mode::Global,
    ))
    .ok()?;
    Some(SplitData {
        inner,
        outer,
        inner_factors,
        outer_factors,
    })
}

/// Try to build a feasibility certificate for a global-mode datum whose
/// homogeneity gap vanishes and whose explored family shows no violation.
/// Returns `None` when any branch fails; the caller reports `Undecided`.
pub fn build_certificate(datum: &CheckedDatum, budget: &SearchBudget) -> Option<Certificate> {
    if !matches!(datum.mode(), Mode::Global) {
        return None;
    }
    let ex = explore(datum, Domain::AllOfH, budget);
    build_certificate_with_exploration(datum, &ex, budget)
}

/// Same as [`build_certificate`], reusing an existing exploration of the
/// datum's maps.
pub fn build_certificate_with_exploration(
    datum: &CheckedDatum,
    ex: &Exploration,
    budget: &SearchBudget,
) -> Option<Certificate> {
    let depth = datum.ambient_dim() + datum.factor_count();
    let cert = build_node(datum, ex, budget, depth)?;
    // The builder is trusted nowhere: every emitted certificate passes the
    // independent verifier before it leaves this module.
    verify_certificate(datum, &cert).ok()?;
    Some(cert)
}

fn build_node(
    datum: &CheckedDatum,
    ex: &Exploration,
    budget: &SearchBudget,
    depth: usize,
) -> Option<Certificate> {
    if depth == 0 {
        return None;
    }
    let t = datum.exponents().as_slice();
    if !datum.homogeneity_gap().is_zero() {
        return None;
    }
    let eval = ex.evaluate(t);
    if eval.min.is_negative() {
        return None;
    }

    let n = datum.ambient_dim();
    let m = datum.factor_count();

    // Base: Hölder on a line.
    if n == 1 {
        let sums_to_one = datum.exponents().sum().is_one();
        let shapes_ok = (0..m).all(|j| datum.target_dim(j) == 1 && !datum.map(j).is_zero());
        if sums_to_one && shapes_ok {
            return Some(Certificate {
                datum: datum.clone(),
                node: CertNode::HolderBase,
            });
        }
        return None;
    }

    // Case 1: split along the smallest explored critical subspace.
    let criticals = ex.critical_proper_nonzero(t, n);
    if let Some(&wi) = criticals.first() {
        let w = ex.subspaces[wi].clone();
        let split = split_datum(datum, &w)?;
        let inner_ex = explore(&split.inner, Domain::AllOfH, budget);
        let inner = build_node(&split.inner, &inner_ex, budget, depth - 1)?;
        let outer_ex = explore(&split.outer, Domain::AllOfH, budget);
        let outer = build_node(&split.outer, &outer_ex, budget, depth - 1)?;
        return Some(Certificate {
            datum: datum.clone(),
            node: CertNode::CriticalSplit {
                witness: w,
                inner_factors: split.inner_factors,
                outer_factors: split.outer_factors,
                inner: Box::new(inner),
                outer: Box::new(outer),
            },
        });
    }

    // Case 2: no critical subspace, so the exponent polytope (over the
    // explored constraints) is decided at its extreme points.
    let target_dims: Vec<usize> = (0..m).map(|j| datum.target_dim(j)).collect();
    let polytope = constraints_from_profiles(&target_dims, n, &ex.profiles, true);
    let vertices = enumerate_vertices(&polytope).ok()?;

    if vertices.vertices.iter().any(|v| v.as_slice() == t) {
        // The exponent vector is itself extreme. A critical split was ruled
        // out above, so either some coordinate vanishes or the single-factor
        // unit case applies.
        if let Some(i) = t.iter().position(|tj| tj.is_zero()) {
            let child_datum = datum.drop_factor(i).ok()?;
            let child_ex = explore(&child_datum, Domain::AllOfH, budget);
            let child = build_node(&child_datum, &child_ex, budget, depth - 1)?;
            return Some(Certificate {
                datum: datum.clone(),
                node: CertNode::DropFactor {
                    factor: i,
                    child: Box::new(child),
                },
            });
        }
        if m == 1 && t[0].is_one() && datum.map(0).is_invertible() {
            return Some(Certificate {
                datum: datum.clone(),
                node: CertNode::InvertibleBase,
            });
        }
        return None;
    }

    // Interior exponents: exact convex decomposition over the vertex set.
    let weights = convex_weights(&vertices.vertices, t)?;
    let mut terms = Vec::new();
    for (vertex, weight) in vertices.vertices.iter().zip(weights) {
        if weight.is_zero() {
            continue;
        }
        let child_datum = datum.with_exponents(vertex.clone()).ok()?;
        // Same maps, so the exploration (profiles are exponent-independent)
        // is reused as is.
        let child = build_node(&child_datum, ex, budget, depth - 1)?;
        terms.push(ConvexTerm {
            weight,
            exponents: vertex.clone(),
            child,
        });
    }
    if terms.is_empty() {
        return None;
    }
    Some(Certificate {
        datum: datum.clone(),
        node: CertNode::ConvexCombination { terms },
    })
}

// ---------------------------------------------------------------------------
// Certificate verification
// ---------------------------------------------------------------------------

/// A rejected certificate or witness: the first failing node and why.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("rejected at {path}: {reason}")]
pub struct Rejection {
    pub path: String,
    pub reason: String,
}

fn reject(path: &str, reason: impl Into<String>) -> Rejection {
    Rejection {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Accept iff every node's local conditions verify exactly. Child data are
/// re-derived from the parent datum and the recorded choices, then compared
/// entry for entry; no search is ever invoked.
pub fn verify_certificate(datum: &CheckedDatum, cert: &Certificate) -> Result<(), Rejection> {
    if cert.datum != *datum {
        return Err(reject("root", "certificate datum differs from the input"));
    }
    verify_node(cert, "root")
}

fn verify_node(cert: &Certificate, path: &str) -> Result<(), Rejection> {
    let datum = &cert.datum;
    if !matches!(datum.mode(), Mode::Global) {
        return Err(reject(path, "certificates cover global mode only"));
    }
    let n = datum.ambient_dim();
    let m = datum.factor_count();
    match &cert.node {
        CertNode::HolderBase => {
            if n != 1 {
                return Err(reject(path, "HolderBase requires a one-dimensional space"));
            }
            for j in 0..m {
                if datum.target_dim(j) != 1 {
                    return Err(reject(path, format!("factor {j} target is not a line")));
                }
                if datum.map(j).is_zero() {
                    return Err(reject(path, format!("factor {j} map is zero")));
                }
            }
            if !datum.exponents().sum().is_one() {
                return Err(reject(path, "exponent reciprocals do not sum to one"));
            }
            Ok(())
        }
        CertNode::InvertibleBase => {
            if m != 1 {
                return Err(reject(path, "InvertibleBase requires a single factor"));
            }
            if !datum.t(0).is_one() {
                return Err(reject(path, "InvertibleBase requires t = 1"));
            }
            if !datum.map(0).is_invertible() {
                return Err(reject(path, "factor map is not invertible"));
            }
            Ok(())
        }
        CertNode::CriticalSplit {
            witness,
            inner_factors,
            outer_factors,
            inner,
            outer,
        } => {
            if witness.ambient_dim() != n {
                return Err(reject(path, "witness lives in the wrong space"));
            }
            if witness.dim() == 0 || witness.dim() == n {
                return Err(reject(path, "witness must be proper and nonzero"));
            }
            let value = f1(datum, witness)
                .map_err(|e| reject(path, format!("profile computation failed: {e}")))?;
            if !value.is_zero() {
                return Err(reject(path, "split subspace is not critical"));
            }
            let split = split_datum(datum, witness)
                .ok_or_else(|| reject(path, "split construction failed"))?;
            if &split.inner_factors != inner_factors {
                return Err(reject(path, "recorded inner factor elision is wrong"));
            }
            if &split.outer_factors != outer_factors {
                return Err(reject(path, "recorded outer factor elision is wrong"));
            }
            if inner.datum != split.inner {
                return Err(reject(
                    path,
                    "inner child datum differs from the construction",
                ));
            }
            if outer.datum != split.outer {
                return Err(reject(
                    path,
                    "outer child datum differs from the construction",
                ));
            }
            verify_node(inner, &format!("{path}.inner"))?;
            verify_node(outer, &format!("{path}.outer"))
        }
        CertNode::DropFactor { factor, child } => {
            if *factor >= m {
                return Err(reject(path, "dropped factor index out of range"));
            }
            if !datum.t(*factor).is_zero() {
                return Err(reject(path, "dropped factor has nonzero exponent"));
            }
            let expected = datum
                .drop_factor(*factor)
                .map_err(|e| reject(path, format!("factor deletion failed: {e}")))?;
            if child.datum != expected {
                return Err(reject(
                    path,
                    "child datum is not the parent minus the factor",
                ));
            }
            verify_node(child, &format!("{path}.child"))
        }
        CertNode::ConvexCombination { terms } => {
            if terms.is_empty() {
                return Err(reject(path, "empty convex combination"));
            }
            let mut total = Rat::zero();
            let mut mixed = vec![Rat::zero(); m];
            for (k, term) in terms.iter().enumerate() {
                let term_path = format!("{path}.terms[{k}]");
                if !term.weight.is_positive() {
                    return Err(reject(&term_path, "weight is not positive"));
                }
                if term.exponents.len() != m {
                    return Err(reject(&term_path, "exponent vector has the wrong length"));
                }
                total += &term.weight;
                for (acc, e) in mixed.iter_mut().zip(&term.exponents) {
                    *acc += &term.weight * e;
                }
                let expected = datum
                    .with_exponents(term.exponents.clone())
                    .map_err(|e| reject(&term_path, format!("invalid exponents: {e}")))?;
                if term.child.datum != expected {
                    return Err(reject(
                        &term_path,
                        "child datum is not the parent with the term's exponents",
                    ));
                }
            }
            if !total.is_one() {
                return Err(reject(path, "weights do not sum to one"));
            }
            if mixed != datum.exponents().as_slice() {
                return Err(reject(
                    path,
                    "weighted exponents do not average to the parent's",
                ));
            }
            for (k, term) in terms.iter().enumerate() {
                verify_node(&term.child, &format!("{path}.terms[{k}]"))?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Scaling witnesses
// ---------------------------------------------------------------------------

/// Which radius limit exhibits the blow-up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Ratio grows like `R^big_radius_exponent` as the big radius grows.
    BigRadius,
    /// Ratio grows like `r^small_radius_exponent` as the small radius
    /// shrinks (the exponent is negative).
    SmallRadius,
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::BigRadius => "big_radius_blowup",
            Violation::SmallRadius => "small_radius_blowup",
        }
    }
}

/// A violating subspace with its blow-up exponents. `v_big = v ∩ kernel(ℓ_0)`
/// and `v = v_small ⊕ v_big`; `big_radius_exponent = dim v_big −
/// Σ_j t_j·dim ℓ_j(v_big)` and `small_radius_exponent = codim(v) −
/// Σ_j t_j·codim(ℓ_j(v))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingWitness {
    pub v: Subspace,
    pub v_big: Subspace,
    pub v_small: Subspace,
    pub big_radius_exponent: Rat,
    pub small_radius_exponent: Rat,
    pub violation: Violation,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error("the subspace does not violate any condition of the datum's mode")]
    NotAViolation,
    #[error("subspace lives in Q^{got}, datum in Q^{want}")]
    AmbientMismatch { got: usize, want: usize },
}

/// Preimage closure: the largest subspace with the same images as `u` under
/// every factor map. Blow-up slopes of the numerical family match the
/// witness exponents exactly on closed subspaces, so witnesses are closed
/// before their exponents are computed.
pub fn saturate(datum: &CheckedDatum, u: &Subspace) -> Subspace {
    let mut acc = Subspace::full(datum.ambient_dim());
    for j in 0..datum.factor_count() {
        let img = image(datum.map(j), u).expect("subspace of the ambient space");
        // quotient_map already composes the map with the projection, so its
        // kernel is exactly the preimage of the image subspace.
        let (quotient, _) =
            quotient_map(datum.map(j), &img).expect("image lives in the factor target");
        acc = acc
            .intersect(&kernel(&quotient))
            .expect("common ambient space");
    }
    acc
}

/// Direct-sum complement of `part` inside `whole`, by greedy basis
/// extension. Both arguments must satisfy `part ⊆ whole`.
fn complement_within(whole: &Subspace, part: &Subspace) -> Subspace {
    let mut span_rows: Vec<Vec<Rat>> = (0..part.dim())
        .map(|r| part.basis().row(r).to_vec())
        .collect();
    let mut small_rows: Vec<Vec<Rat>> = Vec::new();
    let mut rank = part.dim();
    for r in 0..whole.dim() {
        let candidate = whole.basis().row(r).to_vec();
        let mut trial = span_rows.clone();
        trial.push(candidate.clone());
        if Subspace::from_rows(whole.ambient_dim(), trial.clone()).dim() > rank {
            span_rows = trial;
            rank += 1;
            small_rows.push(candidate);
        }
    }
    Subspace::from_rows(whole.ambient_dim(), small_rows)
}

/// Build a scaling witness from a violating subspace.
///
/// The subspace is first closed under preimages (which preserves every image
/// dimension and only strengthens the violation). A big-radius witness is
/// preferred when the intersection with `kernel(ℓ_0)` is supercritical;
/// otherwise the small-scale condition `f2 < 0` is required.
pub fn build_witness(datum: &CheckedDatum, v: &Subspace) -> Result<ScalingWitness, WitnessError> {
    if v.ambient_dim() != datum.ambient_dim() {
        return Err(WitnessError::AmbientMismatch {
            got: v.ambient_dim(),
            want: datum.ambient_dim(),
        });
    }
    let kernel0 = datum.kernel0();
    let inside = v.intersect(kernel0).expect("same ambient space");
    let big = saturate(datum, &inside)
        .intersect(kernel0)
        .expect("same ambient space");
    let f1_big = f1(datum, &big).expect("same ambient space");
    if f1_big.is_negative() {
        let witness_v = big.clone();
        let small_exp = f2(datum, &witness_v).expect("same ambient space");
        return Ok(ScalingWitness {
            v: witness_v,
            v_small: Subspace::zero(datum.ambient_dim()),
            v_big: big,
            big_radius_exponent: -f1_big,
            small_radius_exponent: small_exp,
            violation: Violation::BigRadius,
        });
    }

    let closed = saturate(datum, v);
    let f2_closed = f2(datum, &closed).expect("same ambient space");
    if f2_closed.is_negative() {
        let v_big = closed.intersect(kernel0).expect("same ambient space");
        let v_small = complement_within(&closed, &v_big);
        let f1_big = f1(datum, &v_big).expect("same ambient space");
        return Ok(ScalingWitness {
            v: closed,
            v_big,
            v_small,
            big_radius_exponent: -f1_big,
            small_radius_exponent: f2_closed,
            violation: Violation::SmallRadius,
        });
    }
    Err(WitnessError::NotAViolation)
}

/// Recompute every field of a witness from scratch and check the claimed
/// violation sign. Accepts iff exact recomputation matches.
pub fn verify_witness(datum: &CheckedDatum, w: &ScalingWitness) -> Result<(), Rejection> {
    let path = "witness";
    if w.v.ambient_dim() != datum.ambient_dim() {
        return Err(reject(path, "subspace lives in the wrong space"));
    }
    let expected_big = w.v.intersect(datum.kernel0()).expect("checked ambient");
    if expected_big != w.v_big {
        return Err(reject(path, "v_big is not v ∩ kernel(ℓ_0)"));
    }
    let sum = w.v_small.sum(&w.v_big).expect("checked ambient");
    if sum != w.v {
        return Err(reject(path, "v_small + v_big does not reconstruct v"));
    }
    if !w
        .v_small
        .intersect(&w.v_big)
        .expect("checked ambient")
        .is_zero()
    {
        return Err(reject(path, "v_small and v_big overlap"));
    }
    let big_exp = -f1(datum, &w.v_big).expect("checked ambient");
    if big_exp != w.big_radius_exponent {
        return Err(reject(path, "big-radius exponent does not recompute"));
    }
    let small_exp = f2(datum, &w.v).expect("checked ambient");
    if small_exp != w.small_radius_exponent {
        return Err(reject(path, "small-radius exponent does not recompute"));
    }
    match w.violation {
        Violation::BigRadius => {
            if !big_exp.is_positive() {
                return Err(reject(path, "claimed big-radius blow-up has exponent ≤ 0"));
            }
        }
        Violation::SmallRadius => {
            if !small_exp.is_negative() {
                return Err(reject(path, "claimed small-radius blow-up has exponent ≥ 0"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub datum: DatumFile,
    pub node: CertNodeDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertNodeDto {
    HolderBase {},
    InvertibleBase {},
    CriticalSplit {
        witness: Vec<Vec<String>>,
        inner_factors: Vec<usize>,
        outer_factors: Vec<usize>,
        inner: Box<CertificateDto>,
        outer: Box<CertificateDto>,
    },
    DropFactor {
        factor: usize,
        child: Box<CertificateDto>,
    },
    ConvexCombination {
        terms: Vec<ConvexTermDto>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexTermDto {
    pub weight: String,
    pub exponents: Vec<String>,
    pub child: CertificateDto,
}

#[derive(Debug, thiserror::Error)]
pub enum CertFileError {
    #[error("malformed certificate file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported certificate version `{0}`")]
    Version(String),
    #[error("{0}")]
    Datum(#[from] crate::datum::DatumFileError),
    #[error("bad field: {0}")]
    Field(String),
}

fn subspace_to_rows(s: &Subspace) -> Vec<Vec<String>> {
    (0..s.dim())
        .map(|r| s.basis().row(r).iter().map(rat_to_string).collect())
        .collect()
}

fn subspace_from_rows(ambient: usize, rows: &[Vec<String>]) -> Result<Subspace, CertFileError> {
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != ambient {
            return Err(CertFileError::Field(format!(
                "subspace row has {} entries, ambient dimension is {ambient}",
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(ambient);
        for cell in row {
            out.push(
                parse_rat(cell).map_err(|e| CertFileError::Field(format!("subspace entry: {e}")))?,
            );
        }
        parsed.push(out);
    }
    Ok(Subspace::from_rows(ambient, parsed))
}

pub fn certificate_to_dto(cert: &Certificate, top: bool) -> CertificateDto {
    let node = match &cert.node {
        CertNode::HolderBase => CertNodeDto::HolderBase {},
        CertNode::InvertibleBase => CertNodeDto::InvertibleBase {},
        CertNode::CriticalSplit {
            witness,
            inner_factors,
            outer_factors,
            inner,
            outer,
        } => CertNodeDto::CriticalSplit {
            witness: subspace_to_rows(witness),
            inner_factors: inner_factors.clone(),
            outer_factors: outer_factors.clone(),
            inner: Box::new(certificate_to_dto(inner, false)),
            outer: Box::new(certificate_to_dto(outer, false)),
        },
        CertNode::DropFactor { factor, child } => CertNodeDto::DropFactor {
            factor: *factor,
            child: Box::new(certificate_to_dto(child, false)),
        },
        CertNode::ConvexCombination { terms } => CertNodeDto::ConvexCombination {
            terms: terms
                .iter()
                .map(|t| ConvexTermDto {
                    weight: rat_to_string(&t.weight),
                    exponents: t.exponents.iter().map(rat_to_string).collect(),
                    child: certificate_to_dto(&t.child, false),
                })
                .collect(),
        },
    };
    CertificateDto {
        version: top.then(|| CERT_FORMAT_VERSION.to_string()),
        datum: datum_to_file(cert.datum.datum()),
        node,
    }
}

pub fn certificate_from_dto(dto: &CertificateDto, top: bool) -> Result<Certificate, CertFileError> {
    if top {
        match dto.version.as_deref() {
            Some(CERT_FORMAT_VERSION) => {}
            Some(other) => return Err(CertFileError::Version(other.to_string())),
            None => return Err(CertFileError::Version("missing".to_string())),
        }
    }
    let parsed = parse_datum_file(&dto.datum)?;
    let ParsedDatum::Continuum(raw) = parsed else {
        return Err(CertFileError::Field(
            "certificate datum must be a continuum datum".into(),
        ));
    };
    let datum = validate(raw).map_err(crate::datum::DatumFileError::Validation)?;
    let ambient = datum.ambient_dim();
    let node = match &dto.node {
        CertNodeDto::HolderBase {} => CertNode::HolderBase,
        CertNodeDto::InvertibleBase {} => CertNode::InvertibleBase,
        CertNodeDto::CriticalSplit {
            witness,
            inner_factors,
            outer_factors,
            inner,
            outer,
        } => CertNode::CriticalSplit {
            witness: subspace_from_rows(ambient, witness)?,
            inner_factors: inner_factors.clone(),
            outer_factors: outer_factors.clone(),
            inner: Box::new(certificate_from_dto(inner, false)?),
            outer: Box::new(certificate_from_dto(outer, false)?),
        },
        CertNodeDto::DropFactor { factor, child } => CertNode::DropFactor {
            factor: *factor,
            child: Box::new(certificate_from_dto(child, false)?),
        },
        CertNodeDto::ConvexCombination { terms } => {
            let mut out = Vec::with_capacity(terms.len());
            for term in terms {
                let weight = parse_rat(&term.weight)
                    .map_err(|e| CertFileError::Field(format!("weight: {e}")))?;
                let mut exponents = Vec::with_capacity(term.exponents.len());
                for e in &term.exponents {
                    exponents
                        .push(parse_rat(e).map_err(|e| CertFileError::Field(format!("exponent: {e}")))?);
                }
                out.push(ConvexTerm {
                    weight,
                    exponents,
                    child: certificate_from_dto(&term.child, false)?,
                });
            }
            CertNode::ConvexCombination { terms: out }
        }
    };
    Ok(Certificate { datum, node })
}

pub fn certificate_to_json(cert: &Certificate) -> String {
    serde_json::to_string_pretty(&certificate_to_dto(cert, true))
        .expect("certificate serialization cannot fail")
}

pub fn certificate_from_json(text: &str) -> Result<Certificate, CertFileError> {
    let dto: CertificateDto = serde_json::from_str(text)?;
    certificate_from_dto(&dto, true)
}

/// Witness serialization for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessDto {
    pub violation: String,
    pub v: Vec<Vec<String>>,
    pub v_big: Vec<Vec<String>>,
    pub v_small: Vec<Vec<String>>,
    pub big_radius_exponent: String,
    pub small_radius_exponent: String,
}

pub fn witness_to_dto(w: &ScalingWitness) -> WitnessDto {
    WitnessDto {
        violation: w.violation.name().to_string(),
        v: subspace_to_rows(&w.v),
        v_big: subspace_to_rows(&w.v_big),
        v_small: subspace_to_rows(&w.v_small),
        big_radius_exponent: rat_to_string(&w.big_radius_exponent),
        small_radius_exponent: rat_to_string(&w.small_radius_exponent),
    }
}

pub fn witness_from_dto(ambient: usize, dto: &WitnessDto) -> Result<ScalingWitness, CertFileError> {
    let violation = match dto.violation.as_str() {
        "big_radius_blowup" => Violation::BigRadius,
        "small_radius_blowup" => Violation::SmallRadius,
        other => {
            return Err(CertFileError::Field(format!(
                "unknown violation `{other}`"
            )))
        }
    };
    Ok(ScalingWitness {
        v: subspace_from_rows(ambient, &dto.v)?,
        v_big: subspace_from_rows(ambient, &dto.v_big)?,
        v_small: subspace_from_rows(ambient, &dto.v_small)?,
        big_radius_exponent: parse_rat(&dto.big_radius_exponent)
            .map_err(|e| CertFileError::Field(e.to_string()))?,
        small_radius_exponent: parse_rat(&dto.small_radius_exponent)
            .map_err(|e| CertFileError::Field(e.to_string()))?,
        violation,
    })
}

#[cfg(test)]
mod tests;
