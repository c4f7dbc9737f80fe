//! The exponent polytope: the set of exponent vectors `t ∈ [0,1]^m`
//! satisfying every dimension constraint discovered so far, optionally
//! intersected with the homogeneity hyperplane. Extreme points are
//! enumerated exactly and classified by which constraints pin them down.
//!
//! The polytope is always *relative to the explored profiles*: an outer
//! relaxation of the true exponent region. Downstream users treat relaxation
//! vertices that fail certification as dead ends, never as errors.

mod lp;

pub use lp::{feasible_point, solve_lp, LpOutcome};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::engine::DimProfile;
use crate::ratlin::{rref, Rat, RatMatrix};

/// One linear constraint `Σ_j coeffs_j · t_j ≥ rhs`, built from a dimension
/// profile: `coeffs_j = dim ℓ_j(V)`, `rhs = dim V`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PolyRow {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

#[derive(Clone, Debug)]
pub struct BLPolytope {
    pub m: usize,
    pub inequalities: Vec<PolyRow>,
    /// Homogeneity hyperplane `Σ_j n_j · t_j = n`, when requested.
    pub equality: Option<PolyRow>,
    /// The constraint list comes from explored profiles only, so the
    /// polytope is an outer relaxation of the true exponent region.
    pub relative_to_explored: bool,
}

/// Which constraint is active at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintRef {
    Row(usize),
    BoxLower(usize),
    BoxUpper(usize),
    Equality,
}

#[derive(Clone, Debug)]
pub struct VertexSet {
    pub vertices: Vec<Vec<Rat>>,
    /// For each vertex, every constraint active there (not just a defining
    /// subset), sorted.
    pub tight_sets: Vec<Vec<ConstraintRef>>,
    pub relative_to_explored: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexLabel {
    /// Some proper nonzero subspace's constraint row is active: a critical
    /// subspace exists for these exponents.
    CriticalSubspaceTight(Vec<usize>),
    HasZeroCoordinate(Vec<usize>),
    /// One factor with `t = 1`.
    SingleFactorUnit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("factor count {m} exceeds the vertex-enumeration limit {max}")]
    DimensionTooLarge { m: usize, max: usize },
}

const MAX_FACTORS: usize = 10;

fn int_rat(v: usize) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Assemble the polytope from dimension profiles.
///
/// The zero subspace contributes a vacuous row and the full space is the
/// homogeneity row itself, so both are excluded from the inequality list.
/// Duplicate rows and rows implied coordinatewise by another row are
/// dropped.
pub fn constraints_from_profiles(
    target_dims: &[usize],
    ambient_dim: usize,
    profiles: &[DimProfile],
    include_homogeneity: bool,
) -> BLPolytope {
    let m = target_dims.len();
    let mut rows: Vec<PolyRow> = Vec::new();
    for p in profiles {
        assert_eq!(p.image_dims.len(), m, "profile from a different datum");
        if p.dim_v == 0 {
            continue;
        }
        if include_homogeneity && p.dim_v == ambient_dim {
            continue;
        }
        rows.push(PolyRow {
            coeffs: p.image_dims.iter().map(|&d| int_rat(d)).collect(),
            rhs: int_rat(p.dim_v),
        });
    }
    rows.sort();
    rows.dedup();

    // Row A implies row B coordinatewise when A has smaller-or-equal
    // coefficients and a larger-or-equal right-hand side (t ≥ 0 throughout).
    let dominated = |b: &PolyRow, rows: &[PolyRow]| {
        rows.iter().any(|a| {
            a != b
                && a.rhs >= b.rhs
                && a.coeffs.iter().zip(&b.coeffs).all(|(ac, bc)| ac <= bc)
        })
    };
    let kept: Vec<PolyRow> = rows
        .iter()
        .filter(|r| !dominated(r, &rows))
        .cloned()
        .collect();

    BLPolytope {
        m,
        inequalities: kept,
        equality: include_homogeneity.then(|| PolyRow {
            coeffs: target_dims.iter().map(|&d| int_rat(d)).collect(),
            rhs: int_rat(ambient_dim),
        }),
        relative_to_explored: true,
    }
}

impl BLPolytope {
    /// Every candidate constraint, read as an equality `coeffs·t = rhs` for
    /// vertex solving.
    fn candidates(&self) -> Vec<(Vec<Rat>, Rat, ConstraintRef)> {
        let mut out = Vec::new();
        for (i, row) in self.inequalities.iter().enumerate() {
            out.push((row.coeffs.clone(), row.rhs.clone(), ConstraintRef::Row(i)));
        }
        for j in 0..self.m {
            let mut unit = vec![Rat::zero(); self.m];
            unit[j] = Rat::one();
            out.push((unit.clone(), Rat::zero(), ConstraintRef::BoxLower(j)));
            out.push((unit, Rat::one(), ConstraintRef::BoxUpper(j)));
        }
        out
    }

    pub fn contains(&self, t: &[Rat]) -> bool {
        assert_eq!(t.len(), self.m);
        if t.iter().any(|v| v < &Rat::zero() || v > &Rat::one()) {
            return false;
        }
        if let Some(eq) = &self.equality {
            if dot(&eq.coeffs, t) != eq.rhs {
                return false;
            }
        }
        self.inequalities
            .iter()
            .all(|row| dot(&row.coeffs, t) >= row.rhs)
    }

    fn tight_set(&self, t: &[Rat]) -> Vec<ConstraintRef> {
        let mut tight = Vec::new();
        for (i, row) in self.inequalities.iter().enumerate() {
            if dot(&row.coeffs, t) == row.rhs {
                tight.push(ConstraintRef::Row(i));
            }
        }
        for j in 0..self.m {
            if t[j].is_zero() {
                tight.push(ConstraintRef::BoxLower(j));
            }
            if t[j].is_one() {
                tight.push(ConstraintRef::BoxUpper(j));
            }
        }
        if self.equality.is_some() {
            tight.push(ConstraintRef::Equality);
        }
        tight.sort();
        tight
    }
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact vertex enumeration by solving every square subsystem of candidate
/// constraints (the homogeneity row, when present, is always included),
/// keeping the feasible unique solutions. Brute force is exact and entirely
/// adequate at this scale.
pub fn enumerate_vertices(p: &BLPolytope) -> Result<VertexSet, PolytopeError> {
    if p.m > MAX_FACTORS {
        return Err(PolytopeError::DimensionTooLarge {
            m: p.m,
            max: MAX_FACTORS,
        });
    }
    let candidates = p.candidates();
    let forced: Vec<(Vec<Rat>, Rat)> = p
        .equality
        .iter()
        .map(|eq| (eq.coeffs.clone(), eq.rhs.clone()))
        .collect();
    let choose = p.m.saturating_sub(forced.len());

    let mut vertices: std::collections::BTreeSet<Vec<Rat>> = std::collections::BTreeSet::new();
    let mut combo: Vec<usize> = (0..choose).collect();
    if choose > candidates.len() {
        return Ok(VertexSet {
            vertices: Vec::new(),
            tight_sets: Vec::new(),
            relative_to_explored: p.relative_to_explored,
        });
    }
    loop {
        // Assemble the square system: forced equalities plus the chosen
        // candidate rows.
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(p.m);
        for (coeffs, rhs) in &forced {
            let mut r = coeffs.clone();
            r.push(rhs.clone());
            rows.push(r);
        }
        for &i in &combo {
            let (coeffs, rhs, _) = &candidates[i];
            let mut r = coeffs.clone();
            r.push(rhs.clone());
            rows.push(r);
        }
        if let Some(t) = solve_square(&rows, p.m) {
            if p.contains(&t) {
                vertices.insert(t);
            }
        }

        // Next combination, lexicographic.
        if choose == 0 {
            break;
        }
        let mut i = choose;
        loop {
            if i == 0 {
                combo.clear();
                break;
            }
            i -= 1;
            if combo[i] < candidates.len() - (choose - i) {
                combo[i] += 1;
                for j in i + 1..choose {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
        if combo.is_empty() {
            break;
        }
    }

    let vertices: Vec<Vec<Rat>> = vertices.into_iter().collect();
    let tight_sets = vertices.iter().map(|v| p.tight_set(v)).collect();
    Ok(VertexSet {
        vertices,
        tight_sets,
        relative_to_explored: p.relative_to_explored,
    })
}

/// Solve an augmented system `[A | b]` with `m` unknowns; `None` unless the
/// solution exists and is unique.
fn solve_square(rows: &[Vec<Rat>], m: usize) -> Option<Vec<Rat>> {
    let aug = RatMatrix::from_rows(m + 1, rows.to_vec());
    let reduced = rref(&aug);
    if reduced.pivot_cols.contains(&m) {
        return None; // inconsistent
    }
    if reduced.rank < m {
        return None; // underdetermined
    }
    let mut t = vec![Rat::zero(); m];
    for (i, &col) in reduced.pivot_cols.iter().enumerate() {
        t[col] = reduced.echelon.get(i, m).clone();
    }
    Some(t)
}

/// Classify a vertex by what pins it: active profile rows (critical
/// subspaces), zero coordinates, or the single-factor unit case. Every
/// vertex of a homogeneity-constrained polytope built from a critical
/// ambient datum receives at least one label.
pub fn classify_vertex(p: &BLPolytope, v: &[Rat]) -> Vec<VertexLabel> {
    let mut labels = Vec::new();
    let tight_rows: Vec<usize> = (0..p.inequalities.len())
        .filter(|&i| dot(&p.inequalities[i].coeffs, v) == p.inequalities[i].rhs)
        .collect();
    if !tight_rows.is_empty() {
        labels.push(VertexLabel::CriticalSubspaceTight(tight_rows));
    }
    let zeros: Vec<usize> = (0..p.m).filter(|&j| v[j].is_zero()).collect();
    if !zeros.is_empty() {
        labels.push(VertexLabel::HasZeroCoordinate(zeros));
    }
    if p.m == 1 && v[0].is_one() {
        labels.push(VertexLabel::SingleFactorUnit);
    }
    labels
}

/// Exact nonnegative weights expressing `target` as a convex combination of
/// `points`, or `None` when `target` lies outside their hull.
pub fn convex_weights(points: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    if points.is_empty() {
        return None;
    }
    let m = target.len();
    let k = points.len();
    let mut a: Vec<Vec<Rat>> = Vec::with_capacity(m + 1);
    a.push(vec![Rat::one(); k]);
    for j in 0..m {
        a.push(points.iter().map(|p| p[j].clone()).collect());
    }
    let mut b = vec![Rat::one()];
    b.extend(target.iter().cloned());
    feasible_point(&a, &b)
}
