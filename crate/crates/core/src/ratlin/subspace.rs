//! Canonical subspaces of `Q^n` and the maps between them.
//!
//! A subspace is stored as the unique reduced row-echelon basis of its span,
//! so equality of subspaces is entrywise equality of the stored bases and
//! ordered collections of subspaces deduplicate for free.

use std::fmt;

use num_traits::{One, Zero};

use super::matrix::{dims_text, rref, RatMatrix};
use super::{Rat, RatlinError};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    // Invariant: reduced row-echelon form with no zero rows.
    basis: RatMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: RatMatrix::zero(0, ambient_dim),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: RatMatrix::identity(ambient_dim),
        }
    }

    /// Canonicalize the row span of an arbitrary matrix.
    pub fn from_spanning(m: &RatMatrix) -> Self {
        let reduced = rref(m);
        let mut rows = Vec::with_capacity(reduced.rank);
        for r in 0..reduced.rank {
            rows.push(reduced.echelon.row(r).to_vec());
        }
        Subspace {
            ambient_dim: m.cols(),
            basis: RatMatrix::from_rows(m.cols(), rows),
        }
    }

    pub fn from_rows(ambient_dim: usize, rows: Vec<Vec<Rat>>) -> Self {
        Self::from_spanning(&RatMatrix::from_rows(ambient_dim, rows))
    }

    pub fn from_i64_rows(ambient_dim: usize, rows: &[&[i64]]) -> Self {
        if rows.is_empty() {
            return Self::zero(ambient_dim);
        }
        Self::from_spanning(&RatMatrix::from_i64_rows(rows))
    }

    /// Line spanned by the `i`-th standard basis vector.
    pub fn coordinate_axis(ambient_dim: usize, i: usize) -> Self {
        let mut row = vec![Rat::zero(); ambient_dim];
        row[i] = Rat::one();
        Subspace {
            ambient_dim,
            basis: RatMatrix::from_rows(ambient_dim, vec![row]),
        }
    }

    /// Span of the standard basis vectors indexed by `coords`.
    pub fn coordinate_span(ambient_dim: usize, coords: &[usize]) -> Self {
        let mut sorted = coords.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let rows = sorted
            .iter()
            .map(|&i| {
                let mut row = vec![Rat::zero(); ambient_dim];
                row[i] = Rat::one();
                row
            })
            .collect();
        Subspace {
            ambient_dim,
            basis: RatMatrix::from_rows(ambient_dim, rows),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// The canonical reduced row-echelon basis.
    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        // Rows are in echelon form, so the pivot of row r is its first
        // nonzero entry.
        (0..self.dim())
            .map(|r| {
                self.basis
                    .row(r)
                    .iter()
                    .position(|e| !e.is_zero())
                    .expect("no zero rows in a canonical basis")
            })
            .collect()
    }

    pub fn contains_vector(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        solve_in_rowspace(&self.basis, v).is_some()
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        (0..other.dim()).all(|r| self.contains_vector(other.basis.row(r)))
    }

    /// Sum of two subspaces of the same ambient space.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace, RatlinError> {
        self.check_ambient(other)?;
        Ok(Subspace::from_spanning(&self.basis.vstack(&other.basis)))
    }

    /// Intersection via the Zassenhaus double-block reduction: rows
    /// `(a | a)` for this subspace and `(b | 0)` for the other; echelon rows
    /// with zero left half carry the intersection in their right half.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, RatlinError> {
        self.check_ambient(other)?;
        let n = self.ambient_dim;
        let top = self.basis.hstack(&self.basis);
        let bottom = other.basis.hstack(&RatMatrix::zero(other.basis.rows(), n));
        let reduced = rref(&top.vstack(&bottom));
        let mut rows = Vec::new();
        for r in 0..reduced.rank {
            let row = reduced.echelon.row(r);
            if row[..n].iter().all(|e| e.is_zero()) {
                rows.push(row[n..].to_vec());
            }
        }
        Ok(Subspace::from_rows(n, rows))
    }

    /// Deterministic direct complement: the span of the standard basis
    /// vectors at the non-pivot columns of the canonical basis.
    pub fn complement(&self) -> Subspace {
        let pivots = self.pivot_cols();
        let free: Vec<usize> = (0..self.ambient_dim)
            .filter(|c| !pivots.contains(c))
            .collect();
        Subspace::coordinate_span(self.ambient_dim, &free)
    }

    /// Coordinates of the given ambient vectors in this subspace's basis.
    /// The basis is echelon, so coordinates read off the pivot columns.
    pub fn coordinates_of(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        solve_in_rowspace(&self.basis, v)
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), RatlinError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(RatlinError::DimensionMismatch(format!(
                "ambient dimensions {} and {} differ",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} of Q^{}) {:?}",
            self.dim(),
            self.ambient_dim,
            self.basis
        )
    }
}

/// Express `v` as a combination of the rows of an echelon-form matrix, or
/// `None` if `v` lies outside the row space. Coefficients are read off the
/// pivot columns and verified by exact substitution.
pub fn solve_in_rowspace(echelon: &RatMatrix, v: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(v.len(), echelon.cols());
    let mut coeffs = Vec::with_capacity(echelon.rows());
    for r in 0..echelon.rows() {
        let pivot = echelon
            .row(r)
            .iter()
            .position(|e| !e.is_zero())
            .expect("echelon basis has no zero rows");
        // Pivot entries are 1 and their columns are cleared elsewhere.
        coeffs.push(v[pivot].clone());
    }
    let mut residual = v.to_vec();
    for (r, coeff) in coeffs.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        for (res, e) in residual.iter_mut().zip(echelon.row(r)) {
            *res -= coeff * e;
        }
    }
    if residual.iter().all(|e| e.is_zero()) {
        Some(coeffs)
    } else {
        None
    }
}

/// Null space of `M` as a canonical subspace of the column domain.
pub fn kernel(m: &RatMatrix) -> Subspace {
    let reduced = rref(m);
    let n = m.cols();
    let pivots = &reduced.pivot_cols;
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut rows = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Rat::zero(); n];
        v[f] = Rat::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -reduced.echelon.get(i, f).clone();
        }
        rows.push(v);
    }
    Subspace::from_rows(n, rows)
}

/// Image of a subspace under a matrix, as a canonical subspace of the
/// codomain.
pub fn image(m: &RatMatrix, v: &Subspace) -> Result<Subspace, RatlinError> {
    if v.ambient_dim() != m.cols() {
        return Err(RatlinError::DimensionMismatch(format!(
            "map {} cannot act on a subspace of Q^{}",
            dims_text(m),
            v.ambient_dim()
        )));
    }
    // Rows of basis * M^T are the images of the basis vectors.
    Ok(Subspace::from_spanning(&v.basis().mul(&m.transpose())))
}

/// Matrix of `M` restricted to `domain`, expressed in the stored bases of
/// `domain` and `target`. Errors unless `M(domain) ⊆ target`.
pub fn restrict_map(
    m: &RatMatrix,
    domain: &Subspace,
    target: &Subspace,
) -> Result<RatMatrix, RatlinError> {
    if domain.ambient_dim() != m.cols() || target.ambient_dim() != m.rows() {
        return Err(RatlinError::DimensionMismatch(format!(
            "map {} with domain in Q^{} and target in Q^{}",
            dims_text(m),
            domain.ambient_dim(),
            target.ambient_dim()
        )));
    }
    let mut out = RatMatrix::zero(target.dim(), domain.dim());
    for k in 0..domain.dim() {
        let w = m.apply(domain.basis().row(k));
        let coords = target.coordinates_of(&w).ok_or(RatlinError::ImageNotInTarget)?;
        for (i, c) in coords.into_iter().enumerate() {
            out.set(i, k, c);
        }
    }
    Ok(out)
}

/// Compose `M` with the projection onto the coordinate complement of
/// `killed` along `killed`, returning the composed matrix (in the
/// complement's basis) together with that complement.
pub fn quotient_map(
    m: &RatMatrix,
    killed: &Subspace,
) -> Result<(RatMatrix, Subspace), RatlinError> {
    if killed.ambient_dim() != m.rows() {
        return Err(RatlinError::DimensionMismatch(format!(
            "killed subspace lives in Q^{} but the map {} targets Q^{}",
            killed.ambient_dim(),
            dims_text(m),
            m.rows()
        )));
    }
    let complement = killed.complement();
    let pivots = killed.pivot_cols();
    let free: Vec<usize> = (0..killed.ambient_dim())
        .filter(|c| !pivots.contains(c))
        .collect();
    let mut out = RatMatrix::zero(complement.dim(), m.cols());
    for col in 0..m.cols() {
        // Column of M, decomposed as killed-part plus complement-part. The
        // killed basis is echelon, so its coefficients sit at pivot rows.
        let w: Vec<Rat> = (0..m.rows()).map(|r| m.get(r, col).clone()).collect();
        let mut residual = w.clone();
        for (i, &p) in pivots.iter().enumerate() {
            let coeff = w[p].clone();
            if coeff.is_zero() {
                continue;
            }
            for (res, e) in residual.iter_mut().zip(killed.basis().row(i)) {
                *res -= &coeff * e;
            }
        }
        for (i, &f) in free.iter().enumerate() {
            out.set(i, col, residual[f].clone());
        }
    }
    Ok((out, complement))
}
