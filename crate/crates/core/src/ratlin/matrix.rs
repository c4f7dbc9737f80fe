//! Dense row-major matrices over `Q` and `Z`, reduced row-echelon form, and
//! integer Smith normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{rat_to_string, Rat, RatlinError};

/// Dense matrix of exact rationals. Zero rows and zero columns are legal;
/// a `0×k` or `k×0` matrix represents a map to or from the zero space.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rat>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        RatMatrix { rows, cols, entries }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Rat>>) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            assert_eq!(row.len(), cols, "ragged row");
            entries.extend(row.iter().cloned());
        }
        RatMatrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    /// Integer literal constructor, used throughout tests and fixtures.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_integer(BigInt::from(v))).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rat) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = RatMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).clone();
                    out.set(r, c, cur + a * b);
                }
            }
        }
        out
    }

    /// Apply the matrix to a column vector.
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols, "vector length must equal cols");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.cols, "column counts must agree");
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        RatMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.rows, other.rows, "row counts must agree");
        let mut out = RatMatrix::zero(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        out
    }

    pub fn submatrix_cols(&self, col_range: std::ops::Range<usize>) -> RatMatrix {
        let mut out = RatMatrix::zero(self.rows, col_range.len());
        for r in 0..self.rows {
            for (i, c) in col_range.clone().enumerate() {
                out.set(r, i, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }

    /// `true` when the matrix is square with full rank.
    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Exact determinant by fraction-free-ish Gaussian elimination.
    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rat::one();
        }
        let mut m = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero());
            let Some(pr) = pivot else {
                return Rat::zero();
            };
            if pr != col {
                for c in 0..n {
                    let a = m.get(col, c).clone();
                    let b = m.get(pr, c).clone();
                    m.set(col, c, b);
                    m.set(pr, c, a);
                }
                det = -det;
            }
            let p = m.get(col, col).clone();
            det *= p.clone();
            for r in col + 1..n {
                let factor = m.get(r, col) / &p;
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c) - &factor * m.get(col, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(rat_to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of reduced row-echelon elimination.
#[derive(Debug, Clone)]
pub struct RrefResult {
    pub echelon: RatMatrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

/// Unique reduced row-echelon form: pivots are 1, pivot columns are cleared
/// above and below, zero rows sink to the bottom.
pub fn rref(m: &RatMatrix) -> RrefResult {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivot_cols = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        let Some(pr) = (pivot_row..rows).find(|&r| !a.get(r, col).is_zero()) else {
            continue;
        };
        if pr != pivot_row {
            for c in 0..cols {
                let x = a.get(pivot_row, c).clone();
                let y = a.get(pr, c).clone();
                a.set(pivot_row, c, y);
                a.set(pr, c, x);
            }
        }
        let pivot = a.get(pivot_row, col).clone();
        for c in col..cols {
            let v = a.get(pivot_row, c) / &pivot;
            a.set(pivot_row, c, v);
        }
        for r in 0..rows {
            if r == pivot_row || a.get(r, col).is_zero() {
                continue;
            }
            let factor = a.get(r, col).clone();
            for c in col..cols {
                let v = a.get(r, c) - &factor * a.get(pivot_row, c);
                a.set(r, c, v);
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
    }
    let rank = pivot_cols.len();
    RrefResult {
        echelon: a,
        pivot_cols,
        rank,
    }
}

/// Dense integer matrix, used for homomorphisms between free abelian groups.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged row");
            entries.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.entries[r * self.cols + c] = value;
    }

    /// View over `Q`, for rank computations and datum conversion.
    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix::from_entries(
            self.rows,
            self.cols,
            self.entries.iter().map(|v| Rat::from_integer(v.clone())).collect(),
        )
    }
}

/// Smith normal form data: `invariant_factors` are positive with
/// `d_1 | d_2 | …`, and `rank` is their count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithResult {
    pub invariant_factors: Vec<BigInt>,
    pub rank: usize,
}

/// Diagonalize by elementary row/column operations, then repair the
/// divisibility chain with gcd/lcm folding.
pub fn smith_normal_form(m: &IntMatrix) -> SmithResult {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let steps = rows.min(cols);
    let mut diag: Vec<BigInt> = Vec::new();

    for t in 0..steps {
        // Pivot: the nonzero entry of smallest magnitude in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if a.get(r, c).is_zero() {
                    continue;
                }
                match pivot {
                    None => pivot = Some((r, c)),
                    Some((pr, pc)) => {
                        if a.get(r, c).abs() < a.get(pr, pc).abs() {
                            pivot = Some((r, c));
                        }
                    }
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        swap_rows(&mut a, t, pr);
        swap_cols(&mut a, t, pc);

        loop {
            // Clear column t below the pivot, re-pivoting on remainders.
            let mut dirty = false;
            for r in t + 1..rows {
                if a.get(r, t).is_zero() {
                    continue;
                }
                let q = div_round(a.get(r, t), a.get(t, t));
                row_sub_mul(&mut a, r, t, &q);
                if !a.get(r, t).is_zero() {
                    swap_rows(&mut a, t, r);
                    dirty = true;
                }
            }
            for c in t + 1..cols {
                if a.get(t, c).is_zero() {
                    continue;
                }
                let q = div_round(a.get(t, c), a.get(t, t));
                col_sub_mul(&mut a, c, t, &q);
                if !a.get(t, c).is_zero() {
                    swap_cols(&mut a, t, c);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Pivot must divide every remaining entry; if not, fold the
            // offending row in and restart the clearing pass.
            let mut offender = None;
            'scan: for r in t + 1..rows {
                for c in t + 1..cols {
                    if !(a.get(r, c) % a.get(t, t)).is_zero() {
                        offender = Some(r);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(r) => {
                    row_add(&mut a, t, r);
                }
                None => break,
            }
        }
        diag.push(a.get(t, t).abs());
    }

    let mut factors: Vec<BigInt> = diag.into_iter().filter(|d| !d.is_zero()).collect();
    // gcd/lcm bubble keeps the products of prefixes invariant, so this
    // converges to the unique divisibility chain.
    let n = factors.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                if (&factors[j] % &factors[i]).is_zero() {
                    continue;
                }
                let g = factors[i].gcd(&factors[j]);
                let l = &factors[i] / &g * &factors[j];
                factors[i] = g;
                factors[j] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let rank = factors.len();
    SmithResult {
        invariant_factors: factors,
        rank,
    }
}

fn swap_rows(a: &mut IntMatrix, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    for c in 0..a.cols {
        let x = a.get(r1, c).clone();
        let y = a.get(r2, c).clone();
        a.set(r1, c, y);
        a.set(r2, c, x);
    }
}

fn swap_cols(a: &mut IntMatrix, c1: usize, c2: usize) {
    if c1 == c2 {
        return;
    }
    for r in 0..a.rows {
        let x = a.get(r, c1).clone();
        let y = a.get(r, c2).clone();
        a.set(r, c1, y);
        a.set(r, c2, x);
    }
}

/// `row_r -= q * row_src`
fn row_sub_mul(a: &mut IntMatrix, r: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for c in 0..a.cols {
        let v = a.get(r, c) - q * a.get(src, c);
        a.set(r, c, v);
    }
}

/// `col_c -= q * col_src`
fn col_sub_mul(a: &mut IntMatrix, c: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for r in 0..a.rows {
        let v = a.get(r, c) - q * a.get(r, src);
        a.set(r, c, v);
    }
}

/// `row_dst += row_src`
fn row_add(a: &mut IntMatrix, dst: usize, src: usize) {
    for c in 0..a.cols {
        let v = a.get(dst, c) + a.get(src, c);
        a.set(dst, c, v);
    }
}

/// Round-to-nearest quotient so remainders shrink by at least half.
fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_rem(d);
    if &r.abs() * 2 > d.abs() {
        if (r.is_negative()) == (d.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

pub(crate) fn dims_text(m: &RatMatrix) -> String {
    format!("{}x{}", m.rows(), m.cols())
}

#[allow(dead_code)]
pub(crate) fn mismatch(msg: impl Into<String>) -> RatlinError {
    RatlinError::DimensionMismatch(msg.into())
}
