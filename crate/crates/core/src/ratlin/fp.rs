//! Small prime-field matrices and exhaustive enumeration of `F_p^n`
//! subspaces in reduced-echelon form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::matrix::RatMatrix;
use super::subspace::Subspace;
use super::{Rat, RatlinError};

/// Dense matrix over `F_p` for a small prime `p`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct FpMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u64) {
        self.entries[r * self.cols + c] = value % self.p;
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = FpMatrix::zero(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.p, other.p);
        assert_eq!(self.cols, other.rows);
        let mut out = FpMatrix::zero(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = (out.get(r, c) + a * other.get(k, c)) % self.p;
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// In-place Gaussian elimination; returns the rank.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let p = a.p;
        let mut pivot_row = 0usize;
        for col in 0..a.cols {
            if pivot_row >= a.rows {
                break;
            }
            let Some(pr) = (pivot_row..a.rows).find(|&r| a.get(r, col) != 0) else {
                continue;
            };
            if pr != pivot_row {
                for c in 0..a.cols {
                    let x = a.get(pivot_row, c);
                    let y = a.get(pr, c);
                    a.set(pivot_row, c, y);
                    a.set(pr, c, x);
                }
            }
            let inv = mod_inverse(a.get(pivot_row, col), p);
            for c in col..a.cols {
                a.set(pivot_row, c, a.get(pivot_row, c) * inv % p);
            }
            for r in pivot_row + 1..a.rows {
                let factor = a.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..a.cols {
                    let v = (a.get(r, c) + (p - factor) * a.get(pivot_row, c)) % p;
                    a.set(r, c, v);
                }
            }
            pivot_row += 1;
        }
        pivot_row
    }

    /// Rank of the image of the row space of `basis` under this map.
    pub fn image_dim(&self, basis: &FpMatrix) -> usize {
        basis.mul(&self.transpose()).rank()
    }

    /// Entrywise lift to `Q`, reading residues as integers in `[0, p)`.
    /// A reduced-echelon matrix over `F_p` lifts to a reduced-echelon matrix
    /// over `Q` (pivot entries are exactly 0 or 1), so the lift of an
    /// enumerated subspace basis is already canonical.
    pub fn lift_to_rational(&self) -> RatMatrix {
        RatMatrix::from_entries(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .map(|&e| Rat::from_integer(BigInt::from(e)))
                .collect(),
        )
    }

    pub fn lift_to_subspace(&self) -> Subspace {
        Subspace::from_spanning(&self.lift_to_rational())
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p is a small prime, so Fermat exponentiation is plenty.
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Entrywise reduction of a rational matrix mod `p`.
///
/// Fails with `BadPrimeDenominator` when `p` divides a denominator and with
/// `BadPrimeRankDrop` when the reduction has smaller rank than the rational
/// matrix; either way the caller should pick another prime.
pub fn mod_p_reduce(m: &RatMatrix, p: u64) -> Result<FpMatrix, RatlinError> {
    if !is_prime(p) {
        return Err(RatlinError::NotPrime(p));
    }
    let pb = BigInt::from(p);
    let mut out = FpMatrix::zero(p, m.rows(), m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let e = m.get(r, c);
            if e.denom().mod_floor(&pb).is_zero() {
                return Err(RatlinError::BadPrimeDenominator { p });
            }
            let num = e.numer().mod_floor(&pb).to_u64().expect("residue fits in u64");
            let den = e.denom().mod_floor(&pb).to_u64().expect("residue fits in u64");
            out.set(r, c, num * mod_inverse(den, p) % p);
        }
    }
    let rational_rank = m.rank();
    let fp_rank = out.rank();
    if fp_rank < rational_rank {
        return Err(RatlinError::BadPrimeRankDrop {
            p,
            rational_rank,
            fp_rank,
        });
    }
    Ok(out)
}

/// Iterator over every subspace of `F_p^n`, produced as reduced-echelon
/// basis matrices: dimensions ascending, pivot-column sets in lexicographic
/// order, free entries in odometer order. The order is deterministic.
pub struct FpSubspaceIter {
    p: u64,
    n: usize,
    dim: usize,
    pivots: Option<Vec<usize>>,
    free_positions: Vec<(usize, usize)>,
    free_values: Vec<u64>,
    exhausted_fill: bool,
}

impl FpSubspaceIter {
    pub fn new(p: u64, n: usize) -> Self {
        let mut it = FpSubspaceIter {
            p,
            n,
            dim: 0,
            pivots: Some(Vec::new()),
            free_positions: Vec::new(),
            free_values: Vec::new(),
            exhausted_fill: false,
        };
        it.reset_fill();
        it
    }

    fn reset_fill(&mut self) {
        self.free_positions.clear();
        if let Some(pivots) = &self.pivots {
            for (i, &pc) in pivots.iter().enumerate() {
                for c in pc + 1..self.n {
                    if !pivots.contains(&c) {
                        self.free_positions.push((i, c));
                    }
                }
            }
        }
        self.free_values = vec![0; self.free_positions.len()];
        self.exhausted_fill = false;
    }

    fn advance_pivots(&mut self) {
        // Next k-combination of {0..n-1} in lexicographic order, rolling
        // over to the first combination of the next dimension.
        let pivots = self.pivots.as_mut().expect("advancing a live iterator");
        let k = pivots.len();
        let n = self.n;
        let mut i = k;
        loop {
            if i == 0 {
                self.dim += 1;
                if self.dim > n {
                    self.pivots = None;
                } else {
                    *self.pivots.as_mut().unwrap() = (0..self.dim).collect();
                }
                break;
            }
            i -= 1;
            if pivots[i] < n - (k - i) {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
        if self.pivots.is_some() {
            self.reset_fill();
        }
    }

    fn current(&self) -> FpMatrix {
        let pivots = self.pivots.as_ref().expect("current on a live iterator");
        let mut m = FpMatrix::zero(self.p, pivots.len(), self.n);
        for (i, &pc) in pivots.iter().enumerate() {
            m.set(i, pc, 1);
        }
        for (idx, &(r, c)) in self.free_positions.iter().enumerate() {
            m.set(r, c, self.free_values[idx]);
        }
        m
    }
}

impl Iterator for FpSubspaceIter {
    type Item = FpMatrix;

    fn next(&mut self) -> Option<FpMatrix> {
        self.pivots.as_ref()?;
        if self.exhausted_fill {
            self.advance_pivots();
            self.pivots.as_ref()?;
        }
        let out = self.current();
        // Odometer increment over free entries.
        let mut i = 0;
        loop {
            if i == self.free_values.len() {
                self.exhausted_fill = true;
                break;
            }
            self.free_values[i] += 1;
            if self.free_values[i] < self.p {
                break;
            }
            self.free_values[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

/// Number of subspaces of `F_p^n`, by direct enumeration. Exposed for
/// diagnostics; tests check it against the Gaussian-binomial formula.
pub fn subspace_count(p: u64, n: usize) -> u64 {
    FpSubspaceIter::new(p, n).count() as u64
}
