//! Standard example data: the classical inequalities as ready-made
//! instances. Used by tests, the command-line examples, and the Python
//! bindings' smoke checks.

use std::collections::BTreeSet;

use crate::datum::{
    BLDatum, DiscreteDatum, DiscreteFactor, ExponentVector, FinnerDatum, FinnerIndex, IndexClass,
    Mode,
};
use crate::ratlin::{rat, Rat, RatMatrix};

/// The map that forgets coordinate `j` of `Q^n`.
pub fn forget_coordinate(n: usize, j: usize) -> RatMatrix {
    let mut m = RatMatrix::zero(n - 1, n);
    let mut row = 0;
    for c in 0..n {
        if c == j {
            continue;
        }
        m.set(row, c, crate::ratlin::rat_one());
        row += 1;
    }
    m
}

/// Loomis-Whitney datum on `Q^n`: the `n` coordinate-forgetting projections
/// with a shared exponent reciprocal.
pub fn loomis_whitney(n: usize, t: Rat) -> BLDatum {
    let maps = (0..n).map(|j| forget_coordinate(n, j)).collect();
    BLDatum::new(
        n,
        maps,
        ExponentVector::new(vec![t; n]),
        Mode::Global,
    )
}

/// Loomis-Whitney with the balanced exponents `p_j = n − 1`.
pub fn loomis_whitney_balanced(n: usize) -> BLDatum {
    loomis_whitney(n, rat(1, (n - 1) as i64))
}

/// Loomis-Whitney with an arbitrary exponent vector.
pub fn loomis_whitney_with(n: usize, t: &[Rat]) -> BLDatum {
    let maps = (0..n).map(|j| forget_coordinate(n, j)).collect();
    BLDatum::new(n, maps, ExponentVector::new(t.to_vec()), Mode::Global)
}

/// Convolution-shaped datum on `Q^2`: maps `x`, `y`, `x − y`.
pub fn young(t: &[Rat], mode: Mode) -> BLDatum {
    BLDatum::new(
        2,
        vec![
            RatMatrix::from_i64_rows(&[&[1, 0]]),
            RatMatrix::from_i64_rows(&[&[0, 1]]),
            RatMatrix::from_i64_rows(&[&[1, -1]]),
        ],
        ExponentVector::new(t.to_vec()),
        mode,
    )
}

/// `m` identity factors on `Q^1`.
pub fn holder(t: &[Rat]) -> BLDatum {
    BLDatum::new(
        1,
        vec![RatMatrix::identity(1); t.len()],
        ExponentVector::new(t.to_vec()),
        Mode::Global,
    )
}

/// The discrete analogue of the convolution datum: `G = Z^2` with the
/// homomorphisms `x`, `y`, `x − y`.
pub fn young_discrete(t: &[Rat]) -> DiscreteDatum {
    DiscreteDatum {
        free_rank: 2,
        torsion: vec![],
        factors: vec![
            DiscreteFactor {
                hom: crate::ratlin::IntMatrix::from_i64_rows(&[&[1, 0]]),
                torsion: vec![],
            },
            DiscreteFactor {
                hom: crate::ratlin::IntMatrix::from_i64_rows(&[&[0, 1]]),
                torsion: vec![],
            },
            DiscreteFactor {
                hom: crate::ratlin::IntMatrix::from_i64_rows(&[&[1, -1]]),
                torsion: vec![],
            },
        ],
        exponents: ExponentVector::new(t.to_vec()),
    }
}

/// Loomis-Whitney as product-structure data: `n` indices, factor `j`
/// supported on everything but index `j`, all indices general.
pub fn loomis_whitney_finner(n: usize, t: Rat) -> FinnerDatum {
    let indices = (0..n)
        .map(|i| FinnerIndex {
            id: format!("x{i}"),
            class: IndexClass::General,
        })
        .collect();
    let supports = (0..n)
        .map(|j| (0..n).filter(|&i| i != j).collect::<BTreeSet<usize>>())
        .collect();
    FinnerDatum {
        indices,
        supports,
        exponents: ExponentVector::new(vec![t; n]),
    }
}
