//! Exact two-phase simplex over the rationals.
//!
//! Sizes here are tiny (tens of variables), so a dense tableau with Bland's
//! anti-cycling rule is the right tool: exact, simple, and guaranteed to
//! terminate.

use num_traits::{One, Signed, Zero};

use crate::ratlin::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

/// Minimize `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn solve_lp(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    for row in a {
        assert_eq!(row.len(), n);
    }

    // Tableau: m constraint rows over n structural + m artificial columns,
    // plus the right-hand side; constraint rows are sign-normalized so the
    // artificial basis is feasible.
    let total = n + m;
    let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Rat> = a[i]
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        row.resize(total, Rat::zero());
        row[n + i] = Rat::one();
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n..total).collect();

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![Rat::zero(); total + 1];
    for j in n..total {
        phase1[j] = Rat::one();
    }
    reduce_cost_row(&mut phase1, &tab, &basis);
    if !run_simplex(&mut tab, &mut basis, &mut phase1, total) {
        // Phase 1 is bounded below by zero, so this cannot happen.
        unreachable!("phase-1 objective is bounded");
    }
    if phase1[total].is_negative() {
        return LpOutcome::Infeasible;
    }

    // Pivot remaining artificials out of the basis where possible; a row
    // with no structural pivot candidate is redundant and harmless.
    for i in 0..m {
        if basis[i] < n {
            continue;
        }
        if let Some(col) = (0..n).find(|&j| !tab[i][j].is_zero()) {
            pivot(&mut tab, &mut basis, &mut phase1, i, col);
        }
    }

    // Phase 2 on the structural cost, with artificial columns frozen.
    let mut cost: Vec<Rat> = c.to_vec();
    cost.resize(total + 1, Rat::zero());
    reduce_cost_row(&mut cost, &tab, &basis);
    if !run_simplex_structural(&mut tab, &mut basis, &mut cost, n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![Rat::zero(); n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab[i][total].clone();
        }
    }
    let value = -cost[total].clone();
    LpOutcome::Optimal { x, value }
}

/// Zero out the reduced costs of the basic columns.
fn reduce_cost_row(cost: &mut [Rat], tab: &[Vec<Rat>], basis: &[usize]) {
    for (i, &bi) in basis.iter().enumerate() {
        if cost[bi].is_zero() {
            continue;
        }
        let factor = cost[bi].clone();
        for (cj, tj) in cost.iter_mut().zip(&tab[i]) {
            *cj -= &factor * tj;
        }
    }
}

fn pivot(tab: &mut [Vec<Rat>], basis: &mut [usize], cost: &mut [Rat], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v /= &p;
    }
    for i in 0..tab.len() {
        if i == row || tab[i][col].is_zero() {
            continue;
        }
        let factor = tab[i][col].clone();
        let (pivot_row, other) = if i < row {
            let (lo, hi) = tab.split_at_mut(row);
            (&hi[0], &mut lo[i])
        } else {
            let (lo, hi) = tab.split_at_mut(i);
            (&lo[row], &mut hi[0])
        };
        for (v, pv) in other.iter_mut().zip(pivot_row) {
            *v -= &factor * pv;
        }
    }
    if !cost[col].is_zero() {
        let factor = cost[col].clone();
        for (v, pv) in cost.iter_mut().zip(&tab[row]) {
            *v -= &factor * pv;
        }
    }
    basis[row] = col;
}

/// Bland-rule simplex over all `columns`. Returns false on unboundedness.
fn run_simplex(
    tab: &mut [Vec<Rat>],
    basis: &mut [usize],
    cost: &mut [Rat],
    columns: usize,
) -> bool {
    loop {
        let Some(col) = (0..columns).find(|&j| cost[j].is_negative()) else {
            return true;
        };
        let Some(row) = ratio_rule(tab, basis, col) else {
            return false;
        };
        pivot(tab, basis, cost, row, col);
    }
}

/// Same, but entering columns are restricted to the structural block so
/// artificials never re-enter in phase 2.
fn run_simplex_structural(
    tab: &mut [Vec<Rat>],
    basis: &mut [usize],
    cost: &mut [Rat],
    structural: usize,
) -> bool {
    loop {
        let Some(col) = (0..structural).find(|&j| cost[j].is_negative()) else {
            return true;
        };
        let Some(row) = ratio_rule(tab, basis, col) else {
            return false;
        };
        pivot(tab, basis, cost, row, col);
    }
}

/// Minimum-ratio leaving row; ties broken by smallest basis index (Bland).
fn ratio_rule(tab: &[Vec<Rat>], basis: &[usize], col: usize) -> Option<usize> {
    let rhs = tab[0].len() - 1;
    let mut best: Option<(Rat, usize, usize)> = None;
    for (i, row) in tab.iter().enumerate() {
        if !row[col].is_positive() {
            continue;
        }
        let ratio = &row[rhs] / &row[col];
        let key = (ratio, basis[i], i);
        best = match best {
            None => Some(key),
            Some(cur) if (key.0.clone(), key.1) < (cur.0.clone(), cur.1) => Some(key),
            Some(cur) => Some(cur),
        };
    }
    best.map(|(_, _, i)| i)
}

/// Exact feasibility of `A x = b, x ≥ 0`; returns a solution if one exists.
pub fn feasible_point(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.first().map_or(0, |r| r.len());
    match solve_lp(a, b, &vec![Rat::zero(); n]) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::{rat, rat_int, rat_one, rat_zero};

    #[test]
    fn minimizes_a_small_program() {
        // min -x - y  s.t.  x + y + s = 2, x - y + u = 1, all ≥ 0.
        let a = vec![
            vec![rat_one(), rat_one(), rat_one(), rat_zero()],
            vec![rat_one(), rat_int(-1), rat_zero(), rat_one()],
        ];
        let b = vec![rat_int(2), rat_int(1)];
        let c = vec![rat_int(-1), rat_int(-1), rat_zero(), rat_zero()];
        match solve_lp(&a, &b, &c) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat_int(-2)),
            other => panic!("expected optimum, found {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x = -1 with x ≥ 0.
        let a = vec![vec![rat_one()]];
        let b = vec![rat_int(-1)];
        let c = vec![rat_zero()];
        assert_eq!(solve_lp(&a, &b, &c), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        // min -x  s.t.  x - y = 0.
        let a = vec![vec![rat_one(), rat_int(-1)]];
        let b = vec![rat_zero()];
        let c = vec![rat_int(-1), rat_zero()];
        assert_eq!(solve_lp(&a, &b, &c), LpOutcome::Unbounded);
    }

    #[test]
    fn feasibility_finds_convex_weights() {
        // Express (1/2, 1/2) as a convex combination of (1,0), (0,1).
        let a = vec![
            vec![rat_one(), rat_one()],
            vec![rat_one(), rat_zero()],
            vec![rat_zero(), rat_one()],
        ];
        let b = vec![rat_one(), rat(1, 2), rat(1, 2)];
        let x = feasible_point(&a, &b).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 2)]);
    }
}
