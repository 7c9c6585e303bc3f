//! Exact phase-I simplex for `A x = b, x >= 0`.
//!
//! Dense tableau over arbitrary-precision rationals with Bland's rule, so it
//! terminates and never rounds. Infeasible systems come back with a Farkas
//! vector `y` such that `y·A_j <= 0` for every column and `y·b > 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    /// A basic feasible solution, one entry per column.
    Feasible(Vec<BigRational>),
    /// Farkas vector, one entry per row.
    Infeasible(Vec<BigRational>),
}

pub(crate) fn big(numer: i128, denom: i128) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Decides feasibility of `A x = b, x >= 0`. Requires `b >= 0`.
pub(crate) fn solve_feasibility(a: &[Vec<BigRational>], b: &[BigRational]) -> LpOutcome {
    let rows = a.len();
    assert_eq!(rows, b.len(), "row count mismatch");
    assert!(b.iter().all(|v| !v.is_negative()), "rhs must be non-negative");
    let cols = a.first().map_or(0, Vec::len);
    let width = cols + rows + 1;
    let rhs = width - 1;

    let mut tab: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| {
            let mut row = Vec::with_capacity(width);
            row.extend(a[r].iter().cloned());
            row.extend((0..rows).map(|k| if k == r { big(1, 1) } else { BigRational::zero() }));
            row.push(b[r].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced-cost row for min sum(artificials); the last entry holds -objective.
    let mut cost: Vec<BigRational> = vec![BigRational::zero(); width];
    for row in &tab {
        for j in 0..cols {
            cost[j] -= &row[j];
        }
        cost[rhs] -= &row[rhs];
    }

    while let Some(enter) = (0..rhs).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..rows {
            if tab[r][enter].is_positive() {
                let ratio = &tab[r][rhs] / &tab[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && basis[r] < basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // Phase I is bounded below by zero, so an entering column always has
        // a positive pivot candidate.
        let (pr, _) = leave.expect("phase I objective is bounded");
        pivot(&mut tab, &mut cost, pr, enter);
        basis[pr] = enter;
    }

    if cost[rhs].is_zero() {
        let mut x = vec![BigRational::zero(); cols];
        for (r, &j) in basis.iter().enumerate() {
            if j < cols {
                x[j] = tab[r][rhs].clone();
            }
        }
        LpOutcome::Feasible(x)
    } else {
        // y = c_B B^{-1}; B^{-1} sits in the artificial block of the tableau.
        let y = (0..rows)
            .map(|k| {
                basis
                    .iter()
                    .enumerate()
                    .filter(|&(_, &j)| j >= cols)
                    .fold(BigRational::zero(), |acc, (r, _)| acc + &tab[r][cols + k])
            })
            .collect();
        LpOutcome::Infeasible(y)
    }
}

fn pivot(tab: &mut [Vec<BigRational>], cost: &mut [BigRational], pr: usize, pc: usize) {
    let p = tab[pr][pc].clone();
    for v in tab[pr].iter_mut() {
        *v /= &p;
    }
    let pivot_row = tab[pr].clone();
    for (r, row) in tab.iter_mut().enumerate() {
        if r == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            *v -= &f * pv;
        }
    }
    if !cost[pc].is_zero() {
        let f = cost[pc].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v -= &f * pv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> BigRational {
        big(n, d)
    }

    #[test]
    fn finds_convex_weights() {
        // x0 + x1 = 1, x1 = 1/3
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(0, 1), q(1, 1)]];
        let b = vec![q(1, 1), q(1, 3)];
        assert_eq!(
            solve_feasibility(&a, &b),
            LpOutcome::Feasible(vec![q(2, 3), q(1, 3)])
        );
    }

    #[test]
    fn infeasible_returns_farkas_vector() {
        // x0 = 1, x0 = 2
        let a = vec![vec![q(1, 1)], vec![q(1, 1)]];
        let b = vec![q(1, 1), q(2, 1)];
        let LpOutcome::Infeasible(y) = solve_feasibility(&a, &b) else {
            panic!("expected infeasible");
        };
        let ya = &y[0] + &y[1];
        let yb = &y[0] + &y[1] * q(2, 1);
        assert!(!ya.is_positive());
        assert!(yb.is_positive());
    }

    #[test]
    fn degenerate_zero_rhs() {
        let a = vec![vec![q(1, 1), q(-1, 1)], vec![q(0, 1), q(1, 1)]];
        let b = vec![q(0, 1), q(0, 1)];
        assert_eq!(
            solve_feasibility(&a, &b),
            LpOutcome::Feasible(vec![q(0, 1), q(0, 1)])
        );
    }
}
