//! Phase-one simplex over an arbitrary [`Scalar`], with Bland's rule.
//!
//! With [`crate::Rational`] every pivot is exact, so an `Infeasible`
//! answer is a certified one rather than a numerical judgement.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{FeasibilityResult, LinearFeasibilityProblem};

/// Pivot budget multiplier: a solve may take at most
/// `BUDGET_FACTOR · (vars + constraints)²` pivots.
pub const BUDGET_FACTOR: usize = 64;

struct Tableau<T> {
    // m rows of [A | I | b], artificial columns n..n+m
    rows: Vec<Vec<T>>,
    // reduced costs of the phase-one objective, last entry = −objective
    cost: Vec<T>,
    basis: Vec<usize>,
    width: usize,
}

impl<T: Scalar> Tableau<T> {
    fn new(problem: &LinearFeasibilityProblem<T>) -> Self {
        let m = problem.num_constraints();
        let n = problem.num_vars();
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, (row, b)) in problem.rows().iter().zip(problem.rhs()).enumerate() {
            let flip = b.is_below_zero();
            let mut t: Vec<T> = Vec::with_capacity(width);
            t.extend(row.iter().map(|a| if flip { -a.clone() } else { a.clone() }));
            t.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            t.push(if flip { -b.clone() } else { b.clone() });
            rows.push(t);
        }
        let mut cost = vec![T::zero(); width];
        for row in &rows {
            for j in 0..n {
                cost[j] = cost[j].clone() - row[j].clone();
            }
            cost[width - 1] = cost[width - 1].clone() - row[width - 1].clone();
        }
        Self {
            rows,
            cost,
            basis: (n..n + m).collect(),
            width,
        }
    }

    fn entering(&self) -> Option<usize> {
        (0..self.width - 1).find(|&j| self.cost[j].is_below_zero())
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let rhs = self.width - 1;
        let mut best: Option<(usize, T)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[col];
            if !(-a.clone()).is_below_zero() {
                continue;
            }
            let ratio = row[rhs].clone() / a.clone();
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    // Bland: ties broken by the smaller basic variable index
                    if ratio < br && !ratio.near(&br) || (ratio.near(&br) && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pivot = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
        }
        if !self.cost[c].is_zero() {
            let factor = self.cost[c].clone();
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
        }
        self.basis[r] = c;
    }

    fn objective(&self) -> T {
        -self.cost[self.width - 1].clone()
    }
}

/// Decide `∃ v ≥ 0 : A·v = c`. Returns a basic (vertex) witness when feasible.
pub fn solve<T: Scalar>(problem: &LinearFeasibilityProblem<T>) -> Result<FeasibilityResult<Vec<T>>> {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    if m == 0 {
        return Ok(FeasibilityResult::Feasible(vec![T::zero(); n]));
    }
    let budget = BUDGET_FACTOR * (n + m) * (n + m);
    let mut tableau = Tableau::new(problem);
    let mut pivots = 0usize;
    while let Some(col) = tableau.entering() {
        let Some(row) = tableau.leaving(col) else {
            // phase-one objective is bounded below by zero
            return Err(Error::Malformed("unbounded phase-one objective".into()));
        };
        tableau.pivot(row, col);
        pivots += 1;
        if pivots > budget {
            return Err(Error::IterationBudget { budget });
        }
    }
    if !tableau.objective().near(&T::zero()) {
        return Ok(FeasibilityResult::Infeasible);
    }
    let rhs = tableau.width - 1;
    let mut witness = vec![T::zero(); n];
    for (row, &var) in tableau.rows.iter().zip(&tableau.basis) {
        if var < n {
            witness[var] = row[rhs].clone();
        }
    }
    Ok(FeasibilityResult::Feasible(witness))
}
