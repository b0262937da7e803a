use crate::error::{Error, Result};
use crate::feas::{self, FeasibilityResult, LinearFeasibilityProblem};
use crate::scalar::Scalar;

use super::dist::Dist;
use super::matrix::QuasiMatrix;

/// First power `k` and entry index at which `Sᵏ·p` goes negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionViolation {
    pub power: usize,
    pub index: usize,
}

fn check_period<T: Scalar>(s: &QuasiMatrix<T>, period: usize) -> Result<()> {
    if period == 0 || !s.power(period as u64).is_identity() {
        return Err(Error::PeriodMismatch { period });
    }
    Ok(())
}

/// Scan `Sᵏ·p` for `k = 0…period−1` and report the first negative entry.
pub fn region_violation<T: Scalar>(p: &Dist<T>, s: &QuasiMatrix<T>, period: usize) -> Result<Option<RegionViolation>> {
    check_period(s, period)?;
    let mut current = p.to_quasi();
    for power in 0..period {
        if let Some(index) = current.first_negative() {
            return Ok(Some(RegionViolation { power, index }));
        }
        current = s.apply_quasi(&current)?;
    }
    Ok(None)
}

/// Whether every power of `S` keeps `p` non-negative.
pub fn in_region<T: Scalar>(p: &Dist<T>, s: &QuasiMatrix<T>, period: usize) -> Result<bool> {
    Ok(region_violation(p, s, period)?.is_none())
}

/// Exact convex-hull membership: is `p = Σ λᵢ vᵢ` for some `λ ≥ 0`, `Σλ = 1`?
pub fn hull_member<T: Scalar>(p: &Dist<T>, vertices: &[Dist<T>]) -> Result<bool> {
    let problem = hull_problem(p, vertices)?;
    Ok(matches!(feas::solve(&problem)?, FeasibilityResult::Feasible(_)))
}

pub fn hull_problem<T: Scalar>(p: &Dist<T>, vertices: &[Dist<T>]) -> Result<LinearFeasibilityProblem<T>> {
    let d = p.dim();
    if let Some(v) = vertices.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.dim(),
        });
    }
    let mut rows = Vec::with_capacity(d + 1);
    let mut rhs = Vec::with_capacity(d + 1);
    for i in 0..d {
        rows.push(vertices.iter().map(|v| v.entries()[i].clone()).collect());
        rhs.push(p.entries()[i].clone());
    }
    rows.push(vec![T::one(); vertices.len()]);
    rhs.push(T::one());
    LinearFeasibilityProblem::new(rows, rhs)
}
