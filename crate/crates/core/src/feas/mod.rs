//! Exact feasibility checks: does a non-negative stochastic matrix realise a
//! list of input/output pairs, and is a joint distribution a mixture of
//! products of given local states?

mod simplex;

use std::fmt;

use crate::error::{Error, Result};
use crate::qcore::{tensor_dist, Dist, QuasiMatrix, StochMatrix};
use crate::scalar::{sum_iter, Scalar};

pub use simplex::{solve, BUDGET_FACTOR};

/// `A·v = c` over variables `v ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFeasibilityProblem<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    num_vars: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult<W> {
    Feasible(W),
    Infeasible,
}

impl<W> FeasibilityResult<W> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Self::Feasible(w) => Some(w),
            Self::Infeasible => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(W) -> U) -> FeasibilityResult<U> {
        match self {
            Self::Feasible(w) => FeasibilityResult::Feasible(f(w)),
            Self::Infeasible => FeasibilityResult::Infeasible,
        }
    }
}

impl<T: Scalar> LinearFeasibilityProblem<T> {
    pub fn new(rows: Vec<Vec<T>>, rhs: Vec<T>) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::Malformed(format!(
                "{} constraint rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        let num_vars = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != num_vars) {
            return Err(Error::Malformed(format!(
                "row {i} has {} coefficients, expected {num_vars}",
                r.len()
            )));
        }
        Ok(Self { rows, rhs, num_vars })
    }

    /// A problem over `num_vars` variables, built row by row.
    pub fn with_vars(num_vars: usize) -> Self {
        Self {
            rows: Vec::new(),
            rhs: Vec::new(),
            num_vars,
        }
    }

    pub fn push(&mut self, row: Vec<T>, rhs: T) -> Result<()> {
        if row.len() != self.num_vars {
            return Err(Error::Malformed(format!(
                "constraint has {} coefficients, expected {}",
                row.len(),
                self.num_vars
            )));
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    /// Substitute `v` back into every constraint.
    pub fn is_satisfied_by(&self, v: &[T]) -> bool {
        v.len() == self.num_vars
            && v.iter().all(Scalar::is_nonneg)
            && self
                .rows
                .iter()
                .zip(&self.rhs)
                .all(|(row, c)| sum_iter(row.iter().zip(v).map(|(a, x)| a.clone() * x.clone())).near(c))
    }
}

fn map_var(dim: usize, row: usize, col: usize) -> usize {
    col * dim + row
}

fn map_problem<T: Scalar>(pairs: &[(Dist<T>, Dist<T>)]) -> Result<(usize, LinearFeasibilityProblem<T>)> {
    let dim = pairs.first().map_or(0, |(p, _)| p.dim());
    if dim == 0 {
        return Err(Error::Malformed("no input/output pairs".into()));
    }
    for (p, q) in pairs {
        for d in [p.dim(), q.dim()] {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
    }
    let mut problem = LinearFeasibilityProblem::with_vars(dim * dim);
    for col in 0..dim {
        let mut row = vec![T::zero(); dim * dim];
        for i in 0..dim {
            row[map_var(dim, i, col)] = T::one();
        }
        problem.push(row, T::one())?;
    }
    for (p, q) in pairs {
        for i in 0..dim {
            let mut row = vec![T::zero(); dim * dim];
            for (j, pj) in p.entries().iter().enumerate() {
                row[map_var(dim, i, j)] = pj.clone();
            }
            problem.push(row, q.entries()[i].clone())?;
        }
    }
    Ok((dim, problem))
}

/// Search for a stochastic `M ≥ 0` with `M·pᵢ = qᵢ` for every pair.
pub fn stochastic_map_exists<T: Scalar>(pairs: &[(Dist<T>, Dist<T>)]) -> Result<FeasibilityResult<StochMatrix<T>>> {
    let (dim, problem) = map_problem(pairs)?;
    let result = solve(&problem)?;
    Ok(match result {
        FeasibilityResult::Feasible(v) => {
            let m = QuasiMatrix::from_fn(dim, |i, j| v[map_var(dim, i, j)].clone())?;
            FeasibilityResult::Feasible(StochMatrix::new(m)?)
        }
        FeasibilityResult::Infeasible => FeasibilityResult::Infeasible,
    })
}

/// Matrix entries `(row, col)` that vanish in *every* stochastic map
/// satisfying the pairs.
///
/// Entry `(i, j)` can be positive iff the homogenised system
/// `A·M' = t·c, M'ᵢⱼ = 1, M', t ≥ 0` is feasible: rescale any witness by
/// `1/Mᵢⱼ`, and `t = 0` is impossible because the column-sum rows force
/// `M' = 0`. If the pairs admit no map at all, every entry is reported.
pub fn forced_zero_entries<T: Scalar>(pairs: &[(Dist<T>, Dist<T>)]) -> Result<Vec<(usize, usize)>> {
    let (dim, base) = map_problem(pairs)?;
    let n = dim * dim;
    let mut forced = Vec::new();
    for col in 0..dim {
        for row in 0..dim {
            let mut problem = LinearFeasibilityProblem::with_vars(n + 1);
            for (r, c) in base.rows().iter().zip(base.rhs()) {
                let mut h = r.clone();
                h.push(-c.clone());
                problem.push(h, T::zero())?;
            }
            let mut pin = vec![T::zero(); n + 1];
            pin[map_var(dim, row, col)] = T::one();
            problem.push(pin, T::one())?;
            if !solve(&problem)?.is_feasible() {
                forced.push((row, col));
            }
        }
    }
    Ok(forced)
}

/// Zeros implied by support alone: if `qᵢ = 0` then `Mᵢⱼ = 0` for every `j`
/// with `pⱼ > 0`, since a sum of non-negative terms vanishes only termwise.
///
/// Needs no solve and stays informative when the pairs are jointly
/// infeasible. Sorted by `(col, row)` like [`forced_zero_entries`].
pub fn support_zero_pattern<T: Scalar>(pairs: &[(Dist<T>, Dist<T>)]) -> Result<Vec<(usize, usize)>> {
    let (dim, _) = map_problem(pairs)?;
    let mut zeros = Vec::new();
    for col in 0..dim {
        for row in 0..dim {
            let forced = pairs
                .iter()
                .any(|(p, q)| q.entries()[row].is_zero() && !p.entries()[col].is_zero());
            if forced {
                zeros.push((row, col));
            }
        }
    }
    Ok(zeros)
}

/// Mixture weights `w(i, j)` over products `vᵢ ⊗ vⱼ`; zero weights omitted.
pub type Mixture<T> = Vec<((usize, usize), T)>;

fn product_table<T: Scalar>(vertices: &[Dist<T>]) -> Vec<((usize, usize), Dist<T>)> {
    let mut out = Vec::with_capacity(vertices.len() * vertices.len());
    for (i, a) in vertices.iter().enumerate() {
        for (j, b) in vertices.iter().enumerate() {
            out.push(((i, j), tensor_dist(a, b)));
        }
    }
    out
}

/// Is the joint `p` a convex mixture of `vᵢ ⊗ vⱼ` over the given local states?
pub fn separability<T: Scalar>(p: &Dist<T>, vertices: &[Dist<T>]) -> Result<FeasibilityResult<Mixture<T>>> {
    let d = vertices.first().map_or(0, Dist::dim);
    if let Some(v) = vertices.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.dim(),
        });
    }
    if d * d != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: p.dim(),
        });
    }
    let products = product_table(vertices);
    let mut problem = LinearFeasibilityProblem::with_vars(products.len());
    for pos in 0..p.dim() {
        problem.push(
            products.iter().map(|(_, e)| e.entries()[pos].clone()).collect(),
            p.entries()[pos].clone(),
        )?;
    }
    problem.push(vec![T::one(); products.len()], T::one())?;
    Ok(solve(&problem)?.map(|w| {
        products
            .iter()
            .zip(w)
            .filter(|(_, x)| !x.is_zero())
            .map(|((ij, _), x)| (*ij, x))
            .collect()
    }))
}

/// Human-auditable non-separability proof: `p` vanishes on `zeros`, and
/// every product `vᵢ ⊗ vⱼ` is strictly positive somewhere on that set, so no
/// non-negative mixture of products can vanish there.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPatternCertificate<T> {
    /// 0-based positions where `p` is zero.
    pub zeros: Vec<usize>,
    /// `(i, j, position, value)`: `(vᵢ ⊗ vⱼ)[position] = value > 0`.
    pub witnesses: Vec<(usize, usize, usize, T)>,
}

impl<T> ZeroPatternCertificate<T> {
    /// Zero positions counted from 1.
    pub fn one_based_zeros(&self) -> Vec<usize> {
        self.zeros.iter().map(|z| z + 1).collect()
    }
}

pub fn zero_pattern_certificate<T: Scalar>(p: &Dist<T>, vertices: &[Dist<T>]) -> Option<ZeroPatternCertificate<T>> {
    let zeros = p.zero_positions();
    if zeros.is_empty() {
        return None;
    }
    let mut witnesses = Vec::new();
    for ((i, j), prod) in product_table(vertices) {
        if prod.dim() != p.dim() {
            return None;
        }
        let pos = zeros
            .iter()
            .copied()
            .find(|&z| (-prod.entries()[z].clone()).is_below_zero())?;
        witnesses.push((i, j, pos, prod.entries()[pos].clone()));
    }
    Some(ZeroPatternCertificate { zeros, witnesses })
}

impl<T: fmt::Display> fmt::Display for ZeroPatternCertificate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zs: Vec<String> = self.zeros.iter().map(|z| (z + 1).to_string()).collect();
        writeln!(f, "zero positions (1-indexed): {}", zs.join(","))?;
        for (i, j, pos, v) in &self.witnesses {
            writeln!(f, "  e{i} x e{j} is {v} at position {}", pos + 1)?;
        }
        write!(f, "no product vanishes on all zero positions")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::ModelS;
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn trivial_problems() {
        let p = LinearFeasibilityProblem::new(vec![vec![q(1), q(1)]], vec![q(1)]).unwrap();
        let r = solve(&p).unwrap();
        assert!(p.is_satisfied_by(r.witness().unwrap()));

        let p = LinearFeasibilityProblem::new(vec![vec![q(1)]], vec![q(-1)]).unwrap();
        assert_eq!(solve(&p).unwrap(), FeasibilityResult::Infeasible);
    }

    #[test]
    fn malformed_dimensions() {
        assert!(matches!(
            LinearFeasibilityProblem::new(vec![vec![q(1), q(1)], vec![q(1)]], vec![q(1), q(1)]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            LinearFeasibilityProblem::new(vec![vec![q(1)]], vec![]),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn redundant_constraints_are_fine() {
        // v1 + v2 = 1 twice, plus v1 = 1/2
        let half = Rational::from_fraction(1, 2);
        let p = LinearFeasibilityProblem::new(
            vec![vec![q(1), q(1)], vec![q(1), q(1)], vec![q(1), q(0)]],
            vec![q(1), q(1), half.clone()],
        )
        .unwrap();
        let w = solve(&p).unwrap();
        assert_eq!(w.witness().unwrap(), &vec![half.clone(), half]);
    }

    #[test]
    fn identity_and_single_pair_maps() {
        let model = ModelS::<Rational>::new();
        let e = &model.extremes;
        let r = stochastic_map_exists(&[(e[0].clone(), e[0].clone())]).unwrap();
        assert!(r.is_feasible());
        let r = stochastic_map_exists(&[(e[0].clone(), e[1].clone())]).unwrap();
        let m = r.witness().unwrap();
        assert_eq!(&m.apply(&e[0]).unwrap(), &e[1]);
    }

    #[test]
    fn certificate_absent_without_zeros() {
        let model = ModelS::<Rational>::new();
        let uniform = Dist::<Rational>::uniform(9).unwrap();
        assert!(zero_pattern_certificate(&uniform, &model.extremes).is_none());
    }

    #[test]
    fn float_solver_agrees_on_hull() {
        let model = ModelS::<f64>::new();
        let p = Dist::<f64>::delta(3, 0).unwrap();
        assert!(!crate::qcore::hull_member(&p, &model.extremes).unwrap());
        assert!(crate::qcore::hull_member(&Dist::<f64>::uniform(3).unwrap(), &model.extremes).unwrap());
    }

    /// Complete oracle: a standard-form system is feasible iff some set of
    /// linearly independent columns carries a non-negative solution.
    fn basic_solution_oracle(rows: &[Vec<Rational>], rhs: &[Rational]) -> bool {
        let n = rows.first().map_or(0, Vec::len);
        (0u32..(1 << n)).any(|mask| {
            let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            solve_subsystem(rows, rhs, &cols).is_some_and(|x| x.iter().all(|v| *v >= q(0)))
        })
    }

    /// Unique solution of `A[:, cols]·x = b`, if the columns are independent
    /// and the system is consistent.
    fn solve_subsystem(rows: &[Vec<Rational>], rhs: &[Rational], cols: &[usize]) -> Option<Vec<Rational>> {
        let k = cols.len();
        let mut aug: Vec<Vec<Rational>> = rows
            .iter()
            .zip(rhs)
            .map(|(r, b)| cols.iter().map(|&c| r[c].clone()).chain([b.clone()]).collect())
            .collect();
        let mut pivot_row = 0;
        for c in 0..k {
            let pr = (pivot_row..aug.len()).find(|&r| aug[r][c] != q(0))?;
            aug.swap(pivot_row, pr);
            let pv = aug[pivot_row][c].clone();
            for v in aug[pivot_row].iter_mut() {
                *v = v.clone() / pv.clone();
            }
            for r in 0..aug.len() {
                if r != pivot_row && aug[r][c] != q(0) {
                    let f = aug[r][c].clone();
                    let src = aug[pivot_row].clone();
                    for (v, s) in aug[r].iter_mut().zip(src) {
                        *v = v.clone() - f.clone() * s;
                    }
                }
            }
            pivot_row += 1;
        }
        if aug[pivot_row..].iter().any(|r| r[k] != q(0)) {
            return None;
        }
        Some((0..k).map(|c| aug[c][k].clone()).collect())
    }

    fn grid_feasible(rows: &[Vec<Rational>], rhs: &[Rational]) -> bool {
        let n = rows[0].len();
        let grid: Vec<Rational> = (0..=8).map(|k| Rational::from_fraction(k, 4)).collect();
        let mut idx = vec![0usize; n];
        loop {
            let v: Vec<Rational> = idx.iter().map(|&k| grid[k].clone()).collect();
            if rows
                .iter()
                .zip(rhs)
                .all(|(r, b)| r.iter().zip(&v).fold(q(0), |acc, (a, x)| acc + a * x) == *b)
            {
                return true;
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    return false;
                }
                idx[pos] += 1;
                if idx[pos] < grid.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    fn small_system() -> impl Strategy<Value = (Vec<Vec<Rational>>, Vec<Rational>)> {
        (1usize..=3, 2usize..=4).prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(prop::collection::vec(-2i64..=2, n), m),
                prop::collection::vec(-2i64..=2, m),
            )
                .prop_map(|(a, b)| {
                    (
                        a.into_iter().map(|r| r.into_iter().map(q).collect()).collect(),
                        b.into_iter().map(q).collect(),
                    )
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn simplex_matches_oracles((rows, rhs) in small_system()) {
            let problem = LinearFeasibilityProblem::new(rows.clone(), rhs.clone()).unwrap();
            let result = solve(&problem).unwrap();
            match &result {
                FeasibilityResult::Feasible(w) => prop_assert!(problem.is_satisfied_by(w)),
                FeasibilityResult::Infeasible => prop_assert!(!grid_feasible(&rows, &rhs)),
            }
            prop_assert_eq!(result.is_feasible(), basic_solution_oracle(&rows, &rhs));
        }
    }
}
