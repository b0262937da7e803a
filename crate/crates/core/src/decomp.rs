//! Nebit decompositions `S = q⁺·S⁺ − q⁻·S⁻` of quasi-stochastic matrices.

use crate::error::Result;
use crate::qcore::{QuasiMatrix, StochMatrix};
use crate::scalar::Scalar;

/// A quasi-stochastic map written as a signed two-term mixture of
/// stochastic maps. `r = q⁺/(q⁺+q⁻)` is the probability of the positive
/// branch when the nebit is simulated by an ordinary coin.
#[derive(Debug, Clone, PartialEq)]
pub struct NebitDecomposition<T> {
    pub q_plus: T,
    pub q_minus: T,
    pub s_plus: StochMatrix<T>,
    pub s_minus: StochMatrix<T>,
    pub r: T,
}

impl<T: Scalar> NebitDecomposition<T> {
    /// Assemble from weights and branches; `r` is derived.
    pub fn new(q_plus: T, q_minus: T, s_plus: StochMatrix<T>, s_minus: StochMatrix<T>) -> Self {
        let r = q_plus.clone() / (q_plus.clone() + q_minus.clone());
        Self {
            q_plus,
            q_minus,
            s_plus,
            s_minus,
            r,
        }
    }

    /// `q⁺ = 1, q⁻ = 0`: the map is already stochastic.
    pub fn trivial(s: StochMatrix<T>) -> Self {
        let dim = s.dim();
        Self::new(T::one(), T::zero(), s, StochMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.s_plus.dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.q_minus.is_zero()
    }

    /// Sampling overhead `q⁺ + q⁻`.
    pub fn overhead(&self) -> T {
        self.q_plus.clone() + self.q_minus.clone()
    }

    fn reconstructed_entry(&self, i: usize, j: usize) -> T {
        self.q_plus.clone() * self.s_plus.get(i, j).clone() - self.q_minus.clone() * self.s_minus.get(i, j).clone()
    }

    /// `q⁺·S⁺ − q⁻·S⁻`; fails when `q⁺ − q⁻ ≠ 1` breaks the column sums.
    pub fn reconstruct(&self) -> Result<QuasiMatrix<T>> {
        QuasiMatrix::from_fn(self.dim(), |i, j| self.reconstructed_entry(i, j))
    }

    /// The decomposition of `𝟙_a ⊗ S` obtained by tensoring both branches.
    pub fn lift_left(&self, dim_a: usize) -> Self {
        let id = StochMatrix::identity(dim_a);
        Self {
            q_plus: self.q_plus.clone(),
            q_minus: self.q_minus.clone(),
            s_plus: id.tensor(&self.s_plus),
            s_minus: id.tensor(&self.s_minus),
            r: self.r.clone(),
        }
    }

    /// The splitting of the three-level model map with `S⁺` the cyclic
    /// half-shift and `S⁻` the 3-cycle permutation: `S = 4/3·S⁺ − 1/3·S⁻`.
    pub fn model_splitting() -> Self {
        let half = |rows: [[i64; 3]; 3], den: i64| {
            StochMatrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&v| T::from_fraction(v, den)).collect())
                    .collect(),
            )
            .expect("stochastic")
        };
        Self::new(
            T::from_fraction(4, 3),
            T::from_fraction(1, 3),
            half([[1, 0, 1], [1, 1, 0], [0, 1, 1]], 2),
            half([[0, 1, 0], [0, 0, 1], [1, 0, 0]], 1),
        )
    }
}

/// Largest per-column negative mass `max_j Σ_i max(−S_ij, 0)`.
pub fn max_column_negative_mass<T: Scalar>(s: &QuasiMatrix<T>) -> T {
    s.columns()
        .map(column_negative_mass)
        .fold(T::zero(), |acc, m| if m > acc { m } else { acc })
}

fn column_negative_mass<T: Scalar>(col: &[T]) -> T {
    col.iter()
        .filter(|v| v.is_negative())
        .fold(T::zero(), |acc, v| acc - v.clone())
}

/// Canonical splitting with `α = q⁻` equal to the largest per-column
/// negative mass. Column `j` of `S⁻` holds the magnitudes of column `j`'s
/// negative entries, topped up on the diagonal to total `α`, then divided by
/// `α`; `S⁺ = (S + α·S⁻)/(1 + α)`.
pub fn decompose_minimal<T: Scalar>(s: &QuasiMatrix<T>) -> NebitDecomposition<T> {
    let alpha = max_column_negative_mass(s);
    if alpha.is_zero() {
        let stoch = StochMatrix::new(s.clone()).expect("no negative entries");
        return NebitDecomposition::trivial(stoch);
    }
    let dim = s.dim();
    let deficits: Vec<T> = s.columns().map(|c| alpha.clone() - column_negative_mass(c)).collect();
    let minus_raw = |i: usize, j: usize| {
        let v = s.get(i, j);
        let neg = if v.is_negative() { -v.clone() } else { T::zero() };
        if i == j {
            neg + deficits[j].clone()
        } else {
            neg
        }
    };
    let s_minus = QuasiMatrix::from_fn(dim, |i, j| minus_raw(i, j) / alpha.clone())
        .and_then(StochMatrix::new)
        .expect("negative part is stochastic");
    let one_plus = T::one() + alpha.clone();
    let s_plus = QuasiMatrix::from_fn(dim, |i, j| (s.get(i, j).clone() + minus_raw(i, j)) / one_plus.clone())
        .and_then(StochMatrix::new)
        .expect("positive part is stochastic");
    NebitDecomposition::new(one_plus, alpha, s_plus, s_minus)
}

/// Exact check of every decomposition invariant against `S`.
pub fn validate<T: Scalar>(s: &QuasiMatrix<T>, d: &NebitDecomposition<T>) -> bool {
    if d.dim() != s.dim() || d.s_minus.dim() != s.dim() {
        return false;
    }
    let weights_ok =
        (d.q_plus.clone() - d.q_minus.clone()).near(&T::one()) && d.q_minus.is_nonneg() && d.q_plus.is_nonneg();
    if !weights_ok {
        return false;
    }
    let r = d.q_plus.clone() / d.overhead();
    if !r.near(&d.r) {
        return false;
    }
    let dim = s.dim();
    d.s_plus.matrix().is_stochastic()
        && d.s_minus.matrix().is_stochastic()
        && (0..dim).all(|j| (0..dim).all(|i| d.reconstructed_entry(i, j).near(s.get(i, j))))
}

/// `q⁺ + q⁻ = 1 + 2α` of the minimal splitting.
pub fn negativity<T: Scalar>(s: &QuasiMatrix<T>) -> T {
    decompose_minimal(s).overhead()
}
