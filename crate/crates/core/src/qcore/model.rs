use crate::scalar::Scalar;

use super::dist::Dist;
use super::matrix::{QuasiMatrix, StochMatrix};

/// Period of the three-level model dynamics.
pub const PERIOD: usize = 6;

/// The three-level quasi-bistochastic model: the rotation-like map
///
/// ```text
///       1 [ 2 -1  2 ]
///   S = - [ 2  2 -1 ]
///       3 [-1  2  2 ]
/// ```
///
/// together with the six vertices `e₀…e₅` of its non-negativity region,
/// ordered so that `S·eᵢ = eᵢ₊₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelS<T> {
    pub s: QuasiMatrix<T>,
    pub extremes: [Dist<T>; PERIOD],
}

const EXTREME_WEIGHTS: [[i64; 3]; PERIOD] = [[2, 1, 0], [1, 2, 0], [0, 2, 1], [0, 1, 2], [1, 0, 2], [2, 0, 1]];

impl<T: Scalar> ModelS<T> {
    pub fn new() -> Self {
        let s = QuasiMatrix::from_scaled_rows(3, &[&[2, -1, 2], &[2, 2, -1], &[-1, 2, 2]]).expect("columns sum to one");
        let extremes = EXTREME_WEIGHTS.map(|w| Dist::from_weights(&w).expect("valid vertex"));
        Self { s, extremes }
    }

    /// `eᵢ`, with the index taken mod 6.
    pub fn extreme(&self, i: usize) -> &Dist<T> {
        &self.extremes[i % PERIOD]
    }

    pub fn vertices(&self) -> Vec<Dist<T>> {
        self.extremes.to_vec()
    }

    /// Permutation matrices `S̃(e₀)`, `S̃(e₂)`, `S̃(e₄)`: each moves one
    /// even vertex onto its successor, but no single one works for all three.
    pub fn state_dependent_maps() -> [(usize, StochMatrix<T>); 3] {
        let perm = |rows: [[i64; 3]; 3]| {
            StochMatrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&v| T::from_int(v)).collect())
                    .collect(),
            )
            .expect("permutation matrix")
        };
        [
            (0, perm([[0, 1, 0], [1, 0, 0], [0, 0, 1]])),
            (2, perm([[1, 0, 0], [0, 0, 1], [0, 1, 0]])),
            (4, perm([[0, 0, 1], [0, 1, 0], [1, 0, 0]])),
        ]
    }

    /// Checks `S̃(eᵢ)·eᵢ = eᵢ₊₁` for `i ∈ {0, 2, 4}`.
    pub fn verify_state_dependent_maps(&self) -> bool {
        Self::state_dependent_maps().iter().all(|(i, m)| {
            m.apply(self.extreme(*i))
                .map(|out| {
                    out.entries()
                        .iter()
                        .zip(self.extreme(i + 1).entries())
                        .all(|(a, b)| a.near(b))
                })
                .unwrap_or(false)
        })
    }
}

impl<T: Scalar> Default for ModelS<T> {
    fn default() -> Self {
        Self::new()
    }
}
