//! Exact linear algebra for distributions and quasi-stochastic matrices,
//! the three-level model and its non-negativity region.

mod dist;
mod matrix;
mod model;
mod region;

pub use dist::{Dist, QuasiDist};
pub use matrix::{QuasiMatrix, StochMatrix};
pub use model::{ModelS, PERIOD};
pub use region::{hull_member, hull_problem, in_region, region_violation, RegionViolation};

use crate::error::Result;
use crate::scalar::Scalar;

/// `S·p`. The result sums to one but may carry negative entries.
pub fn apply<T: Scalar>(s: &QuasiMatrix<T>, p: &Dist<T>) -> Result<QuasiDist<T>> {
    s.apply(p)
}

pub fn matrix_power<T: Scalar>(s: &QuasiMatrix<T>, n: u64) -> QuasiMatrix<T> {
    s.power(n)
}

pub fn tensor<T: Scalar>(a: &QuasiMatrix<T>, b: &QuasiMatrix<T>) -> QuasiMatrix<T> {
    a.tensor(b)
}

/// Product distribution, index `(a, b) ↦ a·dim(q) + b`.
pub fn tensor_dist<T: Scalar>(p: &Dist<T>, q: &Dist<T>) -> Dist<T> {
    let entries = p
        .entries()
        .iter()
        .flat_map(|a| q.entries().iter().map(move |b| a.clone() * b.clone()))
        .collect();
    Dist::new(entries).expect("product of distributions is a distribution")
}

/// Same as [`tensor_dist`] for signed vectors.
pub fn tensor_quasi<T: Scalar>(p: &QuasiDist<T>, q: &QuasiDist<T>) -> QuasiDist<T> {
    let entries = p
        .entries()
        .iter()
        .flat_map(|a| q.entries().iter().map(move |b| a.clone() * b.clone()))
        .collect();
    QuasiDist::new_unchecked(entries)
}
