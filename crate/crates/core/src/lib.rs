//! Quasi-stochastic dynamics on finite state spaces.
//!
//! Exact rational linear algebra for distributions and quasi-stochastic
//! matrices ([`qcore`]), nebit decompositions ([`decomp`]), Monte-Carlo
//! post-selection simulation ([`mcsim`]), a two-party harness ([`bipartite`])
//! and exact LP feasibility checks ([`feas`]).
//!
//! Everything numerical is generic over [`Scalar`]; the aliases below fix the
//! scalar to arbitrary-precision rationals (the default for all exact claims)
//! or to `f64`.

pub mod bipartite;
pub mod decomp;
pub mod error;
pub mod feas;
pub mod io;
pub mod mcsim;
pub mod qcore;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use sampling::RngSpec;
pub use scalar::Scalar;

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type RDist = qcore::Dist<Rational>;
pub type RQuasiDist = qcore::QuasiDist<Rational>;
pub type RMatrix = qcore::QuasiMatrix<Rational>;
pub type RStochMatrix = qcore::StochMatrix<Rational>;
pub type RDecomposition = decomp::NebitDecomposition<Rational>;
pub type RModel = qcore::ModelS<Rational>;
pub type RJointDist = bipartite::JointDist<Rational>;

pub type FDist = qcore::Dist<f64>;
pub type FMatrix = qcore::QuasiMatrix<f64>;
pub type FDecomposition = decomp::NebitDecomposition<f64>;
