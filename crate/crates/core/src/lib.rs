//! Balancing a uniform convex body on the edge of a self-similar cavity.
//!
//! Cutting a cavity that is a scaled copy of the body, tangent to it at a
//! boundary point `O`, moves the centroid of what remains. For the right
//! scale ratio `x = |OQ| / |OP|` the new centroid lands exactly on the cavity
//! boundary at `P`. The ratio is the positive root of the balance polynomial
//! `β x^k + (β − 1)(x^{k−1} + … + x + 1)`, which for `β = 1/2` gives the
//! golden ratio (`k = 2`) and the k-nacci constants in general.
//!
//! - [`balance_poly`] builds the polynomial and solves for its positive root.
//! - [`knacci_seq`] generates k-generalized Fibonacci sequences exactly.
//! - [`geom2d`] and [`geomkd`] construct and verify excisions in 2 and k
//!   dimensions.
//! - [`mc_oracle`] estimates composite centroids by rejection sampling.

pub mod balance_poly;
mod error;
pub mod geom2d;
pub mod geomkd;
pub mod knacci_seq;
pub mod mc_oracle;

pub use balance_poly::{
    build_general, knacci_constant, physicality_threshold, positive_root, BalancePolynomial,
    BalanceProblem, RootResult,
};
pub use error::{Error, Result};
pub use geom2d::{Chord, ExcisionPlan, Point2, Shape2D};
pub use geomkd::{ExcisionPlanKd, ShapeKd};
pub use knacci_seq::KnacciSequence;
pub use mc_oracle::{McEstimate, Region};

/// Largest dimension accepted by the balance solver and the k-dimensional
/// geometry. Past this the k-nacci constant rounds to 2 in binary64.
pub const MAX_DIMENSION: usize = 64;
