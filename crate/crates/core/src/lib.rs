//! Numerical analysis of geodesically equivalent pseudo-Riemannian metrics.
//!
//! The crate answers, for explicitly given metrics, questions of the form:
//! how large is the space of metrics sharing the same unparametrized
//! geodesics, what parallel symmetric 2-tensors live on the associated
//! metric cone, and what is the canonical block form of a pair (metric,
//! self-adjoint endomorphism)?
//!
//! Everything is numerical but derivative-exact: coordinate expressions are
//! parsed once and evaluated as truncated Taylor jets, so curvature and its
//! covariant derivatives carry no finite-difference error.
//!
//! Start with the runnable examples in `examples/`, one per capability.

pub mod error;
pub mod jets;
pub mod expr;
pub mod geometry;
pub mod cone;
pub mod prolong;
pub mod mobility;
pub mod pairs;
pub mod canonical;
pub mod corpus;
pub mod io;
pub mod sampling;
pub mod acceptance;

pub use error::{Error, Result};
