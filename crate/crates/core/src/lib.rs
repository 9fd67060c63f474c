//! Discrete chains of rigid links and their continuum limit, the
//! inextensible whip.
//!
//! The discrete side covers tensions, dynamics and the sectional curvature
//! of the constraint manifold; the continuum side covers the tension
//! boundary-value problem, its Green function and a method-of-lines solver.
//! The `kink` and `convergence` modules connect the two.

// `!(x > 0.0)` style guards reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod continuum;
pub mod convergence;
pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod kink;
pub mod linalg;
pub mod profile;
pub mod svg;
pub mod tension;

pub use chain::{reconstruct, CartesianFrame, ChainState, Vec2};
pub use error::{Result, WhipError};
