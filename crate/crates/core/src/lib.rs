//! Reachability analysis for max-plus linear systems.
//!
//! Two engines answer the same bounded question: an explicit one that
//! propagates unions of difference-bound matrices through the
//! piecewise-affine form of the system, and a symbolic one that encodes
//! the dynamics in difference logic and asks an incremental solver.

pub mod bench;
pub mod dbm;
pub mod difflogic;
pub mod dlsolver;
pub mod maxplus;
pub mod num;
pub mod pwa;
pub mod reach;

pub use dbm::{Bound, Constraint, Dbm, DbmUnion, Rel};
pub use maxplus::{MaxPlusMatrix, MaxPlusScalar};
pub use num::Rat;
pub use reach::{ReachOptions, ReachResult, ReachSpec};
