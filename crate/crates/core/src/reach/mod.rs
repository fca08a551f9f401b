//! Bounded reachability: shared problem/result types plus the explicit
//! (reach-set) and symbolic (difference-logic) engines.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::dbm::{Dbm, DbmError};
use crate::dlsolver::SolverError;
use crate::maxplus::{MaxPlusError, MaxPlusMatrix};
use crate::num::Rat;

pub mod explicit;
pub mod symbolic;

pub use explicit::{backward_reach_sets, forward_reach_sets, reach_explicit};
pub use symbolic::{reach_symbolic, verify_witness, Engine, SymbolicRun};

#[derive(Debug, Error)]
pub enum ReachError {
    #[error(transparent)]
    MaxPlus(#[from] MaxPlusError),
    #[error(transparent)]
    Dbm(#[from] DbmError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("deadline exceeded at step {step}")]
    Timeout { step: usize },
    #[error("invalid reachability problem: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Sequential,
    OneShot,
}

/// One of the eight algorithm variants: explicit or symbolic, forward or
/// backward, sequential or one-shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub symbolic: bool,
    pub direction: Direction,
    pub strategy: Strategy,
}

impl Variant {
    /// All variants, numbered 1–8 in the order explicit {fwd seq, fwd
    /// one-shot, bwd seq, bwd one-shot} then symbolic in the same order.
    pub const ALL: [Variant; 8] = [
        Variant::new(false, Direction::Forward, Strategy::Sequential),
        Variant::new(false, Direction::Forward, Strategy::OneShot),
        Variant::new(false, Direction::Backward, Strategy::Sequential),
        Variant::new(false, Direction::Backward, Strategy::OneShot),
        Variant::new(true, Direction::Forward, Strategy::Sequential),
        Variant::new(true, Direction::Forward, Strategy::OneShot),
        Variant::new(true, Direction::Backward, Strategy::Sequential),
        Variant::new(true, Direction::Backward, Strategy::OneShot),
    ];

    pub const fn new(symbolic: bool, direction: Direction, strategy: Strategy) -> Self {
        Variant {
            symbolic,
            direction,
            strategy,
        }
    }

    /// Algorithm number 1–8.
    pub fn number(&self) -> usize {
        Variant::ALL.iter().position(|v| v == self).expect("listed") + 1
    }

    pub fn from_number(k: usize) -> Option<Variant> {
        k.checked_sub(1).and_then(|i| Variant::ALL.get(i)).copied()
    }

    pub fn label(&self) -> String {
        format!("Alg. {}", self.number())
    }
}

/// A bounded reachability question `∃k ∈ 1..=N, x(0) ∈ X: x(k) ∈ Y`.
#[derive(Debug, Clone)]
pub struct ReachSpec {
    pub matrix: MaxPlusMatrix,
    pub initial: Dbm,
    pub target: Dbm,
    pub horizon: usize,
    pub direction: Direction,
    pub strategy: Strategy,
}

impl ReachSpec {
    pub fn new(matrix: MaxPlusMatrix, initial: Dbm, target: Dbm, horizon: usize) -> Self {
        ReachSpec {
            matrix,
            initial,
            target,
            horizon,
            direction: Direction::Forward,
            strategy: Strategy::Sequential,
        }
    }

    pub fn with(mut self, direction: Direction, strategy: Strategy) -> Self {
        self.direction = direction;
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<(), ReachError> {
        let n = self.matrix.dim();
        if self.initial.dim() != n || self.target.dim() != n {
            return Err(ReachError::InvalidSpec(format!(
                "sets have dimensions {} and {}, matrix is {n}x{n}",
                self.initial.dim(),
                self.target.dim()
            )));
        }
        self.matrix.check_regular()?;
        if self.initial.canonicalize().is_none() || self.target.canonicalize().is_none() {
            return Err(ReachError::InvalidSpec("initial and target sets must be non-empty".into()));
        }
        Ok(())
    }
}

/// Engine knobs that do not change the question being asked.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReachOptions {
    /// Also test `k = 0` (`X ∩ Y ≠ ∅`) before the main loop.
    pub check_k0: bool,
    /// Pairwise subsumption pass on explicit reach-set unions.
    pub subsume: bool,
    /// Wall-clock limit; exceeding it yields [`ReachError::Timeout`].
    pub deadline: Option<Instant>,
}

impl ReachOptions {
    pub(crate) fn check_deadline(&self, step: usize) -> Result<(), ReachError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(ReachError::Timeout { step }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachResult {
    pub reachable: bool,
    /// Earliest hit, or the step at which the backward sets emptied.
    pub step: Option<usize>,
    /// `x(0..=k)` when a symbolic run found the target.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_witness")]
    pub witness: Option<Vec<Vec<Rat>>>,
    pub emptied: bool,
    /// Number of DBMs in each computed reach set (explicit engine only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub set_sizes: Vec<usize>,
}

fn ser_witness<S: serde::Serializer>(w: &Option<Vec<Vec<Rat>>>, s: S) -> Result<S::Ok, S::Error> {
    let rendered: Option<Vec<Vec<String>>> = w
        .as_ref()
        .map(|traj| traj.iter().map(|x| x.iter().map(|v| v.to_string()).collect()).collect());
    serde::Serialize::serialize(&rendered, s)
}

impl ReachResult {
    pub(crate) fn unreachable() -> Self {
        ReachResult {
            reachable: false,
            step: None,
            witness: None,
            emptied: false,
            set_sizes: Vec::new(),
        }
    }

    pub(crate) fn hit(step: usize) -> Self {
        ReachResult {
            reachable: true,
            step: Some(step),
            ..Self::unreachable()
        }
    }

    pub(crate) fn emptied_at(step: usize) -> Self {
        ReachResult {
            step: Some(step),
            emptied: true,
            ..Self::unreachable()
        }
    }
}

/// Runs any of the eight variants.
pub fn run_variant(
    spec: &ReachSpec,
    variant: Variant,
    options: &ReachOptions,
) -> Result<ReachResult, ReachError> {
    let spec = spec.clone().with(variant.direction, variant.strategy);
    if variant.symbolic {
        Ok(reach_symbolic(&spec, &Engine::Internal, options)?.result)
    } else {
        reach_explicit(&spec, options)
    }
}
