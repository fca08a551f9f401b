//! Reachability by incremental difference-logic satisfiability checks.

use std::collections::BTreeSet;

use crate::dbm::Dbm;
use crate::difflogic::{dbm_to_formula, encode_step, DLFormula, DLVar};
use crate::dlsolver::{
    DlBackend, ExternalContext, ExternalSolver, Model, SatVerdict, SolverContext, SolverError,
};
use crate::maxplus::{mp_matmul, MaxPlusMatrix};
use crate::num::Rat;

use super::{Direction, ReachError, ReachOptions, ReachResult, ReachSpec, Strategy};

/// Which decision procedure answers the satisfiability checks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Internal,
    /// External SMT-LIB2 solver command reading from stdin, e.g. `z3 -in`.
    External {
        command: String,
        prefer_integer: bool,
    },
}

#[derive(Debug, Clone)]
pub struct SymbolicRun {
    pub result: ReachResult,
    /// Distinct solver variables over every formula pushed.
    pub variables: usize,
    pub checks: usize,
}

/// Whether `traj` is a run of `A` from a point of `X` ending in `Y`.
pub fn verify_witness(a: &MaxPlusMatrix, x: &Dbm, y: &Dbm, traj: &[Vec<Rat>]) -> bool {
    let (Some(first), Some(last)) = (traj.first(), traj.last()) else {
        return false;
    };
    x.contains(first)
        && y.contains(last)
        && traj
            .windows(2)
            .all(|w| a.apply_regular(&w[0]).as_deref() == Some(&w[1][..]))
}

fn simulate(a: &MaxPlusMatrix, x0: Vec<Rat>, steps: usize) -> Result<Vec<Vec<Rat>>, ReachError> {
    let mut traj = vec![x0];
    for _ in 0..steps {
        let next = a
            .apply_regular(traj.last().expect("non-empty"))
            .ok_or_else(|| ReachError::InvalidSpec("matrix is not regular".into()))?;
        traj.push(next);
    }
    Ok(traj)
}

struct Runner<'a, B: DlBackend> {
    backend: B,
    spec: &'a ReachSpec,
    options: &'a ReachOptions,
    allow_single: bool,
    vars: BTreeSet<DLVar>,
    checks: usize,
}

impl<B: DlBackend> Runner<'_, B> {
    fn push(&mut self, f: DLFormula) -> Result<(), ReachError> {
        self.vars.extend(f.vars());
        self.backend.push(f)?;
        Ok(())
    }

    fn pop(&mut self) -> Result<(), ReachError> {
        self.backend.pop()?;
        Ok(())
    }

    fn check(&mut self, step: usize) -> Result<Option<Model>, ReachError> {
        self.options.check_deadline(step)?;
        self.checks += 1;
        match self.backend.check() {
            Ok(SatVerdict::Sat(m)) => Ok(Some(m)),
            Ok(SatVerdict::Unsat) => Ok(None),
            Err(SolverError::Deadline) => Err(ReachError::Timeout { step }),
            Err(e) => Err(e.into()),
        }
    }

    fn set(&self, d: &Dbm, stage: i64) -> Result<DLFormula, ReachError> {
        dbm_to_formula(d, stage, self.allow_single).map_err(|e| ReachError::InvalidSpec(e.to_string()))
    }

    fn state(&self, m: &Model, stage: i64) -> Result<Vec<Rat>, ReachError> {
        let n = self.spec.matrix.dim();
        (1..=n)
            .map(|i| {
                m.get(DLVar::new(i, stage)).ok_or_else(|| {
                    SolverError::Internal(format!("model lacks x{i}@{stage}")).into()
                })
            })
            .collect()
    }

    /// Trajectory from model stages `lo..=hi`.
    fn stages(&self, m: &Model, lo: i64, hi: i64) -> Result<Vec<Vec<Rat>>, ReachError> {
        (lo..=hi).map(|s| self.state(m, s)).collect()
    }

    /// Simulates `k` steps from the model's `start` state and checks that
    /// it lands on the model's `end` state.
    fn one_shot_witness(&self, m: &Model, start: i64, end: i64, k: usize) -> Result<Vec<Vec<Rat>>, ReachError> {
        let traj = simulate(&self.spec.matrix, self.state(m, start)?, k)?;
        if traj.last() != Some(&self.state(m, end)?) {
            return Err(SolverError::Internal("one-shot model disagrees with simulation".into()).into());
        }
        Ok(traj)
    }

    fn hit(&self, k: usize, traj: Vec<Vec<Rat>>) -> Result<ReachResult, ReachError> {
        if !verify_witness(&self.spec.matrix, &self.spec.initial, &self.spec.target, &traj) {
            return Err(SolverError::Internal(format!("witness for step {k} does not verify")).into());
        }
        Ok(ReachResult {
            witness: Some(traj),
            ..ReachResult::hit(k)
        })
    }

    fn run(&mut self) -> Result<ReachResult, ReachError> {
        let spec = self.spec;
        let horizon = spec.horizon;
        if self.options.check_k0 {
            self.push(self.set(&spec.initial, 0)?)?;
            self.push(self.set(&spec.target, 0)?)?;
            let m = self.check(0)?;
            self.pop()?;
            self.pop()?;
            if let Some(m) = m {
                return self.hit(0, vec![self.state(&m, 0)?]);
            }
        }
        match (spec.direction, spec.strategy) {
            (Direction::Forward, Strategy::Sequential) => {
                self.push(self.set(&spec.initial, 0)?)?;
                for k in 1..=horizon {
                    let s = k as i64;
                    self.push(encode_step(&spec.matrix, s - 1, s)?)?;
                    self.push(self.set(&spec.target, s)?)?;
                    if let Some(m) = self.check(k)? {
                        let traj = self.stages(&m, 0, s)?;
                        return self.hit(k, traj);
                    }
                    self.pop()?;
                }
            }
            (Direction::Forward, Strategy::OneShot) => {
                self.push(self.set(&spec.initial, 0)?)?;
                self.push(DLFormula::True)?;
                self.push(self.set(&spec.target, 1)?)?;
                let mut power: Option<MaxPlusMatrix> = None;
                for k in 1..=horizon {
                    let ak = match power.take() {
                        None => spec.matrix.clone(),
                        Some(p) => mp_matmul(&p, &spec.matrix)?,
                    };
                    let target = self.backend.pop()?;
                    self.pop()?;
                    self.push(encode_step(&ak, 0, 1)?)?;
                    self.push(target)?;
                    power = Some(ak);
                    if let Some(m) = self.check(k)? {
                        let traj = self.one_shot_witness(&m, 0, 1, k)?;
                        return self.hit(k, traj);
                    }
                }
            }
            (Direction::Backward, Strategy::Sequential) => {
                self.push(self.set(&spec.target, 0)?)?;
                for k in 1..=horizon {
                    let s = k as i64;
                    self.push(encode_step(&spec.matrix, -s, 1 - s)?)?;
                    if self.check(k)?.is_none() {
                        return Ok(ReachResult::emptied_at(k));
                    }
                    self.push(self.set(&spec.initial, -s)?)?;
                    if let Some(m) = self.check(k)? {
                        let traj = self.stages(&m, -s, 0)?;
                        return self.hit(k, traj);
                    }
                    self.pop()?;
                }
            }
            (Direction::Backward, Strategy::OneShot) => {
                self.push(self.set(&spec.target, 0)?)?;
                self.push(DLFormula::True)?;
                let mut power: Option<MaxPlusMatrix> = None;
                for k in 1..=horizon {
                    let ak = match power.take() {
                        None => spec.matrix.clone(),
                        Some(p) => mp_matmul(&p, &spec.matrix)?,
                    };
                    self.pop()?;
                    self.push(encode_step(&ak, -1, 0)?)?;
                    power = Some(ak);
                    if self.check(k)?.is_none() {
                        return Ok(ReachResult::emptied_at(k));
                    }
                    self.push(self.set(&spec.initial, -1)?)?;
                    if let Some(m) = self.check(k)? {
                        let traj = self.one_shot_witness(&m, -1, 0, k)?;
                        return self.hit(k, traj);
                    }
                    self.pop()?;
                }
            }
        }
        Ok(ReachResult::unreachable())
    }
}

fn run_with<B: DlBackend>(backend: B, spec: &ReachSpec, options: &ReachOptions) -> Result<SymbolicRun, ReachError> {
    let allow_single =
        spec.initial.has_single_variable_constraints() || spec.target.has_single_variable_constraints();
    let mut runner = Runner {
        backend,
        spec,
        options,
        allow_single,
        vars: BTreeSet::new(),
        checks: 0,
    };
    let result = runner.run()?;
    Ok(SymbolicRun {
        result,
        variables: runner.vars.len(),
        checks: runner.checks,
    })
}

/// Symbolic reachability in the direction and strategy of `spec`.
pub fn reach_symbolic(spec: &ReachSpec, engine: &Engine, options: &ReachOptions) -> Result<SymbolicRun, ReachError> {
    spec.validate()?;
    let spec = &ReachSpec {
        initial: spec.initial.canonicalize().expect("validated"),
        target: spec.target.canonicalize().expect("validated"),
        ..spec.clone()
    };
    match engine {
        Engine::Internal => {
            let mut ctx = SolverContext::new();
            ctx.set_deadline(options.deadline);
            run_with(ctx, spec, options)
        }
        Engine::External {
            command,
            prefer_integer,
        } => {
            let solver = ExternalSolver::spawn(command)?.prefer_integer(*prefer_integer);
            run_with(ExternalContext::new(solver), spec, options)
        }
    }
}
