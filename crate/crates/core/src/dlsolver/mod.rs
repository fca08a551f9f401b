//! Incremental decision procedure for negation-free difference logic.
//!
//! Formulas live on a LIFO stack of frames. Conjunctive atoms of a frame are
//! added to the constraint graph when the frame is pushed and removed when it
//! is popped. Disjunctions are decided by a backtracking search that keeps
//! the graph potential as the candidate model, skips disjunctions the model
//! already satisfies, branches on the one with fewest consistent choices,
//! and jumps back over decisions not involved in a conflict. Conflict sets
//! are kept as nogoods in the highest frame they depend on.

mod graph;
pub mod smtlib;

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::difflogic::{lookup, DLAtom, DLFormula, DLRel, DLVar};
use crate::num::Rat;

use graph::{DVal, Graph};

pub use smtlib::{check_external, to_smtlib, ExternalContext, ExternalSolver, SmtLogic};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("search budget of {limit} steps exhausted")]
    ResourceLimit { limit: u64 },
    #[error("solver deadline exceeded")]
    Deadline,
    #[error("pop on an empty formula stack")]
    EmptyStack,
    #[error("external solver process: {0}")]
    Process(String),
    #[error("cannot parse external solver output: {0}")]
    Parse(String),
    #[error("external solver answered unknown")]
    Unknown,
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// A satisfying assignment over every variable of the stack; `x0` is 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub values: BTreeMap<DLVar, Rat>,
}

impl Model {
    pub fn get(&self, v: DLVar) -> Option<Rat> {
        if v.is_zero() {
            return Some(self.values.get(&v).copied().unwrap_or_else(Rat::zero));
        }
        self.values.get(&v).copied()
    }

    /// Values of `x_1..x_n` at `stage`, if all are assigned.
    pub fn state(&self, n: usize, stage: i64) -> Option<Vec<Rat>> {
        (1..=n).map(|i| self.get(DLVar::new(i, stage))).collect()
    }

    pub fn satisfies(&self, f: &DLFormula) -> bool {
        f.holds(&lookup(&self.values))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatVerdict {
    Sat(Model),
    Unsat,
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }
}

/// Anything that decides a stack of difference-logic formulas.
pub trait DlBackend {
    fn push(&mut self, f: DLFormula) -> Result<(), SolverError>;
    fn pop(&mut self) -> Result<DLFormula, SolverError>;
    fn check(&mut self) -> Result<SatVerdict, SolverError>;
}

#[derive(Debug, Clone, Copy)]
pub struct SolverLimits {
    /// Decisions plus branch trials per `check`.
    pub max_steps: u64,
    pub deadline: Option<Instant>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            max_steps: 50_000_000,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub checks: u64,
    pub decisions: u64,
    pub trials: u64,
    pub conflicts: u64,
    pub learned: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Decision {
    frame: u32,
    node: u32,
    branch: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Unit(u32),
    Decision(Decision),
}

#[derive(Debug, Clone, Copy)]
struct EdgeSpec {
    from: u32,
    to: u32,
    w: DVal,
}

#[derive(Debug, Clone, Default)]
struct Branch {
    edges: Vec<EdgeSpec>,
    ors: Vec<u32>,
}

#[derive(Debug, Clone)]
struct OrNode {
    branches: Vec<Branch>,
}

#[derive(Debug, Clone)]
struct Frame {
    formula: DLFormula,
    units: Vec<EdgeSpec>,
    ors: Vec<u32>,
    nodes: Vec<OrNode>,
    falsum: bool,
    edges_added: usize,
    var_mark: usize,
    /// Some prefix of the stack up to this frame is unsatisfiable.
    refuted: bool,
    nogoods: Vec<Vec<Decision>>,
}

/// A conflict: the decisions it depends on and the highest frame involved.
#[derive(Debug, Clone, Default)]
struct Conflict {
    decisions: Vec<Decision>,
    frame: u32,
}

impl Conflict {
    fn from_reasons(reasons: &[Reason], skip: Option<Decision>) -> Conflict {
        let mut c = Conflict::default();
        for r in reasons {
            match *r {
                Reason::Unit(f) => c.frame = c.frame.max(f),
                Reason::Decision(d) => {
                    c.frame = c.frame.max(d.frame);
                    if Some(d) != skip {
                        c.decisions.push(d);
                    }
                }
            }
        }
        c.decisions.sort_unstable();
        c.decisions.dedup();
        c
    }

    fn merge(&mut self, other: &Conflict) {
        self.frame = self.frame.max(other.frame);
        self.decisions.extend_from_slice(&other.decisions);
        self.decisions.sort_unstable();
        self.decisions.dedup();
    }

    fn contains(&self, d: Decision) -> bool {
        self.decisions.binary_search(&d).is_ok()
    }

    fn without(&self, d: Decision) -> Conflict {
        Conflict {
            decisions: self.decisions.iter().copied().filter(|&x| x != d).collect(),
            frame: self.frame.max(d.frame),
        }
    }
}

const MAX_NOGOOD_LEN: usize = 24;
const MAX_NOGOODS_PER_FRAME: usize = 50_000;

#[derive(Debug, Default)]
struct Registry {
    ids: HashMap<DLVar, u32>,
    vars: Vec<DLVar>,
}

impl Registry {
    fn id(&mut self, v: DLVar) -> u32 {
        if let Some(&id) = self.ids.get(&v) {
            return id;
        }
        let id = self.vars.len() as u32;
        self.vars.push(v);
        self.ids.insert(v, id);
        id
    }

    fn truncate(&mut self, len: usize) {
        for v in self.vars.drain(len..) {
            self.ids.remove(&v);
        }
    }
}

/// Incremental difference-logic solver with push/pop.
#[derive(Debug)]
pub struct SolverContext {
    frames: Vec<Frame>,
    registry: Registry,
    graph: Graph<Reason>,
    /// Index of the frame whose units first became inconsistent.
    broken: Option<usize>,
    limits: SolverLimits,
    stats: SolverStats,
}

impl Default for SolverContext {
    fn default() -> Self {
        Self::new()
    }
}

impl SolverContext {
    pub fn new() -> Self {
        Self::with_limits(SolverLimits::default())
    }

    pub fn with_limits(limits: SolverLimits) -> Self {
        SolverContext {
            frames: Vec::new(),
            registry: Registry::default(),
            graph: Graph::new(),
            broken: None,
            limits,
            stats: SolverStats::default(),
        }
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.limits.deadline = deadline;
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn formulas(&self) -> impl Iterator<Item = &DLFormula> {
        self.frames.iter().map(|f| &f.formula)
    }

    /// Distinct variables over the whole stack.
    pub fn variable_count(&self) -> usize {
        self.registry.vars.len()
    }

    pub fn push(&mut self, formula: DLFormula) {
        let index = self.frames.len() as u32;
        let var_mark = self.registry.vars.len();
        let mut frame = Frame {
            formula: DLFormula::True,
            units: Vec::new(),
            ors: Vec::new(),
            nodes: Vec::new(),
            falsum: false,
            edges_added: 0,
            var_mark,
            refuted: false,
            nogoods: Vec::new(),
        };
        let mut units = Vec::new();
        let mut ors = Vec::new();
        let mut falsum = false;
        compile(
            &formula,
            &mut self.registry,
            &mut frame.nodes,
            &mut units,
            &mut ors,
            &mut falsum,
        );
        frame.formula = formula;
        frame.units = units;
        frame.ors = ors;
        frame.falsum = falsum;
        self.graph.ensure_vars(self.registry.vars.len());
        if self.broken.is_none() {
            for e in &frame.units {
                if self.graph.add(e.from, e.to, e.w, Reason::Unit(index)).is_err() {
                    self.broken = Some(index as usize);
                    break;
                }
                frame.edges_added += 1;
            }
        }
        self.frames.push(frame);
    }

    pub fn pop(&mut self) -> Result<DLFormula, SolverError> {
        let frame = self.frames.pop().ok_or(SolverError::EmptyStack)?;
        let keep = self.graph.edge_count() - frame.edges_added;
        self.graph.truncate(keep);
        self.registry.truncate(frame.var_mark);
        if self.broken == Some(self.frames.len()) {
            self.broken = None;
        }
        Ok(frame.formula)
    }

    /// Decides the conjunction of all frames.
    pub fn check(&mut self) -> Result<SatVerdict, SolverError> {
        self.stats.checks += 1;
        if self.broken.is_some() || self.frames.iter().any(|f| f.falsum || f.refuted) {
            return Ok(SatVerdict::Unsat);
        }
        let base_edges = self.graph.edge_count();
        let mut search = Search::new(self);
        let outcome = search.run();
        let model = match &outcome {
            Ok(true) => Some(search.model()),
            _ => None,
        };
        search.unwind();
        let learned = std::mem::take(&mut search.learned);
        let stats = search.stats;
        drop(search);
        self.stats = stats;
        for (frame, nogood) in learned {
            let f = &mut self.frames[frame as usize];
            if nogood.is_empty() {
                f.refuted = true;
            } else if f.nogoods.len() < MAX_NOGOODS_PER_FRAME {
                f.nogoods.push(nogood);
            }
        }
        debug_assert_eq!(self.graph.edge_count(), base_edges);
        match outcome? {
            false => Ok(SatVerdict::Unsat),
            true => {
                let model = model.expect("model built on success")?;
                for f in &self.frames {
                    if !model.satisfies(&f.formula) {
                        return Err(SolverError::Internal(format!(
                            "model fails replay of {}",
                            f.formula
                        )));
                    }
                }
                Ok(SatVerdict::Sat(model))
            }
        }
    }
}

impl DlBackend for SolverContext {
    fn push(&mut self, f: DLFormula) -> Result<(), SolverError> {
        SolverContext::push(self, f);
        Ok(())
    }

    fn pop(&mut self) -> Result<DLFormula, SolverError> {
        SolverContext::pop(self)
    }

    fn check(&mut self) -> Result<SatVerdict, SolverError> {
        SolverContext::check(self)
    }
}

/// Decides a conjunction of formulas from scratch.
pub fn solve(formulas: &[DLFormula]) -> Result<SatVerdict, SolverError> {
    let mut ctx = SolverContext::new();
    for f in formulas {
        ctx.push(f.clone());
    }
    ctx.check()
}

fn atom_edges(a: &DLAtom, reg: &mut Registry, out: &mut Vec<EdgeSpec>) {
    let l = reg.id(a.lhs);
    let r = reg.id(a.rhs);
    // lhs − rhs ≥ c  ⇔  x_rhs − x_lhs ≤ −c
    match a.rel {
        DLRel::Ge => out.push(EdgeSpec { from: l, to: r, w: DVal::new(-a.c, 0) }),
        DLRel::Gt => out.push(EdgeSpec { from: l, to: r, w: DVal::new(-a.c, -1) }),
        DLRel::Eq => {
            out.push(EdgeSpec { from: l, to: r, w: DVal::new(-a.c, 0) });
            out.push(EdgeSpec { from: r, to: l, w: DVal::new(a.c, 0) });
        }
    }
}

/// Flattens a formula into unit edges and disjunction nodes. Disjunctions
/// with a trivially true branch vanish, false branches are dropped and
/// single-branch disjunctions are inlined.
fn compile(
    f: &DLFormula,
    reg: &mut Registry,
    nodes: &mut Vec<OrNode>,
    edges: &mut Vec<EdgeSpec>,
    ors: &mut Vec<u32>,
    falsum: &mut bool,
) {
    match f {
        DLFormula::Atom(a) => atom_edges(a, reg, edges),
        DLFormula::And(ps) => {
            for p in ps {
                compile(p, reg, nodes, edges, ors, falsum);
            }
        }
        DLFormula::True => {}
        DLFormula::False => *falsum = true,
        DLFormula::Or(ps) => {
            let id = nodes.len() as u32;
            nodes.push(OrNode { branches: Vec::new() });
            let mut branches = Vec::new();
            for p in ps {
                let mut b = Branch::default();
                let mut dead = false;
                compile(p, reg, nodes, &mut b.edges, &mut b.ors, &mut dead);
                if dead {
                    continue;
                }
                if b.edges.is_empty() && b.ors.is_empty() {
                    // valid disjunction
                    return;
                }
                branches.push(b);
            }
            match branches.len() {
                0 => *falsum = true,
                1 => {
                    let b = branches.pop().expect("one branch");
                    edges.extend(b.edges);
                    ors.extend(b.ors);
                }
                _ => {
                    nodes[id as usize].branches = branches;
                    ors.push(id);
                }
            }
        }
    }
}

struct Level {
    frame: u32,
    node: u32,
    feasible: Vec<u32>,
    /// Index into `feasible` of the branch currently applied.
    current: usize,
    acc: Conflict,
    edge_mark: usize,
    pending_mark: usize,
}

enum Pick {
    Done,
    Conflict(Conflict),
    Branch {
        frame: u32,
        node: u32,
        feasible: Vec<u32>,
        infeasible: Conflict,
    },
}

struct Search<'a> {
    frames: &'a [Frame],
    vars: &'a [DLVar],
    graph: &'a mut Graph<Reason>,
    limits: SolverLimits,
    stats: SolverStats,
    steps: u64,
    /// Active disjunctions with the decision that activated them.
    pending: Vec<(u32, u32, Option<Decision>)>,
    chosen: Vec<Vec<Option<u32>>>,
    levels: Vec<Level>,
    nogood_index: HashMap<Decision, Vec<Vec<Decision>>>,
    learned: Vec<(u32, Vec<Decision>)>,
}

impl<'a> Search<'a> {
    fn new(ctx: &'a mut SolverContext) -> Self {
        let frames = &ctx.frames[..];
        let mut nogood_index: HashMap<Decision, Vec<Vec<Decision>>> = HashMap::new();
        for f in frames {
            for ng in &f.nogoods {
                for &d in ng {
                    nogood_index.entry(d).or_default().push(ng.clone());
                }
            }
        }
        let pending = frames
            .iter()
            .enumerate()
            .flat_map(|(k, f)| f.ors.iter().map(move |&o| (k as u32, o, None)))
            .collect();
        Search {
            frames,
            vars: &ctx.registry.vars,
            graph: &mut ctx.graph,
            limits: ctx.limits,
            stats: ctx.stats,
            steps: 0,
            pending,
            chosen: frames.iter().map(|f| vec![None; f.nodes.len()]).collect(),
            levels: Vec::new(),
            nogood_index,
            learned: Vec::new(),
        }
    }

    fn tick(&mut self) -> Result<(), SolverError> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(SolverError::ResourceLimit {
                limit: self.limits.max_steps,
            });
        }
        if self.steps.is_multiple_of(256) {
            if let Some(d) = self.limits.deadline {
                if Instant::now() >= d {
                    return Err(SolverError::Deadline);
                }
            }
        }
        Ok(())
    }

    fn node(&self, frame: u32, node: u32) -> &'a OrNode {
        &self.frames[frame as usize].nodes[node as usize]
    }

    fn branch_satisfied(&self, b: &Branch, frame: u32) -> bool {
        b.edges.iter().all(|e| self.graph.satisfied(e.from, e.to, e.w))
            && b.ors.iter().all(|&o| self.or_satisfied(frame, o))
    }

    fn or_satisfied(&self, frame: u32, node: u32) -> bool {
        self.node(frame, node)
            .branches
            .iter()
            .any(|b| self.branch_satisfied(b, frame))
    }

    /// Nogood that rules out `d` given the other decisions on the trail.
    fn blocked(&self, d: Decision) -> Option<Conflict> {
        let list = self.nogood_index.get(&d)?;
        list.iter()
            .find(|ng| {
                ng.iter().all(|&o| {
                    o == d || self.chosen[o.frame as usize][o.node as usize] == Some(o.branch)
                })
            })
            .map(|ng| Conflict {
                decisions: ng.iter().copied().filter(|&o| o != d).collect(),
                frame: ng.iter().map(|o| o.frame).max().unwrap_or(0),
            })
    }

    /// Tries a branch on top of the current graph, then undoes it.
    fn trial(&mut self, d: Decision) -> Result<Result<(), Conflict>, SolverError> {
        self.tick()?;
        self.stats.trials += 1;
        if let Some(c) = self.blocked(d) {
            return Ok(Err(c));
        }
        let mark = self.graph.edge_count();
        let branch = &self.node(d.frame, d.node).branches[d.branch as usize];
        let mut result = Ok(());
        for e in &branch.edges {
            if let Err(reasons) = self.graph.add(e.from, e.to, e.w, Reason::Decision(d)) {
                result = Err(Conflict::from_reasons(&reasons, Some(d)));
                break;
            }
        }
        self.graph.truncate(mark);
        Ok(result)
    }

    fn pick(&mut self) -> Result<Pick, SolverError> {
        let mut best: Option<(u32, u32, Vec<u32>, Conflict)> = None;
        for idx in 0..self.pending.len() {
            let (frame, node, parent) = self.pending[idx];
            if self.chosen[frame as usize][node as usize].is_some() || self.or_satisfied(frame, node) {
                continue;
            }
            let count = self.node(frame, node).branches.len() as u32;
            let mut feasible = Vec::new();
            let mut infeasible = Conflict {
                decisions: parent.into_iter().collect(),
                frame,
            };
            for branch in 0..count {
                match self.trial(Decision { frame, node, branch })? {
                    Ok(()) => feasible.push(branch),
                    Err(c) => infeasible.merge(&c),
                }
            }
            if feasible.is_empty() {
                return Ok(Pick::Conflict(infeasible));
            }
            let better = best.as_ref().is_none_or(|b| feasible.len() < b.2.len());
            if better {
                let unit = feasible.len() == 1;
                best = Some((frame, node, feasible, infeasible));
                if unit {
                    break;
                }
            }
        }
        Ok(match best {
            None => Pick::Done,
            Some((frame, node, feasible, infeasible)) => Pick::Branch {
                frame,
                node,
                feasible,
                infeasible,
            },
        })
    }

    /// Applies the current branch of the top level, which the last trial
    /// found consistent.
    fn apply_top(&mut self) -> Result<(), SolverError> {
        self.tick()?;
        self.stats.decisions += 1;
        let level = self.levels.last().expect("level");
        let d = Decision {
            frame: level.frame,
            node: level.node,
            branch: level.feasible[level.current],
        };
        let branch = &self.node(d.frame, d.node).branches[d.branch as usize];
        for e in &branch.edges {
            if self.graph.add(e.from, e.to, e.w, Reason::Decision(d)).is_err() {
                return Err(SolverError::Internal("trial-consistent branch conflicts".into()));
            }
        }
        self.chosen[d.frame as usize][d.node as usize] = Some(d.branch);
        self.pending.extend(branch.ors.iter().map(|&o| (d.frame, o, Some(d))));
        Ok(())
    }

    fn undo_top(&mut self) -> Decision {
        let level = self.levels.last().expect("level");
        let d = Decision {
            frame: level.frame,
            node: level.node,
            branch: level.feasible[level.current],
        };
        self.graph.truncate(level.edge_mark);
        self.pending.truncate(level.pending_mark);
        self.chosen[d.frame as usize][d.node as usize] = None;
        d
    }

    fn learn(&mut self, c: &Conflict) {
        self.stats.learned += 1;
        if c.decisions.len() > MAX_NOGOOD_LEN {
            return;
        }
        for &d in &c.decisions {
            self.nogood_index.entry(d).or_default().push(c.decisions.clone());
        }
        self.learned.push((c.frame, c.decisions.clone()));
    }

    /// `Ok(true)` when a model was found; the trail is then left in place.
    fn run(&mut self) -> Result<bool, SolverError> {
        loop {
            let conflict = match self.pick()? {
                Pick::Done => return Ok(true),
                Pick::Conflict(c) => c,
                Pick::Branch {
                    frame,
                    node,
                    feasible,
                    infeasible,
                } => {
                    self.levels.push(Level {
                        frame,
                        node,
                        feasible,
                        current: 0,
                        acc: infeasible,
                        edge_mark: self.graph.edge_count(),
                        pending_mark: self.pending.len(),
                    });
                    self.apply_top()?;
                    continue;
                }
            };
            self.stats.conflicts += 1;
            if !self.backtrack(conflict)? {
                return Ok(false);
            }
        }
    }

    /// Resolves a conflict. Returns `false` when no level is left to revise.
    fn backtrack(&mut self, mut conflict: Conflict) -> Result<bool, SolverError> {
        loop {
            if self.levels.is_empty() {
                self.learn(&conflict);
                return Ok(false);
            }
            let d = self.undo_top();
            if !conflict.contains(d) {
                self.levels.pop();
                continue;
            }
            let rest = conflict.without(d);
            let level = self.levels.last_mut().expect("level");
            level.acc.merge(&rest);
            if level.current + 1 < level.feasible.len() {
                level.current += 1;
                self.apply_top()?;
                return Ok(true);
            }
            conflict = self.levels.pop().expect("level").acc;
            self.learn(&conflict);
        }
    }

    fn unwind(&mut self) {
        while !self.levels.is_empty() {
            self.undo_top();
            self.levels.pop();
        }
    }

    /// Real model from the potential: picks `δ` small enough for every
    /// constraint the search relies on, then shifts so that `x0 = 0`.
    fn model(&self) -> Result<Model, SolverError> {
        let mut relied: Vec<(u32, u32, DVal)> =
            self.graph.edges().iter().map(|e| (e.from, e.to, e.w)).collect();
        let mut stack: Vec<(u32, u32)> = self
            .pending
            .iter()
            .copied()
            .filter(|&(f, n, _)| self.chosen[f as usize][n as usize].is_none())
            .map(|(f, n, _)| (f, n))
            .collect();
        while let Some((frame, node)) = stack.pop() {
            let b = self
                .node(frame, node)
                .branches
                .iter()
                .find(|b| self.branch_satisfied(b, frame))
                .ok_or_else(|| SolverError::Internal("unsatisfied disjunction at model time".into()))?;
            relied.extend(b.edges.iter().map(|e| (e.from, e.to, e.w)));
            stack.extend(b.ors.iter().map(|&o| (frame, o)));
        }
        let mut delta = Rat::one();
        for (from, to, w) in relied {
            let diff = self.graph.potential(to) - self.graph.potential(from);
            if diff.r < w.r && diff.k > 0 {
                let cap = (w.r - diff.r) / Rat::from_integer(2 * diff.k);
                if cap < delta {
                    delta = cap;
                }
            }
        }
        let value = |v: u32| {
            let p = self.graph.potential(v);
            p.r + delta * Rat::from_integer(p.k)
        };
        let shift = self
            .vars
            .iter()
            .position(|v| v.is_zero())
            .map(|z| value(z as u32))
            .unwrap_or_else(Rat::zero);
        let values = self
            .vars
            .iter()
            .enumerate()
            .map(|(id, &v)| (v, value(id as u32) - shift))
            .collect();
        Ok(Model { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn v(i: usize) -> DLVar {
        DLVar::new(i, 0)
    }

    fn ge(a: usize, b: usize, c: i64) -> DLFormula {
        DLFormula::Atom(DLAtom::ge(v(a), v(b), rat(c)))
    }

    fn gt(a: usize, b: usize, c: i64) -> DLFormula {
        DLFormula::Atom(DLAtom::gt(v(a), v(b), rat(c)))
    }

    fn eq(a: usize, b: usize, c: i64) -> DLFormula {
        DLFormula::Atom(DLAtom::eq(v(a), v(b), rat(c)))
    }

    #[test]
    fn conjunctions() {
        assert!(solve(&[ge(1, 2, 1), ge(2, 3, 1), ge(3, 1, -2)]).unwrap().is_sat());
        assert_eq!(
            solve(&[ge(1, 2, 1), ge(2, 3, 1), gt(3, 1, -2)]).unwrap(),
            SatVerdict::Unsat
        );
        assert_eq!(solve(&[ge(1, 2, 1), ge(2, 3, 1), ge(3, 1, -1)]).unwrap(), SatVerdict::Unsat);
    }

    #[test]
    fn strict_model_is_real() {
        let fs = [gt(1, 2, 0), gt(2, 1, -1), eq(3, 1, 5)];
        let SatVerdict::Sat(m) = solve(&fs).unwrap() else {
            panic!("expected sat")
        };
        let d = m.get(v(1)).unwrap() - m.get(v(2)).unwrap();
        assert!(d > rat(0) && d < rat(1));
        assert!(fs.iter().all(|f| m.satisfies(f)));
    }

    #[test]
    fn disjunction_search() {
        // x1 − x2 ∈ {0, 3} ∧ x2 − x3 ∈ {1, 4} ∧ x1 − x3 = 7
        let fs = [
            DLFormula::Or(vec![eq(1, 2, 0), eq(1, 2, 3)]),
            DLFormula::Or(vec![eq(2, 3, 1), eq(2, 3, 4)]),
            eq(1, 3, 7),
        ];
        let SatVerdict::Sat(m) = solve(&fs).unwrap() else {
            panic!("expected sat")
        };
        assert_eq!(m.get(v(1)).unwrap() - m.get(v(2)).unwrap(), rat(3));
        let mut ctx = SolverContext::new();
        for f in &fs[..2] {
            ctx.push(f.clone());
        }
        ctx.push(eq(1, 3, 6));
        assert_eq!(ctx.check().unwrap(), SatVerdict::Unsat);
        ctx.pop().unwrap();
        ctx.push(eq(1, 3, 4));
        assert!(ctx.check().unwrap().is_sat());
    }

    #[test]
    fn push_pop_restores() {
        let mut ctx = SolverContext::new();
        ctx.push(ge(1, 2, 2));
        ctx.push(ge(2, 1, -1));
        assert_eq!(ctx.check().unwrap(), SatVerdict::Unsat);
        assert_eq!(ctx.pop().unwrap(), ge(2, 1, -1));
        assert!(ctx.check().unwrap().is_sat());
        ctx.pop().unwrap();
        assert_eq!(ctx.pop(), Err(SolverError::EmptyStack));
        assert!(ctx.check().unwrap().is_sat());
    }

    #[test]
    fn constants_and_zero_variable() {
        assert_eq!(solve(&[DLFormula::False]).unwrap(), SatVerdict::Unsat);
        assert_eq!(solve(&[DLFormula::Or(vec![])]).unwrap(), SatVerdict::Unsat);
        assert!(solve(&[DLFormula::And(vec![]), DLFormula::True]).unwrap().is_sat());
        let x0 = DLVar::zero();
        let f = DLFormula::Atom(DLAtom::ge(v(1), x0, rat(4)));
        let SatVerdict::Sat(m) = solve(&[f]).unwrap() else {
            panic!("expected sat")
        };
        assert_eq!(m.get(x0), Some(rat(0)));
        assert!(m.get(v(1)).unwrap() >= rat(4));
    }

    #[test]
    fn budget_is_not_unsat() {
        // pigeonhole-like: 4 variables pairwise distinct values in {0,1,2}
        let mut fs = Vec::new();
        for i in 1..=4 {
            fs.push(DLFormula::Or(vec![eq(i, 9, 0), eq(i, 9, 1), eq(i, 9, 2)]));
            for j in 1..i {
                fs.push(DLFormula::Or(vec![gt(i, j, 0), gt(j, i, 0)]));
            }
        }
        let mut ctx = SolverContext::with_limits(SolverLimits {
            max_steps: 5,
            deadline: None,
        });
        for f in &fs {
            ctx.push(f.clone());
        }
        assert!(matches!(ctx.check(), Err(SolverError::ResourceLimit { limit: 5 })));
        assert_eq!(solve(&fs).unwrap(), SatVerdict::Unsat);
    }
}
