//! Negation-free difference-logic formulas and the encodings of max-plus
//! dynamics and bounded reachability into them.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::dbm::{Dbm, Rel};
use crate::maxplus::{mp_power, MaxPlusError, MaxPlusMatrix};
use crate::num::Rat;
use crate::reach::{Direction, ReachError, ReachSpec, Strategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffLogicError {
    #[error("single-variable constraint on x{index} needs x0 support enabled")]
    SingleVariable { index: usize },
}

/// State variable `x_index` at event counter `stage`. Index 0 is the
/// stage-independent zero variable `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DLVar {
    pub index: usize,
    pub stage: i64,
}

impl DLVar {
    pub fn new(index: usize, stage: i64) -> Self {
        if index == 0 {
            return DLVar::zero();
        }
        DLVar { index, stage }
    }

    pub fn zero() -> Self {
        DLVar { index: 0, stage: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.index == 0
    }

    /// Interchange name `x<i>@<k>`, or `x0`.
    pub fn name(&self) -> String {
        if self.is_zero() {
            "x0".to_string()
        } else {
            format!("x{}@{}", self.index, self.stage)
        }
    }

    /// Inverse of [`DLVar::name`].
    pub fn parse_name(name: &str) -> Option<DLVar> {
        if name == "x0" {
            return Some(DLVar::zero());
        }
        let rest = name.strip_prefix('x')?;
        let (i, k) = rest.split_once('@')?;
        let index: usize = i.parse().ok()?;
        if index == 0 {
            return None;
        }
        Some(DLVar::new(index, k.parse().ok()?))
    }
}

impl fmt::Display for DLVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DLRel {
    Ge,
    Gt,
    /// Sugar for two `≥` atoms; expanded only when a solver ingests it.
    Eq,
}

impl DLRel {
    pub fn symbol(&self) -> &'static str {
        match self {
            DLRel::Ge => ">=",
            DLRel::Gt => ">",
            DLRel::Eq => "=",
        }
    }
}

/// `lhs − rhs ⋈ c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DLAtom {
    pub lhs: DLVar,
    pub rhs: DLVar,
    pub rel: DLRel,
    pub c: Rat,
}

impl DLAtom {
    fn new(lhs: DLVar, rhs: DLVar, rel: DLRel, c: Rat) -> Self {
        assert_ne!(lhs, rhs, "difference atom over a single variable");
        DLAtom { lhs, rhs, rel, c }
    }

    pub fn ge(lhs: DLVar, rhs: DLVar, c: Rat) -> Self {
        Self::new(lhs, rhs, DLRel::Ge, c)
    }

    pub fn gt(lhs: DLVar, rhs: DLVar, c: Rat) -> Self {
        Self::new(lhs, rhs, DLRel::Gt, c)
    }

    pub fn eq(lhs: DLVar, rhs: DLVar, c: Rat) -> Self {
        Self::new(lhs, rhs, DLRel::Eq, c)
    }

    /// `lhs − rhs ≤ c`, stored as `rhs − lhs ≥ −c`.
    pub fn le(lhs: DLVar, rhs: DLVar, c: Rat) -> Self {
        Self::new(rhs, lhs, DLRel::Ge, -c)
    }

    /// `lhs − rhs < c`, stored as `rhs − lhs > −c`.
    pub fn lt(lhs: DLVar, rhs: DLVar, c: Rat) -> Self {
        Self::new(rhs, lhs, DLRel::Gt, -c)
    }

    pub fn holds(&self, value: impl Fn(DLVar) -> Rat) -> bool {
        let d = value(self.lhs) - value(self.rhs);
        match self.rel {
            DLRel::Ge => d >= self.c,
            DLRel::Gt => d > self.c,
            DLRel::Eq => d == self.c,
        }
    }

    fn map_vars(&self, f: &impl Fn(DLVar) -> DLVar) -> Self {
        DLAtom {
            lhs: f(self.lhs),
            rhs: f(self.rhs),
            ..*self
        }
    }
}

impl fmt::Display for DLAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {} {} {}", self.lhs, self.rhs, self.rel.symbol(), self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DLFormula {
    Atom(DLAtom),
    And(Vec<DLFormula>),
    Or(Vec<DLFormula>),
    True,
    False,
}

impl DLFormula {
    pub fn and(parts: Vec<DLFormula>) -> Self {
        DLFormula::And(parts)
    }

    pub fn or(parts: Vec<DLFormula>) -> Self {
        DLFormula::Or(parts)
    }

    /// Evaluates under a total assignment.
    pub fn holds(&self, value: &impl Fn(DLVar) -> Rat) -> bool {
        match self {
            DLFormula::Atom(a) => a.holds(value),
            DLFormula::And(ps) => ps.iter().all(|p| p.holds(value)),
            DLFormula::Or(ps) => ps.iter().any(|p| p.holds(value)),
            DLFormula::True => true,
            DLFormula::False => false,
        }
    }

    pub fn atoms(&self) -> Vec<&DLAtom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a DLAtom>) {
        match self {
            DLFormula::Atom(a) => out.push(a),
            DLFormula::And(ps) | DLFormula::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
            DLFormula::True | DLFormula::False => {}
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms().len()
    }

    pub fn vars(&self) -> BTreeSet<DLVar> {
        self.atoms()
            .into_iter()
            .flat_map(|a| [a.lhs, a.rhs])
            .collect()
    }

    pub fn map_vars(&self, f: &impl Fn(DLVar) -> DLVar) -> Self {
        match self {
            DLFormula::Atom(a) => DLFormula::Atom(a.map_vars(f)),
            DLFormula::And(ps) => DLFormula::And(ps.iter().map(|p| p.map_vars(f)).collect()),
            DLFormula::Or(ps) => DLFormula::Or(ps.iter().map(|p| p.map_vars(f)).collect()),
            DLFormula::True => DLFormula::True,
            DLFormula::False => DLFormula::False,
        }
    }

    /// Replaces every stage-`from` variable by its stage-`to` counterpart.
    pub fn subs(&self, from: i64, to: i64) -> Self {
        self.map_vars(&|v| {
            if !v.is_zero() && v.stage == from {
                DLVar::new(v.index, to)
            } else {
                v
            }
        })
    }

    pub fn is_conjunctive(&self) -> bool {
        match self {
            DLFormula::Atom(_) | DLFormula::True | DLFormula::False => true,
            DLFormula::And(ps) => ps.iter().all(|p| p.is_conjunctive()),
            DLFormula::Or(_) => false,
        }
    }

    pub fn has_strict(&self) -> bool {
        self.atoms().iter().any(|a| a.rel == DLRel::Gt)
    }
}

impl fmt::Display for DLFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DLFormula::Atom(a) => write!(f, "({a})"),
            DLFormula::True => f.write_str("true"),
            DLFormula::False => f.write_str("false"),
            DLFormula::And(ps) | DLFormula::Or(ps) => {
                if ps.is_empty() {
                    return f.write_str(if matches!(self, DLFormula::And(_)) {
                        "true"
                    } else {
                        "false"
                    });
                }
                let sep = if matches!(self, DLFormula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                let nested = matches!(self, DLFormula::Or(_));
                if nested {
                    f.write_str("(")?;
                }
                for (k, p) in ps.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{p}")?;
                }
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// `Im(V(from), V(to))`: for each row `i`, `x_i(to) − x_j(from) ≥ A(i,j)`
/// for every finite `A(i,j)`, and a disjunction of the matching equalities.
pub fn encode_step(a: &MaxPlusMatrix, from: i64, to: i64) -> Result<DLFormula, MaxPlusError> {
    a.check_regular()?;
    let n = a.dim();
    let mut parts = Vec::with_capacity(n * 2);
    for i in 0..n {
        let target = DLVar::new(i + 1, to);
        let mut ge = Vec::new();
        let mut eq = Vec::new();
        for j in a.finite_columns(i) {
            let w = a.get(i, j).value().expect("finite column");
            let source = DLVar::new(j + 1, from);
            ge.push(DLFormula::Atom(DLAtom::ge(target, source, w)));
            eq.push(DLFormula::Atom(DLAtom::eq(target, source, w)));
        }
        parts.extend(ge);
        parts.push(DLFormula::Or(eq));
    }
    Ok(DLFormula::And(parts))
}

/// Conjunction of the constraints of a canonical DBM over stage variables.
pub fn dbm_to_formula(d: &Dbm, stage: i64, allow_single: bool) -> Result<DLFormula, DiffLogicError> {
    if !allow_single && d.has_single_variable_constraints() {
        let index = (1..=d.dim())
            .find(|&k| d.bound(0, k).is_finite() || d.bound(k, 0).is_finite())
            .unwrap_or(0);
        return Err(DiffLogicError::SingleVariable { index });
    }
    let atoms: Vec<DLFormula> = d
        .constraints()
        .into_iter()
        .map(|c| {
            let (p, q) = (DLVar::new(c.i, stage), DLVar::new(c.j, stage));
            DLFormula::Atom(match c.rel {
                Rel::Ge => DLAtom::ge(p, q, c.c),
                Rel::Gt => DLAtom::gt(p, q, c.c),
                Rel::Le => DLAtom::le(p, q, c.c),
                Rel::Lt => DLAtom::lt(p, q, c.c),
                Rel::Eq => DLAtom::eq(p, q, c.c),
            })
        })
        .collect();
    Ok(match atoms.len() {
        0 => DLFormula::True,
        1 => atoms.into_iter().next().expect("one atom"),
        _ => DLFormula::And(atoms),
    })
}

/// The full bounded formula as ordered fragments:
/// forward `[X@0, Im(0,1), …, Im(N−1,N), Y@N]`,
/// forward one-shot `[X@0, Im^N(0,1), Y@1]`,
/// backward `[Y@0, Im(−1,0), …, Im(−N,1−N), X@−N]`,
/// backward one-shot `[Y@0, Im^N(−1,0), X@−1]`.
pub fn encode_bounded(spec: &ReachSpec) -> Result<Vec<DLFormula>, ReachError> {
    spec.validate()?;
    let allow_single =
        spec.initial.has_single_variable_constraints() || spec.target.has_single_variable_constraints();
    let x = |stage| dbm_to_formula(&spec.initial, stage, allow_single);
    let y = |stage| dbm_to_formula(&spec.target, stage, allow_single);
    let n = spec.horizon as i64;
    let map = |e: DiffLogicError| ReachError::InvalidSpec(e.to_string());
    let mut out = Vec::new();
    match (spec.direction, spec.strategy) {
        (Direction::Forward, Strategy::Sequential) => {
            out.push(x(0).map_err(map)?);
            for k in 1..=n {
                out.push(encode_step(&spec.matrix, k - 1, k)?);
            }
            out.push(y(n).map_err(map)?);
        }
        (Direction::Forward, Strategy::OneShot) => {
            out.push(x(0).map_err(map)?);
            out.push(encode_step(&mp_power(&spec.matrix, spec.horizon)?, 0, 1)?);
            out.push(y(1).map_err(map)?);
        }
        (Direction::Backward, Strategy::Sequential) => {
            out.push(y(0).map_err(map)?);
            for k in 1..=n {
                out.push(encode_step(&spec.matrix, -k, 1 - k)?);
            }
            out.push(x(-n).map_err(map)?);
        }
        (Direction::Backward, Strategy::OneShot) => {
            out.push(y(0).map_err(map)?);
            out.push(encode_step(&mp_power(&spec.matrix, spec.horizon)?, -1, 0)?);
            out.push(x(-1).map_err(map)?);
        }
    }
    Ok(out)
}

/// Evaluation helper for models keyed by variable; absent variables read 0.
pub fn lookup(model: &std::collections::BTreeMap<DLVar, Rat>) -> impl Fn(DLVar) -> Rat + '_ {
    move |v| model.get(&v).copied().unwrap_or_else(Rat::zero)
}
