//! Difference-bound matrices over exact rationals.
//!
//! Entry `(i, j)` stores an upper bound on `x_i − x_j`; index 0 is the
//! constant-zero variable `x0`. Lower-bound constraints (`≥`, `>`) are
//! stored by swapping the indices and negating the constant.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::ops::Add;

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{parse_rat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DbmError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("variable x{index} out of range for dimension {n}")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("single-variable constraint on x{index} requires x0 support")]
    SingleVariable { index: usize },
    #[error("constraint relates x{0} to itself")]
    SelfDifference(usize),
    #[error("set text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Upper bound on a difference: `≤ v`, `< v`, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite { value: Rat, strict: bool },
    Unbounded,
}

impl Bound {
    pub const ZERO: Bound = Bound::Finite {
        value: Rat::ZERO,
        strict: false,
    };

    pub fn le(value: Rat) -> Self {
        Bound::Finite {
            value,
            strict: false,
        }
    }

    pub fn lt(value: Rat) -> Self {
        Bound::Finite {
            value,
            strict: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite { .. })
    }

    /// True iff `d` satisfies `d ≤ v` (or `d < v`).
    pub fn admits(&self, d: Rat) -> bool {
        match *self {
            Bound::Unbounded => true,
            Bound::Finite { value, strict } => {
                if strict {
                    d < value
                } else {
                    d <= value
                }
            }
        }
    }

    /// Adds a constant to the bound value.
    pub fn offset(self, c: Rat) -> Self {
        match self {
            Bound::Unbounded => Bound::Unbounded,
            Bound::Finite { value, strict } => Bound::Finite {
                value: value + c,
                strict,
            },
        }
    }
}

impl Add for Bound {
    type Output = Bound;

    fn add(self, rhs: Bound) -> Bound {
        match (self, rhs) {
            (
                Bound::Finite {
                    value: v1,
                    strict: s1,
                },
                Bound::Finite {
                    value: v2,
                    strict: s2,
                },
            ) => Bound::Finite {
                value: v1 + v2,
                strict: s1 || s2,
            },
            _ => Bound::Unbounded,
        }
    }
}

impl Ord for Bound {
    /// Tighter bounds are smaller; `Unbounded` is the weakest.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
            (Bound::Unbounded, _) => Ordering::Greater,
            (_, Bound::Unbounded) => Ordering::Less,
            (
                Bound::Finite {
                    value: v1,
                    strict: s1,
                },
                Bound::Finite {
                    value: v2,
                    strict: s2,
                },
            ) => v1.cmp(v2).then_with(|| s2.cmp(s1)),
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Relation of a textual constraint `x_i − x_j rel c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
}

impl Rel {
    pub fn symbol(&self) -> &'static str {
        match self {
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
        }
    }
}

/// `x_i − x_j rel c`, variables 1-indexed, 0 meaning `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub rel: Rel,
    #[serde(with = "crate::num::rat_text")]
    pub c: Rat,
}

impl Constraint {
    pub fn new(i: usize, j: usize, rel: Rel, c: Rat) -> Self {
        Constraint { i, j, rel, c }
    }

    pub fn holds(&self, point: &[Rat]) -> bool {
        let value = |k: usize| if k == 0 { Rat::zero() } else { point[k - 1] };
        let d = value(self.i) - value(self.j);
        match self.rel {
            Rel::Ge => d >= self.c,
            Rel::Gt => d > self.c,
            Rel::Le => d <= self.c,
            Rel::Lt => d < self.c,
            Rel::Eq => d == self.c,
        }
    }

    /// Upper-bound entries `(row, col, bound)` encoding this constraint.
    fn upper_bounds(&self) -> Vec<(usize, usize, Bound)> {
        let (i, j, c) = (self.i, self.j, self.c);
        match self.rel {
            Rel::Le => vec![(i, j, Bound::le(c))],
            Rel::Lt => vec![(i, j, Bound::lt(c))],
            Rel::Ge => vec![(j, i, Bound::le(-c))],
            Rel::Gt => vec![(j, i, Bound::lt(-c))],
            Rel::Eq => vec![(i, j, Bound::le(c)), (j, i, Bound::le(-c))],
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{} - x{} {} {}", self.i, self.j, self.rel.symbol(), self.c)
    }
}

/// Difference-bound matrix over `x1..xn` plus `x0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    n: usize,
    bounds: Vec<Bound>,
}

impl Dbm {
    /// The unconstrained set ℝ^n (canonical).
    pub fn universe(n: usize) -> Self {
        let size = n + 1;
        let mut bounds = vec![Bound::Unbounded; size * size];
        for i in 0..size {
            bounds[i * size + i] = Bound::ZERO;
        }
        Dbm { n, bounds }
    }

    /// Raw (not yet canonical) DBM from constraints. Constraints touching
    /// `x0` are rejected unless `allow_single` is set.
    pub fn from_constraints(
        n: usize,
        constraints: &[Constraint],
        allow_single: bool,
    ) -> Result<Self, DbmError> {
        let mut d = Dbm::universe(n);
        for c in constraints {
            for idx in [c.i, c.j] {
                if idx > n {
                    return Err(DbmError::VariableOutOfRange { index: idx, n });
                }
            }
            if c.i == c.j {
                return Err(DbmError::SelfDifference(c.i));
            }
            if !allow_single && (c.i == 0 || c.j == 0) {
                return Err(DbmError::SingleVariable {
                    index: c.i.max(c.j),
                });
            }
            for (r, col, b) in c.upper_bounds() {
                d.tighten_raw(r, col, b);
            }
        }
        Ok(d)
    }

    /// Canonical DBM from constraints, `None` if the set is empty.
    pub fn from_constraints_canonical(
        n: usize,
        constraints: &[Constraint],
        allow_single: bool,
    ) -> Result<Option<Self>, DbmError> {
        Ok(Dbm::from_constraints(n, constraints, allow_single)?.canonicalize())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn size(&self) -> usize {
        self.n + 1
    }

    /// Upper bound on `x_i − x_j` (indices include `x0`).
    pub fn bound(&self, i: usize, j: usize) -> Bound {
        self.bounds[i * self.size() + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        let s = self.size();
        self.bounds[i * s + j] = b;
    }

    fn tighten_raw(&mut self, i: usize, j: usize, b: Bound) {
        if b < self.bound(i, j) {
            self.set(i, j, b);
        }
    }

    /// True iff any bound involves `x0`.
    pub fn has_single_variable_constraints(&self) -> bool {
        (1..self.size()).any(|k| self.bound(0, k).is_finite() || self.bound(k, 0).is_finite())
    }

    /// All-pairs tightest closure (Floyd–Warshall). `None` iff the set is
    /// empty, i.e. some diagonal entry drops below `(0, ≤)`.
    pub fn canonicalize(&self) -> Option<Dbm> {
        let mut d = self.clone();
        let s = d.size();
        for k in 0..s {
            for i in 0..s {
                let ik = d.bounds[i * s + k];
                if !ik.is_finite() {
                    continue;
                }
                for j in 0..s {
                    let kj = d.bounds[k * s + j];
                    if !kj.is_finite() {
                        continue;
                    }
                    let via = ik + kj;
                    if via < d.bounds[i * s + j] {
                        d.bounds[i * s + j] = via;
                    }
                }
            }
            if (0..s).any(|i| d.bounds[i * s + i] < Bound::ZERO) {
                return None;
            }
        }
        Some(d)
    }

    /// Whether this (possibly raw) DBM describes the empty set.
    pub fn is_empty(&self) -> bool {
        self.canonicalize().is_none()
    }

    /// Whether the matrix is already closed.
    pub fn is_canonical(&self) -> bool {
        self.canonicalize().as_ref() == Some(self)
    }

    /// Tightens `x_i − x_j` on a canonical DBM and restores canonicity in
    /// O(n²). Returns false (leaving `self` unspecified) if the set empties.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) -> bool {
        if b >= self.bound(i, j) {
            return true;
        }
        if b + self.bound(j, i) < Bound::ZERO {
            return false;
        }
        let s = self.size();
        let col_i: Vec<Bound> = (0..s).map(|r| self.bounds[r * s + i]).collect();
        let row_j: Vec<Bound> = self.bounds[j * s..(j + 1) * s].to_vec();
        for (r, &ri) in col_i.iter().enumerate() {
            if !ri.is_finite() {
                continue;
            }
            let head = ri + b;
            for (c, &jc) in row_j.iter().enumerate() {
                if !jc.is_finite() {
                    continue;
                }
                let via = head + jc;
                if via < self.bounds[r * s + c] {
                    self.bounds[r * s + c] = via;
                }
            }
        }
        true
    }

    /// Applies a constraint to a canonical DBM incrementally.
    pub fn constrain_with(&mut self, c: &Constraint) -> bool {
        c.upper_bounds()
            .into_iter()
            .all(|(i, j, b)| self.constrain(i, j, b))
    }

    fn check_dim(&self, other: &Dbm) -> Result<(), DbmError> {
        if self.n != other.n {
            return Err(DbmError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Entrywise tighter bound, then canonicalize.
    pub fn intersect(&self, other: &Dbm) -> Result<Option<Dbm>, DbmError> {
        self.check_dim(other)?;
        let bounds = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|(a, b)| (*a).min(*b))
            .collect();
        Ok(Dbm { n: self.n, bounds }.canonicalize())
    }

    /// Intersection of two canonical DBMs: a pairwise check rejects most
    /// empty cases, the rest is tightened incrementally from `self`.
    pub fn intersect_closed(&self, other: &Dbm) -> Result<Option<Dbm>, DbmError> {
        self.check_dim(other)?;
        let s = self.size();
        for i in 0..s {
            for j in (i + 1)..s {
                let (a, b) = (self.bounds[i * s + j], other.bounds[j * s + i]);
                if a.is_finite() && b.is_finite() && a + b < Bound::ZERO {
                    return Ok(None);
                }
                let (a, b) = (other.bounds[i * s + j], self.bounds[j * s + i]);
                if a.is_finite() && b.is_finite() && a + b < Bound::ZERO {
                    return Ok(None);
                }
            }
        }
        let mut d = self.clone();
        for i in 0..s {
            for j in 0..s {
                let b = other.bounds[i * s + j];
                if i != j && b < d.bounds[i * s + j] && !d.constrain(i, j, b) {
                    return Ok(None);
                }
            }
        }
        Ok(Some(d))
    }

    /// Non-emptiness of the intersection, without keeping the result.
    pub fn intersects(&self, other: &Dbm) -> Result<bool, DbmError> {
        Ok(self.intersect(other)?.is_some())
    }

    fn check_affine(&self, g: &[usize], a: &[Rat]) -> Result<(), DbmError> {
        if g.len() != self.n || a.len() != self.n {
            return Err(DbmError::DimensionMismatch {
                left: self.n,
                right: g.len().max(a.len()),
            });
        }
        if let Some(&bad) = g.iter().find(|&&gi| gi >= self.n) {
            return Err(DbmError::VariableOutOfRange {
                index: bad + 1,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Image of a canonical non-empty DBM under `x'_i = x_{g_i} + a_i`
    /// (`g` zero-based). Since `x'_i − x'_j = x_{g_i} − x_{g_j} + a_i − a_j`,
    /// the closed input bounds give the closed output directly.
    pub fn image_affine(&self, g: &[usize], a: &[Rat]) -> Result<Option<Dbm>, DbmError> {
        self.check_affine(g, a)?;
        let s = self.size();
        // source variable and offset for every output index, x0 ↦ x0 + 0
        let src = |k: usize| if k == 0 { 0 } else { g[k - 1] + 1 };
        let off = |k: usize| if k == 0 { Rat::zero() } else { a[k - 1] };
        let mut out = Dbm::universe(self.n);
        for i in 0..s {
            for j in 0..s {
                if i == j {
                    continue;
                }
                let b = self.bound(src(i), src(j)).offset(off(i) - off(j));
                out.set(i, j, b);
            }
        }
        Ok(Some(out))
    }

    /// Image via the lifted system: conjoin `D` over unprimed variables with
    /// the defining equalities, close over `2n + 1` variables, and project
    /// onto the primed block.
    pub fn image_affine_lifted(&self, g: &[usize], a: &[Rat]) -> Result<Option<Dbm>, DbmError> {
        self.check_affine(g, a)?;
        let n = self.n;
        let mut lifted = Dbm::universe(2 * n);
        for i in 0..=n {
            for j in 0..=n {
                lifted.set(i, j, self.bound(i, j));
            }
        }
        for i in 0..n {
            let primed = n + 1 + i;
            let source = g[i] + 1;
            lifted.tighten_raw(primed, source, Bound::le(a[i]));
            lifted.tighten_raw(source, primed, Bound::le(-a[i]));
        }
        let Some(closed) = lifted.canonicalize() else {
            return Ok(None);
        };
        let pick = |k: usize| if k == 0 { 0 } else { n + k };
        let mut out = Dbm::universe(n);
        for i in 0..=n {
            for j in 0..=n {
                out.set(i, j, closed.bound(pick(i), pick(j)));
            }
        }
        Ok(Some(out))
    }

    /// `{x | (x_{g_i} + a_i)_i ∈ D}` by substituting the map into every
    /// constraint of `D`.
    pub fn preimage_affine(&self, g: &[usize], a: &[Rat]) -> Result<Option<Dbm>, DbmError> {
        self.check_affine(g, a)?;
        let s = self.size();
        let src = |k: usize| if k == 0 { 0 } else { g[k - 1] + 1 };
        let off = |k: usize| if k == 0 { Rat::zero() } else { a[k - 1] };
        let mut out = Dbm::universe(self.n);
        for i in 0..s {
            for j in 0..s {
                if i == j {
                    continue;
                }
                let b = self.bound(i, j);
                if !b.is_finite() {
                    continue;
                }
                let shifted = b.offset(off(j) - off(i));
                let (si, sj) = (src(i), src(j));
                if si == sj {
                    // the constraint collapses to 0 ⋈ constant
                    if !shifted.admits(Rat::zero()) {
                        return Ok(None);
                    }
                } else {
                    out.tighten_raw(si, sj, shifted);
                }
            }
        }
        Ok(out.canonicalize())
    }

    /// Membership of a point `(x1..xn)`, with `x0 = 0`.
    pub fn contains(&self, point: &[Rat]) -> bool {
        debug_assert_eq!(point.len(), self.n);
        let value = |k: usize| if k == 0 { Rat::zero() } else { point[k - 1] };
        let s = self.size();
        (0..s).all(|i| (0..s).all(|j| i == j || self.bound(i, j).admits(value(i) - value(j))))
    }

    /// `other ⊆ self` for canonical, non-empty operands.
    pub fn includes(&self, other: &Dbm) -> bool {
        self.n == other.n && other.bounds.iter().zip(&self.bounds).all(|(o, s)| o <= s)
    }

    /// A non-redundant constraint list describing this canonical DBM,
    /// grouped per variable pair (`lo ≤ x_i − x_j ≤ hi` or `=`).
    pub fn constraints(&self) -> Vec<Constraint> {
        let s = self.size();
        let mut kept: Vec<(usize, usize, Bound)> = Vec::new();
        for i in 0..s {
            for j in 0..s {
                if i != j && self.bound(i, j).is_finite() {
                    kept.push((i, j, self.bound(i, j)));
                }
            }
        }
        // try dropping long-range entries first so chains stay chains
        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_by_key(|&k| {
            let (i, j, _) = kept[k];
            (std::cmp::Reverse(i.abs_diff(j)), i.min(j), i.max(j), i)
        });
        let mut alive = vec![true; kept.len()];
        for &k in &order {
            alive[k] = false;
            let (i, j, b) = kept[k];
            let mut rest = Dbm::universe(self.n);
            for (idx, &(r, c, rb)) in kept.iter().enumerate() {
                if alive[idx] {
                    rest.tighten_raw(r, c, rb);
                }
            }
            let implied = rest
                .canonicalize()
                .map(|closed| closed.bound(i, j) <= b)
                .unwrap_or(true);
            if !implied {
                alive[k] = true;
            }
        }
        let mut upper: Vec<Vec<Option<Bound>>> = vec![vec![None; s]; s];
        for (idx, &(i, j, b)) in kept.iter().enumerate() {
            if alive[idx] {
                upper[i][j] = Some(b);
            }
        }
        let mut out = Vec::new();
        for lo in 0..s {
            for hi in lo + 1..s {
                // render as x_p − x_q with x0 always on the right
                let (p, q) = if lo == 0 { (hi, lo) } else { (lo, hi) };
                let up = upper[p][q];
                let down = upper[q][p];
                match (up, down) {
                    (
                        Some(Bound::Finite {
                            value: u,
                            strict: false,
                        }),
                        Some(Bound::Finite {
                            value: d,
                            strict: false,
                        }),
                    ) if u == -d => out.push(Constraint::new(p, q, Rel::Eq, u)),
                    _ => {
                        if let Some(Bound::Finite { value, strict }) = down {
                            let rel = if strict { Rel::Gt } else { Rel::Ge };
                            out.push(Constraint::new(p, q, rel, -value));
                        }
                        if let Some(Bound::Finite { value, strict }) = up {
                            let rel = if strict { Rel::Lt } else { Rel::Le };
                            out.push(Constraint::new(p, q, rel, value));
                        }
                    }
                }
            }
        }
        out
    }

    /// Draws a point of a canonical non-empty DBM by fixing variables one at
    /// a time inside their currently feasible interval.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Rat> {
        let mut d = self.clone();
        let mut point = Vec::with_capacity(self.n);
        for v in 1..=self.n {
            let lo = match d.bound(0, v) {
                Bound::Finite { value, strict } => Some((-value, strict)),
                Bound::Unbounded => None,
            };
            let hi = match d.bound(v, 0) {
                Bound::Finite { value, strict } => Some((value, strict)),
                Bound::Unbounded => None,
            };
            let jitter = |rng: &mut R| Rat::new(rng.gen_range(0..=40), 4);
            let value = match (lo, hi) {
                (None, None) => Rat::from_integer(rng.gen_range(-10..=10)) + Rat::new(rng.gen_range(0..4), 4),
                (Some((l, strict)), None) => {
                    let j = jitter(rng);
                    if strict && j.is_zero() {
                        l + Rat::new(1, 4)
                    } else {
                        l + j
                    }
                }
                (None, Some((h, strict))) => {
                    let j = jitter(rng);
                    if strict && j.is_zero() {
                        h - Rat::new(1, 4)
                    } else {
                        h - j
                    }
                }
                (Some((l, ls)), Some((h, hs))) => {
                    if l == h {
                        l
                    } else {
                        const STEPS: i64 = 16;
                        let min_t = if ls { 1 } else { 0 };
                        let max_t = if hs { STEPS - 1 } else { STEPS };
                        let t = rng.gen_range(min_t..=max_t);
                        l + (h - l) * Rat::new(t, STEPS)
                    }
                }
            };
            let ok = d.constrain(v, 0, Bound::le(value)) && d.constrain(0, v, Bound::le(-value));
            debug_assert!(ok, "sampled value left the feasible interval");
            point.push(value);
        }
        point
    }

    /// Renders in the set text format, one constraint per line.
    pub fn to_set_text(&self) -> String {
        self.constraints()
            .iter()
            .map(|c| format!("{c}\n"))
            .collect()
    }

    /// Parses the set text format for dimension `n`. Blank lines and `#`
    /// comments are ignored. The result is canonical; `None` means the
    /// constraints are inconsistent.
    pub fn parse_set(text: &str, n: usize, allow_single: bool) -> Result<Option<Dbm>, DbmError> {
        let mut constraints = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let c = parse_constraint(line).map_err(|msg| DbmError::Parse {
                line: lineno + 1,
                msg,
            })?;
            constraints.push(c);
        }
        Dbm::from_constraints_canonical(n, &constraints, allow_single)
    }
}

impl fmt::Display for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs = self.constraints();
        if cs.is_empty() {
            return write!(f, "{{R^{}}}", self.n);
        }
        let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn parse_var(tok: &str) -> Result<usize, String> {
    tok.strip_prefix('x')
        .and_then(|rest| rest.parse().ok())
        .ok_or_else(|| format!("expected variable like `x1`, found `{tok}`"))
}

/// Parses `x<i> - x<j> <rel> <c>`.
pub fn parse_constraint(line: &str) -> Result<Constraint, String> {
    let (lhs, rel, rhs) = [">=", "<=", "=", ">", "<"]
        .iter()
        .find_map(|op| line.split_once(op).map(|(l, r)| (l, *op, r)))
        .ok_or_else(|| format!("no relation in `{line}`"))?;
    let rel = match rel {
        ">=" => Rel::Ge,
        "<=" => Rel::Le,
        "=" => Rel::Eq,
        ">" => Rel::Gt,
        _ => Rel::Lt,
    };
    let (a, b) = lhs
        .split_once('-')
        .ok_or_else(|| format!("expected `x<i> - x<j>` in `{line}`"))?;
    let i = parse_var(a.trim())?;
    let j = parse_var(b.trim())?;
    let c = parse_rat(rhs.trim()).ok_or_else(|| format!("bad constant `{}`", rhs.trim()))?;
    Ok(Constraint::new(i, j, rel, c))
}

/// Finite union of canonical, non-empty DBMs of one dimension.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DbmUnion {
    parts: Vec<Dbm>,
    seen: HashSet<Dbm>,
}

impl DbmUnion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(d: Dbm) -> Self {
        let mut u = Self::new();
        u.push(d);
        u
    }

    /// Appends a part unless an identical one is already present.
    pub fn push(&mut self, d: Dbm) {
        if let Some(first) = self.parts.first() {
            assert_eq!(first.dim(), d.dim(), "mixed dimensions in a DBM union");
        }
        if self.seen.insert(d.clone()) {
            self.parts.push(d);
        }
    }

    pub fn parts(&self) -> &[Dbm] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, point: &[Rat]) -> bool {
        self.parts.iter().any(|p| p.contains(point))
    }

    pub fn intersects(&self, d: &Dbm) -> Result<bool, DbmError> {
        for p in &self.parts {
            if p.intersects(d)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Drops every part included in another part (first occurrence wins on
    /// equality).
    pub fn remove_subsumed(&mut self) {
        let parts = std::mem::take(&mut self.parts);
        let mut keep = vec![true; parts.len()];
        for i in 0..parts.len() {
            for j in 0..parts.len() {
                if i != j && keep[j] && keep[i] && parts[j].includes(&parts[i]) {
                    keep[i] = false;
                }
            }
        }
        self.seen.clear();
        for (p, k) in parts.into_iter().zip(keep) {
            if k {
                self.push(p);
            }
        }
    }
}
