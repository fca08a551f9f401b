//! Max-plus (tropical) linear algebra over exact rationals.
//!
//! `⊕` is `max`, `⊗` is `+`, and ε = −∞ is a distinct variant rather than a
//! large negative sentinel.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{parse_rat, Rat};

/// Default number of powers explored by [`transient_cyclicity`].
pub const DEFAULT_POWER_CAP: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaxPlusError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix power must be at least 1")]
    ZeroPower,
    #[error("matrix is not irreducible")]
    Reducible,
    #[error("row {row} has no finite entry (matrix is not regular)")]
    NotRegular { row: usize },
    #[error("no periodicity found within {cap} powers")]
    CapExceeded { cap: usize },
    #[error("matrix text: {0}")]
    Parse(String),
}

/// An element of ℝmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MaxPlusScalar {
    /// ε = −∞. Ordered below every finite value.
    Eps,
    Fin(Rat),
}

impl MaxPlusScalar {
    pub fn finite(v: i64) -> Self {
        MaxPlusScalar::Fin(Rat::from_integer(v))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, MaxPlusScalar::Fin(_))
    }

    pub fn value(&self) -> Option<Rat> {
        match self {
            MaxPlusScalar::Eps => None,
            MaxPlusScalar::Fin(v) => Some(*v),
        }
    }

    /// `a ⊕ b = max(a, b)`.
    pub fn oplus(self, other: Self) -> Self {
        self.max(other)
    }

    /// `a ⊗ b = a + b`, with ε absorbing.
    pub fn otimes(self, other: Self) -> Self {
        match (self, other) {
            (MaxPlusScalar::Fin(a), MaxPlusScalar::Fin(b)) => MaxPlusScalar::Fin(a + b),
            _ => MaxPlusScalar::Eps,
        }
    }
}

impl fmt::Display for MaxPlusScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxPlusScalar::Eps => write!(f, "-inf"),
            MaxPlusScalar::Fin(v) => write!(f, "{v}"),
        }
    }
}

/// Square matrix over ℝmax, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaxPlusMatrix {
    n: usize,
    entries: Vec<MaxPlusScalar>,
}

impl MaxPlusMatrix {
    pub fn from_rows(rows: Vec<Vec<MaxPlusScalar>>) -> Result<Self, MaxPlusError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MaxPlusError::Parse(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(MaxPlusMatrix { n, entries })
    }

    /// Builds a matrix from integer rows; `None` is ε.
    pub fn from_int_rows(rows: &[Vec<Option<i64>>]) -> Result<Self, MaxPlusError> {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|e| e.map_or(MaxPlusScalar::Eps, MaxPlusScalar::finite))
                        .collect()
                })
                .collect(),
        )
    }

    /// Builds a fully finite integer matrix.
    pub fn from_ints<const N: usize>(rows: [[i64; N]; N]) -> Self {
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| MaxPlusScalar::finite(v)))
            .collect();
        MaxPlusMatrix { n: N, entries }
    }

    /// Max-plus identity: 0 on the diagonal, ε elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::filled(n, MaxPlusScalar::Eps);
        for i in 0..n {
            m.set(i, i, MaxPlusScalar::Fin(Rat::zero()));
        }
        m
    }

    pub fn filled(n: usize, value: MaxPlusScalar) -> Self {
        MaxPlusMatrix {
            n,
            entries: vec![value; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Zero-based entry access.
    pub fn get(&self, i: usize, j: usize) -> MaxPlusScalar {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: MaxPlusScalar) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[MaxPlusScalar] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Zero-based column indices of the finite entries of row `i`.
    pub fn finite_columns(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_finite())
            .map(|(j, _)| j)
    }

    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_finite()).count()
    }

    /// Every row has at least one finite entry.
    pub fn is_regular(&self) -> bool {
        self.check_regular().is_ok()
    }

    pub fn check_regular(&self) -> Result<(), MaxPlusError> {
        for i in 0..self.n {
            if !self.row(i).iter().any(|e| e.is_finite()) {
                return Err(MaxPlusError::NotRegular { row: i });
            }
        }
        Ok(())
    }

    /// `α ⊗ A`: adds `alpha` to every finite entry.
    pub fn shift(&self, alpha: Rat) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| e.otimes(MaxPlusScalar::Fin(alpha)))
            .collect();
        MaxPlusMatrix { n: self.n, entries }
    }

    /// Entrywise `A ⊕ B`.
    pub fn oplus(&self, other: &Self) -> Result<Self, MaxPlusError> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.oplus(*b))
            .collect();
        Ok(MaxPlusMatrix { n: self.n, entries })
    }

    /// `A ⊗ x` for a real vector `x`. Rows without finite entries yield ε.
    pub fn apply(&self, x: &[Rat]) -> Vec<MaxPlusScalar> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, &xj)| a.otimes(MaxPlusScalar::Fin(xj)))
                    .fold(MaxPlusScalar::Eps, MaxPlusScalar::oplus)
            })
            .collect()
    }

    /// `A ⊗ x` for a regular matrix, returning real values.
    pub fn apply_regular(&self, x: &[Rat]) -> Option<Vec<Rat>> {
        self.apply(x).into_iter().map(|v| v.value()).collect()
    }

    fn check_same_dim(&self, other: &Self) -> Result<(), MaxPlusError> {
        if self.n != other.n {
            return Err(MaxPlusError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Parses the matrix text format: a line with `n`, then `n` rows of `n`
    /// tokens; `-inf` or `.` is ε, other tokens are integers, `p/q` or decimals.
    pub fn parse(text: &str) -> Result<Self, MaxPlusError> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| MaxPlusError::Parse("empty input".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| MaxPlusError::Parse(format!("bad dimension line `{header}`")))?;
        if n == 0 {
            return Err(MaxPlusError::Parse("dimension must be positive".into()));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| MaxPlusError::Parse(format!("missing row {}", i + 1)))?;
            let row = line
                .split_whitespace()
                .map(|tok| match tok {
                    "-inf" | "." | "eps" => Ok(MaxPlusScalar::Eps),
                    _ => parse_rat(tok)
                        .map(MaxPlusScalar::Fin)
                        .ok_or_else(|| MaxPlusError::Parse(format!("bad entry `{tok}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != n {
                return Err(MaxPlusError::Parse(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            rows.push(row);
        }
        if let Some(extra) = lines.next() {
            return Err(MaxPlusError::Parse(format!("trailing line `{extra}`")));
        }
        Self::from_rows(rows)
    }

    /// Renders in the matrix text format accepted by [`MaxPlusMatrix::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for MaxPlusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `C(i,j) = max_k A(i,k) + B(k,j)`.
pub fn mp_matmul(a: &MaxPlusMatrix, b: &MaxPlusMatrix) -> Result<MaxPlusMatrix, MaxPlusError> {
    a.check_same_dim(b)?;
    let n = a.n;
    let mut out = MaxPlusMatrix::filled(n, MaxPlusScalar::Eps);
    for i in 0..n {
        for k in 0..n {
            let aik = match a.get(i, k) {
                MaxPlusScalar::Fin(v) => v,
                MaxPlusScalar::Eps => continue,
            };
            for j in 0..n {
                if let MaxPlusScalar::Fin(bkj) = b.get(k, j) {
                    let cand = MaxPlusScalar::Fin(aik + bkj);
                    let slot = &mut out.entries[i * n + j];
                    if cand > *slot {
                        *slot = cand;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `A^⊗k` for `k ≥ 1`.
pub fn mp_power(a: &MaxPlusMatrix, k: usize) -> Result<MaxPlusMatrix, MaxPlusError> {
    if k == 0 {
        return Err(MaxPlusError::ZeroPower);
    }
    // square-and-multiply; ⊗ is associative so the grouping does not matter
    let mut result: Option<MaxPlusMatrix> = None;
    let mut base = a.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mp_matmul(&r, &base)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = mp_matmul(&base, &base)?;
    }
    Ok(result.expect("k >= 1"))
}

/// True iff the precedence graph (edge `j → i` for finite `A(i,j)`) is
/// strongly connected.
pub fn is_irreducible(a: &MaxPlusMatrix) -> bool {
    let n = a.n;
    if n == 0 {
        return false;
    }
    // strongly connected iff node 0 reaches everyone and everyone reaches 0
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                // forward: u → v exists iff A(v,u) finite
                let edge = if forward { a.get(v, u) } else { a.get(u, v) };
                if edge.is_finite() && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    if n == 1 {
        return a.get(0, 0).is_finite();
    }
    reach(true) && reach(false)
}

/// Max-plus eigenvalue: the maximum cycle mean of the precedence graph,
/// computed exactly with Karp's algorithm.
pub fn eigenvalue(a: &MaxPlusMatrix) -> Result<Rat, MaxPlusError> {
    if !is_irreducible(a) {
        return Err(MaxPlusError::Reducible);
    }
    let n = a.n;
    // walks[k][v]: heaviest walk of exactly k edges from node 0 to v
    let mut walks: Vec<Vec<MaxPlusScalar>> = Vec::with_capacity(n + 1);
    let mut start = vec![MaxPlusScalar::Eps; n];
    start[0] = MaxPlusScalar::Fin(Rat::zero());
    walks.push(start);
    for k in 1..=n {
        let prev = &walks[k - 1];
        let next: Vec<MaxPlusScalar> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| a.get(i, j).otimes(prev[j]))
                    .fold(MaxPlusScalar::Eps, MaxPlusScalar::oplus)
            })
            .collect();
        walks.push(next);
    }
    let mut best: Option<Rat> = None;
    for v in 0..n {
        let MaxPlusScalar::Fin(dn) = walks[n][v] else {
            continue;
        };
        let mut worst: Option<Rat> = None;
        for (k, row) in walks.iter().enumerate().take(n) {
            if let MaxPlusScalar::Fin(dk) = row[v] {
                let mean = (dn - dk) / Rat::from_integer((n - k) as i64);
                worst = Some(worst.map_or(mean, |w: Rat| w.min(mean)));
            }
        }
        if let Some(w) = worst {
            best = Some(best.map_or(w, |b: Rat| b.max(w)));
        }
    }
    best.ok_or(MaxPlusError::Reducible)
}

/// Eigenvalue, transient and cyclicity of an irreducible matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralProfile {
    #[serde(with = "crate::num::rat_text")]
    pub lambda: Rat,
    pub transient: usize,
    pub cyclicity: usize,
}

impl SpectralProfile {
    /// `k0 + c − 1`.
    pub fn completeness_threshold(&self) -> usize {
        completeness_threshold(self)
    }
}

/// Normal form of a power modulo a scalar shift: finite entries minus the
/// first finite entry.
fn shift_normal_form(m: &MaxPlusMatrix) -> (Vec<MaxPlusScalar>, Option<Rat>) {
    let pivot = m.entries.iter().find_map(|e| e.value());
    let normal = match pivot {
        None => m.entries.clone(),
        Some(p) => m
            .entries
            .iter()
            .map(|e| e.otimes(MaxPlusScalar::Fin(-p)))
            .collect(),
    };
    (normal, pivot)
}

/// Smallest `(k0, c)` with `A^⊗(k0+c) = λc ⊗ A^⊗k0`, found by iterating
/// powers and matching each against all earlier ones modulo a scalar shift.
pub fn transient_cyclicity(a: &MaxPlusMatrix, cap: usize) -> Result<SpectralProfile, MaxPlusError> {
    let lambda = eigenvalue(a)?;
    let mut seen: HashMap<Vec<MaxPlusScalar>, (usize, Option<Rat>)> = HashMap::new();
    let mut power = a.clone();
    for t in 1..=cap {
        if t > 1 {
            power = mp_matmul(&power, a)?;
        }
        let (normal, pivot) = shift_normal_form(&power);
        if let Some(&(s, earlier_pivot)) = seen.get(&normal) {
            let c = t - s;
            let expected = lambda * Rat::from_integer(c as i64);
            let shift_ok = match (pivot, earlier_pivot) {
                (Some(p), Some(q)) => p - q == expected,
                (None, None) => true,
                _ => false,
            };
            if shift_ok {
                return Ok(SpectralProfile {
                    lambda,
                    transient: s,
                    cyclicity: c,
                });
            }
            // A growth rate other than λ is impossible for irreducible input.
            unreachable!("periodic powers with shift inconsistent with eigenvalue");
        }
        seen.insert(normal, (t, pivot));
    }
    Err(MaxPlusError::CapExceeded { cap })
}

/// Completeness threshold `k0 + c − 1` for bounded reachability.
pub fn completeness_threshold(p: &SpectralProfile) -> usize {
    p.transient + p.cyclicity - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn example() -> MaxPlusMatrix {
        MaxPlusMatrix::from_ints([[2, 5], [3, 3]])
    }

    /// Entrywise max-plus product written from the definition, used as an oracle.
    fn naive_product(a: &MaxPlusMatrix, b: &MaxPlusMatrix) -> MaxPlusMatrix {
        let n = a.dim();
        let mut rows = vec![vec![MaxPlusScalar::Eps; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = (0..n)
                    .map(|k| a.get(i, k).otimes(b.get(k, j)))
                    .fold(MaxPlusScalar::Eps, MaxPlusScalar::oplus);
            }
        }
        MaxPlusMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn example_products() {
        let a = example();
        let a2 = mp_matmul(&a, &a).unwrap();
        assert_eq!(a2, naive_product(&a, &a));
        assert_eq!(a2, MaxPlusMatrix::from_ints([[8, 8], [6, 8]]));
        let a3 = mp_matmul(&a2, &a).unwrap();
        assert_eq!(a3, MaxPlusMatrix::from_ints([[11, 13], [11, 11]]));
        assert_eq!(mp_power(&a, 3).unwrap(), a3);
        let a4 = mp_power(&a, 4).unwrap();
        assert_eq!(a4, MaxPlusMatrix::from_ints([[16, 16], [14, 16]]));
        assert_eq!(a4, a2.shift(rat(8)));
    }

    #[test]
    fn identity_is_neutral() {
        let a = example();
        assert_eq!(mp_matmul(&a, &MaxPlusMatrix::identity(2)).unwrap(), a);
        assert_eq!(mp_matmul(&MaxPlusMatrix::identity(2), &a).unwrap(), a);
    }

    #[test]
    fn power_errors() {
        assert_eq!(mp_power(&example(), 0), Err(MaxPlusError::ZeroPower));
        assert_eq!(mp_power(&example(), 1).unwrap(), example());
        let three = MaxPlusMatrix::identity(3);
        assert!(matches!(
            mp_matmul(&example(), &three),
            Err(MaxPlusError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&example()));
        let split = MaxPlusMatrix::from_int_rows(&[vec![Some(0), None], vec![None, Some(0)]]).unwrap();
        assert!(!is_irreducible(&split));
        assert!(is_irreducible(&MaxPlusMatrix::from_ints([[7]])));
        assert!(!is_irreducible(&MaxPlusMatrix::from_int_rows(&[vec![None]]).unwrap()));
        // one-way chain 1 → 2 only
        let chain = MaxPlusMatrix::from_int_rows(&[vec![Some(1), None], vec![Some(1), Some(1)]]).unwrap();
        assert!(!is_irreducible(&chain));
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(eigenvalue(&example()).unwrap(), rat(4));
        assert_eq!(eigenvalue(&MaxPlusMatrix::from_ints([[-3]])).unwrap(), rat(-3));
        assert_eq!(eigenvalue(&MaxPlusMatrix::from_ints([[0, 0], [0, 0]])).unwrap(), rat(0));
        let split = MaxPlusMatrix::from_int_rows(&[vec![Some(0), None], vec![None, Some(0)]]).unwrap();
        assert_eq!(eigenvalue(&split), Err(MaxPlusError::Reducible));
        // cycle mean 3/2 on a 2-cycle with weights 1 and 2
        let half = MaxPlusMatrix::from_int_rows(&[vec![None, Some(1)], vec![Some(2), None]]).unwrap();
        assert_eq!(eigenvalue(&half).unwrap(), Rat::new(3, 2));
    }

    #[test]
    fn spectral_profile_of_example_matrix() {
        let p = transient_cyclicity(&example(), DEFAULT_POWER_CAP).unwrap();
        assert_eq!(
            p,
            SpectralProfile {
                lambda: rat(4),
                transient: 2,
                cyclicity: 2
            }
        );
        assert_eq!(completeness_threshold(&p), 3);
        let a = example();
        // minimality of k0: A^3 is not 8 ⊗ A^1
        assert_ne!(mp_power(&a, 3).unwrap(), a.shift(rat(8)));
    }

    #[test]
    fn scalar_profile() {
        let p = transient_cyclicity(&MaxPlusMatrix::from_ints([[5]]), 10).unwrap();
        assert_eq!((p.lambda, p.transient, p.cyclicity), (rat(5), 1, 1));
        assert_eq!(completeness_threshold(&p), 1);
    }

    #[test]
    fn cap_exceeded() {
        // 2x2 with long transient: critical self-loop competes with a slow one
        let a = MaxPlusMatrix::from_ints([[0, -100], [-100, -1]]);
        let err = transient_cyclicity(&a, 3).unwrap_err();
        assert_eq!(err, MaxPlusError::CapExceeded { cap: 3 });
        assert!(transient_cyclicity(&a, DEFAULT_POWER_CAP).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let text = "3\n1 . 2\n-inf 0 7/2\n1.5 -2 0\n";
        let m = MaxPlusMatrix::parse(text).unwrap();
        assert_eq!(m.get(0, 1), MaxPlusScalar::Eps);
        assert_eq!(m.get(1, 2), MaxPlusScalar::Fin(Rat::new(7, 2)));
        assert_eq!(m.get(2, 0), MaxPlusScalar::Fin(Rat::new(3, 2)));
        assert_eq!(MaxPlusMatrix::parse(&m.to_text()).unwrap(), m);
        assert!(MaxPlusMatrix::parse("2\n1 2\n3\n").is_err());
        assert!(MaxPlusMatrix::parse("2\n1 2\n3 x\n").is_err());
    }

    #[test]
    fn regularity() {
        assert!(example().is_regular());
        let m = MaxPlusMatrix::from_int_rows(&[vec![Some(1), None], vec![None, None]]).unwrap();
        assert_eq!(m.check_regular(), Err(MaxPlusError::NotRegular { row: 1 }));
    }
}
