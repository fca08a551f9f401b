//! Strategies and reference implementations shared by the integration tests.
//! The oracles here are deliberately naive and share no code with the crate.

#![allow(dead_code)]

use std::collections::BTreeMap;

use mplreach::bench::{gen_irreducible, instance_rng};
use mplreach::difflogic::{DLAtom, DLFormula, DLRel, DLVar};
use mplreach::maxplus::{MaxPlusMatrix, MaxPlusScalar};
use mplreach::num::{rat, Rat};
use mplreach::{Constraint, Dbm, Rel};
use proptest::prelude::*;

pub fn rel_strategy() -> impl Strategy<Value = Rel> {
    prop_oneof![
        Just(Rel::Ge),
        Just(Rel::Gt),
        Just(Rel::Le),
        Just(Rel::Lt),
        Just(Rel::Eq)
    ]
}

/// Regular matrix of dimension `n` with entries in `-5..=10`.
pub fn regular_matrix(n: usize) -> impl Strategy<Value = MaxPlusMatrix> {
    proptest::collection::vec(proptest::collection::vec(proptest::option::weighted(0.7, -5i64..=10), n), n)
        .prop_map(move |mut rows| {
            for (i, row) in rows.iter_mut().enumerate() {
                if row.iter().all(Option::is_none) {
                    row[i % n] = Some(0);
                }
            }
            MaxPlusMatrix::from_int_rows(&rows).unwrap()
        })
}

pub fn any_regular_matrix(max_n: usize) -> impl Strategy<Value = MaxPlusMatrix> {
    (1..=max_n).prop_flat_map(regular_matrix)
}

/// Irreducible matrix from the benchmark generator, driven by a seed.
pub fn irreducible(n: usize, m: usize, seed: u64) -> MaxPlusMatrix {
    gen_irreducible(n, m, (1, 20), &mut instance_rng(seed, n, m, 0)).unwrap()
}

pub fn irreducible_matrix(max_n: usize) -> impl Strategy<Value = MaxPlusMatrix> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), 1..=n, any::<u64>()))
        .prop_map(|(n, m, seed)| irreducible(n, m, seed))
}

pub fn constraints(n: usize, max_len: usize, allow_x0: bool) -> impl Strategy<Value = Vec<Constraint>> {
    let lo = if allow_x0 { 0 } else { 1 };
    proptest::collection::vec((lo..=n, lo..=n, rel_strategy(), -6i64..=6), 0..=max_len).prop_map(|cs| {
        cs.into_iter()
            .filter(|(i, j, _, _)| i != j)
            .map(|(i, j, rel, c)| Constraint::new(i, j, rel, rat(c)))
            .collect()
    })
}

/// Points with quarter-integer coordinates, which hit boundaries often.
pub fn point(n: usize) -> impl Strategy<Value = Vec<Rat>> {
    proptest::collection::vec(-40i64..=40, n).prop_map(|v| v.into_iter().map(|q| Rat::new(q, 4)).collect())
}

/// Reference max-plus product.
pub fn naive_matmul(a: &MaxPlusMatrix, b: &MaxPlusMatrix) -> MaxPlusMatrix {
    let n = a.dim();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .filter_map(|k| Some(a.get(i, k).value()? + b.get(k, j).value()?))
                        .max()
                        .map_or(MaxPlusScalar::Eps, MaxPlusScalar::Fin)
                })
                .collect()
        })
        .collect();
    MaxPlusMatrix::from_rows(rows).unwrap()
}

/// Reference max-plus matrix–vector product for regular matrices.
pub fn naive_step(a: &MaxPlusMatrix, x: &[Rat]) -> Vec<Rat> {
    (0..a.dim())
        .map(|i| {
            (0..a.dim())
                .filter_map(|j| a.get(i, j).value().map(|w| w + x[j]))
                .max()
                .unwrap()
        })
        .collect()
}

/// Maximum cycle mean by enumerating every elementary cycle (small n only).
pub fn brute_cycle_mean(a: &MaxPlusMatrix) -> Option<Rat> {
    let n = a.dim();
    let mut best: Option<Rat> = None;
    fn dfs(
        a: &MaxPlusMatrix,
        start: usize,
        node: usize,
        weight: Rat,
        len: i64,
        seen: &mut Vec<bool>,
        best: &mut Option<Rat>,
    ) {
        // edge node -> next carries A(next, node)
        for next in 0..a.dim() {
            let Some(w) = a.get(next, node).value() else { continue };
            if next == start {
                let mean = (weight + w) / Rat::from_integer(len + 1);
                if best.is_none_or(|b| mean > b) {
                    *best = Some(mean);
                }
            } else if next > start && !seen[next] {
                seen[next] = true;
                dfs(a, start, next, weight + w, len + 1, seen, best);
                seen[next] = false;
            }
        }
    }
    for s in 0..n {
        let mut seen = vec![false; n];
        seen[s] = true;
        dfs(a, s, s, Rat::from_integer(0), 0, &mut seen, &mut best);
    }
    best
}

/// Weight `c + k·δ` for an infinitesimal `δ > 0`.
type Eps = (Rat, i64);

fn add(a: Eps, b: Eps) -> Eps {
    (a.0 + b.0, a.1 + b.1)
}

/// Bellman–Ford feasibility of a conjunction of atoms.
pub fn bellman_ford_sat(atoms: &[DLAtom]) -> bool {
    let mut ids: BTreeMap<DLVar, usize> = BTreeMap::new();
    let mut edges: Vec<(usize, usize, Eps)> = Vec::new();
    for a in atoms {
        let len = ids.len();
        let l = *ids.entry(a.lhs).or_insert(len);
        let len = ids.len();
        let r = *ids.entry(a.rhs).or_insert(len);
        // lhs − rhs ≥ c  ⇔  rhs − lhs ≤ −c : edge lhs → rhs
        match a.rel {
            DLRel::Ge => edges.push((l, r, (-a.c, 0))),
            DLRel::Gt => edges.push((l, r, (-a.c, -1))),
            DLRel::Eq => {
                edges.push((l, r, (-a.c, 0)));
                edges.push((r, l, (a.c, 0)));
            }
        }
    }
    let n = ids.len();
    let mut dist: Vec<Eps> = vec![(Rat::from_integer(0), 0); n];
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in &edges {
            let cand = add(dist[u], w);
            if cand < dist[v] {
                dist[v] = cand;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    edges.iter().all(|&(u, v, w)| add(dist[u], w) >= dist[v])
}

/// Satisfiability by expanding every disjunction (tiny formulas only).
pub fn brute_force_sat(formulas: &[DLFormula]) -> bool {
    fn dnf(f: &DLFormula) -> Vec<Vec<DLAtom>> {
        match f {
            DLFormula::Atom(a) => vec![vec![*a]],
            DLFormula::True => vec![vec![]],
            DLFormula::False => vec![],
            DLFormula::Or(ps) => ps.iter().flat_map(dnf).collect(),
            DLFormula::And(ps) => {
                let mut acc = vec![vec![]];
                for p in ps {
                    let d = dnf(p);
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &d {
                            let mut c: Vec<DLAtom> = a.clone();
                            c.extend(b.iter().copied());
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
    dnf(&DLFormula::And(formulas.to_vec()))
        .iter()
        .any(|conj| bellman_ford_sat(conj))
}

pub fn dl_atom(vars: usize, stages: i64) -> impl Strategy<Value = DLAtom> {
    (
        1..=vars,
        0..stages,
        0..=vars,
        0..stages,
        prop_oneof![Just(DLRel::Ge), Just(DLRel::Gt), Just(DLRel::Eq)],
        -5i64..=5,
    )
        .prop_filter("distinct variables", |(i, s, j, t, _, _)| {
            DLVar::new(*i, *s) != DLVar::new(*j, *t)
        })
        .prop_map(|(i, s, j, t, rel, c)| {
            let (l, r) = (DLVar::new(i, s), DLVar::new(j, t));
            match rel {
                DLRel::Ge => DLAtom::ge(l, r, rat(c)),
                DLRel::Gt => DLAtom::gt(l, r, rat(c)),
                DLRel::Eq => DLAtom::eq(l, r, rat(c)),
            }
        })
}

/// Small nested formulas: conjunctions of atoms and disjunctions.
pub fn dl_formula(vars: usize, stages: i64) -> impl Strategy<Value = DLFormula> {
    let leaf = prop_oneof![
        8 => dl_atom(vars, stages).prop_map(DLFormula::Atom),
        1 => Just(DLFormula::True),
        1 => Just(DLFormula::False),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 0..3).prop_map(DLFormula::And),
            proptest::collection::vec(inner, 0..3).prop_map(DLFormula::Or),
        ]
    })
}

pub fn set(text: &str, n: usize) -> Dbm {
    Dbm::parse_set(text, n, true).unwrap().unwrap()
}

pub fn example_matrix() -> MaxPlusMatrix {
    MaxPlusMatrix::from_ints([[2, 5], [3, 3]])
}
