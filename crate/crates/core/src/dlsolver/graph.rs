//! Constraint graph with an incrementally maintained feasible potential.
//!
//! An edge `u → v` with weight `w` stands for `x_v − x_u ≤ w`. Weights are
//! pairs `(c, k)` compared lexicographically and read as `c + k·δ` for an
//! infinitesimal `δ > 0`, so a strict bound `< c` is the edge `(c, −1)`.
//! Adding an edge repairs the potential with a Dijkstra pass over reduced
//! costs and reports a negative cycle as the reasons of its edges. Edges are
//! removed in LIFO order; removal never invalidates the potential.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::{Add, Sub};

use num_traits::Zero;

use crate::num::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct DVal {
    pub r: Rat,
    pub k: i64,
}

impl DVal {
    pub const fn new(r: Rat, k: i64) -> Self {
        DVal { r, k }
    }

    pub fn zero() -> Self {
        DVal::new(Rat::zero(), 0)
    }

    pub fn is_negative(&self) -> bool {
        *self < DVal::zero()
    }
}

impl Add for DVal {
    type Output = DVal;
    fn add(self, o: DVal) -> DVal {
        DVal::new(self.r + o.r, self.k + o.k)
    }
}

impl Sub for DVal {
    type Output = DVal;
    fn sub(self, o: DVal) -> DVal {
        DVal::new(self.r - o.r, self.k - o.k)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Edge<R> {
    pub from: u32,
    pub to: u32,
    pub w: DVal,
    pub reason: R,
}

const NEW_EDGE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Graph<R> {
    pot: Vec<DVal>,
    out: Vec<Vec<u32>>,
    edges: Vec<Edge<R>>,
    gamma: Vec<Option<DVal>>,
    pred: Vec<u32>,
    done: Vec<bool>,
    touched: Vec<u32>,
}

impl<R: Copy> Graph<R> {
    pub fn new() -> Self {
        Graph {
            pot: Vec::new(),
            out: Vec::new(),
            edges: Vec::new(),
            gamma: Vec::new(),
            pred: Vec::new(),
            done: Vec::new(),
            touched: Vec::new(),
        }
    }

    pub fn ensure_vars(&mut self, n: usize) {
        if n > self.pot.len() {
            self.pot.resize(n, DVal::zero());
            self.out.resize_with(n, Vec::new);
            self.gamma.resize(n, None);
            self.pred.resize(n, NEW_EDGE);
            self.done.resize(n, false);
        }
    }

    pub fn potential(&self, v: u32) -> DVal {
        self.pot[v as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<R>] {
        &self.edges
    }

    /// Whether the current potential already satisfies `x_to − x_from ≤ w`.
    pub fn satisfied(&self, from: u32, to: u32, w: DVal) -> bool {
        self.pot[to as usize] <= self.pot[from as usize] + w
    }

    /// Adds an edge, or returns the reasons of a negative cycle through it
    /// (the graph is left unchanged in that case).
    pub fn add(&mut self, from: u32, to: u32, w: DVal, reason: R) -> Result<(), Vec<R>> {
        if from == to {
            if w.is_negative() {
                return Err(vec![reason]);
            }
            self.push_edge(from, to, w, reason);
            return Ok(());
        }
        let candidate = self.pot[from as usize] + w;
        if self.pot[to as usize] <= candidate {
            self.push_edge(from, to, w, reason);
            return Ok(());
        }
        let result = self.repair(from, to, candidate - self.pot[to as usize]);
        match result {
            Ok(updates) => {
                for (v, p) in updates {
                    self.pot[v as usize] = p;
                }
                self.push_edge(from, to, w, reason);
                Ok(())
            }
            Err(last) => {
                let mut reasons = vec![reason, self.edges[last as usize].reason];
                let mut v = self.edges[last as usize].from;
                while v != to {
                    let e = &self.edges[self.pred[v as usize] as usize];
                    reasons.push(e.reason);
                    v = e.from;
                }
                self.reset_scratch();
                Err(reasons)
            }
        }
    }

    /// Dijkstra over reduced costs from `to`, whose potential must drop by
    /// `-start`. Returns the new potentials, or the id of the edge that
    /// closes a negative cycle back into `from`.
    fn repair(&mut self, from: u32, to: u32, start: DVal) -> Result<Vec<(u32, DVal)>, u32> {
        let mut heap = BinaryHeap::new();
        self.gamma[to as usize] = Some(start);
        self.pred[to as usize] = NEW_EDGE;
        self.touched.push(to);
        heap.push(Reverse((start, to)));
        let mut updates = Vec::new();
        while let Some(Reverse((g, s))) = heap.pop() {
            let su = s as usize;
            if self.done[su] || self.gamma[su] != Some(g) {
                continue;
            }
            self.done[su] = true;
            let new_pot = self.pot[su] + g;
            updates.push((s, new_pot));
            for &e in &self.out[su] {
                let edge = &self.edges[e as usize];
                let t = edge.to as usize;
                if self.done[t] {
                    continue;
                }
                let cand = new_pot + edge.w - self.pot[t];
                if !cand.is_negative() {
                    continue;
                }
                if edge.to == from {
                    return Err(e);
                }
                if self.gamma[t].is_none_or(|old| cand < old) {
                    if self.gamma[t].is_none() {
                        self.touched.push(edge.to);
                    }
                    self.gamma[t] = Some(cand);
                    self.pred[t] = e;
                    heap.push(Reverse((cand, edge.to)));
                }
            }
        }
        self.reset_scratch();
        Ok(updates)
    }

    fn reset_scratch(&mut self) {
        for &v in &self.touched {
            self.gamma[v as usize] = None;
            self.done[v as usize] = false;
            self.pred[v as usize] = NEW_EDGE;
        }
        self.touched.clear();
    }

    fn push_edge(&mut self, from: u32, to: u32, w: DVal, reason: R) {
        let id = self.edges.len() as u32;
        self.edges.push(Edge { from, to, w, reason });
        self.out[from as usize].push(id);
    }

    /// Removes edges until only `len` remain.
    pub fn truncate(&mut self, len: usize) {
        while self.edges.len() > len {
            let e = self.edges.pop().expect("non-empty");
            let popped = self.out[e.from as usize].pop();
            debug_assert_eq!(popped, Some(self.edges.len() as u32));
        }
    }
}
