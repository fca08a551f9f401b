//! Piecewise-affine form of a max-plus linear map.
//!
//! Each coefficient vector `g` selects, per row, the column that attains
//! the maximum. Its region is the closed DBM where that choice is optimal,
//! and inside it the map is the affine shift `x'_i = x_{g_i} + A(i, g_i)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dbm::{Bound, Constraint, Dbm};
use crate::maxplus::{MaxPlusError, MaxPlusMatrix};
use crate::num::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwaRegion {
    /// Zero-based column chosen for each row.
    pub g: Vec<usize>,
    pub region: Dbm,
    /// `A(i, g_i)` for each row.
    pub offsets: Vec<Rat>,
}

impl PwaRegion {
    /// The affine dynamics of this region applied to `x`.
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.g
            .iter()
            .zip(&self.offsets)
            .map(|(&gi, &ai)| x[gi] + ai)
            .collect()
    }

    /// `g` with 1-based indices, as printed.
    pub fn g_one_based(&self) -> Vec<usize> {
        self.g.iter().map(|g| g + 1).collect()
    }

    pub fn summary(&self) -> RegionSummary {
        RegionSummary {
            g: self.g_one_based(),
            offsets: self.offsets.iter().map(|o| o.to_string()).collect(),
            constraints: self.region.constraints(),
        }
    }
}

/// JSON view of a region.
#[derive(Debug, Clone, Serialize)]
pub struct RegionSummary {
    pub g: Vec<usize>,
    pub offsets: Vec<String>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct PwaSystem {
    pub matrix: MaxPlusMatrix,
    pub regions: Vec<PwaRegion>,
}

impl PwaSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// First region (in `g` order) containing `x`.
    pub fn region_of(&self, x: &[Rat]) -> Option<&PwaRegion> {
        self.regions.iter().find(|r| r.region.contains(x))
    }
}

struct Enumerator<'a> {
    a: &'a MaxPlusMatrix,
    out: Vec<PwaRegion>,
}

impl Enumerator<'_> {
    fn descend(&mut self, row: usize, g: &mut Vec<usize>, region: Dbm) {
        let n = self.a.dim();
        if row == n {
            let offsets = g
                .iter()
                .enumerate()
                .map(|(i, &gi)| self.a.get(i, gi).value().expect("finite by construction"))
                .collect();
            self.out.push(PwaRegion {
                g: g.clone(),
                region,
                offsets,
            });
            return;
        }
        for choice in self.a.finite_columns(row).collect::<Vec<_>>() {
            if let Some(next) = restrict(self.a, row, choice, &region) {
                g.push(choice);
                self.descend(row + 1, g, next);
                g.pop();
            }
        }
    }
}

/// Tightens `region` with the optimality constraints of `choice` in `row`:
/// `x_choice − x_j ≥ A(row, j) − A(row, choice)` for every finite `A(row, j)`.
fn restrict(a: &MaxPlusMatrix, row: usize, choice: usize, region: &Dbm) -> Option<Dbm> {
    let best = a.get(row, choice).value()?;
    let mut next = region.clone();
    for j in a.finite_columns(row) {
        if j == choice {
            continue;
        }
        let other = a.get(row, j).value().expect("finite column");
        // x_j − x_choice ≤ A(row, choice) − A(row, j)
        if !next.constrain(j + 1, choice + 1, Bound::le(best - other)) {
            return None;
        }
    }
    Some(next)
}

/// Enumerates every non-empty region of a regular matrix, in lexicographic
/// order of `g`, pruning partial choices whose region is already empty.
pub fn pwa_generate(a: &MaxPlusMatrix) -> Result<PwaSystem, MaxPlusError> {
    a.check_regular()?;
    let n = a.dim();
    let top: Vec<usize> = a.finite_columns(0).collect();
    let branches: Vec<Vec<PwaRegion>> = top
        .par_iter()
        .map(|&choice| {
            let mut e = Enumerator { a, out: Vec::new() };
            if let Some(region) = restrict(a, 0, choice, &Dbm::universe(n)) {
                let mut g = vec![choice];
                e.descend(1, &mut g, region);
            }
            e.out
        })
        .collect();
    Ok(PwaSystem {
        matrix: a.clone(),
        regions: branches.into_iter().flatten().collect(),
    })
}
