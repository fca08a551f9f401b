//! Reachability by explicit reach-set computation over unions of DBMs.

use crate::dbm::{Dbm, DbmUnion};
use crate::maxplus::{mp_matmul, MaxPlusMatrix};
use crate::pwa::{pwa_generate, PwaSystem};

use super::{Direction, ReachError, ReachOptions, ReachResult, ReachSpec, Strategy};

/// `Im(S)`: images of every part restricted to every region.
pub fn forward_step(
    pwa: &PwaSystem,
    current: &DbmUnion,
    options: &ReachOptions,
    step: usize,
) -> Result<DbmUnion, ReachError> {
    let mut next = DbmUnion::new();
    for part in current.parts() {
        options.check_deadline(step)?;
        for r in &pwa.regions {
            if let Some(piece) = part.intersect_closed(&r.region)? {
                if let Some(img) = piece.image_affine(&r.g, &r.offsets)? {
                    next.push(img);
                }
            }
        }
    }
    if options.subsume {
        next.remove_subsumed();
    }
    Ok(next)
}

/// `Im⁻¹(S)`: preimages of every part, each restricted to its region.
pub fn backward_step(
    pwa: &PwaSystem,
    current: &DbmUnion,
    options: &ReachOptions,
    step: usize,
) -> Result<DbmUnion, ReachError> {
    let mut next = DbmUnion::new();
    for part in current.parts() {
        options.check_deadline(step)?;
        for r in &pwa.regions {
            if let Some(pre) = part.preimage_affine(&r.g, &r.offsets)? {
                if let Some(piece) = pre.intersect_closed(&r.region)? {
                    next.push(piece);
                }
            }
        }
    }
    if options.subsume {
        next.remove_subsumed();
    }
    Ok(next)
}

fn canonical(d: &Dbm) -> Result<Dbm, ReachError> {
    d.canonicalize()
        .ok_or_else(|| ReachError::InvalidSpec("empty set".into()))
}

/// Forward reach sets `X_1..X_N` computed step by step.
pub fn forward_reach_sets(
    a: &MaxPlusMatrix,
    x: &Dbm,
    horizon: usize,
) -> Result<Vec<DbmUnion>, ReachError> {
    let pwa = pwa_generate(a)?;
    let opts = ReachOptions::default();
    let mut sets = Vec::with_capacity(horizon);
    let mut current = DbmUnion::single(canonical(x)?);
    for k in 1..=horizon {
        current = forward_step(&pwa, &current, &opts, k)?;
        sets.push(current.clone());
    }
    Ok(sets)
}

/// Backward reach sets `Y_{-1}..Y_{-N}`, stopping after the first empty one.
pub fn backward_reach_sets(
    a: &MaxPlusMatrix,
    y: &Dbm,
    horizon: usize,
) -> Result<Vec<DbmUnion>, ReachError> {
    let pwa = pwa_generate(a)?;
    let opts = ReachOptions::default();
    let mut sets = Vec::with_capacity(horizon);
    let mut current = DbmUnion::single(canonical(y)?);
    for k in 1..=horizon {
        current = backward_step(&pwa, &current, &opts, k)?;
        let empty = current.is_empty();
        sets.push(current.clone());
        if empty {
            break;
        }
    }
    Ok(sets)
}

/// Powers `A^1, A^2, …` produced lazily for the one-shot loops.
struct Powers<'a> {
    base: &'a MaxPlusMatrix,
    current: Option<MaxPlusMatrix>,
}

impl<'a> Powers<'a> {
    fn new(base: &'a MaxPlusMatrix) -> Self {
        Powers {
            base,
            current: None,
        }
    }

    fn next_power(&mut self) -> Result<&MaxPlusMatrix, ReachError> {
        let next = match self.current.take() {
            None => self.base.clone(),
            Some(p) => mp_matmul(&p, self.base)?,
        };
        Ok(self.current.insert(next))
    }
}

/// Explicit reachability over `k = 1..=N` in any direction and strategy.
pub fn reach_explicit(spec: &ReachSpec, options: &ReachOptions) -> Result<ReachResult, ReachError> {
    spec.validate()?;
    let x = canonical(&spec.initial)?;
    let y = canonical(&spec.target)?;
    if options.check_k0 && x.intersects(&y)? {
        return Ok(ReachResult::hit(0));
    }
    let mut sizes = Vec::new();
    let mut result = match (spec.direction, spec.strategy) {
        (Direction::Forward, Strategy::Sequential) => {
            let pwa = pwa_generate(&spec.matrix)?;
            let mut current = DbmUnion::single(x);
            let mut outcome = ReachResult::unreachable();
            for k in 1..=spec.horizon {
                current = forward_step(&pwa, &current, options, k)?;
                sizes.push(current.len());
                if current.intersects(&y)? {
                    outcome = ReachResult::hit(k);
                    break;
                }
            }
            outcome
        }
        (Direction::Forward, Strategy::OneShot) => {
            let initial = DbmUnion::single(x);
            let mut powers = Powers::new(&spec.matrix);
            let mut outcome = ReachResult::unreachable();
            for k in 1..=spec.horizon {
                options.check_deadline(k)?;
                let pwa = pwa_generate(powers.next_power()?)?;
                let xk = forward_step(&pwa, &initial, options, k)?;
                sizes.push(xk.len());
                if xk.intersects(&y)? {
                    outcome = ReachResult::hit(k);
                    break;
                }
            }
            outcome
        }
        (Direction::Backward, Strategy::Sequential) => {
            let pwa = pwa_generate(&spec.matrix)?;
            let mut current = DbmUnion::single(y);
            let mut outcome = ReachResult::unreachable();
            for k in 1..=spec.horizon {
                current = backward_step(&pwa, &current, options, k)?;
                sizes.push(current.len());
                if current.is_empty() {
                    outcome = ReachResult::emptied_at(k);
                    break;
                }
                if current.intersects(&x)? {
                    outcome = ReachResult::hit(k);
                    break;
                }
            }
            outcome
        }
        (Direction::Backward, Strategy::OneShot) => {
            let target = DbmUnion::single(y);
            let mut powers = Powers::new(&spec.matrix);
            let mut outcome = ReachResult::unreachable();
            for k in 1..=spec.horizon {
                options.check_deadline(k)?;
                let pwa = pwa_generate(powers.next_power()?)?;
                let yk = backward_step(&pwa, &target, options, k)?;
                sizes.push(yk.len());
                if yk.is_empty() {
                    outcome = ReachResult::emptied_at(k);
                    break;
                }
                if yk.intersects(&x)? {
                    outcome = ReachResult::hit(k);
                    break;
                }
            }
            outcome
        }
    };
    result.set_sizes = sizes;
    Ok(result)
}
