//! Baby-step/giant-step discrete log over a bounded range.

use std::collections::HashMap;

use crate::backend::{GroupElement, ScalarField};

/// Precomputed baby steps for one base. Building the table costs `m`
/// group operations and no exponentiations; each solve costs at most
/// `bound / m + 1` more.
#[derive(Debug, Clone)]
pub struct DlogTable<G: GroupElement> {
    bound: u64,
    m: u64,
    baby_steps: HashMap<Vec<u8>, u64>,
    /// base^(-m)
    giant_step: G,
}

impl<G: GroupElement> DlogTable<G> {
    pub fn new(base: &G, bound: u64) -> Self {
        let bound = bound.max(1);
        let m = (bound as f64 + 1.0).sqrt().ceil() as u64;
        let mut baby_steps = HashMap::with_capacity(m as usize);
        let mut cur = G::identity();
        for j in 0..m {
            baby_steps.entry(cur.to_bytes()).or_insert(j);
            cur = cur.op(base);
        }
        DlogTable { bound, m, baby_steps, giant_step: cur.inverse() }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Smallest `n <= bound` with `base^n = target`.
    pub fn solve(&self, target: &G) -> Option<u64> {
        let mut cur = target.clone();
        for i in 0..=self.bound / self.m {
            if let Some(&j) = self.baby_steps.get(&cur.to_bytes()) {
                let n = i * self.m + j;
                return (n <= self.bound).then_some(n);
            }
            cur = cur.op(&self.giant_step);
        }
        None
    }

    /// Smallest-magnitude `n` with `|n| <= bound` and `base^n = target`.
    ///
    /// On a group of small order `p` the bound is clamped to `(p - 1) / 2`
    /// so positive and negative results cannot alias.
    pub fn solve_signed(&self, target: &G) -> Option<i64> {
        let bound = match G::Scalar::small_modulus() {
            Some(p) => self.bound.min((p - 1) / 2),
            None => self.bound,
        };
        let mut pos = target.clone();
        let mut neg = target.inverse();
        for i in 0..=bound / self.m {
            let hit_pos = self.baby_steps.get(&pos.to_bytes()).map(|&j| i * self.m + j);
            let hit_neg = self.baby_steps.get(&neg.to_bytes()).map(|&j| i * self.m + j);
            let best = match (hit_pos, hit_neg) {
                (Some(p), Some(n)) if n < p => Some(-(n as i64)),
                (Some(p), _) => Some(p as i64),
                (None, Some(n)) => Some(-(n as i64)),
                (None, None) => None,
            };
            if let Some(v) = best {
                return (v.unsigned_abs() <= bound).then_some(v);
            }
            pos = pos.op(&self.giant_step);
            neg = neg.op(&self.giant_step);
        }
        None
    }
}

/// One-shot bounded discrete log of `target` to `base`.
pub fn dlog_bsgs<G: GroupElement>(base: &G, target: &G, bound: u64) -> Option<u64> {
    DlogTable::new(base, bound).solve(target)
}
