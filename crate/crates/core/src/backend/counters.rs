//! Per-thread operation counters.
//!
//! Every pairing, exponentiation and transcript hash performed through the
//! backend traits bumps a thread-local counter, so cost formulas can be
//! checked exactly without a separate instrumented build.

use std::cell::Cell;
use std::ops::Sub;

thread_local! {
    static PAIRINGS: Cell<u64> = const { Cell::new(0) };
    static G_EXPS: Cell<u64> = const { Cell::new(0) };
    static GT_EXPS: Cell<u64> = const { Cell::new(0) };
    static HASHES: Cell<u64> = const { Cell::new(0) };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub pairings: u64,
    /// Exponentiations in the source group.
    pub g_exps: u64,
    /// Exponentiations in the target group.
    pub gt_exps: u64,
    pub hashes: u64,
}

impl OpCounts {
    /// All exponentiations regardless of group.
    pub fn exponentiations(&self) -> u64 {
        self.g_exps + self.gt_exps
    }
}

impl Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            pairings: self.pairings - rhs.pairings,
            g_exps: self.g_exps - rhs.g_exps,
            gt_exps: self.gt_exps - rhs.gt_exps,
            hashes: self.hashes - rhs.hashes,
        }
    }
}

fn bump(cell: &'static std::thread::LocalKey<Cell<u64>>) {
    cell.with(|c| c.set(c.get() + 1));
}

pub(crate) fn record_pairing() {
    bump(&PAIRINGS);
}

pub(crate) fn record_g_exp() {
    bump(&G_EXPS);
}

pub(crate) fn record_gt_exp() {
    bump(&GT_EXPS);
}

pub(crate) fn record_hash() {
    bump(&HASHES);
}

/// Running totals for the current thread.
pub fn snapshot() -> OpCounts {
    OpCounts {
        pairings: PAIRINGS.with(Cell::get),
        g_exps: G_EXPS.with(Cell::get),
        gt_exps: GT_EXPS.with(Cell::get),
        hashes: HASHES.with(Cell::get),
    }
}

/// Runs `f` and returns the operations it performed on this thread.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}
