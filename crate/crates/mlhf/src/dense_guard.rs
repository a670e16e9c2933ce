//! Structural assertion hook on dense allocation sizes.
//!
//! In multilevel-correction mode no dense matrix larger than the correction
//! block may ever be allocated. The solver routes its dense allocations
//! through [`DenseAllocGuard::alloc_matrix`] / [`alloc_vector`] so a run can
//! assert that bound structurally.

use nalgebra::{DMatrix, DVector};
use std::sync::atomic::{AtomicUsize, Ordering};

static LIMIT_ENTRIES: AtomicUsize = AtomicUsize::new(usize::MAX);
static VIOLATIONS: AtomicUsize = AtomicUsize::new(0);
static PEAK_ENTRIES: AtomicUsize = AtomicUsize::new(0);

/// Process-wide guard over guarded dense allocations.
pub struct DenseAllocGuard;

impl DenseAllocGuard {
    /// Arm the guard: any subsequent guarded allocation above
    /// `limit_entries` entries is counted as a violation.
    pub fn arm(limit_entries: usize) {
        LIMIT_ENTRIES.store(limit_entries, Ordering::SeqCst);
        VIOLATIONS.store(0, Ordering::SeqCst);
        PEAK_ENTRIES.store(0, Ordering::SeqCst);
    }

    /// Disarm the guard.
    pub fn disarm() {
        LIMIT_ENTRIES.store(usize::MAX, Ordering::SeqCst);
    }

    pub fn violations() -> usize {
        VIOLATIONS.load(Ordering::SeqCst)
    }

    /// Largest guarded allocation seen since the guard was armed, in entries.
    pub fn peak_entries() -> usize {
        PEAK_ENTRIES.load(Ordering::SeqCst)
    }

    fn record(entries: usize) {
        PEAK_ENTRIES.fetch_max(entries, Ordering::SeqCst);
        if entries > LIMIT_ENTRIES.load(Ordering::SeqCst) {
            VIOLATIONS.fetch_add(1, Ordering::SeqCst);
        }
    }

    pub fn alloc_matrix(rows: usize, cols: usize) -> DMatrix<f64> {
        Self::record(rows * cols);
        DMatrix::zeros(rows, cols)
    }

    pub fn alloc_vector(len: usize) -> DVector<f64> {
        Self::record(len);
        DVector::zeros(len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_counts_oversized_allocations() {
        DenseAllocGuard::arm(10);
        let _ok = DenseAllocGuard::alloc_matrix(3, 3);
        assert_eq!(DenseAllocGuard::violations(), 0);
        let _bad = DenseAllocGuard::alloc_matrix(4, 4);
        assert_eq!(DenseAllocGuard::violations(), 1);
        assert_eq!(DenseAllocGuard::peak_entries(), 16);
        DenseAllocGuard::disarm();
    }
}
