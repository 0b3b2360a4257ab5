//! Execution strategy for independent trials.

use alloc::vec::Vec;

/// Maps trial indices `0..trials` to results, returned in index order.
///
/// Implementations may evaluate trials in any order or concurrently; every
/// caller derives a trial's randomness from its index alone.
pub trait TrialRunner {
    fn map_trials<T, F>(&self, trials: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs trials one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialRunner;

impl TrialRunner for SerialRunner {
    fn map_trials<T, F>(&self, trials: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..trials).map(f).collect()
    }
}
