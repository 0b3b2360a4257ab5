use lazysv_core::runner::TrialRunner;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// Environment variable read when no worker count is given on the command line.
pub const WORKERS_ENV: &str = "LAZYSV_WORKERS";

/// Runs trials on a dedicated rayon pool; results keep trial order.
pub struct RayonRunner {
    pool: rayon::ThreadPool,
}

impl RayonRunner {
    /// `workers = None` falls back to `LAZYSV_WORKERS`, then to rayon's default.
    pub fn new(workers: Option<usize>) -> CliResult<Self> {
        let workers = match workers {
            Some(w) => Some(w),
            None => match std::env::var(WORKERS_ENV) {
                Ok(v) => Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::config(format!("{WORKERS_ENV}={v:?} is not a worker count")))?,
                ),
                Err(_) => None,
            },
        };
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            if w == 0 {
                return Err(CliError::config("workers must be at least 1"));
            }
            builder = builder.num_threads(w);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
        Ok(RayonRunner { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl TrialRunner for RayonRunner {
    fn map_trials<T, F>(&self, trials: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| (0..trials).into_par_iter().map(f).collect())
    }
}
