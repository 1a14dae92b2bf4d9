//! Trial-level parallelism with results that do not depend on the number of
//! workers.
//!
//! Every trial draws from its own [`RandomStream`](crate::rng::RandomStream),
//! per-trial values are collected in trial order, and sums are formed by a
//! fixed pairwise tree. Scheduling therefore never changes a single bit of
//! the output.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable read by [`workers_from_env`].
pub const WORKERS_ENV: &str = "NNDISP_WORKERS";

/// Worker count requested through [`WORKERS_ENV`], if any.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Run `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evaluate `f(state, trial)` for every trial in `0..trials`, in order.
///
/// `init` builds per-worker scratch state; `f` must not let that state leak
/// into its result.
pub fn map_trials<T, S, I, F>(trials: u64, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map_init(init, f).collect()
}

/// Sum by recursive halving. The tree shape depends only on `xs.len()`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let t = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / t;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (t - 1.0);
    (mean, (var / t).sqrt())
}
