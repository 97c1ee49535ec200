//! Parallel BLER estimation.
//!
//! Trial `t` of every point draws from `seed.trial(t)`, so a point's count
//! depends only on the trial range, never on how the range is split across
//! threads.

use std::ops::Range;

use rayon::prelude::*;
use relaybeam_core::dlsolver::IterationControl;
use relaybeam_core::montecarlo::{budget_at_db, BlerCurve, PointCount, Scheme, TrialSetup};
use relaybeam_core::{channel::Topology, RngSeed};

use crate::config::Adaptive;
use crate::error::RunError;

/// Trials handed to one worker at a time.
pub const CHUNK: u64 = 4096;

/// Error count over `range`, split into fixed chunks across the pool.
pub fn count_parallel(setup: &TrialSetup, seed: RngSeed, range: Range<u64>) -> Result<PointCount, RunError> {
    let chunks = (range.end.saturating_sub(range.start)).div_ceil(CHUNK);
    let counts: Result<Vec<PointCount>, _> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let lo = range.start + k * CHUNK;
            let hi = (lo + CHUNK).min(range.end);
            setup.count_errors(seed, lo..hi)
        })
        .collect();
    let total = counts
        .map_err(|e| RunError::Runtime(format!("{} trial failed: {e}", setup.scheme)))?
        .into_iter()
        .fold(PointCount::default(), |a, b| a + b);
    Ok(total)
}

/// Counts `trials` blocks, then keeps doubling while fewer than
/// `min_errors` errors have been seen and `max_trials` allows.
pub fn count_point(
    setup: &TrialSetup,
    seed: RngSeed,
    trials: u64,
    adaptive: Option<Adaptive>,
) -> Result<PointCount, RunError> {
    let mut count = count_parallel(setup, seed, 0..trials)?;
    if let Some(a) = adaptive {
        while count.errors < a.min_errors && count.trials < a.max_trials {
            let next = (2 * count.trials).min(a.max_trials);
            count = count + count_parallel(setup, seed, count.trials..next)?;
        }
    }
    Ok(count)
}

/// Everything needed to estimate one curve.
#[derive(Debug, Clone)]
pub struct CurveJob<'a> {
    pub scheme: Scheme,
    pub topology: &'a Topology,
    pub powers_db: &'a [f64],
    pub relay_ratios: &'a [f64],
    pub trials: u64,
    pub adaptive: Option<Adaptive>,
    pub seed: u64,
    pub control: IterationControl,
}

impl CurveJob<'_> {
    /// Every point uses the same trial streams, so schemes and powers see
    /// common random numbers.
    pub fn run(&self) -> Result<BlerCurve, RunError> {
        let seed = RngSeed::new(self.seed, 0);
        let mut curve = BlerCurve::new(self.scheme, seed);
        for &p_db in self.powers_db {
            let budget =
                budget_at_db(p_db, self.relay_ratios).map_err(|e| RunError::Runtime(format!("{p_db} dB: {e}")))?;
            let mut setup = TrialSetup::new(self.scheme, self.topology.clone(), budget)
                .map_err(|e| RunError::Runtime(format!("{}: {e}", self.scheme)))?;
            setup.control = self.control;
            curve.push(p_db, count_point(&setup, seed, self.trials, self.adaptive)?);
        }
        Ok(curve)
    }
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Runtime(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use relaybeam_core::PowerBudget;

    #[test]
    fn split_matches_sequential() {
        let setup =
            TrialSetup::new(Scheme::BestRelay, Topology::unit_variance(2), PowerBudget::uniform(3.0, 2).unwrap())
                .unwrap();
        let seed = RngSeed::new(5, 0);
        let seq = setup.count_errors(seed, 100..10_000).unwrap();
        let par = count_parallel(&setup, seed, 100..10_000).unwrap();
        assert_eq!(seq, par);
        let one = with_workers(Some(1), || count_parallel(&setup, seed, 0..9000).unwrap()).unwrap();
        let three = with_workers(Some(3), || count_parallel(&setup, seed, 0..9000).unwrap()).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn adaptive_extends_until_errors() {
        let setup =
            TrialSetup::new(Scheme::BeamformNoDl, Topology::unit_variance(2), PowerBudget::uniform(100.0, 2).unwrap())
                .unwrap();
        let seed = RngSeed::new(1, 0);
        let fixed = count_point(&setup, seed, 1000, None).unwrap();
        assert_eq!(fixed.trials, 1000);
        let adaptive = count_point(&setup, seed, 1000, Some(Adaptive { min_errors: 20, max_trials: 1 << 20 })).unwrap();
        assert!(adaptive.errors >= 20 || adaptive.trials == 1 << 20);
        assert_eq!(adaptive, setup.count_errors(seed, 0..adaptive.trials).unwrap());
    }
}
