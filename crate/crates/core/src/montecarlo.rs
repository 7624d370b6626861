//! Deterministic, chunked Monte Carlo driver.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from a ChaCha8
//! stream seeded with `derive_seed(master, k)`, so the event count depends only
//! on `(trials, seed)` and never on the rayon pool size or completion order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mathcore::{binomial_ci, ConfidenceInterval};

pub type McRng = ChaCha8Rng;

/// Trials per chunk.
pub const CHUNK_TRIALS: u64 = 1 << 16;

/// Estimates with fewer events than this are flagged low-confidence.
pub const LOW_CONFIDENCE_EVENTS: u64 = 20;

/// SplitMix64 finalizer applied to `master + (stream + 1)·φ`, φ the 64-bit
/// golden-ratio constant.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_rng(master: u64, stream: u64) -> McRng {
    McRng::seed_from_u64(derive_seed(master, stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    pub ci_level: f64,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, ci_level: 0.99 }
    }

    pub fn with_ci_level(mut self, level: f64) -> Self {
        self.ci_level = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return domain(format!("ci_level must lie in (0, 1), got {}", self.ci_level));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub successes: u64,
    pub trials: u64,
    pub ci: ConfidenceInterval,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_counts(successes: u64, cfg: &MonteCarloConfig) -> Result<Self> {
        let ci = binomial_ci(successes, cfg.trials, cfg.ci_level)?;
        Ok(Self {
            estimate: successes as f64 / cfg.trials as f64,
            successes,
            trials: cfg.trials,
            ci,
            seed: cfg.seed,
        })
    }

    pub fn low_confidence(&self) -> bool {
        self.successes < LOW_CONFIDENCE_EVENTS
    }
}

/// Runs `cfg.trials` Bernoulli trials and returns the event count.
pub fn count_events<F>(cfg: &MonteCarloConfig, event: F) -> Result<u64>
where
    F: Fn(&mut McRng) -> bool + Sync,
{
    cfg.validate()?;
    let chunks = cfg.trials.div_ceil(CHUNK_TRIALS);
    let count = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, k);
            let n = CHUNK_TRIALS.min(cfg.trials - k * CHUNK_TRIALS);
            (0..n).filter(|_| event(&mut rng)).count() as u64
        })
        .sum();
    Ok(count)
}

/// Bernoulli estimate with a Wilson interval at `cfg.ci_level`.
pub fn estimate<F>(cfg: &MonteCarloConfig, event: F) -> Result<MonteCarloEstimate>
where
    F: Fn(&mut McRng) -> bool + Sync,
{
    let successes = count_events(cfg, event)?;
    MonteCarloEstimate::from_counts(successes, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_seeds_differ_per_stream() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| derive_seed(7, k)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn count_independent_of_pool_size() {
        let cfg = MonteCarloConfig::new(300_001, 42);
        let event = |rng: &mut McRng| rng.random::<f64>() < 0.3;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| count_events(&cfg, event).unwrap());
        let b = many.install(|| count_events(&cfg, event).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = MonteCarloConfig::new(0, 1);
        assert!(count_events(&cfg, |_| true).is_err());
    }

    #[test]
    fn estimate_fields_consistent() {
        let cfg = MonteCarloConfig::new(1000, 3);
        let est = estimate(&cfg, |_| false).unwrap();
        assert_eq!(est.successes, 0);
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.ci.lo, 0.0);
        assert!(est.low_confidence());
        assert!(est.ci.contains(est.estimate));
    }
}
