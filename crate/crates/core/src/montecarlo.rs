//! Seeded Monte Carlo over the shadowing term.
//!
//! Trial `i` draws from its own generator seeded with
//! `trial_seed(master, i)`, and trials are reduced in fixed-size chunks
//! merged in index order. Results are therefore identical for any number of
//! worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{mean_path_loss, sample_path_loss, ModelError, PathLossParams, ShadowingProfile};

const CHUNK: usize = 4096;

/// SplitMix64 finalizer over (master seed, trial index).
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, index))
}

/// Path-loss realizations for trials `0..n`.
pub fn sample_trials(
    params: &PathLossParams,
    profile: &ShadowingProfile,
    depth_mm: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, ModelError> {
    (0..n as u64)
        .map(|i| sample_path_loss(params, profile, depth_mm, &mut trial_rng(seed, i)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_trials: u64,
    pub seed: u64,
    pub mean_pl_db: f64,
    /// Unbiased sample variance; zero for a single trial.
    pub variance_pl_db2: f64,
    pub threshold_db: f64,
    pub outage_count: u64,
    /// Fraction of trials with PL above the threshold.
    pub outage_rate: f64,
}

/// Running moments of one chunk (count, mean, sum of squared deviations).
#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    exceed: u64,
}

impl Moments {
    fn push(&mut self, x: f64, threshold: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        if x > threshold {
            self.exceed += 1;
        }
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
            exceed: self.exceed + other.exceed,
        }
    }
}

/// Runs `n` shadowing trials at `depth_mm` on `workers` threads (0 = rayon
/// default) and summarizes sampled path loss and outage against
/// `threshold_db`.
pub fn run_montecarlo(
    params: &PathLossParams,
    profile: &ShadowingProfile,
    depth_mm: f64,
    n: u64,
    seed: u64,
    threshold_db: f64,
    workers: usize,
) -> Result<MonteCarloSummary, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidParameter("number of trials must be >= 1".into()));
    }
    // validate once up front so per-trial errors cannot occur
    mean_path_loss(params, depth_mm)?;
    profile.variance_at(depth_mm)?;

    let chunks = n.div_ceil(CHUNK as u64);
    let run_chunk = |c: u64| {
        let start = c * CHUNK as u64;
        let end = (start + CHUNK as u64).min(n);
        let mut m = Moments::default();
        for i in start..end {
            let x = sample_path_loss(params, profile, depth_mm, &mut trial_rng(seed, i))
                .expect("inputs validated above");
            m.push(x, threshold_db);
        }
        m
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ModelError::InvalidParameter(format!("thread pool: {e}")))?;
    let partials: Vec<Moments> = pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect());
    let total = partials.into_iter().fold(Moments::default(), Moments::merge);

    Ok(MonteCarloSummary {
        n_trials: n,
        seed,
        mean_pl_db: total.mean,
        variance_pl_db2: if n > 1 { total.m2 / (n - 1) as f64 } else { 0.0 },
        threshold_db,
        outage_count: total.exceed,
        outage_rate: total.exceed as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnatomicalContext, FrequencyBand, Region};

    fn params() -> PathLossParams {
        PathLossParams::new(30.0, 4.0, FrequencyBand::Ism915, AnatomicalContext::region(Region::WholeTorso))
            .unwrap()
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| trial_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn single_trial_equals_sample() {
        let profile = ShadowingProfile::constant(3.0).unwrap();
        let s = run_montecarlo(&params(), &profile, 50.0, 1, 9, 50.0, 1).unwrap();
        let x = sample_trials(&params(), &profile, 50.0, 1, 9).unwrap()[0];
        assert_eq!(s.mean_pl_db, x);
        assert_eq!(s.variance_pl_db2, 0.0);
        assert_eq!(s.outage_count, u64::from(x > 50.0));
    }

    #[test]
    fn worker_count_invariant() {
        let profile = ShadowingProfile::constant(3.0).unwrap();
        let a = run_montecarlo(&params(), &profile, 50.0, 20_001, 5, 52.0, 1).unwrap();
        let b = run_montecarlo(&params(), &profile, 50.0, 20_001, 5, 52.0, 3).unwrap();
        let c = run_montecarlo(&params(), &profile, 50.0, 20_001, 5, 52.0, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn chunked_moments_match_two_pass() {
        let profile = ShadowingProfile::constant(2.0).unwrap();
        let xs = sample_trials(&params(), &profile, 30.0, 10_000, 11).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let s = run_montecarlo(&params(), &profile, 30.0, 10_000, 11, 0.0, 2).unwrap();
        assert!((s.mean_pl_db - mean).abs() < 1e-10);
        assert!((s.variance_pl_db2 - var).abs() < 1e-9);
        assert_eq!(s.outage_rate, 1.0);
    }

    #[test]
    fn errors() {
        let profile = ShadowingProfile::constant(2.0).unwrap();
        assert!(run_montecarlo(&params(), &profile, 50.0, 0, 1, 0.0, 1).is_err());
        assert!(matches!(
            run_montecarlo(&params(), &profile, 150.0, 10, 1, 0.0, 1),
            Err(ModelError::DepthOutOfRange { .. })
        ));
    }
}
