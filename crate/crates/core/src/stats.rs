//! Running moments, estimates with standard errors, and seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used by every sampler in the crate.
pub type LabRng = ChaCha8Rng;

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors, or within `floor`
    /// absolute when the error bar is degenerate.
    pub fn covers(&self, target: f64, k: f64, floor: f64) -> bool {
        (self.value - target).abs() <= (k * self.std_error).max(floor)
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.std_error
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningStats {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan's parallel combination; associative up to rounding.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            std_error: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index` under `master`: `splitmix64(splitmix64(master) ^ index)`.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

pub fn rng_from_seed(seed: u64) -> LabRng {
    LabRng::seed_from_u64(seed)
}

pub fn replica_rng(master: u64, index: u64) -> LabRng {
    rng_from_seed(replica_seed(master, index))
}

/// Runs `n` independent replicas, replica `i` drawing from
/// `replica_rng(master, i)`, and accumulates the `K` values each one returns.
/// Chunks of fixed size run in parallel and merge in index order, so the
/// result does not depend on the worker count.
pub fn replica_stats<const K: usize, F>(master: u64, n: usize, f: F) -> [RunningStats; K]
where
    F: Fn(&mut LabRng, usize) -> [f64; K] + Sync,
{
    use rayon::prelude::*;
    const CHUNK: usize = 256;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<[RunningStats; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [RunningStats::new(); K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = replica_rng(master, i as u64);
                for (s, v) in acc.iter_mut().zip(f(&mut rng, i)) {
                    s.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [RunningStats::new(); K];
    for p in &parts {
        for (t, s) in total.iter_mut().zip(p) {
            t.merge(s);
        }
    }
    total
}

/// Total-variation distance between two discrete laws given as aligned
/// probability vectors, plus the mass missing from both.
pub fn total_variation(p: &[f64], q: &[f64], unlisted_mass: f64) -> f64 {
    0.5 * (p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() + unlisted_mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 8.0];
        let s: RunningStats = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean() - mean).abs() < 1e-14);
        assert!((s.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let all: RunningStats = xs.iter().copied().collect();
        let mut a: RunningStats = xs[..17].iter().copied().collect();
        let b: RunningStats = xs[17..].iter().copied().collect();
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-13);
    }

    #[test]
    fn replica_seeds_are_distinct_and_stable() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| replica_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(replica_seed(7, 3), replica_seed(7, 3));
        assert_ne!(replica_seed(7, 3), replica_seed(8, 3));
    }
}
