//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zc_core::harness::ExperimentConfig;
use zc_core::TimingParameters;

/// Counts of assignments with exactly `k` lone stations, by brute force over
/// all `n^m` slot choices.
pub fn singleton_counts(n: usize, m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; m + 1];
    let total = (n as u64).pow(m as u32);
    let mut occ = vec![0u8; n];
    let mut picks = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        for p in picks.iter_mut() {
            *p = (c % n as u64) as usize;
            c /= n as u64;
        }
        occ.iter_mut().for_each(|o| *o = 0);
        for &p in &picks {
            occ[p] += 1;
        }
        counts[picks.iter().filter(|&&p| occ[p] == 1).count()] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// Two-sided 99% normal interval.
    pub fn contains_99(&self, value: f64) -> bool {
        (value - self.mean).abs() <= 2.5758 * self.std_error
    }
}

/// Monte Carlo of the abstract cycle process: every cycle the unreserved
/// stations pick uniformly among the unreserved slots and lone pickers keep
/// their slot. Each of the `n` slots of a cycle costs `t_s` plus `t_g`
/// (held or newly won), `t_v` (empty) or `t_b` (contested).
/// Returns estimates of the cycle count and the time in seconds.
pub fn cycle_process(
    n: usize,
    m: usize,
    timing: &TimingParameters,
    runs: usize,
    seed: u64,
) -> (Estimate, Estimate) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cycles = Vec::with_capacity(runs);
    let mut times = Vec::with_capacity(runs);
    let mut occ = vec![0u32; n];
    let mut picks = vec![0usize; m];
    for _ in 0..runs {
        let (mut k, mut l, mut t) = (0usize, 0u32, 0.0);
        while k < m {
            let free = n - k;
            let pickers = m - k;
            occ[..free].iter_mut().for_each(|o| *o = 0);
            for p in picks[..pickers].iter_mut() {
                *p = rng.gen_range(0..free);
                occ[*p] += 1;
            }
            let lone = occ[..free].iter().filter(|&&o| o == 1).count();
            let empty = occ[..free].iter().filter(|&&o| o == 0).count();
            let contested = free - lone - empty;
            t += timing.t_s * n as f64
                + timing.t_g * (k + lone) as f64
                + timing.t_v * empty as f64
                + timing.t_b * contested as f64;
            k += lone;
            l += 1;
        }
        cycles.push(f64::from(l));
        times.push(t * 1e-6);
    }
    (Estimate::from(&cycles), Estimate::from(&times))
}

/// A copy of `cfg` with a short duration and the given seeds.
pub fn shortened(mut cfg: ExperimentConfig, duration_s: f64, seeds: &[u64]) -> ExperimentConfig {
    cfg.duration_s = duration_s;
    cfg.warmup_s = cfg.warmup_s.min(duration_s / 2.0);
    cfg.seeds = seeds.to_vec();
    cfg
}
