//! Distribution of the convergence cycle count `L` and expected convergence
//! time.
//!
//! With `pi_n = pi_0 P^n` and `pi_0 = delta_0`, `P(L <= n) = pi_n(M)`. The
//! exact expected time is the triple sum over the stopping cycle `l`, the
//! cycle `n <= l` and the reserved count `k`, weighting each term by the
//! joint probability `P(z_n = k, L = l)`. That joint is obtained by forward
//! filtering (`pi_n(k)`) times backward conditioning on first absorption
//! exactly `l - n` cycles later (`f_{l-n}(k)`), so no division by `P(L = l)`
//! is needed.

use super::{expected_cycles, AnalysisError, ReservationChain, TimingParameters};

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_CYCLE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDistributions {
    /// `pi[n]` is the distribution of `z_n`, `n = 0..=last`.
    pub pi: Vec<Vec<f64>>,
    /// `absorption_cdf[n] = P(L <= n)`.
    pub absorption_cdf: Vec<f64>,
    /// `stopping[l] = P(L = l)`.
    pub stopping: Vec<f64>,
    /// Tail mass `P(L > last)` left at truncation.
    pub tail: f64,
    pub truncation_epsilon: f64,
}

impl ConvergenceDistributions {
    pub fn last_cycle(&self) -> usize {
        self.pi.len() - 1
    }

    pub fn stopping_pmf(&self, l: usize) -> f64 {
        self.stopping[l]
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), AnalysisError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Iterates `pi_n` until the tail `P(L > n)` drops below `epsilon`.
pub fn convergence_distributions(
    chain: &ReservationChain,
    epsilon: f64,
    cycle_cap: usize,
) -> Result<ConvergenceDistributions, AnalysisError> {
    check_epsilon(epsilon)?;
    let m = chain.n_stations();
    let mut pi0 = vec![0.0; m + 1];
    pi0[0] = 1.0;
    let tail_of = |pi: &[f64]| pi[..m].iter().sum::<f64>();
    let mut tail = tail_of(&pi0);
    let mut stopping = vec![pi0[m]];
    let mut pi = vec![pi0];
    while tail >= epsilon {
        if pi.len() > cycle_cap {
            return Err(AnalysisError::NoConvergence {
                cap: cycle_cap,
                tail,
            });
        }
        let prev = pi.last().expect("pi_0 present");
        // P(z_{l-1} < M, z_l = M), summed directly rather than as a CDF
        // difference, which cancels once both values approach one.
        stopping.push((0..m).map(|k| prev[k] * chain.probability(k, m)).sum());
        let next = chain.step(prev);
        tail = tail_of(&next);
        pi.push(next);
    }
    let absorption_cdf = pi.iter().map(|p| p[m]).collect();
    Ok(ConvergenceDistributions {
        pi,
        absorption_cdf,
        stopping,
        tail,
        truncation_epsilon: epsilon,
    })
}

/// Closed-form bound on expected convergence time, in seconds:
/// `{(t_s + t_v) N + (max(t_g, t_b) - t_v) M} E[L]`.
pub fn upper_bound_time(
    chain: &ReservationChain,
    timing: &TimingParameters,
) -> Result<f64, AnalysisError> {
    timing
        .validate()
        .map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let n = chain.n_slots() as f64;
    let m = chain.n_stations() as f64;
    let per_cycle = (timing.t_s + timing.t_v) * n + (timing.t_g.max(timing.t_b) - timing.t_v) * m;
    Ok(per_cycle * expected_cycles(chain)? * 1e-6)
}

/// Exact expected convergence time in seconds, truncated once the stopping
/// tail falls below `epsilon` (default cap of 10,000 cycles).
pub fn exact_expected_time(
    chain: &ReservationChain,
    timing: &TimingParameters,
    epsilon: f64,
) -> Result<f64, AnalysisError> {
    exact_expected_time_with_cap(chain, timing, epsilon, DEFAULT_CYCLE_CAP)
}

pub fn exact_expected_time_with_cap(
    chain: &ReservationChain,
    timing: &TimingParameters,
    epsilon: f64,
    cycle_cap: usize,
) -> Result<f64, AnalysisError> {
    timing
        .validate()
        .map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let m = chain.n_stations();
    if m == 0 {
        return Ok(0.0);
    }
    let n = chain.n_slots();
    let dist = convergence_distributions(chain, epsilon, cycle_cap)?;
    let last = dist.last_cycle();

    // first_passage[s][k] = P(first reach M exactly s cycles later | z = k), k < M.
    let mut first_passage = vec![vec![0.0; m]; last + 1];
    for k in 0..m {
        first_passage[1][k] = chain.probability(k, m);
    }
    for s in 2..=last {
        for k in 0..m {
            let row = chain.row(k);
            first_passage[s][k] = (k..m).map(|j| row[j] * first_passage[s - 1][j]).sum();
        }
    }

    // Expected idle slots in a cycle that starts with k reservations.
    let idle_given = |k: usize| -> f64 {
        let free = (n - k) as f64;
        free * (1.0 - 1.0 / free).powi((m - k) as i32)
    };

    let (t_g, t_b, t_v, t_s) = (timing.t_g, timing.t_b, timing.t_v, timing.t_s);
    let mut expected_len = 0.0;
    let mut success_part = 0.0;
    let mut idle_part = 0.0;
    for l in 1..=last {
        let stop = dist.stopping_pmf(l);
        expected_len += l as f64 * stop;
        for step in 1..=l {
            // sum_k k * P(z_n = k, L = l)
            let mut successes = if step == l { m as f64 * stop } else { 0.0 };
            if step < l {
                let f = &first_passage[l - step];
                successes += (0..m)
                    .map(|k| k as f64 * dist.pi[step][k] * f[k])
                    .sum::<f64>();
            }
            // sum_k v(k) * P(z_{n-1} = k, L = l)
            let f = &first_passage[l - step + 1];
            let idles: f64 = (0..m)
                .map(|k| idle_given(k) * dist.pi[step - 1][k] * f[k])
                .sum();
            success_part += successes;
            idle_part += idles;
        }
    }
    let total_us = (t_s + t_b) * n as f64 * expected_len
        + (t_g - t_b) * success_part
        + (t_v - t_b) * idle_part;
    Ok(total_us * 1e-6)
}
