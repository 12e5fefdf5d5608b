//! Probability that exactly `k` of `M` uniform slot pickers end up alone in
//! their slot among `N` slots.
//!
//! The closed form is an alternating inclusion-exclusion sum whose terms
//! grow like binomial coefficients; in double precision it cancels
//! catastrophically once `M` reaches a few dozen. The default evaluator
//! therefore uses an equivalent decomposition with only non-negative terms:
//!
//! ```text
//! p(N, M, k) = C(M, k) * (N)_k / N^k * ((N - k) / N)^(M - k) * q(N - k, M - k)
//! ```
//!
//! where `q(n, m)` is the probability that `m` balls thrown uniformly into
//! `n` bins leave no bin holding exactly one ball, filled in bin by bin:
//! `q(n, m) = sum_{j != 1} Binom(m, 1/n)(j) * q(n - 1, m - j)`.
//! The literal inclusion-exclusion form is kept for cross-checking and the
//! [`super::exact`] module evaluates it in rational arithmetic.

use super::AnalysisError;

/// Table of log-factorials and no-singleton probabilities `q(n, m)` for all
/// `n <= max_slots`, `m <= max_stations`.
#[derive(Debug, Clone)]
pub struct OccupancyTable {
    max_slots: usize,
    max_stations: usize,
    ln_fact: Vec<f64>,
    /// Row-major `(max_slots + 1) x (max_stations + 1)`.
    no_singleton: Vec<f64>,
}

impl OccupancyTable {
    pub fn new(max_slots: usize, max_stations: usize) -> Self {
        let mut ln_fact = vec![0.0; max_stations.max(max_slots) + 1];
        for i in 1..ln_fact.len() {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let width = max_stations + 1;
        let mut q = vec![0.0; (max_slots + 1) * width];
        q[0] = 1.0;
        for n in 1..=max_slots {
            let stay = 1.0 - 1.0 / n as f64;
            let (ln_hit, ln_stay) = ((1.0 / n as f64).ln(), stay.ln());
            for m in 0..=max_stations {
                let mut acc = 0.0;
                for j in (0..=m).filter(|&j| j != 1) {
                    let prev = q[(n - 1) * width + (m - j)];
                    if prev == 0.0 {
                        continue;
                    }
                    let weight = if n == 1 {
                        if j == m {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        (ln_fact[m] - ln_fact[j] - ln_fact[m - j]
                            + j as f64 * ln_hit
                            + (m - j) as f64 * ln_stay)
                            .exp()
                    };
                    acc += weight * prev;
                }
                q[n * width + m] = acc;
            }
        }
        Self {
            max_slots,
            max_stations,
            ln_fact,
            no_singleton: q,
        }
    }

    pub fn max_slots(&self) -> usize {
        self.max_slots
    }

    pub fn max_stations(&self) -> usize {
        self.max_stations
    }

    /// Probability that `m` uniform pickers over `n` slots leave no slot
    /// with exactly one picker.
    pub fn no_singleton(&self, n: usize, m: usize) -> f64 {
        assert!(n <= self.max_slots && m <= self.max_stations);
        self.no_singleton[n * (self.max_stations + 1) + m]
    }

    fn ln_choose(&self, n: usize, k: usize) -> f64 {
        self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
    }

    /// `p(n, m, k)`; `n = 0` is accepted only together with `m = 0`, which
    /// the reservation chain needs for its absorbing row.
    pub fn probability(&self, n: usize, m: usize, k: usize) -> f64 {
        assert!(n <= self.max_slots && m <= self.max_stations && k <= m);
        if k > n {
            return 0.0;
        }
        let rest_stations = m - k;
        let rest_slots = n - k;
        if rest_slots == 0 && rest_stations > 0 {
            return 0.0;
        }
        let mut ln_p = self.ln_choose(m, k);
        if k > 0 {
            // (n)_k / n^k
            ln_p += self.ln_fact[n] - self.ln_fact[n - k] - k as f64 * (n as f64).ln();
        }
        if rest_stations > 0 {
            ln_p += rest_stations as f64 * (rest_slots as f64 / n as f64).ln();
        }
        (ln_p.exp() * self.no_singleton(rest_slots, rest_stations)).min(1.0)
    }
}

fn check_args(n_slots: usize, n_stations: usize, k: usize) -> Result<(), AnalysisError> {
    if n_slots == 0 {
        return Err(AnalysisError::InvalidArgument(
            "slot count N must be at least 1".into(),
        ));
    }
    if k > n_stations {
        return Err(AnalysisError::InvalidArgument(format!(
            "k = {k} exceeds the station count M = {n_stations}"
        )));
    }
    Ok(())
}

/// `p_{N,M}(k)`: probability that exactly `k` of `n_stations` independent
/// uniform picks over `n_slots` slots land in a slot nobody else picked.
pub fn reservation_probability(
    n_slots: usize,
    n_stations: usize,
    k: usize,
) -> Result<f64, AnalysisError> {
    check_args(n_slots, n_stations, k)?;
    Ok(OccupancyTable::new(n_slots, n_stations).probability(n_slots, n_stations, k))
}

/// The whole pmf `k = 0..=M` from one table.
pub fn reservation_pmf(n_slots: usize, n_stations: usize) -> Result<Vec<f64>, AnalysisError> {
    check_args(n_slots, n_stations, 0)?;
    let table = OccupancyTable::new(n_slots, n_stations);
    Ok((0..=n_stations)
        .map(|k| table.probability(n_slots, n_stations, k))
        .collect())
}

/// The literal inclusion-exclusion sum in double precision, accumulated with
/// Neumaier compensation. Accurate to ~1e-13 for `N, M <= 20`; beyond that
/// cancellation dominates and [`reservation_probability`] should be used.
pub fn reservation_probability_inclusion_exclusion(
    n_slots: usize,
    n_stations: usize,
    k: usize,
) -> Result<f64, AnalysisError> {
    check_args(n_slots, n_stations, k)?;
    let (n, m) = (n_slots, n_stations);
    let mut ln_fact = vec![0.0f64; n.max(m) + 1];
    for i in 1..ln_fact.len() {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_choose = |a: usize, b: usize| ln_fact[a] - ln_fact[b] - ln_fact[a - b];
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for j in k..=m.min(n) {
        // C(M, j) C(j, k) N! (N - j)^(M - j) / ((N - j)! N^M)
        let power = if m == j {
            0.0
        } else if n == j {
            continue;
        } else {
            (m - j) as f64 * ((n - j) as f64).ln()
        };
        let ln_term = ln_choose(m, j) + ln_choose(j, k) + ln_fact[n] - ln_fact[n - j] + power
            - m as f64 * (n as f64).ln();
        let term = if (j - k) % 2 == 0 {
            ln_term.exp()
        } else {
            -ln_term.exp()
        };
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    Ok(sum + comp)
}
