use super::{AnalysisError, OccupancyTable};

/// Transition structure of `z_n`, the number of stations holding a
/// reservation after `n` contention cycles, for `M` stations over `N` slots.
///
/// From state `m`, the `M - m` unreserved stations pick among the `N - m`
/// free slots, so `P[m][m + k] = p(N - m, M - m, k)`. State `M` absorbs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservationChain {
    n_slots: usize,
    n_stations: usize,
    matrix: Vec<Vec<f64>>,
}

impl ReservationChain {
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn n_stations(&self) -> usize {
        self.n_stations
    }

    /// `P[from][to]`.
    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.matrix[from][to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.matrix[from]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// One forward step `pi P`.
    pub fn step(&self, pi: &[f64]) -> Vec<f64> {
        let size = self.n_stations + 1;
        let mut next = vec![0.0; size];
        for (from, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (to, &p) in self.matrix[from].iter().enumerate().skip(from) {
                next[to] += mass * p;
            }
        }
        next
    }

    /// Probability of moving from `from` to any strictly higher state.
    pub(crate) fn progress_probability(&self, from: usize) -> f64 {
        self.matrix[from][from + 1..].iter().sum()
    }
}

/// Builds the chain for `n_stations <= n_slots`.
pub fn build_chain(n_slots: usize, n_stations: usize) -> Result<ReservationChain, AnalysisError> {
    if n_slots == 0 {
        return Err(AnalysisError::InvalidArgument(
            "slot count N must be at least 1".into(),
        ));
    }
    if n_stations > n_slots {
        return Err(AnalysisError::InvalidArgument(format!(
            "M = {n_stations} > N = {n_slots}: with more stations than slots there is no zero-collision state"
        )));
    }
    let table = OccupancyTable::new(n_slots, n_stations);
    let size = n_stations + 1;
    let matrix = (0..size)
        .map(|m| {
            let mut row = vec![0.0; size];
            let free_slots = n_slots - m;
            let contenders = n_stations - m;
            for k in 0..=contenders {
                row[m + k] = table.probability(free_slots, contenders, k);
            }
            row
        })
        .collect();
    Ok(ReservationChain {
        n_slots,
        n_stations,
        matrix,
    })
}

/// `E[L | z_0 = 0]`: expected number of cycles until every station holds a
/// reservation.
///
/// Solves `beta(i) = 1 + sum_{j >= i} p(i, j) beta(j)`, `beta(M) = 0`, by back
/// substitution. The self-loop term is isolated:
/// `beta(i) = (1 + sum_{j > i} p(i, j) beta(j)) / (1 - p(i, i))`, with the
/// denominator taken as the summed off-diagonal mass to avoid cancellation.
pub fn expected_cycles(chain: &ReservationChain) -> Result<f64, AnalysisError> {
    let m_total = chain.n_stations;
    let mut beta = vec![0.0; m_total + 1];
    for i in (0..m_total).rev() {
        let leave = chain.progress_probability(i);
        if leave <= 0.0 || !leave.is_finite() {
            return Err(AnalysisError::NumericalDegeneracy { state: i });
        }
        let onward: f64 = ((i + 1)..=m_total)
            .map(|j| chain.matrix[i][j] * beta[j])
            .sum();
        beta[i] = (1.0 + onward) / leave;
    }
    Ok(beta[0])
}
