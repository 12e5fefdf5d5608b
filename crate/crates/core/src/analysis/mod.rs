//! Convergence mathematics for the reserved-station count chain.
//!
//! All functions here are pure; nothing holds shared state.

mod chain;
mod convergence;
pub mod exact;
mod reservation;
mod table;
mod timing;

pub use chain::{build_chain, expected_cycles, ReservationChain};
pub use convergence::{
    convergence_distributions, exact_expected_time, exact_expected_time_with_cap, upper_bound_time,
    ConvergenceDistributions, DEFAULT_CYCLE_CAP, DEFAULT_EPSILON,
};
pub use reservation::{
    reservation_pmf, reservation_probability, reservation_probability_inclusion_exclusion,
    OccupancyTable,
};
pub use table::{analysis_rows, write_analysis_csv, AnalysisRow, ANALYSIS_CSV_HEADER};
pub use timing::{PhyParameters, TimingError, TimingParameters};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// `1 - p(i,i)` vanished for a transient state, so the hitting-time
    /// recursion cannot be solved.
    #[error("numerical degeneracy: no progress possible from reserved count {state}")]
    NumericalDegeneracy { state: usize },
    #[error("absorption tail mass {tail:e} still above epsilon after {cap} cycles")]
    NoConvergence { cap: usize, tail: f64 },
}
