//! Zero-collision (ZC) medium access: exact convergence analysis and a
//! slot-level discrete-event simulator with CSMA and TDMA baselines.
//!
//! The crate is split along the lines of the system it models:
//!
//! - [`analysis`]: reservation probabilities, the reserved-station Markov
//!   chain, expected convergence cycles, exact expected convergence time and
//!   its closed-form upper bound.
//! - [`protocol`]: the ZC station state machine (slot counting, trial
//!   reservation, reselection, recycle timer, access-point anchor slot).
//! - [`baselines`]: binary-exponential-backoff CSMA and fixed-frame TDMA.
//! - [`medium`]: the shared virtual-slot timeline, connectivity graphs,
//!   carrier-sensing faults and the simulation engine.
//! - [`traffic`]: packet arrival generators.
//! - [`metrics`]: goodput, delays, collision counts, convergence detection.
//! - [`harness`]: experiment configuration, presets, runs and sweeps.

pub mod analysis;
pub mod baselines;
pub mod harness;
pub mod medium;
pub mod metrics;
pub mod protocol;
pub mod rng;
pub mod traffic;

pub use analysis::{PhyParameters, TimingParameters};
