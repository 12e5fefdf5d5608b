//! Reference protocols: slot-synchronous CSMA with binary exponential
//! backoff, and fixed-frame TDMA.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("TDMA needs {needed} slots but the frame has only N = {n_slots}")]
    UndefinedConfiguration { needed: usize, n_slots: usize },
}

pub const CW_MIN: u32 = 32;
pub const CW_MAX: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsmaAction {
    /// Medium was busy: backoff frozen.
    Defer,
    Decrement,
    Transmit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsmaState {
    contention_window: u32,
    backoff_counter: u32,
}

impl CsmaState {
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut s = Self {
            contention_window: CW_MIN,
            backoff_counter: 0,
        };
        s.redraw(rng);
        s
    }

    /// Fixed starting point, mainly for tests.
    pub fn with_backoff(contention_window: u32, backoff_counter: u32) -> Self {
        assert!((CW_MIN..=CW_MAX).contains(&contention_window));
        assert!(backoff_counter < contention_window);
        Self {
            contention_window,
            backoff_counter,
        }
    }

    pub fn contention_window(&self) -> u32 {
        self.contention_window
    }

    pub fn backoff_counter(&self) -> u32 {
        self.backoff_counter
    }

    fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.backoff_counter = rng.gen_range(0..self.contention_window);
    }

    /// Counts down one sensed-idle backoff slot.
    pub fn decrement(&mut self) {
        self.backoff_counter = self.backoff_counter.saturating_sub(1);
    }

    /// Outcome of this station's own transmission: CW resets on success and
    /// doubles (capped) on collision; a fresh backoff is drawn either way.
    pub fn on_transmission<R: Rng + ?Sized>(&mut self, success: bool, rng: &mut R) {
        self.contention_window = if success {
            CW_MIN
        } else {
            (self.contention_window * 2).min(CW_MAX)
        };
        self.redraw(rng);
    }
}

/// One DCF decision at a slot boundary; `medium_idle` is what the station
/// sensed in the slot just ended. Busy slots already include the DIFS (or
/// EIFS) that follows them, so a counter of `k` costs exactly `k` idle
/// backoff slots.
pub fn csma_step(state: &mut CsmaState, medium_idle: bool, queue_nonempty: bool) -> CsmaAction {
    let moved = medium_idle && state.backoff_counter > 0;
    if moved {
        state.decrement();
    }
    if queue_nonempty && state.backoff_counter == 0 {
        CsmaAction::Transmit
    } else if moved {
        CsmaAction::Decrement
    } else {
        CsmaAction::Defer
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdmaState {
    pub assigned_slots: Vec<usize>,
    pub frame_length: usize,
}

impl TdmaState {
    /// Oracle assignment: station `i` gets `demand[i]` consecutive slots.
    pub fn assign(demand: &[usize], n_slots: usize) -> Result<Vec<Self>, BaselineError> {
        let needed: usize = demand.iter().sum();
        if needed > n_slots {
            return Err(BaselineError::UndefinedConfiguration { needed, n_slots });
        }
        let mut next = 0;
        Ok(demand
            .iter()
            .map(|&d| {
                let slots = (next..next + d).collect();
                next += d;
                Self {
                    assigned_slots: slots,
                    frame_length: n_slots,
                }
            })
            .collect())
    }
}

pub fn tdma_step(state: &TdmaState, global_slot_index: u64, queue_nonempty: bool) -> bool {
    let slot = (global_slot_index % state.frame_length as u64) as usize;
    queue_nonempty && state.assigned_slots.contains(&slot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_backoff_transmits() {
        let mut s = CsmaState::with_backoff(32, 0);
        assert_eq!(csma_step(&mut s, true, true), CsmaAction::Transmit);
    }

    #[test]
    fn idle_decrements_busy_freezes() {
        let mut s = CsmaState::with_backoff(32, 3);
        assert_eq!(csma_step(&mut s, true, true), CsmaAction::Decrement);
        assert_eq!(s.backoff_counter(), 2);
        assert_eq!(csma_step(&mut s, false, true), CsmaAction::Defer);
        assert_eq!(s.backoff_counter(), 2);
        assert_eq!(csma_step(&mut s, true, true), CsmaAction::Decrement);
        assert_eq!(csma_step(&mut s, true, true), CsmaAction::Transmit);
        assert_eq!(s.backoff_counter(), 0);
    }

    #[test]
    fn window_doubles_and_resets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = CsmaState::with_backoff(32, 0);
        s.on_transmission(false, &mut rng);
        assert_eq!(s.contention_window(), 64);
        let mut s = CsmaState::with_backoff(1024, 0);
        s.on_transmission(false, &mut rng);
        assert_eq!(s.contention_window(), 1024);
        s.on_transmission(true, &mut rng);
        assert_eq!(s.contention_window(), 32);
        assert!(s.backoff_counter() < 32);
    }

    #[test]
    fn tdma_assignment() {
        let st = TdmaState::assign(&[1; 64], 64).unwrap();
        assert!(tdma_step(&st[5], 5, true));
        assert!(tdma_step(&st[5], 69, true));
        assert!(!tdma_step(&st[5], 6, true));
        assert!(!tdma_step(&st[5], 5, false));
        assert!(TdmaState::assign(&[1; 65], 64).is_err());
        let ap = TdmaState::assign(&[1, 3], 8).unwrap();
        assert_eq!(ap[1].assigned_slots, vec![1, 2, 3]);
    }

    #[test]
    fn one_station_sends_once_per_frame() {
        let st = TdmaState::assign(&[1], 64).unwrap();
        let sends = (0..64 * 10).filter(|&g| tdma_step(&st[0], g, true)).count();
        assert_eq!(sends, 10);
    }
}
