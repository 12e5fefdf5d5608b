use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MediumError;

/// Ground truth of a slot as far as carrier sensing is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotTruth {
    Idle,
    Busy,
}

const IDLE: &[SlotTruth] = &[SlotTruth::Idle];
const IDLE_TWICE: &[SlotTruth] = &[SlotTruth::Idle, SlotTruth::Idle];
const BUSY: &[SlotTruth] = &[SlotTruth::Busy];

/// Independent per-station carrier-sensing errors.
///
/// An idle mini-slot is sensed busy with probability `p1` and counted twice
/// (clock drift) with probability `p2`. When `p1 + p2 > 1` both are scaled
/// down proportionally so they still partition the outcome. A busy slot is
/// sensed idle with probability `p3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultModel {
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub p3: f64,
}

impl Default for FaultModel {
    fn default() -> Self {
        Self::none()
    }
}

impl FaultModel {
    pub fn none() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            p3: 0.0,
        }
    }

    /// `p1 = p2 = p`, `p3 = 0`.
    pub fn symmetric(p: f64) -> Self {
        Self {
            p1: p,
            p2: p,
            p3: 0.0,
        }
    }

    pub fn is_none(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p3 == 0.0
    }

    pub fn validate(&self) -> Result<(), MediumError> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(MediumError::InvalidSetup(format!(
                    "fault probability {name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Effective `(p1, p2)` after scaling.
    pub fn idle_split(&self) -> (f64, f64) {
        let total = self.p1 + self.p2;
        if total > 1.0 {
            (self.p1 / total, self.p2 / total)
        } else {
            (self.p1, self.p2)
        }
    }
}

/// The sequence of slots one station perceives for one true slot.
pub fn sense<R: Rng + ?Sized>(
    truth: SlotTruth,
    fm: &FaultModel,
    rng: &mut R,
) -> &'static [SlotTruth] {
    match truth {
        SlotTruth::Idle => {
            let (p1, p2) = fm.idle_split();
            if p1 == 0.0 && p2 == 0.0 {
                return IDLE;
            }
            let u: f64 = rng.gen();
            if u < p1 {
                BUSY
            } else if u < p1 + p2 {
                IDLE_TWICE
            } else {
                IDLE
            }
        }
        SlotTruth::Busy => {
            if fm.p3 > 0.0 && rng.gen_bool(fm.p3) {
                IDLE
            } else {
                BUSY
            }
        }
    }
}
