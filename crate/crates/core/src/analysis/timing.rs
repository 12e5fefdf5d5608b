//! Slot durations derived from 802.11b DSSS long-preamble PHY/MAC constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimingError {
    #[error("duration `{field}` must be finite and non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error(
        "idle mini-slot t_v ({t_v} us) must not be shorter than the inter-slot gap t_s ({t_s} us)"
    )]
    MiniSlotShorterThanGap { t_v: f64, t_s: f64 },
    #[error("rate `{field}` must be positive, got {value}")]
    NonPositiveRate { field: &'static str, value: f64 },
}

/// The four durations the convergence analysis works with, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParameters {
    /// Successful transmission slot (data, SIFS, ACK).
    pub t_g: f64,
    /// Collided transmission slot (data followed by EIFS).
    pub t_b: f64,
    /// Idle mini-slot.
    pub t_v: f64,
    /// Inter-slot gap.
    pub t_s: f64,
}

impl TimingParameters {
    pub fn new(t_g: f64, t_b: f64, t_v: f64, t_s: f64) -> Result<Self, TimingError> {
        let t = Self { t_g, t_b, t_v, t_s };
        t.validate()?;
        Ok(t)
    }

    /// The rounded 802.11b values quoted alongside the convergence bound:
    /// 2150 us success, 2266 us collision, 20 us mini-slot, no gap.
    pub fn ieee80211b_reference() -> Self {
        Self {
            t_g: 2150.0,
            t_b: 2266.0,
            t_v: 20.0,
            t_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), TimingError> {
        for (field, value) in [
            ("t_g", self.t_g),
            ("t_b", self.t_b),
            ("t_v", self.t_v),
            ("t_s", self.t_s),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(TimingError::Negative { field, value });
            }
        }
        if self.t_v < self.t_s {
            return Err(TimingError::MiniSlotShorterThanGap {
                t_v: self.t_v,
                t_s: self.t_s,
            });
        }
        Ok(())
    }
}

/// PHY and MAC constants from which slot durations are composed.
///
/// Byte counts are converted to airtime at the rate that carries them:
/// preamble and PLCP header at `phy_rate_mbps`, the MPDU at
/// `data_rate_mbps`, the ACK at `basic_rate_mbps`. EIFS follows the
/// 802.11 definition `SIFS + DIFS + ACK airtime at the lowest PHY rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhyParameters {
    pub preamble_bytes: u32,
    pub plcp_header_bytes: u32,
    pub phy_rate_mbps: f64,
    pub data_rate_mbps: f64,
    pub basic_rate_mbps: f64,
    pub ack_bytes: u32,
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    #[serde(default)]
    pub inter_slot_gap_us: f64,
}

impl Default for PhyParameters {
    fn default() -> Self {
        Self::ieee80211b_long_preamble()
    }
}

impl PhyParameters {
    pub fn ieee80211b_long_preamble() -> Self {
        Self {
            preamble_bytes: 18,
            plcp_header_bytes: 6,
            phy_rate_mbps: 1.0,
            data_rate_mbps: 11.0,
            basic_rate_mbps: 2.0,
            ack_bytes: 14,
            slot_us: 20.0,
            sifs_us: 10.0,
            difs_us: 50.0,
            inter_slot_gap_us: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), TimingError> {
        for (field, value) in [
            ("phy_rate_mbps", self.phy_rate_mbps),
            ("data_rate_mbps", self.data_rate_mbps),
            ("basic_rate_mbps", self.basic_rate_mbps),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(TimingError::NonPositiveRate { field, value });
            }
        }
        for (field, value) in [
            ("slot_us", self.slot_us),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("inter_slot_gap_us", self.inter_slot_gap_us),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(TimingError::Negative { field, value });
            }
        }
        if self.slot_us < self.inter_slot_gap_us {
            return Err(TimingError::MiniSlotShorterThanGap {
                t_v: self.slot_us,
                t_s: self.inter_slot_gap_us,
            });
        }
        Ok(())
    }

    fn airtime(bytes: u32, rate_mbps: f64) -> f64 {
        f64::from(bytes) * 8.0 / rate_mbps
    }

    pub fn preamble_us(&self) -> f64 {
        Self::airtime(self.preamble_bytes, self.phy_rate_mbps)
    }

    pub fn plcp_header_us(&self) -> f64 {
        Self::airtime(self.plcp_header_bytes, self.phy_rate_mbps)
    }

    pub fn mpdu_us(&self, mpdu_bytes: u32) -> f64 {
        Self::airtime(mpdu_bytes, self.data_rate_mbps)
    }

    pub fn ack_us(&self) -> f64 {
        Self::airtime(self.ack_bytes, self.basic_rate_mbps)
    }

    pub fn eifs_us(&self) -> f64 {
        self.sifs_us
            + self.difs_us
            + self.preamble_us()
            + self.plcp_header_us()
            + Self::airtime(self.ack_bytes, self.phy_rate_mbps)
    }

    /// `2 (preamble + PLCP) + MPDU + SIFS + ACK`: the data frame and its ACK
    /// each carry a PHY header.
    pub fn success_us(&self, mpdu_bytes: u32) -> f64 {
        2.0 * (self.preamble_us() + self.plcp_header_us())
            + self.mpdu_us(mpdu_bytes)
            + self.sifs_us
            + self.ack_us()
    }

    /// `preamble + PLCP + MPDU + EIFS`.
    pub fn collision_us(&self, mpdu_bytes: u32) -> f64 {
        self.preamble_us() + self.plcp_header_us() + self.mpdu_us(mpdu_bytes) + self.eifs_us()
    }

    /// Airtime of an unacknowledged broadcast frame such as a beacon.
    pub fn broadcast_us(&self, mpdu_bytes: u32) -> f64 {
        self.preamble_us() + self.plcp_header_us() + self.mpdu_us(mpdu_bytes)
    }

    pub fn timing(&self, mpdu_bytes: u32) -> TimingParameters {
        TimingParameters {
            t_g: self.success_us(mpdu_bytes),
            t_b: self.collision_us(mpdu_bytes),
            t_v: self.slot_us,
            t_s: self.inter_slot_gap_us,
        }
    }
}
