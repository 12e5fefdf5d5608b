//! Packet arrival generators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("packet_bytes must be positive")]
    EmptyPacket,
    #[error("period_us must be positive and finite for periodic traffic, got {0}")]
    BadPeriod(f64),
    #[error("start_offset_us must be finite and non-negative, got {0}")]
    BadOffset(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrafficKind {
    /// The queue never runs dry.
    Backlogged,
    PeriodicCbr,
    SparsePeriodic,
}

/// One packet flow. `packet_bytes` is the payload counted toward goodput;
/// `overhead_bytes` (headers below the application) is added on air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSource {
    pub kind: TrafficKind,
    pub packet_bytes: u32,
    #[serde(default)]
    pub overhead_bytes: u32,
    #[serde(default)]
    pub period_us: f64,
    #[serde(default)]
    pub start_offset_us: f64,
}

/// IP (20) + UDP (8) + RTP (12) + MAC header and FCS (28) + LLC/SNAP (8).
pub const VOIP_OVERHEAD_BYTES: u32 = 76;

impl TrafficSource {
    pub fn backlogged(packet_bytes: u32) -> Self {
        Self {
            kind: TrafficKind::Backlogged,
            packet_bytes,
            overhead_bytes: 0,
            period_us: 0.0,
            start_offset_us: 0.0,
        }
    }

    pub fn periodic(packet_bytes: u32, period_us: f64) -> Self {
        Self {
            kind: TrafficKind::PeriodicCbr,
            packet_bytes,
            overhead_bytes: 0,
            period_us,
            start_offset_us: 0.0,
        }
    }

    /// G.711 voice: 240 bytes every 30 ms.
    pub fn voip() -> Self {
        Self {
            overhead_bytes: VOIP_OVERHEAD_BYTES,
            ..Self::periodic(240, 30_000.0)
        }
    }

    /// One 2346-byte packet every 300 ms.
    pub fn sparse() -> Self {
        Self {
            kind: TrafficKind::SparsePeriodic,
            ..Self::periodic(2346, 300_000.0)
        }
    }

    pub fn with_offset(self, start_offset_us: f64) -> Self {
        Self {
            start_offset_us,
            ..self
        }
    }

    pub fn frame_bytes(&self) -> u32 {
        self.packet_bytes + self.overhead_bytes
    }

    pub fn is_periodic(&self) -> bool {
        self.kind != TrafficKind::Backlogged
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.packet_bytes == 0 {
            return Err(TrafficError::EmptyPacket);
        }
        if self.is_periodic() && !(self.period_us.is_finite() && self.period_us > 0.0) {
            return Err(TrafficError::BadPeriod(self.period_us));
        }
        if !(self.start_offset_us.is_finite() && self.start_offset_us >= 0.0) {
            return Err(TrafficError::BadOffset(self.start_offset_us));
        }
        Ok(())
    }

    /// Arrival time of the `k`-th packet of a periodic source.
    pub fn nth_arrival(&self, k: u64) -> f64 {
        self.start_offset_us + k as f64 * self.period_us
    }

    /// Offered load in bits per microsecond; infinite when backlogged.
    pub fn offered_load(&self) -> f64 {
        if self.is_periodic() {
            f64::from(self.packet_bytes) * 8.0 / self.period_us
        } else {
            f64::INFINITY
        }
    }

    /// Number of arrivals in `[0, horizon_us]`.
    pub fn arrivals_until(&self, horizon_us: f64) -> u64 {
        if !self.is_periodic() || horizon_us < self.start_offset_us {
            return 0;
        }
        ((horizon_us - self.start_offset_us) / self.period_us).floor() as u64 + 1
    }
}

/// First arrival at or after `now`, with its payload size.
pub fn next_arrival(src: &TrafficSource, now: f64) -> Option<(f64, u32)> {
    if !src.is_periodic() {
        return Some((now, src.packet_bytes));
    }
    let k = if now <= src.start_offset_us {
        0
    } else {
        ((now - src.start_offset_us) / src.period_us).ceil() as u64
    };
    Some((src.nth_arrival(k), src.packet_bytes))
}
