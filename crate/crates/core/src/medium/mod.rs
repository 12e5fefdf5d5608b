//! The shared channel: connectivity, carrier-sensing faults, per-slot
//! outcome resolution and the simulation loop.

mod engine;
mod fault;
mod graph;
mod trace;

pub use engine::{
    Delivery, Flow, NetworkSetup, NodeLog, NodeSpec, Protocol, RunLog, Simulation, SlotCounts,
};
pub use fault::{sense, FaultModel, SlotTruth};
pub use graph::{random_topology, ConnectivityGraph};
pub use trace::{TraceWriter, TRACE_CSV_HEADER};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::BaselineError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error)]
pub enum MediumError {
    #[error("invalid network setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("slot cap of {0} exceeded before the simulated duration elapsed")]
    SlotCapExceeded(u64),
}

/// Receiver-side view of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverResult {
    Idle,
    Decoded,
    Collided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Idle,
    Success,
    Collision,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::Idle => "idle",
            SlotKind::Success => "success",
            SlotKind::Collision => "collision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub source: usize,
    /// `None` for broadcasts and for single-domain traffic without an
    /// explicit receiver.
    pub destination: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Resolution {
    /// Indexed by node.
    pub per_receiver: Vec<ReceiverResult>,
    /// Aligned with the transmissions passed in.
    pub delivered: Vec<bool>,
}

impl Resolution {
    pub fn kind(&self) -> SlotKind {
        if self.delivered.is_empty() {
            SlotKind::Idle
        } else if self.delivered.iter().all(|&d| d) {
            SlotKind::Success
        } else {
            SlotKind::Collision
        }
    }
}

/// A node perceives the number of transmitters in its closed neighbourhood:
/// none is idle, one is decoded, more is a collision. `A -> a` is delivered
/// iff `a` is silent and `A` is the only transmitter `a` hears; without a
/// destination, iff no other transmitter is adjacent to `A`.
pub fn resolve_slot(transmissions: &[Transmission], graph: &ConnectivityGraph) -> Resolution {
    let mut out = Resolution::default();
    resolve_into(transmissions, graph, &mut out);
    out
}

pub(crate) fn resolve_into(
    transmissions: &[Transmission],
    graph: &ConnectivityGraph,
    out: &mut Resolution,
) {
    let n = graph.node_count();
    out.per_receiver.clear();
    out.delivered.clear();
    let heard = |v: usize| {
        transmissions
            .iter()
            .filter(|t| t.source == v || graph.adjacent(t.source, v))
            .count()
    };
    out.per_receiver.extend((0..n).map(|v| match heard(v) {
        0 => ReceiverResult::Idle,
        1 => ReceiverResult::Decoded,
        _ => ReceiverResult::Collided,
    }));
    let transmitting = |v: usize| transmissions.iter().any(|t| t.source == v);
    out.delivered.extend(transmissions.iter().map(|t| {
        match t.destination {
            Some(d) => {
                graph.adjacent(t.source, d)
                    && !transmitting(d)
                    && out.per_receiver[d] == ReceiverResult::Decoded
            }
            None => !transmissions
                .iter()
                .any(|o| o.source != t.source && graph.adjacent(o.source, t.source)),
        }
    }));
}

/// Everything that happened in one slot. `per_receiver` and `delivered`
/// follow [`resolve_slot`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotOutcomeRecord {
    pub index: u64,
    pub wall_time_us: f64,
    pub duration_us: f64,
    pub transmitters: Vec<usize>,
    pub resolution: Resolution,
    /// Whether every active station holds a distinct slot after this slot.
    /// Only defined for fault-free single-domain ZC runs.
    pub zero_collision_state: Option<bool>,
}

impl SlotOutcomeRecord {
    pub fn kind(&self) -> SlotKind {
        self.resolution.kind()
    }

    pub fn end_us(&self) -> f64 {
        self.wall_time_us + self.duration_us
    }
}

/// Receives every slot as the simulation produces it.
pub trait SlotSink {
    fn on_slot(&mut self, record: &SlotOutcomeRecord);
}

impl<F: FnMut(&SlotOutcomeRecord)> SlotSink for F {
    fn on_slot(&mut self, record: &SlotOutcomeRecord) {
        self(record)
    }
}

/// Discards records.
pub struct NullSink;

impl SlotSink for NullSink {
    fn on_slot(&mut self, _: &SlotOutcomeRecord) {}
}
