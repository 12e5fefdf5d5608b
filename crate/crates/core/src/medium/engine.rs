use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fault::{sense, SlotTruth};
use super::{
    resolve_into, ConnectivityGraph, FaultModel, MediumError, ReceiverResult, SlotKind,
    SlotOutcomeRecord, SlotSink, Transmission,
};
use crate::analysis::PhyParameters;
use crate::baselines::{csma_step, tdma_step, CsmaAction, CsmaState, TdmaState};
use crate::protocol::{
    Intent, OwnOutcome, ReselectionMode, Role, SensedSlot, SlotObservation, StationConfig,
    StationState,
};
use crate::rng::{stream, Purpose};
use crate::traffic::TrafficSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Zc,
    Csma,
    Tdma,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Zc => "zc",
            Protocol::Csma => "csma",
            Protocol::Tdma => "tdma",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub source: TrafficSource,
    pub destination: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub role: Role,
    pub flows: Vec<Flow>,
    /// ZC data slots for an access point, TDMA slots per frame; 1 otherwise.
    pub data_slots: usize,
    /// `(join_us, leave_us)` windows in increasing order; empty means active
    /// for the whole run.
    pub activity: Vec<(f64, f64)>,
}

impl NodeSpec {
    pub fn station(flow: Flow) -> Self {
        Self {
            role: Role::Ordinary,
            flows: vec![flow],
            data_slots: 1,
            activity: Vec::new(),
        }
    }

    pub fn silent() -> Self {
        Self {
            flows: Vec::new(),
            ..Self::station(Flow {
                source: TrafficSource::backlogged(1),
                destination: None,
            })
        }
    }
}

/// Everything a run needs besides the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSetup {
    pub protocol: Protocol,
    pub n_slots: usize,
    pub phy: PhyParameters,
    pub recycle_threshold: u32,
    pub reselection_mode: ReselectionMode,
    pub fault: FaultModel,
    pub graph: ConnectivityGraph,
    pub nodes: Vec<NodeSpec>,
    pub beacon_bytes: u32,
    pub duration_us: f64,
    pub max_slots: Option<u64>,
}

impl NetworkSetup {
    pub fn validate(&self) -> Result<(), MediumError> {
        let bad = |m: String| Err(MediumError::InvalidSetup(m));
        if self.n_slots == 0 {
            return bad("n_slots must be at least 1".into());
        }
        if self.graph.node_count() != self.nodes.len() {
            return bad(format!(
                "graph has {} nodes but {} node specs were given",
                self.graph.node_count(),
                self.nodes.len()
            ));
        }
        if !self.graph.is_symmetric() {
            return bad("connectivity must be reciprocal".into());
        }
        self.phy
            .validate()
            .map_err(|e| MediumError::InvalidSetup(e.to_string()))?;
        self.fault.validate()?;
        if !(self.duration_us.is_finite() && self.duration_us > 0.0) {
            return bad(format!(
                "duration must be positive, got {} us",
                self.duration_us
            ));
        }
        if self.beacon_bytes == 0 {
            return bad("beacon_bytes must be positive".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for flow in &node.flows {
                flow.source
                    .validate()
                    .map_err(|e| MediumError::InvalidSetup(format!("node {i}: {e}")))?;
                if let Some(d) = flow.destination {
                    if d >= self.nodes.len() || d == i {
                        return bad(format!("node {i}: invalid destination {d}"));
                    }
                }
            }
            let mut last_end = 0.0;
            for &(join, leave) in &node.activity {
                if !(join >= last_end && leave > join) {
                    return bad(format!("node {i}: activity windows must be increasing"));
                }
                last_end = leave;
            }
            if self.protocol == Protocol::Zc {
                self.station_config(node).validate()?;
            }
        }
        if self.protocol == Protocol::Tdma {
            TdmaState::assign(&self.tdma_demand(), self.n_slots)?;
        }
        Ok(())
    }

    fn station_config(&self, node: &NodeSpec) -> StationConfig {
        match node.role {
            Role::Ordinary => {
                StationConfig::ordinary(self.n_slots, self.recycle_threshold, self.reselection_mode)
            }
            Role::AccessPoint => StationConfig::access_point(
                self.n_slots,
                self.recycle_threshold,
                self.reselection_mode,
                node.data_slots,
            ),
        }
    }

    fn tdma_demand(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.data_slots).collect()
    }

    /// Fixed TDMA slot: a successful exchange of the largest frame in use.
    pub fn tdma_slot_us(&self) -> f64 {
        let largest = self
            .nodes
            .iter()
            .flat_map(|n| n.flows.iter().map(|f| f.source.frame_bytes()))
            .max()
            .unwrap_or(0);
        self.phy.success_us(largest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub node: usize,
    pub flow: usize,
    pub destination: Option<usize>,
    pub enqueue_us: f64,
    pub start_us: f64,
    pub end_us: f64,
    pub payload_bytes: u32,
}

impl Delivery {
    /// Enqueue to end of the successful transmission.
    pub fn access_delay_us(&self) -> f64 {
        self.end_us - self.enqueue_us
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeLog {
    pub transmissions: u64,
    pub deliveries: u64,
    pub failures: u64,
    pub beacons: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotCounts {
    pub idle: u64,
    pub success: u64,
    pub collision: u64,
}

impl SlotCounts {
    pub fn total(&self) -> u64 {
        self.idle + self.success + self.collision
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub deliveries: Vec<Delivery>,
    pub nodes: Vec<NodeLog>,
    pub slot_counts: SlotCounts,
    pub elapsed_us: f64,
    pub slots: u64,
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    flow: usize,
    enqueue_us: f64,
    payload_bytes: u32,
    frame_bytes: u32,
    destination: Option<usize>,
}

#[derive(Debug, Clone)]
enum Mac {
    Zc(StationState),
    Csma { state: CsmaState, idle_sensed: u8 },
    Tdma(TdmaState),
}

#[derive(Debug, Clone)]
struct NodeRuntime {
    mac: Mac,
    queue: VecDeque<Packet>,
    queued_per_flow: Vec<usize>,
    next_arrival: Vec<u64>,
    active: bool,
    window: usize,
    proto_rng: ChaCha8Rng,
    sense_rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    node: usize,
    beacon: bool,
    frame_bytes: u32,
}

/// A single run, advanced one virtual slot at a time.
pub struct Simulation<'a> {
    setup: &'a NetworkSetup,
    nodes: Vec<NodeRuntime>,
    now: f64,
    index: u64,
    record: SlotOutcomeRecord,
    transmissions: Vec<Transmission>,
    pending: Vec<Pending>,
    log: RunLog,
    track_zero_collision: bool,
    tdma_slot_us: f64,
    occupied: Vec<bool>,
}

impl<'a> Simulation<'a> {
    pub fn new(setup: &'a NetworkSetup, seed: u64) -> Result<Self, MediumError> {
        setup.validate()?;
        let tdma = if setup.protocol == Protocol::Tdma {
            TdmaState::assign(&setup.tdma_demand(), setup.n_slots)?
        } else {
            Vec::new()
        };
        let nodes = setup
            .nodes
            .iter()
            .enumerate()
            .map(|(i, spec)| -> Result<NodeRuntime, MediumError> {
                let mut proto_rng = stream(seed, Purpose::Protocol, i as u64);
                let mac = match setup.protocol {
                    Protocol::Zc => Mac::Zc(StationState::new(i, setup.station_config(spec))?),
                    Protocol::Csma => Mac::Csma {
                        state: CsmaState::new(&mut proto_rng),
                        idle_sensed: 0,
                    },
                    Protocol::Tdma => Mac::Tdma(tdma[i].clone()),
                };
                Ok(NodeRuntime {
                    mac,
                    queue: VecDeque::new(),
                    queued_per_flow: vec![0; spec.flows.len()],
                    next_arrival: vec![0; spec.flows.len()],
                    active: false,
                    window: 0,
                    proto_rng,
                    sense_rng: stream(seed, Purpose::Sensing, i as u64),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            setup,
            log: RunLog {
                nodes: vec![NodeLog::default(); nodes.len()],
                ..RunLog::default()
            },
            nodes,
            now: 0.0,
            index: 0,
            record: SlotOutcomeRecord::default(),
            transmissions: Vec::new(),
            pending: Vec::new(),
            track_zero_collision: setup.protocol == Protocol::Zc
                && setup.fault.is_none()
                && setup.graph.is_complete(),
            tdma_slot_us: setup.tdma_slot_us(),
            occupied: vec![false; setup.n_slots],
        })
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn slot_index(&self) -> u64 {
        self.index
    }

    pub fn finished(&self) -> bool {
        self.now >= self.setup.duration_us
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.nodes[node].active
    }

    pub fn queue_len(&self, node: usize) -> usize {
        self.nodes[node].queue.len()
    }

    pub fn zc_station(&self, node: usize) -> Option<&StationState> {
        match &self.nodes[node].mac {
            Mac::Zc(st) => Some(st),
            _ => None,
        }
    }

    pub fn csma_state(&self, node: usize) -> Option<&CsmaState> {
        match &self.nodes[node].mac {
            Mac::Csma { state, .. } => Some(state),
            _ => None,
        }
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    /// Runs to the configured duration, feeding every slot to `sink`.
    pub fn run(mut self, sink: &mut dyn SlotSink) -> Result<RunLog, MediumError> {
        while !self.finished() {
            let record = self.step()?;
            sink.on_slot(record);
        }
        Ok(self.log)
    }

    fn update_activity(&mut self) {
        let now = self.now;
        for (i, spec) in self.setup.nodes.iter().enumerate() {
            let node = &mut self.nodes[i];
            if spec.activity.is_empty() {
                if !node.active && self.index == 0 {
                    activate(node, spec, 0.0);
                }
                continue;
            }
            if node.active && now >= spec.activity[node.window].1 {
                node.active = false;
                node.queue.clear();
                node.queued_per_flow.iter_mut().for_each(|q| *q = 0);
                node.window += 1;
            }
            while !node.active && node.window < spec.activity.len() {
                let (join, leave) = spec.activity[node.window];
                if now >= leave {
                    node.window += 1;
                } else {
                    if now >= join {
                        activate(node, spec, join);
                    }
                    break;
                }
            }
        }
    }

    fn enqueue_arrivals(&mut self) {
        let now = self.now;
        for (spec, node) in self.setup.nodes.iter().zip(self.nodes.iter_mut()) {
            if !node.active {
                continue;
            }
            for (f, flow) in spec.flows.iter().enumerate() {
                let src = &flow.source;
                let push = |node: &mut NodeRuntime, t: f64| {
                    node.queue.push_back(Packet {
                        flow: f,
                        enqueue_us: t,
                        payload_bytes: src.packet_bytes,
                        frame_bytes: src.frame_bytes(),
                        destination: flow.destination,
                    });
                    node.queued_per_flow[f] += 1;
                };
                if src.is_periodic() {
                    while src.nth_arrival(node.next_arrival[f]) <= now {
                        let t = src.nth_arrival(node.next_arrival[f]);
                        push(node, t);
                        node.next_arrival[f] += 1;
                    }
                } else if node.queued_per_flow[f] == 0 {
                    push(node, now);
                }
            }
        }
    }

    fn slot_duration(&self, kind: SlotKind) -> f64 {
        let phy = &self.setup.phy;
        let frame_max =
            |f: &dyn Fn(&Pending) -> f64| self.pending.iter().map(f).fold(0.0_f64, f64::max);
        match self.setup.protocol {
            Protocol::Tdma => self.tdma_slot_us,
            Protocol::Zc => {
                phy.inter_slot_gap_us
                    + match kind {
                        SlotKind::Idle => phy.slot_us,
                        SlotKind::Success => frame_max(&|p| {
                            if p.beacon {
                                phy.broadcast_us(p.frame_bytes)
                            } else {
                                phy.success_us(p.frame_bytes)
                            }
                        }),
                        SlotKind::Collision => frame_max(&|p| phy.collision_us(p.frame_bytes)),
                    }
            }
            Protocol::Csma => match kind {
                SlotKind::Idle => phy.slot_us,
                SlotKind::Success => frame_max(&|p| phy.success_us(p.frame_bytes)) + phy.difs_us,
                SlotKind::Collision => frame_max(&|p| phy.collision_us(p.frame_bytes)),
            },
        }
    }

    /// Advances one slot and returns its record.
    pub fn step(&mut self) -> Result<&SlotOutcomeRecord, MediumError> {
        if let Some(cap) = self.setup.max_slots {
            if self.index >= cap {
                return Err(MediumError::SlotCapExceeded(cap));
            }
        }
        self.update_activity();
        self.enqueue_arrivals();

        self.transmissions.clear();
        self.pending.clear();
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if !node.active {
                continue;
            }
            let nonempty = !node.queue.is_empty();
            let send = match &mut node.mac {
                Mac::Zc(st) => {
                    st.prepare(node.queue.len(), &mut node.proto_rng);
                    st.intent(nonempty)
                }
                Mac::Csma { state, idle_sensed } => {
                    if *idle_sensed > 1 {
                        state.decrement();
                    }
                    let idle = *idle_sensed > 0;
                    *idle_sensed = 0;
                    (csma_step(state, idle, nonempty) == CsmaAction::Transmit)
                        .then_some(Intent::Data { trial: false })
                }
                Mac::Tdma(ts) => {
                    tdma_step(ts, self.index, nonempty).then_some(Intent::Data { trial: false })
                }
            };
            match send {
                Some(Intent::Beacon) => {
                    self.transmissions.push(Transmission {
                        source: i,
                        destination: None,
                    });
                    self.pending.push(Pending {
                        node: i,
                        beacon: true,
                        frame_bytes: self.setup.beacon_bytes,
                    });
                }
                Some(Intent::Data { .. }) => {
                    let head = node.queue.front().expect("transmit with a packet queued");
                    self.transmissions.push(Transmission {
                        source: i,
                        destination: head.destination,
                    });
                    self.pending.push(Pending {
                        node: i,
                        beacon: false,
                        frame_bytes: head.frame_bytes,
                    });
                }
                None => {}
            }
        }

        let mut record = std::mem::take(&mut self.record);
        resolve_into(
            &self.transmissions,
            &self.setup.graph,
            &mut record.resolution,
        );
        let kind = record.resolution.kind();
        let duration = self.slot_duration(kind);
        let start = self.now;
        let end = start + duration;

        record.transmitters.clear();
        record
            .transmitters
            .extend(self.pending.iter().map(|p| p.node));
        for (p, &delivered) in self.pending.iter().zip(&record.resolution.delivered) {
            let node = &mut self.nodes[p.node];
            let log = &mut self.log.nodes[p.node];
            log.transmissions += 1;
            if p.beacon {
                log.beacons += 1;
            } else if delivered {
                log.deliveries += 1;
                let pkt = node.queue.pop_front().expect("delivered packet was queued");
                node.queued_per_flow[pkt.flow] -= 1;
                self.log.deliveries.push(Delivery {
                    node: p.node,
                    flow: pkt.flow,
                    destination: pkt.destination,
                    enqueue_us: pkt.enqueue_us,
                    start_us: start,
                    end_us: end,
                    payload_bytes: pkt.payload_bytes,
                });
            }
            if !delivered {
                log.failures += 1;
            }
        }

        let fault = &self.setup.fault;
        let mut tx_iter = self
            .pending
            .iter()
            .zip(&record.resolution.delivered)
            .peekable();
        for (i, node) in self.nodes.iter_mut().enumerate() {
            let own = match tx_iter.peek() {
                Some((p, &d)) if p.node == i => {
                    tx_iter.next();
                    Some(d)
                }
                _ => None,
            };
            if !node.active {
                continue;
            }
            let heard = record.resolution.per_receiver[i];
            let truth = if heard == ReceiverResult::Idle {
                SlotTruth::Idle
            } else {
                SlotTruth::Busy
            };
            match &mut node.mac {
                Mac::Zc(st) => match own {
                    Some(d) => {
                        let outcome = if d {
                            OwnOutcome::Success
                        } else {
                            OwnOutcome::Collision
                        };
                        st.on_slot_observed(SlotObservation::own(st.position(), outcome));
                    }
                    None => {
                        for &s in sense(truth, fault, &mut node.sense_rng) {
                            let kind = match (s, heard) {
                                (SlotTruth::Idle, _) => SensedSlot::Idle,
                                (SlotTruth::Busy, ReceiverResult::Collided) => SensedSlot::Collided,
                                (SlotTruth::Busy, _) => SensedSlot::Busy,
                            };
                            st.on_slot_observed(SlotObservation::sensed(st.position(), kind));
                        }
                    }
                },
                Mac::Csma { state, idle_sensed } => match own {
                    Some(d) => {
                        state.on_transmission(d, &mut node.proto_rng);
                        *idle_sensed = 0;
                    }
                    None => {
                        *idle_sensed = sense(truth, fault, &mut node.sense_rng)
                            .iter()
                            .filter(|&&s| s == SlotTruth::Idle)
                            .count() as u8;
                    }
                },
                Mac::Tdma(_) => {}
            }
        }

        match kind {
            SlotKind::Idle => self.log.slot_counts.idle += 1,
            SlotKind::Success => self.log.slot_counts.success += 1,
            SlotKind::Collision => self.log.slot_counts.collision += 1,
        }
        record.index = self.index;
        record.wall_time_us = start;
        record.duration_us = duration;
        record.zero_collision_state = self
            .track_zero_collision
            .then(|| self.zero_collision_state());

        self.now = end;
        self.index += 1;
        self.log.elapsed_us = end;
        self.log.slots = self.index;
        self.record = record;
        Ok(&self.record)
    }

    /// Every active ZC station is past its scan, holds all the slots it
    /// wants, and no two stations map a held slot to the same point of the
    /// global slot sequence.
    fn zero_collision_state(&mut self) -> bool {
        let n = self.setup.n_slots;
        self.occupied.iter_mut().for_each(|o| *o = false);
        let next = (self.index + 1) % n as u64;
        for node in &self.nodes {
            let Mac::Zc(st) = &node.mac else { continue };
            if !node.active {
                continue;
            }
            if !st.fully_reserved() {
                return false;
            }
            let phase = (next as usize + n - st.position()) % n;
            for s in st.owned_slots().iter().copied().chain(st.anchor_slot()) {
                let g = (s + phase) % n;
                if self.occupied[g] {
                    return false;
                }
                self.occupied[g] = true;
            }
        }
        true
    }
}

fn activate(node: &mut NodeRuntime, spec: &NodeSpec, join_us: f64) {
    node.active = true;
    node.queue.clear();
    node.queued_per_flow.iter_mut().for_each(|q| *q = 0);
    for (f, flow) in spec.flows.iter().enumerate() {
        let src = &flow.source;
        node.next_arrival[f] = if src.is_periodic() && join_us > src.start_offset_us {
            ((join_us - src.start_offset_us) / src.period_us).ceil() as u64
        } else {
            0
        };
    }
    match &mut node.mac {
        Mac::Zc(st) => st.on_arrival(),
        Mac::Csma { state, idle_sensed } => {
            *state = CsmaState::new(&mut node.proto_rng);
            *idle_sensed = 0;
        }
        Mac::Tdma(_) => {}
    }
}
