//! The ZC station state machine.
//!
//! A station counts virtual slots modulo `N` from the end of its initial scan.
//! Every slot is either a busy transmission slot or an idle mini-slot; the
//! station keeps a belief per slot position and transmits only in slots it
//! owns or is trying out. A trial that succeeds becomes a reservation; a trial
//! or reservation that collides is given up and a new slot is drawn.
//!
//! Observers tell a clean busy slot (acknowledged) from a collided one. A
//! clean slot is marked reserved by its sender; a collided slot stays free.
//! When the channel stays busy for two full rounds, colliding stations stay
//! put.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    /// Never attempted and every slot looks reserved; wait for a recycle.
    #[error("no slot is believed unreserved")]
    NoEligibleSlot,
    #[error("invalid station configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReselectionMode {
    /// Draw a new slot right after a collision.
    Immediate,
    /// Wait for the end of the current round, then draw.
    CycleEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Ordinary,
    AccessPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotBelief {
    Unreserved,
    ReservedByOther,
    Mine,
}

/// What the station perceived in one virtual slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensedSlot {
    /// Empty mini-slot.
    Idle,
    /// Busy transmission slot that was acknowledged (or a beacon).
    Busy,
    /// Busy transmission slot that ended without an acknowledgement.
    Collided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OwnOutcome {
    Success,
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotObservation {
    pub slot_index: usize,
    pub kind: SensedSlot,
    /// Present only when this station transmitted in the slot.
    pub own_outcome: Option<OwnOutcome>,
}

impl SlotObservation {
    pub fn sensed(slot_index: usize, kind: SensedSlot) -> Self {
        Self {
            slot_index,
            kind,
            own_outcome: None,
        }
    }

    pub fn own(slot_index: usize, outcome: OwnOutcome) -> Self {
        let kind = match outcome {
            OwnOutcome::Success => SensedSlot::Busy,
            OwnOutcome::Collision => SensedSlot::Collided,
        };
        Self {
            slot_index,
            kind,
            own_outcome: Some(outcome),
        }
    }
}

/// What a station sends in the current slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    /// Access-point beacon in the anchor slot; never acknowledged.
    Beacon,
    Data {
        trial: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationConfig {
    pub n_slots: usize,
    /// Consecutive idle rounds after which a slot is considered free again.
    pub recycle_threshold: u32,
    pub reselection_mode: ReselectionMode,
    pub role: Role,
    /// Data slots to hold: 1 for an ordinary station, any number for an AP.
    pub data_slots: usize,
}

impl StationConfig {
    pub fn ordinary(n_slots: usize, recycle_threshold: u32, mode: ReselectionMode) -> Self {
        Self {
            n_slots,
            recycle_threshold,
            reselection_mode: mode,
            role: Role::Ordinary,
            data_slots: 1,
        }
    }

    pub fn access_point(
        n_slots: usize,
        recycle_threshold: u32,
        mode: ReselectionMode,
        data_slots: usize,
    ) -> Self {
        Self {
            role: Role::AccessPoint,
            data_slots,
            ..Self::ordinary(n_slots, recycle_threshold, mode)
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n_slots == 0 {
            return Err(ProtocolError::InvalidConfig(
                "n_slots must be at least 1".into(),
            ));
        }
        if self.recycle_threshold == 0 {
            return Err(ProtocolError::InvalidConfig(
                "recycle_threshold must be at least 1 round".into(),
            ));
        }
        match self.role {
            Role::Ordinary if self.data_slots != 1 => Err(ProtocolError::InvalidConfig(
                "ordinary stations hold exactly one data slot".into(),
            )),
            Role::AccessPoint if self.data_slots + 1 > self.n_slots => {
                Err(ProtocolError::InvalidConfig(format!(
                    "access point wants {} data slots plus an anchor but N = {}",
                    self.data_slots, self.n_slots
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationState {
    station_id: usize,
    config: StationConfig,
    slot_view: Vec<SlotBelief>,
    idle_age: Vec<u32>,
    busy_run: usize,
    owned_slots: BTreeSet<usize>,
    trial_slots: BTreeSet<usize>,
    anchor_slot: Option<usize>,
    scan_remaining: usize,
    position: usize,
    last_collided: Option<usize>,
    has_attempted: bool,
    awaiting_round_end: bool,
}

impl StationState {
    /// A station that already knows the network: no scan, everything
    /// believed free. Call [`StationState::on_arrival`] for a joining station.
    pub fn new(station_id: usize, config: StationConfig) -> Result<Self, ProtocolError> {
        config.validate()?;
        let n = config.n_slots;
        Ok(Self {
            station_id,
            config,
            slot_view: vec![SlotBelief::Unreserved; n],
            idle_age: vec![0; n],
            busy_run: 0,
            owned_slots: BTreeSet::new(),
            trial_slots: BTreeSet::new(),
            anchor_slot: None,
            scan_remaining: 0,
            position: 0,
            last_collided: None,
            has_attempted: false,
            awaiting_round_end: false,
        })
    }

    pub fn station_id(&self) -> usize {
        self.station_id
    }

    pub fn config(&self) -> &StationConfig {
        &self.config
    }

    pub fn role(&self) -> Role {
        self.config.role
    }

    pub fn slot_view(&self) -> &[SlotBelief] {
        &self.slot_view
    }

    pub fn idle_age(&self) -> &[u32] {
        &self.idle_age
    }

    /// Data slots held; the anchor is not included.
    pub fn owned_slots(&self) -> &BTreeSet<usize> {
        &self.owned_slots
    }

    pub fn trial_slots(&self) -> &BTreeSet<usize> {
        &self.trial_slots
    }

    pub fn anchor_slot(&self) -> Option<usize> {
        self.anchor_slot
    }

    pub fn scan_remaining(&self) -> usize {
        self.scan_remaining
    }

    /// Local index of the next slot to be observed.
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn last_collided(&self) -> Option<usize> {
        self.last_collided
    }

    /// Holds every data slot it wants, and its anchor if it is an AP.
    pub fn fully_reserved(&self) -> bool {
        self.scan_remaining == 0
            && self.owned_slots.len() == self.config.data_slots
            && (self.config.role == Role::Ordinary || self.anchor_slot.is_some())
    }

    /// Forget everything and listen for one full round before accessing.
    pub fn on_arrival(&mut self) {
        let n = self.config.n_slots;
        self.slot_view = vec![SlotBelief::Unreserved; n];
        self.idle_age = vec![0; n];
        self.busy_run = 0;
        self.owned_slots.clear();
        self.trial_slots.clear();
        self.anchor_slot = None;
        self.scan_remaining = n;
        self.position = 0;
        self.last_collided = None;
        self.has_attempted = false;
        self.awaiting_round_end = false;
    }

    /// Uniform draw over slots believed unreserved. A station that has
    /// collided sticks to its colliding slot when none is left, or when the
    /// last two rounds held no idle slot.
    pub fn select_slot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, ProtocolError> {
        let candidates: Vec<usize> = (0..self.config.n_slots)
            .filter(|&s| {
                self.slot_view[s] == SlotBelief::Unreserved
                    && !self.trial_slots.contains(&s)
                    && self.anchor_slot != Some(s)
            })
            .collect();
        let sticky = match self.last_collided {
            Some(s) if self.has_attempted && !self.trial_slots.contains(&s) => Some(s),
            _ => None,
        };
        let saturated = self.busy_run >= 2 * self.config.n_slots;
        match (candidates.choose(rng), sticky) {
            (_, Some(s)) if saturated => Ok(s),
            (Some(&c), _) => Ok(c),
            (None, Some(s)) => Ok(s),
            (None, None) => Err(ProtocolError::NoEligibleSlot),
        }
    }

    /// Draws anchor and trial slots as needed before the current slot.
    pub fn prepare<R: Rng + ?Sized>(&mut self, queue_len: usize, rng: &mut R) {
        if self.scan_remaining > 0 {
            return;
        }
        if self.config.role == Role::AccessPoint && self.anchor_slot.is_none() {
            match self.select_slot(rng) {
                Ok(s) => {
                    self.anchor_slot = Some(s);
                    self.slot_view[s] = SlotBelief::Mine;
                    self.idle_age[s] = 0;
                }
                Err(_) => return,
            }
        }
        if self.awaiting_round_end {
            return;
        }
        let missing = self.config.data_slots - self.owned_slots.len();
        let wanted = missing
            .min(queue_len)
            .saturating_sub(self.trial_slots.len());
        for _ in 0..wanted {
            match self.select_slot(rng) {
                Ok(s) => {
                    // Contesting a slot overrides a belief that it is taken.
                    self.slot_view[s] = SlotBelief::Unreserved;
                    self.trial_slots.insert(s);
                }
                Err(_) => break,
            }
        }
    }

    pub fn should_transmit(&self, slot: usize, queue_nonempty: bool) -> bool {
        self.intent_at(slot, queue_nonempty).is_some()
    }

    /// What to send in the current slot, if anything.
    pub fn intent(&self, queue_nonempty: bool) -> Option<Intent> {
        self.intent_at(self.position, queue_nonempty)
    }

    fn intent_at(&self, slot: usize, queue_nonempty: bool) -> Option<Intent> {
        if self.scan_remaining > 0 {
            return None;
        }
        if self.anchor_slot == Some(slot) {
            return Some(Intent::Beacon);
        }
        if !queue_nonempty {
            return None;
        }
        if self.owned_slots.contains(&slot) {
            Some(Intent::Data { trial: false })
        } else if self.trial_slots.contains(&slot) {
            Some(Intent::Data { trial: true })
        } else {
            None
        }
    }

    fn release(&mut self, s: usize, belief: SlotBelief) {
        self.owned_slots.remove(&s);
        self.trial_slots.remove(&s);
        self.slot_view[s] = belief;
    }

    /// Absorbs the observation of the current slot and advances one slot.
    pub fn on_slot_observed(&mut self, obs: SlotObservation) {
        debug_assert_eq!(obs.slot_index, self.position, "observation out of step");
        let s = self.position;
        let is_anchor = self.anchor_slot == Some(s);
        match obs.own_outcome {
            Some(_) if is_anchor => self.idle_age[s] = 0,
            Some(OwnOutcome::Success) => {
                self.trial_slots.remove(&s);
                self.owned_slots.insert(s);
                self.slot_view[s] = SlotBelief::Mine;
                self.idle_age[s] = 0;
                self.has_attempted = true;
                self.last_collided = None;
            }
            Some(OwnOutcome::Collision) => {
                self.release(s, SlotBelief::Unreserved);
                self.idle_age[s] = 0;
                self.has_attempted = true;
                self.last_collided = Some(s);
                if self.config.reselection_mode == ReselectionMode::CycleEnd {
                    self.awaiting_round_end = true;
                }
            }
            None => match obs.kind {
                SensedSlot::Idle => {
                    self.idle_age[s] = self.idle_age[s].saturating_add(1);
                    self.trial_slots.remove(&s);
                    let expired = self.idle_age[s] >= self.config.recycle_threshold;
                    if expired && !is_anchor && self.slot_view[s] != SlotBelief::Unreserved {
                        self.release(s, SlotBelief::Unreserved);
                    }
                }
                SensedSlot::Busy => {
                    self.idle_age[s] = 0;
                    if !is_anchor {
                        self.release(s, SlotBelief::ReservedByOther);
                    }
                }
                SensedSlot::Collided => {
                    self.idle_age[s] = 0;
                    if !is_anchor {
                        self.release(s, SlotBelief::Unreserved);
                    }
                }
            },
        }
        if obs.kind == SensedSlot::Idle && obs.own_outcome.is_none() {
            self.busy_run = 0;
        } else {
            self.busy_run += 1;
        }
        self.scan_remaining = self.scan_remaining.saturating_sub(1);
        self.position = (s + 1) % self.config.n_slots;
        if self.position == 0 {
            self.awaiting_round_end = false;
        }
    }
}
