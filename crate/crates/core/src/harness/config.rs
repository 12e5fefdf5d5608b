use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::HarnessError;
use crate::analysis::PhyParameters;
use crate::medium::{
    random_topology, ConnectivityGraph, FaultModel, Flow, NetworkSetup, NodeSpec, Protocol,
};
use crate::protocol::{ReselectionMode, Role};
use crate::rng::{stream, Purpose};
use crate::traffic::TrafficSource;

/// A validation failure, naming the offending field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Topology {
    /// Everyone hears everyone.
    SingleDomain,
    /// Even node `2i` sends to `2i + 1`; other pairs hear each other with
    /// probability `gamma`.
    Random {
        gamma: f64,
        #[serde(default = "default_area")]
        area_m: f64,
    },
}

fn default_area() -> f64 {
    200.0
}

impl Default for Topology {
    fn default() -> Self {
        Topology::SingleDomain
    }
}

/// Infrastructure mode: an access point joins as the last node. Stations
/// send their traffic to it; it sends one downlink flow to each station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPointConfig {
    #[serde(default = "default_beacon")]
    pub beacon_bytes: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downlink: Option<TrafficSource>,
    /// Data slots to reserve; defaults to one per downlink flow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_slots: Option<usize>,
}

fn default_beacon() -> u32 {
    50
}

impl Default for AccessPointConfig {
    fn default() -> Self {
        Self {
            beacon_bytes: default_beacon(),
            downlink: None,
            data_slots: None,
        }
    }
}

/// Station `station` is present only during `[join_s, leave_s)`. A station
/// may appear several times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalWindow {
    pub station: usize,
    pub join_s: f64,
    pub leave_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub protocol: Protocol,
    /// Virtual slots per round (ZC) or frame length (TDMA).
    pub n_slots: usize,
    /// Stations, not counting the access point.
    pub n_stations: usize,
    pub traffic: TrafficSource,
    /// Draw each periodic flow's start offset uniformly from `[0, period)`.
    #[serde(default)]
    pub stagger_offsets: bool,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    /// Start of the measurement window for goodput and delays.
    #[serde(default)]
    pub warmup_s: f64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_mode")]
    pub reselection_mode: ReselectionMode,
    #[serde(default = "default_recycle")]
    pub recycle_threshold: u32,
    #[serde(default = "default_horizon")]
    pub convergence_horizon_rounds: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_slots: Option<u64>,
    #[serde(default)]
    pub phy: PhyParameters,
    #[serde(default)]
    pub fault: FaultModel,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_point: Option<AccessPointConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arrival_schedule: Vec<ArrivalWindow>,
}

fn default_duration() -> f64 {
    20.0
}

fn default_mode() -> ReselectionMode {
    ReselectionMode::Immediate
}

fn default_recycle() -> u32 {
    10
}

fn default_horizon() -> u64 {
    crate::metrics::DEFAULT_HORIZON_ROUNDS
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        Ok(toml::to_string(self)?)
    }

    pub fn node_count(&self) -> usize {
        self.n_stations + usize::from(self.access_point.is_some())
    }

    pub fn ap_data_slots(&self) -> usize {
        match self.access_point {
            Some(ap) => ap.data_slots.unwrap_or(if ap.downlink.is_some() {
                self.n_stations
            } else {
                0
            }),
            None => 0,
        }
    }

    /// TDMA has no schedule when the stations need more slots than a frame
    /// holds.
    pub fn tdma_undefined(&self) -> bool {
        self.protocol == Protocol::Tdma && self.n_stations + self.ap_data_slots() > self.n_slots
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(err("name", "must not be empty"));
        }
        if self.n_slots == 0 {
            return Err(err("n_slots", "must be at least 1"));
        }
        if self.n_stations == 0 {
            return Err(err("n_stations", "must be at least 1"));
        }
        self.traffic
            .validate()
            .map_err(|e| err("traffic", e.to_string()))?;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(err(
                "duration_s",
                format!("must be positive, got {}", self.duration_s),
            ));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s < self.duration_s) {
            return Err(err("warmup_s", "must lie in [0, duration_s)"));
        }
        if self.seeds.is_empty() {
            return Err(err("seeds", "at least one seed is required"));
        }
        if self.recycle_threshold == 0 {
            return Err(err("recycle_threshold", "must be at least 1 round"));
        }
        if self.convergence_horizon_rounds == 0 {
            return Err(err("convergence_horizon_rounds", "must be at least 1"));
        }
        self.phy.validate().map_err(|e| err("phy", e.to_string()))?;
        self.fault
            .validate()
            .map_err(|e| err("fault", e.to_string()))?;
        if let Topology::Random { gamma, area_m } = self.topology {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(err("topology.gamma", format!("{gamma} outside [0, 1]")));
            }
            if !(area_m.is_finite() && area_m > 0.0) {
                return Err(err("topology.area_m", "must be positive"));
            }
            if self.n_stations % 2 != 0 {
                return Err(err(
                    "n_stations",
                    "random topology pairs stations; use an even count",
                ));
            }
            if self.access_point.is_some() {
                return Err(err("access_point", "not supported with a random topology"));
            }
        }
        if let Some(ap) = &self.access_point {
            if ap.beacon_bytes == 0 {
                return Err(err("access_point.beacon_bytes", "must be positive"));
            }
            if let Some(d) = &ap.downlink {
                d.validate()
                    .map_err(|e| err("access_point.downlink", e.to_string()))?;
            }
            if self.protocol == Protocol::Zc && self.ap_data_slots() + 1 > self.n_slots {
                return Err(err(
                    "access_point.data_slots",
                    format!(
                        "{} data slots plus the anchor exceed N",
                        self.ap_data_slots()
                    ),
                ));
            }
        }
        if self.tdma_undefined() {
            return Err(err(
                "n_stations",
                format!(
                    "TDMA is undefined for M = {} > N = {}",
                    self.n_stations, self.n_slots
                ),
            ));
        }
        for (i, w) in self.arrival_schedule.iter().enumerate() {
            let field = format!("arrival_schedule[{i}]");
            if w.station >= self.n_stations {
                return Err(err(&field, format!("station {} does not exist", w.station)));
            }
            if !(w.join_s >= 0.0 && w.leave_s > w.join_s) {
                return Err(err(&field, "need 0 <= join_s < leave_s"));
            }
        }
        for s in 0..self.n_stations {
            let mut windows: Vec<_> = self
                .arrival_schedule
                .iter()
                .filter(|w| w.station == s)
                .collect();
            windows.sort_by(|a, b| a.join_s.total_cmp(&b.join_s));
            if windows.windows(2).any(|p| p[1].join_s < p[0].leave_s) {
                return Err(err(
                    "arrival_schedule",
                    format!("windows of station {s} overlap"),
                ));
            }
        }
        Ok(())
    }

    /// Concrete network for one seed.
    pub fn network_setup(&self, seed: u64) -> Result<NetworkSetup, HarnessError> {
        self.validate()?;
        let m = self.n_stations;
        let mut phase_rng = stream(seed, Purpose::Traffic, 0);
        let mut stagger = |src: TrafficSource| {
            if self.stagger_offsets && src.is_periodic() {
                src.with_offset(phase_rng.gen::<f64>() * src.period_us)
            } else {
                src
            }
        };
        let ap_index = self.access_point.map(|_| m);
        let (graph, destination): (ConnectivityGraph, Box<dyn Fn(usize) -> Option<usize>>) =
            match self.topology {
                Topology::SingleDomain => (
                    ConnectivityGraph::complete(self.node_count()),
                    Box::new(move |_| ap_index),
                ),
                Topology::Random { gamma, area_m } => {
                    let mut rng = stream(seed, Purpose::Topology, 0);
                    (
                        random_topology(m, gamma, area_m, &mut rng)?,
                        Box::new(|i| Some(i + 1)),
                    )
                }
            };
        let sends = |i: usize| !matches!(self.topology, Topology::Random { .. }) || i % 2 == 0;
        let mut nodes: Vec<NodeSpec> = (0..m)
            .map(|i| {
                let mut node = NodeSpec::station(Flow {
                    source: stagger(self.traffic),
                    destination: destination(i),
                });
                if !sends(i) {
                    node.flows.clear();
                }
                let mut windows: Vec<(f64, f64)> = self
                    .arrival_schedule
                    .iter()
                    .filter(|w| w.station == i)
                    .map(|w| (w.join_s * 1e6, w.leave_s * 1e6))
                    .collect();
                windows.sort_by(|a, b| a.0.total_cmp(&b.0));
                node.activity = windows;
                node
            })
            .collect();
        if let Some(ap) = &self.access_point {
            let flows = match ap.downlink {
                Some(src) => (0..m)
                    .map(|i| Flow {
                        source: stagger(src),
                        destination: Some(i),
                    })
                    .collect(),
                None => Vec::new(),
            };
            nodes.push(NodeSpec {
                role: Role::AccessPoint,
                flows,
                data_slots: self.ap_data_slots(),
                activity: Vec::new(),
            });
        }
        let beacon_bytes = self
            .access_point
            .map_or(default_beacon(), |ap| ap.beacon_bytes);
        Ok(NetworkSetup {
            protocol: self.protocol,
            n_slots: self.n_slots,
            phy: self.phy,
            recycle_threshold: self.recycle_threshold,
            reselection_mode: self.reselection_mode,
            fault: self.fault,
            graph,
            nodes,
            beacon_bytes,
            duration_us: self.duration_s * 1e6,
            max_slots: self.max_slots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;

    #[test]
    fn toml_round_trip() {
        for cfg in presets::all() {
            let text = cfg.to_toml_string().unwrap();
            let back = ExperimentConfig::from_toml_str(&text).unwrap();
            assert_eq!(back, cfg, "{}", cfg.name);
        }
    }

    #[test]
    fn field_level_diagnostics() {
        let mut cfg = presets::convergence(16);
        cfg.seeds.clear();
        assert_eq!(cfg.validate().unwrap_err().field, "seeds");
        let mut cfg = presets::convergence(16);
        cfg.fault.p1 = 2.0;
        assert_eq!(cfg.validate().unwrap_err().field, "fault");
        let mut cfg = presets::backlogged_goodput(Protocol::Tdma, 65);
        assert_eq!(cfg.validate().unwrap_err().field, "n_stations");
        cfg.protocol = Protocol::Zc;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = presets::convergence(16).to_toml_string().unwrap();
        for bad in [
            format!("bogus = 1\n{text}"),
            text.replace("[traffic]\n", "[traffic]\nbogus = 1\n"),
        ] {
            assert!(matches!(
                ExperimentConfig::from_toml_str(&bad),
                Err(HarnessError::Parse(_))
            ));
        }
    }

    #[test]
    fn access_point_is_last_node_and_receives_uplink() {
        let setup = presets::voip(Protocol::Zc, 5).network_setup(1).unwrap();
        assert_eq!(setup.nodes.len(), 6);
        assert_eq!(setup.nodes[5].role, Role::AccessPoint);
        assert_eq!(setup.nodes[5].data_slots, 5);
        assert!(setup.nodes[..5]
            .iter()
            .all(|n| n.flows[0].destination == Some(5)));
    }
}
