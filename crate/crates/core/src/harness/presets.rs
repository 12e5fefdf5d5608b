//! Ready-made experiments. Each preset also ships as a TOML file under
//! `scenarios/`.

use super::{AccessPointConfig, ArrivalWindow, ExperimentConfig, Topology};
use crate::analysis::PhyParameters;
use crate::medium::{FaultModel, Protocol};
use crate::protocol::ReselectionMode;
use crate::traffic::TrafficSource;

pub const FRAME_BYTES: u32 = 2346;
/// Frame length used by every goodput and VoIP preset.
pub const GOODPUT_SLOTS: usize = 64;
/// Goodput and delay are measured after this much simulated time.
pub const STEADY_STATE_WARMUP_S: f64 = 5.0;
/// 2346-byte packets at 600 kb/s.
pub const MULTI_DOMAIN_PERIOD_US: f64 = 31_280.0;

pub fn seeds(count: u64) -> Vec<u64> {
    (1..=count).collect()
}

/// `count` log-spaced error probabilities from 1e-6 to 1.
pub fn error_rates(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| 10f64.powf(-6.0 + 6.0 * i as f64 / (count - 1) as f64))
        .collect()
}

fn base(name: String, protocol: Protocol, n_slots: usize, n_stations: usize) -> ExperimentConfig {
    ExperimentConfig {
        name,
        protocol,
        n_slots,
        n_stations,
        traffic: TrafficSource::backlogged(FRAME_BYTES),
        stagger_offsets: false,
        duration_s: 20.0,
        warmup_s: 0.0,
        seeds: seeds(20),
        reselection_mode: ReselectionMode::Immediate,
        recycle_threshold: 10,
        convergence_horizon_rounds: crate::metrics::DEFAULT_HORIZON_ROUNDS,
        max_slots: None,
        phy: PhyParameters::default(),
        fault: FaultModel::none(),
        topology: Topology::SingleDomain,
        access_point: None,
        arrival_schedule: Vec::new(),
    }
}

/// ZC, `N = M = n`, backlogged, simultaneous power-up, 100 seeds.
pub fn convergence(n: usize) -> ExperimentConfig {
    ExperimentConfig {
        seeds: seeds(100),
        ..base(format!("convergence_n{n}"), Protocol::Zc, n, n)
    }
}

/// Backlogged 2346-byte traffic with `N = 64`.
pub fn backlogged_goodput(protocol: Protocol, n_stations: usize) -> ExperimentConfig {
    ExperimentConfig {
        warmup_s: STEADY_STATE_WARMUP_S,
        ..base(
            format!("goodput_{protocol}_m{n_stations}"),
            protocol,
            GOODPUT_SLOTS,
            n_stations,
        )
    }
}

/// One 2346-byte packet every 300 ms per station, `N = 64`.
pub fn sparse_goodput(protocol: Protocol, n_stations: usize) -> ExperimentConfig {
    ExperimentConfig {
        traffic: TrafficSource::sparse(),
        stagger_offsets: true,
        ..backlogged_goodput(protocol, n_stations)
    }
    .renamed(format!("sparse_{protocol}_m{n_stations}"))
}

/// `N = M = 64` backlogged with `p1 = p2 = p`.
pub fn error_sweep(protocol: Protocol, p: f64) -> ExperimentConfig {
    ExperimentConfig {
        fault: FaultModel::symmetric(p),
        ..backlogged_goodput(protocol, GOODPUT_SLOTS)
    }
    .renamed(format!("error_{protocol}_p{p:e}"))
}

/// 31 stations and an access point; a 32nd station is present only during
/// 5-6 s, 10-11 s and 15-16 s.
pub fn arrival_perturbation() -> ExperimentConfig {
    let late = 31;
    ExperimentConfig {
        seeds: seeds(10),
        access_point: Some(AccessPointConfig::default()),
        arrival_schedule: [5.0, 10.0, 15.0]
            .into_iter()
            .map(|t| ArrivalWindow {
                station: late,
                join_s: t,
                leave_s: t + 1.0,
            })
            .collect(),
        ..base(
            "arrival_perturbation".into(),
            Protocol::Zc,
            GOODPUT_SLOTS,
            32,
        )
    }
}

/// `pairs` G.711 calls through an access point: one uplink per station and
/// one downlink per station from the access point.
pub fn voip(protocol: Protocol, pairs: usize) -> ExperimentConfig {
    ExperimentConfig {
        traffic: TrafficSource::voip(),
        stagger_offsets: true,
        warmup_s: STEADY_STATE_WARMUP_S,
        seeds: seeds(10),
        access_point: Some(AccessPointConfig {
            downlink: Some(TrafficSource::voip()),
            ..AccessPointConfig::default()
        }),
        ..base(
            format!("voip_{protocol}_p{pairs}"),
            protocol,
            GOODPUT_SLOTS,
            pairs,
        )
    }
}

/// 64 nodes in 32 sender/receiver pairs, each sender at about 600 kb/s;
/// other links exist with probability `gamma`.
pub fn multi_domain(protocol: Protocol, gamma: f64) -> ExperimentConfig {
    ExperimentConfig {
        traffic: TrafficSource::periodic(FRAME_BYTES, MULTI_DOMAIN_PERIOD_US),
        stagger_offsets: true,
        warmup_s: STEADY_STATE_WARMUP_S,
        topology: Topology::Random {
            gamma,
            area_m: 200.0,
        },
        ..base(format!("multidomain_{protocol}_g{gamma}"), protocol, 64, 64)
    }
}

/// One representative instance of every preset, as shipped in `scenarios/`.
pub fn all() -> Vec<ExperimentConfig> {
    let mut out: Vec<ExperimentConfig> = [16, 32, 64, 128].into_iter().map(convergence).collect();
    for p in [Protocol::Zc, Protocol::Csma, Protocol::Tdma] {
        out.push(backlogged_goodput(p, 64));
        out.push(sparse_goodput(p, 64));
    }
    for p in [Protocol::Zc, Protocol::Csma] {
        out.push(error_sweep(p, 1e-3));
        out.push(voip(p, 21));
        out.push(multi_domain(p, 0.2));
        out.push(multi_domain(p, 0.5));
    }
    out.push(arrival_perturbation());
    out
}

impl ExperimentConfig {
    fn renamed(self, name: String) -> Self {
        Self { name, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for cfg in all() {
            cfg.validate()
                .unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
        }
    }

    #[test]
    fn error_rates_span_decades() {
        let r = error_rates(7);
        assert!((r[0] - 1e-6).abs() < 1e-18);
        assert!((r[6] - 1.0).abs() < 1e-12);
        assert!((r[3] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn multi_domain_rate() {
        let cfg = multi_domain(Protocol::Zc, 0.2);
        let bps = cfg.traffic.offered_load() * 1e6;
        assert!((bps - 600_000.0).abs() < 1_000.0, "{bps}");
    }
}
