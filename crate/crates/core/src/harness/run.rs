use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConfigError, ExperimentConfig, HarnessError, Topology};
use crate::analysis::{analysis_rows, AnalysisRow, TimingParameters};
use crate::medium::{FaultModel, NullSink, RunLog, Simulation, SlotOutcomeRecord, SlotSink};
use crate::metrics::{
    access_delays, build_report, percentile, write_summary_csv, ConvergenceDetector, MetricsReport,
    RunIdentity,
};

/// Result of one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub report: MetricsReport,
    pub log: RunLog,
}

struct Tee<'a> {
    detector: &'a mut ConvergenceDetector,
    inner: &'a mut dyn SlotSink,
}

impl SlotSink for Tee<'_> {
    fn on_slot(&mut self, record: &SlotOutcomeRecord) {
        self.detector.on_slot(record);
        self.inner.on_slot(record);
    }
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun, HarnessError> {
    run_seed_with_sink(cfg, seed, &mut NullSink)
}

/// Like [`run_seed`], also passing every slot to `sink`.
pub fn run_seed_with_sink(
    cfg: &ExperimentConfig,
    seed: u64,
    sink: &mut dyn SlotSink,
) -> Result<SeedRun, HarnessError> {
    let setup = cfg.network_setup(seed)?;
    let mut detector = ConvergenceDetector::new(cfg.n_slots, cfg.convergence_horizon_rounds);
    let log = Simulation::new(&setup, seed)?.run(&mut Tee {
        detector: &mut detector,
        inner: sink,
    })?;
    let id = RunIdentity {
        protocol: cfg.protocol.to_string(),
        n_slots: cfg.n_slots,
        n_stations: cfg.n_stations,
        seed,
    };
    let report = build_report(id, &log, &detector, cfg.warmup_s * 1e6)?;
    Ok(SeedRun { seed, report, log })
}

/// All seeds of `cfg`, in parallel on the current rayon pool. Results are in
/// seed-list order.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<SeedRun>, HarnessError> {
    cfg.validate()?;
    cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect()
}

/// Writes `{name}_seed{seed}.json` per run and `{name}_summary.csv`.
/// Returns the paths written.
pub fn write_reports(
    cfg: &ExperimentConfig,
    runs: &[SeedRun],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(runs.len() + 1);
    for r in runs {
        let path = out_dir.join(format!("{}_seed{}.json", cfg.name, r.seed));
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &r.report)?;
        writeln!(w)?;
        w.flush()?;
        written.push(path);
    }
    let path = out_dir.join(format!("{}_summary.csv", cfg.name));
    let reports: Vec<MetricsReport> = runs.iter().map(|r| r.report.clone()).collect();
    write_summary_csv(&reports, BufWriter::new(File::create(&path)?))?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// `M`; for VoIP presets this is the number of pairs.
    NStations,
    NSlots,
    /// `p1 = p2 = p`.
    ErrorRate,
    /// Requires a random topology.
    Gamma,
    PacketBytes,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::NStations => "n-stations",
            SweepParameter::NSlots => "n-slots",
            SweepParameter::ErrorRate => "error-rate",
            SweepParameter::Gamma => "gamma",
            SweepParameter::PacketBytes => "packet-bytes",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(
        self,
        base: &ExperimentConfig,
        value: f64,
    ) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = base.clone();
        let count = |field: &str| {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(ConfigError {
                    field: field.into(),
                    message: format!("sweep value {value} is not a positive integer"),
                })
            }
        };
        match self {
            SweepParameter::NStations => cfg.n_stations = count("n_stations")?,
            SweepParameter::NSlots => cfg.n_slots = count("n_slots")?,
            SweepParameter::ErrorRate => cfg.fault = FaultModel::symmetric(value),
            SweepParameter::Gamma => match &mut cfg.topology {
                Topology::Random { gamma, .. } => *gamma = value,
                Topology::SingleDomain => {
                    return Err(ConfigError {
                        field: "topology".into(),
                        message: "gamma sweep needs a random topology".into(),
                    })
                }
            },
            SweepParameter::PacketBytes => {
                let bytes = count("traffic.packet_bytes")? as u32;
                cfg.traffic.packet_bytes = bytes;
                if let Some(d) = cfg
                    .access_point
                    .as_mut()
                    .and_then(|ap| ap.downlink.as_mut())
                {
                    d.packet_bytes = bytes;
                }
            }
        }
        Ok(cfg)
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParameter::NStations,
            SweepParameter::NSlots,
            SweepParameter::ErrorRate,
            SweepParameter::Gamma,
            SweepParameter::PacketBytes,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| format!("unknown sweep parameter `{s}`"))
    }
}

pub const SWEEP_CSV_HEADER: [&str; 11] = [
    "parameter",
    "value",
    "protocol",
    "N",
    "M",
    "seed",
    "goodput_bps",
    "mean_iad_us",
    "p99_delay_us",
    "convergence_us",
    "collisions",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub protocol: String,
    #[serde(rename = "N")]
    pub n_slots: usize,
    #[serde(rename = "M")]
    pub n_stations: usize,
    pub seed: u64,
    pub goodput_bps: f64,
    pub mean_iad_us: Option<f64>,
    pub p99_delay_us: Option<f64>,
    pub convergence_us: Option<f64>,
    pub collisions: u64,
}

/// One row per `(value, seed)`, in that order. TDMA points with more
/// stations than slots are skipped.
pub fn sweep(
    base: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<SweepRow>, HarnessError> {
    let mut jobs = Vec::new();
    for &v in values {
        let cfg = parameter.apply(base, v)?;
        if cfg.tdma_undefined() {
            continue;
        }
        cfg.validate()?;
        for &seed in &cfg.seeds {
            jobs.push((v, cfg.clone(), seed));
        }
    }
    jobs.par_iter()
        .map(|(v, cfg, seed)| {
            let r = run_seed(cfg, *seed)?.report;
            Ok(SweepRow {
                parameter: parameter.as_str().into(),
                value: *v,
                protocol: r.protocol,
                n_slots: r.n_slots,
                n_stations: r.n_stations,
                seed: r.seed,
                goodput_bps: r.goodput_bps,
                mean_iad_us: r.mean_interaccess_delay_us,
                p99_delay_us: r.delay_percentiles_us.get("p99").copied(),
                convergence_us: r.convergence_time_us,
                collisions: r.collisions_total,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(SWEEP_CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Expected cycles, upper bound and exact expected time per `(N, M)`.
pub fn analyze(
    pairs: &[(usize, usize)],
    timing: &TimingParameters,
) -> Result<Vec<AnalysisRow>, HarnessError> {
    Ok(analysis_rows(pairs, timing)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoipPoint {
    pub pairs: usize,
    /// Pooled over all seeds, measured after the warmup.
    pub p99_delay_us: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoipCapacity {
    pub protocol: String,
    /// Largest pair count such that it and every smaller count meet the
    /// delay budget.
    pub capacity: usize,
    pub points: Vec<VoipPoint>,
}

/// Raises the pair count of `base` (a VoIP preset) from 1 until the pooled
/// 99th-percentile access delay exceeds `budget_us` or `max_pairs` is
/// reached.
pub fn voip_capacity(
    base: &ExperimentConfig,
    max_pairs: usize,
    budget_us: f64,
) -> Result<VoipCapacity, HarnessError> {
    let mut points = Vec::new();
    let mut capacity = 0;
    for pairs in 1..=max_pairs {
        let cfg = SweepParameter::NStations.apply(base, pairs as f64)?;
        let runs = run(&cfg)?;
        let mut delays: Vec<f64> = runs
            .iter()
            .flat_map(|r| access_delays(&r.log.deliveries, cfg.warmup_s * 1e6))
            .collect();
        delays.sort_by(f64::total_cmp);
        let p99 = percentile(&delays, 99.0).unwrap_or(f64::INFINITY);
        points.push(VoipPoint {
            pairs,
            p99_delay_us: p99,
            samples: delays.len(),
        });
        if p99 > budget_us {
            break;
        }
        capacity = pairs;
    }
    Ok(VoipCapacity {
        protocol: base.protocol.to_string(),
        capacity,
        points,
    })
}
