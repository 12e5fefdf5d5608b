//! Reported quantities, computed from slot records and delivery logs.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::medium::{Delivery, RunLog, SlotCounts, SlotKind, SlotOutcomeRecord, SlotSink};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("measurement window [{0}, {1}] us is empty")]
    EmptyWindow(f64, f64),
    #[error("station {station} has {deliveries} deliveries; at least 2 are needed")]
    InsufficientData { station: usize, deliveries: usize },
}

/// Percentiles reported for access delay.
pub const REPORTED_PERCENTILES: [f64; 3] = [50.0, 90.0, 99.0];

/// Nearest-rank percentile of ascending `sorted`: the value at 1-based rank
/// `ceil(q / 100 * n)`. `q` in `(0, 100]`.
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(q > 0.0 && q <= 100.0) {
        return None;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

fn percentile_key(q: f64) -> String {
    format!("p{q}")
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Payload bits of deliveries completing inside `[start, end]` us, per
/// second.
pub fn goodput(deliveries: &[Delivery], window: (f64, f64)) -> Result<f64, MetricsError> {
    let (start, end) = window;
    if !(end > start) {
        return Err(MetricsError::EmptyWindow(start, end));
    }
    let bits: f64 = deliveries
        .iter()
        .filter(|d| d.end_us >= start && d.end_us <= end)
        .map(|d| f64::from(d.payload_bytes) * 8.0)
        .sum();
    Ok(bits / ((end - start) * 1e-6))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySummary {
    pub count: usize,
    pub mean_us: f64,
    pub min_us: f64,
    pub max_us: f64,
    pub percentiles_us: BTreeMap<String, f64>,
}

impl DelaySummary {
    pub fn from_samples(samples: Vec<f64>) -> Option<Self> {
        let s = sorted(samples);
        Some(Self {
            count: s.len(),
            mean_us: mean(&s)?,
            min_us: s[0],
            max_us: s[s.len() - 1],
            percentiles_us: REPORTED_PERCENTILES
                .iter()
                .map(|&q| (percentile_key(q), percentile(&s, q).expect("non-empty")))
                .collect(),
        })
    }

    pub fn percentile(&self, q: f64) -> Option<f64> {
        self.percentiles_us.get(&percentile_key(q)).copied()
    }
}

/// Gaps between successive successful transmission starts of `station`.
pub fn interaccess_delay(
    deliveries: &[Delivery],
    station: usize,
) -> Result<DelaySummary, MetricsError> {
    let starts: Vec<f64> = deliveries
        .iter()
        .filter(|d| d.node == station)
        .map(|d| d.start_us)
        .collect();
    if starts.len() < 2 {
        return Err(MetricsError::InsufficientData {
            station,
            deliveries: starts.len(),
        });
    }
    let gaps = starts.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(DelaySummary::from_samples(gaps).expect("at least one gap"))
}

/// Enqueue-to-completion delays of packets enqueued at or after `from_us`.
pub fn access_delays(deliveries: &[Delivery], from_us: f64) -> Vec<f64> {
    deliveries
        .iter()
        .filter(|d| d.enqueue_us >= from_us)
        .map(Delivery::access_delay_us)
        .collect()
}

/// Online convergence detection over a slot stream.
///
/// A candidate starts at the end of the first slot after which the network
/// is in a zero-collision state; it is confirmed once `horizon_rounds * N`
/// further slots pass without a collision and without leaving that state.
/// Runs whose records carry no zero-collision flag never converge.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDetector {
    confirm_slots: u64,
    candidate: Option<(f64, u64)>,
    converged_at: Option<f64>,
    undefined: bool,
    collisions_total: u64,
    collisions_after: u64,
}

pub const DEFAULT_HORIZON_ROUNDS: u64 = 3;

impl ConvergenceDetector {
    pub fn new(n_slots: usize, horizon_rounds: u64) -> Self {
        Self {
            confirm_slots: n_slots as u64 * horizon_rounds,
            candidate: None,
            converged_at: None,
            undefined: false,
            collisions_total: 0,
            collisions_after: 0,
        }
    }

    pub fn convergence_time_us(&self) -> Option<f64> {
        self.converged_at
    }

    pub fn collisions_total(&self) -> u64 {
        self.collisions_total
    }

    /// Collision slots after the convergence time, once converged.
    pub fn collisions_after_convergence(&self) -> Option<u64> {
        self.converged_at.map(|_| self.collisions_after)
    }
}

impl SlotSink for ConvergenceDetector {
    fn on_slot(&mut self, record: &SlotOutcomeRecord) {
        let collided = record.kind() == SlotKind::Collision;
        self.collisions_total += u64::from(collided);
        if self.converged_at.is_some() {
            self.collisions_after += u64::from(collided);
            return;
        }
        let Some(flag) = record.zero_collision_state else {
            self.undefined = true;
            return;
        };
        if self.undefined {
            return;
        }
        if collided || !flag {
            self.candidate = None;
            return;
        }
        let (since, clean) = self.candidate.get_or_insert((record.end_us(), 0));
        if record.end_us() > *since {
            *clean += 1;
        }
        if *clean >= self.confirm_slots {
            self.converged_at = Some(*since);
        }
    }
}

pub fn detect_convergence<'a>(
    trace: impl IntoIterator<Item = &'a SlotOutcomeRecord>,
    n_slots: usize,
    horizon_rounds: u64,
) -> Option<f64> {
    let mut det = ConvergenceDetector::new(n_slots, horizon_rounds);
    for r in trace {
        det.on_slot(r);
    }
    det.convergence_time_us()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationReport {
    pub station: usize,
    pub deliveries: u64,
    pub payload_bits: u64,
    pub failures: u64,
    pub mean_interaccess_delay_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub protocol: String,
    pub n_slots: usize,
    pub n_stations: usize,
    pub seed: u64,
    pub duration_s: f64,
    pub window_start_s: f64,
    pub goodput_bps: f64,
    pub mean_interaccess_delay_us: Option<f64>,
    pub delay_percentiles_us: BTreeMap<String, f64>,
    pub convergence_time_us: Option<f64>,
    pub collisions_total: u64,
    pub collisions_after_convergence: Option<u64>,
    pub slots: SlotCounts,
    pub per_station: Vec<StationReport>,
}

/// Identity of a run as it appears in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunIdentity {
    pub protocol: String,
    pub n_slots: usize,
    pub n_stations: usize,
    pub seed: u64,
}

/// Summarises a finished run. Goodput, inter-access and access delays use
/// only the part of the run from `warmup_us` on; collision counts and
/// convergence cover the whole run.
pub fn build_report(
    id: RunIdentity,
    log: &RunLog,
    detector: &ConvergenceDetector,
    warmup_us: f64,
) -> Result<MetricsReport, MetricsError> {
    let window = (warmup_us, log.elapsed_us);
    let in_window: Vec<Delivery> = log
        .deliveries
        .iter()
        .filter(|d| d.end_us >= warmup_us)
        .copied()
        .collect();
    let per_station: Vec<StationReport> = log
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mine = in_window.iter().filter(|d| d.node == i);
            StationReport {
                station: i,
                deliveries: n.deliveries,
                payload_bits: mine.map(|d| u64::from(d.payload_bytes) * 8).sum(),
                failures: n.failures,
                mean_interaccess_delay_us: interaccess_delay(&in_window, i).ok().map(|s| s.mean_us),
            }
        })
        .collect();
    let iads: Vec<f64> = per_station
        .iter()
        .filter_map(|s| s.mean_interaccess_delay_us)
        .collect();
    let delays = DelaySummary::from_samples(access_delays(&log.deliveries, warmup_us));
    Ok(MetricsReport {
        protocol: id.protocol,
        n_slots: id.n_slots,
        n_stations: id.n_stations,
        seed: id.seed,
        duration_s: log.elapsed_us * 1e-6,
        window_start_s: warmup_us * 1e-6,
        goodput_bps: goodput(&log.deliveries, window)?,
        mean_interaccess_delay_us: mean(&iads),
        delay_percentiles_us: delays.map(|d| d.percentiles_us).unwrap_or_default(),
        convergence_time_us: detector.convergence_time_us(),
        collisions_total: detector.collisions_total(),
        collisions_after_convergence: detector.collisions_after_convergence(),
        slots: log.slot_counts,
        per_station,
    })
}

pub const SUMMARY_CSV_HEADER: [&str; 9] = [
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
pub struct SummaryRow {
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

impl From<&MetricsReport> for SummaryRow {
    fn from(r: &MetricsReport) -> Self {
        Self {
            protocol: r.protocol.clone(),
            n_slots: r.n_slots,
            n_stations: r.n_stations,
            seed: r.seed,
            goodput_bps: r.goodput_bps,
            mean_iad_us: r.mean_interaccess_delay_us,
            p99_delay_us: r.delay_percentiles_us.get(&percentile_key(99.0)).copied(),
            convergence_us: r.convergence_time_us,
            collisions: r.collisions_total,
        }
    }
}

pub fn write_summary_csv<W: Write>(reports: &[MetricsReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if reports.is_empty() {
        w.write_record(SUMMARY_CSV_HEADER)?;
    }
    for r in reports {
        w.serialize(SummaryRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}
