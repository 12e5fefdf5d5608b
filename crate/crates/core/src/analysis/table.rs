use std::io::Write;

use serde::Serialize;

use super::{
    build_chain, exact_expected_time, expected_cycles, upper_bound_time, AnalysisError,
    TimingParameters, DEFAULT_EPSILON,
};

pub const ANALYSIS_CSV_HEADER: [&str; 5] = [
    "N",
    "M",
    "expected_cycles",
    "upper_bound_s",
    "exact_expected_s",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
    #[serde(rename = "N")]
    pub n_slots: usize,
    #[serde(rename = "M")]
    pub n_stations: usize,
    pub expected_cycles: f64,
    pub upper_bound_s: f64,
    pub exact_expected_s: f64,
}

/// One row per `(N, M)` pair, in the order given. Pairs are evaluated in
/// parallel; output order is preserved.
pub fn analysis_rows(
    pairs: &[(usize, usize)],
    timing: &TimingParameters,
) -> Result<Vec<AnalysisRow>, AnalysisError> {
    use rayon::prelude::*;
    pairs
        .par_iter()
        .map(|&(n, m)| {
            let chain = build_chain(n, m)?;
            Ok(AnalysisRow {
                n_slots: n,
                n_stations: m,
                expected_cycles: expected_cycles(&chain)?,
                upper_bound_s: upper_bound_time(&chain, timing)?,
                exact_expected_s: exact_expected_time(&chain, timing, DEFAULT_EPSILON)?,
            })
        })
        .collect()
}

pub fn write_analysis_csv<W: Write>(rows: &[AnalysisRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record(ANALYSIS_CSV_HEADER)?;
    }
    writer.flush()?;
    Ok(())
}
