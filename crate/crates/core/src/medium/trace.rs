use std::io::Write;

use serde::Serialize;

use super::{SlotOutcomeRecord, SlotSink};

pub const TRACE_CSV_HEADER: [&str; 4] = ["wall_time_us", "duration_us", "kind", "transmitters"];

#[derive(Serialize)]
struct TraceRow<'a> {
    wall_time_us: f64,
    duration_us: f64,
    kind: &'a str,
    /// Node ids separated by `;`.
    transmitters: String,
}

/// Per-slot CSV dump. Write errors are kept and reported by
/// [`TraceWriter::finish`].
pub struct TraceWriter<W: Write> {
    writer: csv::Writer<W>,
    error: Option<csv::Error>,
    rows: u64,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            writer: csv::Writer::from_writer(out),
            error: None,
            rows: 0,
        }
    }

    pub fn finish(mut self) -> csv::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        if self.rows == 0 {
            self.writer.write_record(TRACE_CSV_HEADER)?;
        }
        self.writer.flush()?;
        self.writer
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))
    }
}

impl<W: Write> SlotSink for TraceWriter<W> {
    fn on_slot(&mut self, record: &SlotOutcomeRecord) {
        if self.error.is_some() {
            return;
        }
        let transmitters = record
            .transmitters
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let row = TraceRow {
            wall_time_us: record.wall_time_us,
            duration_us: record.duration_us,
            kind: record.kind().as_str(),
            transmitters,
        };
        match self.writer.serialize(row) {
            Ok(()) => self.rows += 1,
            Err(e) => self.error = Some(e),
        }
    }
}
