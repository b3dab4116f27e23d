use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::engine::{RunTrace, TraceRow};
use super::stats::stats;
use crate::{Error, Result};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 26] = [
    "t", "xA_x", "xA_y", "xA_z", "xB_x", "xB_y", "xB_z", "xC_x", "xC_y", "xC_z", "xCd_x", "xCd_y", "xCd_z", "psi",
    "psi_d", "span", "span_d", "fA", "fB", "rollA", "pitchA", "yawA", "rollB", "pitchB", "yawB", "tautFlag",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    /// Format implied by the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => TraceFormat::Json,
            _ => TraceFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TraceDocument {
    schema_version: u32,
    #[serde(flatten)]
    trace: RunTrace,
}

impl TraceRow {
    fn values(&self) -> [f64; 25] {
        let mut v = [0.0; 25];
        v[0] = self.t;
        v[1..4].copy_from_slice(&self.x_a);
        v[4..7].copy_from_slice(&self.x_b);
        v[7..10].copy_from_slice(&self.x_c);
        v[10..13].copy_from_slice(&self.x_c_d);
        v[13] = self.psi;
        v[14] = self.psi_d;
        v[15] = self.span;
        v[16] = self.span_d;
        v[17] = self.f_a;
        v[18] = self.f_b;
        v[19..22].copy_from_slice(&self.att_a);
        v[22..25].copy_from_slice(&self.att_b);
        v
    }

    fn from_values(v: &[f64; 25], taut: bool) -> Self {
        let triple = |i: usize| [v[i], v[i + 1], v[i + 2]];
        TraceRow {
            t: v[0],
            x_a: triple(1),
            x_b: triple(4),
            x_c: triple(7),
            x_c_d: triple(10),
            psi: v[13],
            psi_d: v[14],
            span: v[15],
            span_d: v[16],
            f_a: v[17],
            f_b: v[18],
            att_a: triple(19),
            att_b: triple(22),
            taut,
        }
    }

    /// Value of a CSV column by name.
    pub fn column(&self, name: &str) -> Option<f64> {
        let idx = CSV_COLUMNS.iter().position(|c| *c == name)?;
        Some(if idx == 25 { f64::from(u8::from(self.taut)) } else { self.values()[idx] })
    }
}

fn write_csv<W: Write>(trace: &RunTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in &trace.rows {
        let mut record: Vec<String> = row.values().iter().map(|x| format!("{x:.16e}")).collect();
        record.push(if row.taut { "1".into() } else { "0".into() });
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv(path: &Path) -> Result<RunTrace> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header in {}", path.display())));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let mut v = [0.0; 25];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = record[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad value '{}' in column {}", &record[i], CSV_COLUMNS[i])))?;
        }
        let taut = match &record[25] {
            "0" => false,
            "1" => true,
            other => return Err(Error::Config(format!("bad tautFlag '{other}'"))),
        };
        rows.push(TraceRow::from_values(&v, taut));
    }
    let scenario = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace").to_string();
    let stats_from = 5.0;
    let mut trace = RunTrace { scenario, stats_from, rows, summary: None };
    trace.summary = stats(&trace, stats_from).ok();
    Ok(trace)
}

/// Writes the trace in the given format.
pub fn write_trace(trace: &RunTrace, path: &Path, format: TraceFormat) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        TraceFormat::Csv => write_csv(trace, out),
        TraceFormat::Json => {
            let doc = TraceDocument { schema_version: TRACE_SCHEMA_VERSION, trace: trace.clone() };
            let mut out = out;
            serde_json::to_writer(&mut out, &doc)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Reads a trace written by [`write_trace`], choosing the format from the
/// extension. CSV traces carry no metadata, so the scenario name is the file
/// stem and the statistics window starts at 5 s.
pub fn read_trace(path: &Path) -> Result<RunTrace> {
    match TraceFormat::from_path(path) {
        TraceFormat::Csv => read_csv(path),
        TraceFormat::Json => {
            let doc: TraceDocument = serde_json::from_reader(BufReader::new(File::open(path)?))?;
            if doc.schema_version != TRACE_SCHEMA_VERSION {
                return Err(Error::Config(format!("unsupported trace schema version {}", doc.schema_version)));
            }
            Ok(doc.trace)
        }
    }
}
