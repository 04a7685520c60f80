//! Recording CSV ingestion and synthetic-data writers.
//!
//! Input files have a header row and one row per acquisition sample with
//! columns `time_s, scg_z, ecg, flow_lps` (names remappable via config).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::PipelineConfig;
use crate::error::{CardioError, Result};
use crate::signal::Channel;
use crate::synth::{GroundTruth, Recording};

/// Reads a recording, validating that timestamps are uniform at the
/// configured acquisition rate (deviation < 0.1 sample period).
pub fn ingest_csv(path: &Path, cfg: &PipelineConfig) -> Result<Recording> {
    let file = File::open(path).map_err(|e| CardioError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CardioError::Parse {
            location: format!("{} header", path.display()),
            message: e.to_string(),
        })?
        .clone();

    let column = |logical: &str, name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CardioError::MissingChannel(format!("{logical} (column '{name}')")))
    };
    let cols = [
        ("time", column("time", &cfg.time_column)?),
        ("scg", column("scg", &cfg.scg_column)?),
        ("ecg", column("ecg", &cfg.ecg_column)?),
        ("flow", column("flow", &cfg.flow_column)?),
    ];
    let names = [&cfg.time_column, &cfg.scg_column, &cfg.ecg_column, &cfg.flow_column];

    let fs = cfg.acquisition_fs;
    let period = 1.0 / fs;
    let mut data: [Vec<f64>; 4] = Default::default();
    let mut t0 = None;
    for (i, record) in reader.records().enumerate() {
        // Line 1 is the header.
        let row = i + 2;
        let record = record.map_err(|e| CardioError::Parse {
            location: format!("{} line {row}", path.display()),
            message: e.to_string(),
        })?;
        for (k, &(_, idx)) in cols.iter().enumerate() {
            let field = record.get(idx).unwrap_or("");
            let value: f64 = field.parse().map_err(|_| CardioError::Parse {
                location: format!("{} line {row}, column {}", path.display(), names[k]),
                message: format!("not a number: '{field}'"),
            })?;
            if !value.is_finite() {
                return Err(CardioError::NonFiniteSample {
                    row,
                    column: names[k].to_string(),
                });
            }
            data[k].push(value);
        }
        let t = data[0][i];
        let start = *t0.get_or_insert(t);
        let expected = start + i as f64 * period;
        if (t - expected).abs() >= 0.1 * period {
            return Err(CardioError::NonUniformTimestamps {
                row,
                expected,
                got: t,
            });
        }
    }
    if data[0].is_empty() {
        return Err(CardioError::Parse {
            location: path.display().to_string(),
            message: "no data rows".into(),
        });
    }

    let [_, scg, ecg, flow] = data;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "recording".into());
    Ok(Recording {
        id,
        scg: Channel::new(scg, fs, cfg.scg_column.clone())?,
        ecg: Channel::new(ecg, fs, cfg.ecg_column.clone())?,
        flow: Channel::new(flow, fs, cfg.flow_column.clone())?,
    })
}

/// Writes a recording with the default column names. Values use the
/// shortest representation that parses back to the identical `f64`.
pub fn write_recording_csv(path: &Path, rec: &Recording) -> Result<()> {
    let io_err = |e| CardioError::io(path, e);
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "time_s,scg_z,ecg,flow_lps").map_err(io_err)?;
    let fs = rec.fs();
    for i in 0..rec.scg.len() {
        writeln!(
            w,
            "{},{},{},{}",
            i as f64 / fs,
            rec.scg.samples[i],
            rec.ecg.samples[i],
            rec.flow.samples[i]
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_ground_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let json = serde_json::to_string_pretty(truth)
        .map_err(|e| CardioError::Invariant(format!("ground truth serialization: {e}")))?;
    std::fs::write(path, json + "\n").map_err(|e| CardioError::io(path, e))
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| CardioError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CardioError::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })
}
