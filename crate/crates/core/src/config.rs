//! Pipeline configuration: a flat `key = value` file plus overrides.
//!
//! ```text
//! # cardioseis pipeline config
//! input = recording.csv
//! acquisition_fs = 10000
//! analysis_fs = 320
//! template_start_s = 1.2
//! template_length_s = 0.3
//! ```
//!
//! `#` starts a comment. `input` may repeat or hold a comma-separated list;
//! relative paths resolve against the config file's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::detection::DetectionParams;
use crate::error::{CardioError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub time_column: String,
    pub scg_column: String,
    pub ecg_column: String,
    pub flow_column: String,
    /// Rate the CSV timestamps are validated against (Hz).
    pub acquisition_fs: f64,
    /// Rate all analysis runs at (Hz).
    pub analysis_fs: f64,
    pub lowpass_hz: f64,
    /// Template span in the conditioned SCG channel, seconds.
    pub template_start_s: f64,
    pub template_length_s: f64,
    pub threshold_frac: f64,
    pub min_separation_s: f64,
    pub detrend: bool,
    /// Alignment search radius in samples; `None` means a quarter template.
    pub max_shift: Option<usize>,
    pub outlier_screen: bool,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            time_column: "time_s".into(),
            scg_column: "scg_z".into(),
            ecg_column: "ecg".into(),
            flow_column: "flow_lps".into(),
            acquisition_fs: 10_000.0,
            analysis_fs: 320.0,
            lowpass_hz: 100.0,
            template_start_s: 1.0,
            template_length_s: 0.3,
            threshold_frac: 0.5,
            min_separation_s: 0.4,
            detrend: true,
            max_shift: None,
            outlier_screen: true,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CardioError::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CardioError::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CardioError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse_str(&text, base)
    }

    pub fn parse_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CardioError::Parse {
                location: format!("config line {}", lineno + 1),
                message: format!("expected key = value, got '{line}'"),
            })?;
            cfg.set(key.trim(), value.trim(), base_dir)?;
        }
        Ok(cfg)
    }

    /// Sets one key. Relative paths resolve against `base_dir`.
    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<()> {
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_relative() {
                base_dir.join(p)
            } else {
                p
            }
        };
        match key {
            "input" => self.inputs.extend(
                value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(resolve),
            ),
            "time_column" => self.time_column = value.into(),
            "scg_column" => self.scg_column = value.into(),
            "ecg_column" => self.ecg_column = value.into(),
            "flow_column" => self.flow_column = value.into(),
            "acquisition_fs" => self.acquisition_fs = parse_num(key, value)?,
            "analysis_fs" => self.analysis_fs = parse_num(key, value)?,
            "lowpass_hz" => self.lowpass_hz = parse_num(key, value)?,
            "template_start_s" => self.template_start_s = parse_num(key, value)?,
            "template_length_s" => self.template_length_s = parse_num(key, value)?,
            "threshold_frac" => self.threshold_frac = parse_num(key, value)?,
            "min_separation_s" => self.min_separation_s = parse_num(key, value)?,
            "detrend" => self.detrend = parse_bool(key, value)?,
            "max_shift" => {
                self.max_shift = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "outlier_screen" => self.outlier_screen = parse_bool(key, value)?,
            "out_dir" => self.out_dir = resolve(value),
            "seed" => self.seed = parse_num(key, value)?,
            _ => return Err(CardioError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CardioError::Config(m));
        if !(self.acquisition_fs > 0.0 && self.analysis_fs > 0.0) {
            return bad("sampling rates must be positive".into());
        }
        if self.analysis_fs > self.acquisition_fs {
            return bad(format!(
                "analysis_fs {} exceeds acquisition_fs {}",
                self.analysis_fs, self.acquisition_fs
            ));
        }
        if !(self.lowpass_hz > 0.0 && self.lowpass_hz < self.analysis_fs / 2.0) {
            return bad(format!(
                "lowpass_hz {} must lie below the analysis Nyquist {}",
                self.lowpass_hz,
                self.analysis_fs / 2.0
            ));
        }
        if !(self.threshold_frac > 0.0 && self.threshold_frac < 1.0) {
            return bad(format!("threshold_frac {} outside (0, 1)", self.threshold_frac));
        }
        if !(self.template_start_s >= 0.0 && self.template_length_s > 0.0) {
            return bad("template span must be non-negative with positive length".into());
        }
        if !(self.min_separation_s >= 0.0) {
            return bad("min_separation_s must be non-negative".into());
        }
        Ok(())
    }

    pub fn detection_params(&self) -> DetectionParams {
        DetectionParams {
            threshold_frac: self.threshold_frac,
            min_separation_s: self.min_separation_s,
        }
    }

    /// Serializes back to the `key = value` format. Paths are written as-is.
    pub fn to_config_string(&self) -> String {
        let mut s = String::from("# cardioseis pipeline config\n");
        for input in &self.inputs {
            let _ = writeln!(s, "input = {}", input.display());
        }
        let _ = writeln!(s, "time_column = {}", self.time_column);
        let _ = writeln!(s, "scg_column = {}", self.scg_column);
        let _ = writeln!(s, "ecg_column = {}", self.ecg_column);
        let _ = writeln!(s, "flow_column = {}", self.flow_column);
        let _ = writeln!(s, "acquisition_fs = {}", self.acquisition_fs);
        let _ = writeln!(s, "analysis_fs = {}", self.analysis_fs);
        let _ = writeln!(s, "lowpass_hz = {}", self.lowpass_hz);
        let _ = writeln!(s, "template_start_s = {}", self.template_start_s);
        let _ = writeln!(s, "template_length_s = {}", self.template_length_s);
        let _ = writeln!(s, "threshold_frac = {}", self.threshold_frac);
        let _ = writeln!(s, "min_separation_s = {}", self.min_separation_s);
        let _ = writeln!(s, "detrend = {}", self.detrend);
        match self.max_shift {
            Some(m) => {
                let _ = writeln!(s, "max_shift = {m}");
            }
            None => s.push_str("max_shift = auto\n"),
        }
        let _ = writeln!(s, "outlier_screen = {}", self.outlier_screen);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
