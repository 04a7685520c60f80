//! End-to-end orchestration: condition, detect, label, group, report.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::detection::{detect_events, screen_outliers, window_slice, ScgEvent, Template};
use crate::error::{CardioError, ErrorKind};
use crate::grouping::{compare_criteria, CriterionComparison, GroupId};
use crate::io::ingest_csv;
use crate::plot::{bar_chart, line_plot};
use crate::report::{Report, ReportRow};
use crate::respiration::{integrate_flow, label_events, RespirationTrace};
use crate::signal::{lowpass, resample, Channel};
use crate::synth::Recording;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Resample,
    Lowpass,
    Template,
    Detect,
    Screen,
    Respiration,
    Label,
    Compare,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Resample => "resample",
            Stage::Lowpass => "lowpass",
            Stage::Template => "template",
            Stage::Detect => "detect",
            Stage::Screen => "screen",
            Stage::Respiration => "respiration",
            Stage::Label => "label",
            Stage::Compare => "compare",
            Stage::Write => "write",
        };
        f.write_str(s)
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub recording: Option<String>,
    pub source: CardioError,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.recording {
            Some(id) => write!(f, "[{}] {id}: {}", self.stage, self.source),
            None => write!(f, "[{}] {}", self.stage, self.source),
        }
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl PipelineError {
    pub fn kind(&self) -> ErrorKind {
        self.source.kind()
    }
}

trait StageExt<T> {
    fn stage(self, stage: Stage, recording: &str) -> Result<T, PipelineError>;
}

impl<T> StageExt<T> for Result<T, CardioError> {
    fn stage(self, stage: Stage, recording: &str) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError {
            stage,
            recording: Some(recording.to_string()),
            source,
        })
    }
}

/// Everything computed for one recording.
#[derive(Debug, Clone)]
pub struct RecordingAnalysis {
    pub id: String,
    /// Conditioned SCG at the analysis rate.
    pub scg: Channel,
    pub ecg: Channel,
    pub respiration: RespirationTrace,
    pub template: Template,
    /// Labeled events after outlier screening.
    pub events: Vec<ScgEvent>,
    pub outliers_dropped: usize,
    pub comparison: CriterionComparison,
}

impl RecordingAnalysis {
    pub fn report_row(&self) -> ReportRow {
        ReportRow::from_comparison(
            self.id.clone(),
            self.events.len(),
            self.outliers_dropped,
            &self.comparison,
        )
    }
}

/// Runs every analysis stage on an in-memory recording.
pub fn analyze_recording(rec: &Recording, cfg: &PipelineConfig) -> Result<RecordingAnalysis, PipelineError> {
    let id = rec.id.as_str();
    cfg.validate().stage(Stage::Config, id)?;

    let scg = resample(&rec.scg, cfg.analysis_fs).stage(Stage::Resample, id)?;
    let ecg = resample(&rec.ecg, cfg.analysis_fs).stage(Stage::Resample, id)?;
    let flow = resample(&rec.flow, cfg.analysis_fs).stage(Stage::Resample, id)?;
    let scg = lowpass(&scg, cfg.lowpass_hz).stage(Stage::Lowpass, id)?;

    let template = Template::from_channel(&scg, cfg.template_start_s, cfg.template_length_s)
        .stage(Stage::Template, id)?;
    let events = detect_events(&scg, &template, &cfg.detection_params()).stage(Stage::Detect, id)?;
    let (events, outliers_dropped) = if cfg.outlier_screen {
        screen_outliers(events).stage(Stage::Screen, id)?
    } else {
        (events, 0)
    };
    log::info!(
        "{id}: {} events detected, {outliers_dropped} screened out",
        events.len() + outliers_dropped
    );

    let respiration = integrate_flow(&flow, cfg.detrend).stage(Stage::Respiration, id)?;
    let events = label_events(events, &respiration, scg.fs).stage(Stage::Label, id)?;
    let max_shift = cfg.max_shift.unwrap_or(template.len() / 4);
    let comparison = compare_criteria(&scg, &events, max_shift).stage(Stage::Compare, id)?;

    Ok(RecordingAnalysis {
        id: id.to_string(),
        scg,
        ecg,
        respiration,
        template,
        events,
        outliers_dropped,
        comparison,
    })
}

pub struct PipelineOutput {
    pub report: Report,
    pub analyses: Vec<RecordingAnalysis>,
}

/// Ingests and analyses every configured input. Recordings run in parallel;
/// results are merged in recording-id order. The first failure (in input
/// order) is returned.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    cfg.validate().map_err(|source| PipelineError {
        stage: Stage::Config,
        recording: None,
        source,
    })?;
    if cfg.inputs.is_empty() {
        return Err(PipelineError {
            stage: Stage::Config,
            recording: None,
            source: CardioError::Config("no input files".into()),
        });
    }
    let results: Vec<Result<RecordingAnalysis, PipelineError>> = cfg
        .inputs
        .par_iter()
        .map(|path| {
            let rec = ingest_csv(path, cfg).stage(Stage::Ingest, &path.display().to_string())?;
            analyze_recording(&rec, cfg)
        })
        .collect();
    let mut analyses = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    analyses.sort_by(|a, b| a.id.cmp(&b.id));
    let report = Report::new(analyses.iter().map(RecordingAnalysis::report_row).collect());
    Ok(PipelineOutput { report, analyses })
}

/// Average of the ECG windows at each group member's aligned position.
fn group_ecg_average(a: &RecordingAnalysis, group: GroupId, len: usize) -> Vec<f64> {
    let members: Vec<&ScgEvent> = a
        .events
        .iter()
        .filter(|e| group.criterion().group_of(e) == Some(group))
        .collect();
    let mut acc = vec![0.0; len];
    let mut count = 0usize;
    for e in members {
        if let Ok(w) = window_slice(&a.ecg.samples, e.ref_index as isize, len) {
            acc.iter_mut().zip(w).for_each(|(s, v)| *s += v);
            count += 1;
        }
    }
    if count > 0 {
        acc.iter_mut().for_each(|s| *s /= count as f64);
    }
    acc
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    std::fs::write(path, contents).map_err(|e| PipelineError {
        stage: Stage::Write,
        recording: None,
        source: CardioError::io(path, e),
    })
}

/// Writes `report.json`, `report.csv`, and per recording the group
/// ensemble averages (CSV, SVG) and an RD bar chart (SVG). Returns the
/// paths written.
pub fn write_artifacts(out_dir: &Path, output: &PipelineOutput) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError {
        stage: Stage::Write,
        recording: None,
        source: CardioError::io(out_dir, e),
    })?;
    let mut written = Vec::new();
    let mut emit = |name: String, contents: &str| -> Result<(), PipelineError> {
        let p = out_dir.join(name);
        write_file(&p, contents)?;
        written.push(p);
        Ok(())
    };

    let json = output.report.to_json().map_err(|source| PipelineError {
        stage: Stage::Write,
        recording: None,
        source,
    })?;
    emit("report.json".into(), &json)?;
    emit("report.csv".into(), &output.report.to_csv())?;

    for a in &output.analyses {
        let len = a.template.len();
        let fs = a.scg.fs;
        let avgs: Vec<(GroupId, &[f64])> = GroupId::ALL
            .iter()
            .map(|&g| (g, a.comparison.group(g).ensemble_avg.as_slice()))
            .collect();
        let ecg_avgs: Vec<Vec<f64>> = GroupId::ALL
            .iter()
            .map(|&g| group_ecg_average(a, g, len))
            .collect();

        let mut csv = String::from("time_s");
        for (g, _) in &avgs {
            let _ = write!(csv, ",scg_{g}");
        }
        for g in GroupId::ALL {
            let _ = write!(csv, ",ecg_{g}");
        }
        csv.push('\n');
        for i in 0..len {
            let _ = write!(csv, "{}", (i as f64 - (len / 2) as f64) / fs);
            for (_, v) in &avgs {
                let _ = write!(csv, ",{}", v.get(i).copied().unwrap_or(f64::NAN));
            }
            for v in &ecg_avgs {
                let _ = write!(csv, ",{}", v[i]);
            }
            csv.push('\n');
        }
        emit(format!("{}_ensemble.csv", a.id), &csv)?;

        let series: Vec<(&str, &[f64])> = avgs.iter().map(|(g, v)| (g.name(), *v)).collect();
        emit(
            format!("{}_ensemble_volume.svg", a.id),
            &line_plot(&format!("{}: ensemble SCG, LLV vs HLV", a.id), fs, &series[2..4]),
        )?;
        emit(
            format!("{}_ensemble_flow.svg", a.id),
            &line_plot(
                &format!("{}: ensemble SCG, inspiration vs expiration", a.id),
                fs,
                &series[0..2],
            ),
        )?;
        let ecg_series: Vec<(&str, &[f64])> = GroupId::ALL[2..]
            .iter()
            .zip(&ecg_avgs[2..])
            .map(|(g, v)| (g.name(), v.as_slice()))
            .collect();
        emit(
            format!("{}_ensemble_ecg.svg", a.id),
            &line_plot(&format!("{}: ensemble ECG, LLV vs HLV", a.id), fs, &ecg_series),
        )?;
        let bars: Vec<(&str, f64)> = GroupId::ALL
            .iter()
            .map(|&g| (g.name(), a.comparison.group(g).rd))
            .collect();
        emit(
            format!("{}_rd.svg", a.id),
            &bar_chart(&format!("{}: relative difference per group", a.id), "RD (%)", &bars),
        )?;
    }
    Ok(written)
}
