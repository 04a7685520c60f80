//! Shared helpers and independent oracles for the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use cardioseis::config::PipelineConfig;
use cardioseis::pipeline::{analyze_recording, PipelineError, RecordingAnalysis};
use cardioseis::synth::{default_morphologies, gen_recording, Coupling, GroundTruth, Recording, SynthConfig};

/// Direct O(N·L) full convolution.
pub fn brute_convolution(x: &[f64], w: &[f64]) -> Vec<f64> {
    if x.is_empty() || w.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; x.len() + w.len() - 1];
    for (i, xv) in x.iter().enumerate() {
        for (j, wv) in w.iter().enumerate() {
            out[i + j] += xv * wv;
        }
    }
    out
}

/// Amplitude of an `f` Hz component, by projection onto sine and cosine.
pub fn tone_amplitude(x: &[f64], fs: f64, f: f64) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let ph = 2.0 * PI * f * i as f64 / fs;
        s += v * ph.sin();
        c += v * ph.cos();
    }
    2.0 * (s * s + c * c).sqrt() / x.len() as f64
}

pub fn sine(n: usize, fs: f64, f: f64, amp: f64) -> Vec<f64> {
    (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / fs).sin()).collect()
}

pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.len() as f64).sqrt()
}

pub fn rms_of(a: &[f64]) -> f64 {
    (a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64).sqrt()
}

/// Desk-scale synthetic recording: 120 s at 320 Hz, 66 bpm, 0.25 Hz breathing.
pub fn desk_config(coupling: Coupling, seed: u64, snr_db: Option<f64>) -> SynthConfig {
    SynthConfig {
        duration_s: 120.0,
        fs: 320.0,
        resp_freq: 0.25,
        heart_rate_bpm: 66.0,
        coupling,
        coupling_strength: 1.0,
        snr_db,
        seed,
        ..Default::default()
    }
}

pub fn synth(cfg: &SynthConfig) -> (Recording, GroundTruth) {
    let (lo, hi) = default_morphologies(cfg.fs);
    gen_recording(cfg, &lo, &hi).expect("synthetic recording")
}

/// Pipeline settings for a synthetic recording: template is the first beat.
pub fn pipeline_config_for(rec: &Recording, truth: &GroundTruth) -> PipelineConfig {
    let fs = rec.fs();
    let (lo, _) = default_morphologies(fs);
    let first = truth.beat_indices[0];
    PipelineConfig {
        acquisition_fs: fs,
        analysis_fs: fs.min(320.0),
        template_start_s: (first - lo.len() / 2) as f64 / fs,
        template_length_s: lo.len() as f64 / fs,
        ..Default::default()
    }
}

pub fn analyze_synth(cfg: &SynthConfig) -> Result<(RecordingAnalysis, GroundTruth), PipelineError> {
    let (rec, truth) = synth(cfg);
    let pcfg = pipeline_config_for(&rec, &truth);
    let a = analyze_recording(&rec, &pcfg)?;
    Ok((a, truth))
}

/// Matches detections to truth within `tol` samples; returns (hits, max error).
pub fn match_beats(truth: &[usize], detected: &[usize], tol: usize) -> (usize, usize) {
    let mut hits = 0;
    let mut worst = 0;
    let mut used = vec![false; detected.len()];
    for &t in truth {
        let best = detected
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, &d)| (k, d.abs_diff(t)))
            .min_by_key(|&(_, e)| e);
        if let Some((k, e)) = best {
            if e <= tol {
                used[k] = true;
                hits += 1;
                worst = worst.max(e);
            }
        }
    }
    (hits, worst)
}
