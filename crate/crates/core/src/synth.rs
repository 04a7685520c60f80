//! Synthetic coupled cardio-respiratory recordings with known ground truth.
//!
//! Respiration is a pure sinusoidal flow. Each beat is a blend of two
//! morphologies, `(1 - a) * m_low + a * m_high`, where `a` follows lung
//! volume, flow direction, or nothing depending on the coupling mode.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CardioError, Result};
use crate::respiration::{FlowPhase, VolumePhase};
use crate::signal::{rms, Channel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    Volume,
    Flow,
    None,
}

impl FromStr for Coupling {
    type Err = CardioError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "volume" => Ok(Coupling::Volume),
            "flow" => Ok(Coupling::Flow),
            "none" => Ok(Coupling::None),
            other => Err(CardioError::InvalidArgument(format!(
                "unknown coupling '{other}' (expected volume, flow or none)"
            ))),
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Volume => "volume",
            Coupling::Flow => "flow",
            Coupling::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub duration_s: f64,
    pub fs: f64,
    /// Breathing frequency in Hz.
    pub resp_freq: f64,
    /// Peak flow in L/s.
    pub resp_amplitude: f64,
    pub heart_rate_bpm: f64,
    /// Uniform beat-period jitter as a fraction of the period (0.05 = ±5%).
    pub jitter_frac: f64,
    pub coupling: Coupling,
    /// Maximum mixing coefficient, in `[0, 1]`.
    pub coupling_strength: f64,
    /// `None` generates a noiseless recording.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            duration_s: 120.0,
            fs: 320.0,
            resp_freq: 0.25,
            resp_amplitude: 0.5,
            heart_rate_bpm: 66.0,
            jitter_frac: 0.05,
            coupling: Coupling::Volume,
            coupling_strength: 1.0,
            snr_db: Some(20.0),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CardioError::InvalidArgument(m));
        if !(self.duration_s > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration_s));
        }
        if !(self.fs > 0.0) {
            return bad(format!("fs must be positive, got {}", self.fs));
        }
        let heart_hz = self.heart_rate_bpm / 60.0;
        if !(self.resp_freq > 0.0 && self.resp_freq < heart_hz) {
            return bad(format!(
                "respiration frequency {} Hz must lie in (0, {heart_hz})",
                self.resp_freq
            ));
        }
        if !(0.0..=1.0).contains(&self.coupling_strength) {
            return bad(format!("coupling strength {} outside [0, 1]", self.coupling_strength));
        }
        if !(0.0..1.0).contains(&self.jitter_frac) {
            return bad(format!("jitter {} outside [0, 1)", self.jitter_frac));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return bad("snr must be finite (omit it for a noiseless recording)".into());
            }
        }
        Ok(())
    }
}

/// Synchronized channels of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub scg: Channel,
    pub ecg: Channel,
    pub flow: Channel,
}

impl Recording {
    pub fn fs(&self) -> f64 {
        self.scg.fs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Beat centres, strictly increasing.
    pub beat_indices: Vec<usize>,
    pub alpha: Vec<f64>,
    pub flow_phase: Vec<FlowPhase>,
    pub volume_phase: Vec<VolumePhase>,
}

/// Sinusoidal flow and its closed-form volume `(A / 2πf)(1 - cos 2πft)`.
pub fn gen_respiration(cfg: &SynthConfig) -> Result<(Channel, Channel)> {
    let n = (cfg.duration_s * cfg.fs).round() as usize;
    let w = 2.0 * PI * cfg.resp_freq;
    let a = cfg.resp_amplitude;
    let t = |i: usize| i as f64 / cfg.fs;
    let flow = (0..n).map(|i| a * (w * t(i)).sin()).collect();
    let volume = (0..n).map(|i| a / w * (1.0 - (w * t(i)).cos())).collect();
    Ok((
        Channel::new(flow, cfg.fs, "flow_lps")?,
        Channel::new(volume, cfg.fs, "volume_l")?,
    ))
}

/// Default morphology length in seconds.
pub const MORPHOLOGY_SECONDS: f64 = 0.3;

fn damped_burst(fs: f64, len: usize, carrier_hz: f64, decay_s: f64) -> Vec<f64> {
    let onset = len / 4;
    let raw: Vec<f64> = (0..len)
        .map(|i| {
            if i < onset {
                return 0.0;
            }
            let t = (i - onset) as f64 / fs;
            (-t / decay_s).exp() * (2.0 * PI * carrier_hz * t).sin()
        })
        .collect();
    let r = rms(&raw).expect("non-empty burst");
    raw.into_iter().map(|v| v / r).collect()
}

/// Unit-RMS damped-sinusoid prototypes: a 20 Hz burst for low lung volume
/// and a faster-decaying 28 Hz burst for high lung volume.
pub fn default_morphologies(fs: f64) -> (Vec<f64>, Vec<f64>) {
    let len = (MORPHOLOGY_SECONDS * fs).round() as usize;
    (
        damped_burst(fs, len, 20.0, 0.045),
        damped_burst(fs, len, 28.0, 0.030),
    )
}

fn normalize_unit_rms(m: &[f64]) -> Result<Vec<f64>> {
    let r = rms(m)?;
    if r == 0.0 {
        return Err(CardioError::InvalidArgument("morphology has zero RMS".into()));
    }
    Ok(m.iter().map(|v| v / r).collect())
}

/// Generates a recording and its ground truth. Morphologies are rescaled to
/// unit RMS; a beat at index `k` occupies `k - len/2 .. k - len/2 + len`.
pub fn gen_recording(cfg: &SynthConfig, m_low: &[f64], m_high: &[f64]) -> Result<(Recording, GroundTruth)> {
    cfg.validate()?;
    if m_low.len() != m_high.len() {
        return Err(CardioError::LengthMismatch(m_low.len(), m_high.len()));
    }
    let m_low = normalize_unit_rms(m_low)?;
    let m_high = normalize_unit_rms(m_high)?;
    let m_len = m_low.len();

    let (flow, _) = gen_respiration(cfg)?;
    let n = flow.len();
    let period_s = 60.0 / cfg.heart_rate_bpm;
    let min_period = (period_s * (1.0 - cfg.jitter_frac) * cfg.fs).floor() as usize;
    if min_period < m_len {
        return Err(CardioError::BeatOverlap {
            period: min_period,
            len: m_len,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w = 2.0 * PI * cfg.resp_freq;
    let phase_of = |i: usize| w * i as f64 / cfg.fs;

    // Beats keep one morphology length of clearance from both ends.
    let first = (m_len as f64 + 0.5 * period_s * cfg.fs).round() as usize;
    let last_allowed = n.saturating_sub(m_len + m_len / 2 + 1);
    let mut beat_indices = Vec::new();
    let mut t = first as f64 / cfg.fs;
    loop {
        let idx = (t * cfg.fs).round() as usize;
        if idx > last_allowed {
            break;
        }
        beat_indices.push(idx);
        let jitter = if cfg.jitter_frac > 0.0 {
            rng.random_range(-cfg.jitter_frac..cfg.jitter_frac)
        } else {
            0.0
        };
        t += period_s * (1.0 + jitter);
    }

    // Closed-form volume threshold: the sample mean of (1 - cos) over the record.
    let vol_shape = |i: usize| 1.0 - phase_of(i).cos();
    let vol_mean = (0..n).map(vol_shape).sum::<f64>() / n as f64;

    let mut scg = vec![0.0; n];
    let mut alpha = Vec::with_capacity(beat_indices.len());
    let mut flow_phase = Vec::with_capacity(beat_indices.len());
    let mut volume_phase = Vec::with_capacity(beat_indices.len());
    for &idx in &beat_indices {
        let f = phase_of(idx).sin();
        let coupling_var = match cfg.coupling {
            Coupling::Volume => 0.5 * vol_shape(idx),
            Coupling::Flow => {
                if f > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Coupling::None => 0.5,
        };
        let a = cfg.coupling_strength * coupling_var;
        alpha.push(a);
        flow_phase.push(if cfg.resp_amplitude * f > 0.0 {
            FlowPhase::Inspiration
        } else {
            FlowPhase::Expiration
        });
        let above = cfg.resp_amplitude * (vol_shape(idx) - vol_mean) > 0.0;
        volume_phase.push(if above { VolumePhase::Hlv } else { VolumePhase::Llv });

        let start = idx - m_len / 2;
        for (k, (lo, hi)) in m_low.iter().zip(&m_high).enumerate() {
            scg[start + k] += (1.0 - a) * lo + a * hi;
        }
    }

    if let Some(snr_db) = cfg.snr_db {
        let signal_rms = rms(&scg)?;
        let sigma = signal_rms / 10f64.powf(snr_db / 20.0);
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| CardioError::InvalidArgument(e.to_string()))?;
            for v in scg.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }

    let ecg = synthetic_ecg(n, cfg.fs, &beat_indices);
    let recording = Recording {
        id: format!("synth-{}-{}", cfg.coupling, cfg.seed),
        scg: Channel::new(scg, cfg.fs, "scg_z")?,
        ecg: Channel::new(ecg, cfg.fs, "ecg")?,
        flow,
    };
    let truth = GroundTruth {
        beat_indices,
        alpha,
        flow_phase,
        volume_phase,
    };
    Ok((recording, truth))
}

/// Gaussian R-spikes (1 mV, 8 ms width) at each beat index.
fn synthetic_ecg(n: usize, fs: f64, beats: &[usize]) -> Vec<f64> {
    let mut ecg = vec![0.0; n];
    let sigma = 0.008 * fs;
    let reach = (4.0 * sigma).ceil() as isize;
    for &b in beats {
        for d in -reach..=reach {
            let i = b as isize + d;
            if (0..n as isize).contains(&i) {
                ecg[i as usize] += (-(d as f64).powi(2) / (2.0 * sigma * sigma)).exp();
            }
        }
    }
    ecg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_respiration() {
        let cfg = SynthConfig {
            resp_amplitude: 0.0,
            duration_s: 4.0,
            ..Default::default()
        };
        let (flow, vol) = gen_respiration(&cfg).unwrap();
        assert!(flow.samples.iter().all(|&v| v == 0.0));
        assert!(vol.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn volume_extremes_at_flow_zero_crossings() {
        let cfg = SynthConfig {
            duration_s: 8.0,
            ..Default::default()
        };
        let (flow, vol) = gen_respiration(&cfg).unwrap();
        // Period 4 s = 1280 samples: extremes every 640 samples, where
        // flow crosses zero.
        for idx in [640usize, 1280, 1920] {
            assert!(flow.samples[idx].abs() < 1e-9);
        }
        let trough = vol.samples[1..]
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0
            + 1;
        assert_eq!(trough, 1280);
        let peak = vol
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(peak == 640 || peak == 1920);
    }

    #[test]
    fn morphologies_are_unit_rms() {
        let (lo, hi) = default_morphologies(320.0);
        assert_eq!(lo.len(), 96);
        assert!((rms(&lo).unwrap() - 1.0).abs() < 1e-12);
        assert!((rms(&hi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beat_overlap_is_rejected() {
        let cfg = SynthConfig {
            heart_rate_bpm: 240.0,
            ..Default::default()
        };
        let (lo, hi) = default_morphologies(cfg.fs);
        assert!(matches!(
            gen_recording(&cfg, &lo, &hi),
            Err(CardioError::BeatOverlap { .. })
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SynthConfig {
            resp_freq: 2.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SynthConfig {
            coupling_strength: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn coupling_parses() {
        assert_eq!("Volume".parse::<Coupling>().unwrap(), Coupling::Volume);
        assert_eq!("flow".parse::<Coupling>().unwrap(), Coupling::Flow);
        assert_eq!("none".parse::<Coupling>().unwrap(), Coupling::None);
        assert!("pressure".parse::<Coupling>().is_err());
    }
}
