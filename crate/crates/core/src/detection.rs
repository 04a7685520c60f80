//! Matched-filter heartbeat event detection.
//!
//! The channel is correlated with a template beat, the Hilbert envelope of
//! the filter output is peak-picked against a threshold relative to its
//! 95th percentile, and each accepted peak is mapped to the centre of a
//! template-length event window.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{CardioError, Result};
use crate::grouping::normalized_dissim;
use crate::respiration::{FlowPhase, VolumePhase};
use crate::signal::{hilbert_envelope, Channel};

pub const MIN_TEMPLATE_LEN: usize = 8;

/// A reference beat used to build the matched filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub samples: Vec<f64>,
    /// `(start_index, length)` within the channel the template was cut from.
    pub source_span: Option<(usize, usize)>,
    pub fs: f64,
}

impl Template {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if samples.len() < MIN_TEMPLATE_LEN {
            return Err(CardioError::InvalidTemplate(format!(
                "length {} < {MIN_TEMPLATE_LEN}",
                samples.len()
            )));
        }
        if samples.iter().all(|&v| v == samples[0]) {
            return Err(CardioError::InvalidTemplate("constant samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(CardioError::InvalidTemplate("non-finite samples".into()));
        }
        Ok(Self {
            samples,
            source_span: None,
            fs,
        })
    }

    /// Cuts a template out of `ch` at `start_s` for `length_s` seconds.
    pub fn from_channel(ch: &Channel, start_s: f64, length_s: f64) -> Result<Self> {
        if !(start_s >= 0.0 && length_s > 0.0) {
            return Err(CardioError::InvalidTemplate(format!(
                "span start {start_s} s, length {length_s} s"
            )));
        }
        let start = (start_s * ch.fs).round() as usize;
        let len = (length_s * ch.fs).round() as usize;
        if start + len > ch.len() {
            return Err(CardioError::InvalidTemplate(format!(
                "span {start}..{} exceeds channel length {}",
                start + len,
                ch.len()
            )));
        }
        let mut tpl = Template::new(ch.samples[start..start + len].to_vec(), ch.fs)?;
        tpl.source_span = Some((start, len));
        Ok(tpl)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// One detected heartbeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScgEvent {
    /// Sample index of the event centre in the analysis channel.
    pub ref_index: usize,
    pub window: Vec<f64>,
    /// Shift applied by alignment, in samples.
    pub align_shift: isize,
    pub flow_phase: Option<FlowPhase>,
    pub volume_phase: Option<VolumePhase>,
}

impl ScgEvent {
    pub fn new(ref_index: usize, window: Vec<f64>) -> Self {
        Self {
            ref_index,
            window,
            align_shift: 0,
            flow_phase: None,
            volume_phase: None,
        }
    }
}

/// Matched filter coefficients: the template reversed in time.
pub fn build_matched_filter(tpl: &Template) -> Vec<f64> {
    tpl.samples.iter().rev().copied().collect()
}

/// Full linear convolution (`len(x) + len(w) - 1` samples) via FFT.
pub fn convolve_full(x: &[f64], w: &[f64]) -> Vec<f64> {
    if x.is_empty() || w.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + w.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut a: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    a.resize(n, Complex::new(0.0, 0.0));
    let mut b: Vec<Complex<f64>> = w.iter().map(|&v| Complex::new(v, 0.0)).collect();
    b.resize(n, Complex::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    inv.process(&mut a);
    let scale = 1.0 / n as f64;
    a[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Matched filter output, indexed so that a template occurrence starting at
/// sample `p` of `x` peaks at output index `p`.
///
/// Equivalent to `convolve_full(x, w)[p + len(w) - 1]` for `p` in
/// `0..len(x)`, i.e. `out[p] = sum_k l[k] * x[p + k]`.
pub fn matched_filter_output(x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(CardioError::EmptyWaveform);
    }
    if x.len() < w.len() {
        return Err(CardioError::SignalShorterThanTemplate {
            signal: x.len(),
            template: w.len(),
        });
    }
    let full = convolve_full(x, w);
    let lead = w.len() - 1;
    Ok(full[lead..lead + x.len()].to_vec())
}

/// `len` samples starting at `ref_index - floor(len / 2)`.
pub fn extract_window(ch: &Channel, ref_index: isize, len: usize) -> Result<Vec<f64>> {
    window_slice(&ch.samples, ref_index, len).map(<[f64]>::to_vec)
}

pub(crate) fn window_slice(x: &[f64], ref_index: isize, len: usize) -> Result<&[f64]> {
    let start = ref_index - (len / 2) as isize;
    if start < 0 || start as usize + len > x.len() {
        return Err(CardioError::WindowOutOfRange {
            start,
            len,
            available: x.len(),
        });
    }
    Ok(&x[start as usize..start as usize + len])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    /// Fraction of the envelope's 95th percentile a peak must reach.
    pub threshold_frac: f64,
    pub min_separation_s: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            threshold_frac: 0.5,
            min_separation_s: 0.4,
        }
    }
}

/// Linear-interpolated percentile (`q` in `[0, 100]`).
pub fn percentile(x: &[f64], q: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if *v > x[best] {
            best = i;
        }
    }
    best
}

/// Offset from an envelope peak to the event centre, measured by running
/// the filter over the template embedded in silence.
pub fn calibrate_peak_offset(tpl: &Template) -> Result<isize> {
    let l = tpl.len();
    let mut probe = vec![0.0; 3 * l];
    probe[l..2 * l].copy_from_slice(&tpl.samples);
    let y = matched_filter_output(&probe, &build_matched_filter(tpl))?;
    let env = hilbert_envelope(&y)?;
    let peak = argmax(&env) as isize;
    Ok((l + l / 2) as isize - peak)
}

/// Detects template occurrences in `ch`, sorted by `ref_index`.
pub fn detect_events(ch: &Channel, tpl: &Template, params: &DetectionParams) -> Result<Vec<ScgEvent>> {
    if (ch.fs - tpl.fs).abs() > 1e-9 * ch.fs {
        return Err(CardioError::RateMismatch(ch.fs, tpl.fs));
    }
    if !(params.threshold_frac > 0.0 && params.threshold_frac < 1.0) {
        return Err(CardioError::InvalidArgument(format!(
            "threshold fraction must be in (0, 1), got {}",
            params.threshold_frac
        )));
    }
    let l = tpl.len();
    let w = build_matched_filter(tpl);
    let y = matched_filter_output(&ch.samples, &w)?;
    let env = hilbert_envelope(&y)?;
    let offset = calibrate_peak_offset(tpl)?;

    let level = percentile(&env, 95.0);
    if level <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = params.threshold_frac * level;

    let mut candidates: Vec<(usize, f64)> = (1..env.len().saturating_sub(1))
        .filter(|&i| env[i] > env[i - 1] && env[i] >= env[i + 1] && env[i] >= threshold)
        .filter_map(|i| {
            let centre = i as isize + offset;
            window_slice(&ch.samples, centre, l)
                .ok()
                .map(|_| (centre as usize, env[i]))
        })
        .collect();

    // Strongest first; equal strengths keep the earlier peak.
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let min_sep = params.min_separation_s * ch.fs;
    let mut accepted: Vec<usize> = Vec::new();
    for (idx, _) in candidates {
        if accepted
            .iter()
            .all(|&a| (a as f64 - idx as f64).abs() >= min_sep)
        {
            accepted.push(idx);
        }
    }
    accepted.sort_unstable();

    accepted
        .into_iter()
        .map(|idx| Ok(ScgEvent::new(idx, extract_window(ch, idx as isize, l)?)))
        .collect()
}

/// Drops events whose normalized dissimilarity to the all-event average
/// exceeds mean + 3 SD. Returns the kept events and the number dropped.
pub fn screen_outliers(events: Vec<ScgEvent>) -> Result<(Vec<ScgEvent>, usize)> {
    if events.len() < 3 {
        return Ok((events, 0));
    }
    let windows: Vec<&[f64]> = events.iter().map(|e| e.window.as_slice()).collect();
    let avg = crate::grouping::average_windows(&windows)?;
    let scores = match windows
        .iter()
        .map(|w| normalized_dissim(w, &avg))
        .collect::<Result<Vec<f64>>>()
    {
        Ok(s) => s,
        Err(CardioError::DegenerateAverage) => return Ok((events, 0)),
        Err(e) => return Err(e),
    };
    let n = scores.len() as f64;
    let m = scores.iter().sum::<f64>() / n;
    let sd = (scores.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let limit = m + 3.0 * sd;
    let before = events.len();
    let kept: Vec<ScgEvent> = events
        .into_iter()
        .zip(scores)
        .filter(|(_, s)| *s <= limit)
        .map(|(e, _)| e)
        .collect();
    let dropped = before - kept.len();
    Ok((kept, dropped))
}
