//! Sampled channels and the DSP primitives the pipeline is built from.
//!
//! Everything here is a pure function of its inputs. Filtering is done with
//! linear-phase FIR kernels applied with group-delay compensation, so no
//! primitive shifts features in time.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{CardioError, Result};

/// A uniformly sampled real-valued waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub samples: Vec<f64>,
    pub fs: f64,
    pub label: String,
}

impl Channel {
    /// Builds a channel, rejecting a non-positive rate or non-finite samples.
    pub fn new(samples: Vec<f64>, fs: f64, label: impl Into<String>) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(CardioError::InvalidArgument(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(CardioError::InvalidArgument(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            fs,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Channel {
        Channel {
            samples,
            fs: self.fs,
            label: self.label.clone(),
        }
    }
}

/// Root-mean-square amplitude.
pub fn rms(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(CardioError::EmptyWaveform);
    }
    let ss: f64 = x.iter().map(|v| v * v).sum();
    Ok((ss / x.len() as f64).sqrt())
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Maps any integer index onto `0..n` by mirror reflection about the end
/// samples (the end sample itself is not repeated).
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Hamming-windowed sinc kernel of the given (even) order, unit DC gain.
pub fn hamming_lowpass_kernel(order: usize, fs: f64, cutoff_hz: f64) -> Vec<f64> {
    let m = order as f64;
    let fc = cutoff_hz / fs;
    let mut h: Vec<f64> = (0..=order)
        .map(|k| {
            let k = k as f64;
            let w = 0.54 - 0.46 * (2.0 * PI * k / m).cos();
            2.0 * fc * sinc(2.0 * fc * (k - m / 2.0)) * w
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Zero-phase amplitude response of a symmetric odd-length kernel at `f_hz`.
pub fn symmetric_amplitude(h: &[f64], fs: f64, f_hz: f64) -> f64 {
    let centre = (h.len() - 1) as f64 / 2.0;
    let w = 2.0 * PI * f_hz / fs;
    h.iter()
        .enumerate()
        .map(|(k, v)| v * (w * (k as f64 - centre)).cos())
        .sum()
}

const PASSBAND_RIPPLE_DB: f64 = 0.5;
const STOPBAND_ATTEN_DB: f64 = 40.0;
const MAX_FILTER_ORDER: usize = 1 << 16;

fn meets_lowpass_spec(h: &[f64], fs: f64, cutoff_hz: f64) -> bool {
    let nyq = fs / 2.0;
    let stop_lo = 1.5 * cutoff_hz;
    let stop_gain = 10f64.powf(-STOPBAND_ATTEN_DB / 20.0);
    if stop_lo < nyq {
        let steps = 256;
        for i in 0..=steps {
            let f = stop_lo + (nyq - stop_lo) * i as f64 / steps as f64;
            if symmetric_amplitude(h, fs, f).abs() > stop_gain {
                return false;
            }
        }
    }
    let pass_hi = 0.8 * cutoff_hz;
    let steps = 128;
    (0..=steps).all(|i| {
        let f = pass_hi * i as f64 / steps as f64;
        let a = symmetric_amplitude(h, fs, f).abs();
        a > 0.0 && (20.0 * a.log10()).abs() <= PASSBAND_RIPPLE_DB
    })
}

/// Smallest even-order Hamming low-pass meeting ±0.5 dB below 0.8·cutoff
/// and ≥ 40 dB attenuation above 1.5·cutoff.
pub fn design_lowpass(fs: f64, cutoff_hz: f64) -> Result<Vec<f64>> {
    if !(cutoff_hz > 0.0) {
        return Err(CardioError::InvalidArgument(format!(
            "cutoff must be positive, got {cutoff_hz}"
        )));
    }
    if cutoff_hz >= fs / 2.0 {
        return Err(CardioError::CutoffAboveNyquist { cutoff_hz, fs });
    }
    let mut order = 2;
    while order <= MAX_FILTER_ORDER {
        let h = hamming_lowpass_kernel(order, fs, cutoff_hz);
        if meets_lowpass_spec(&h, fs, cutoff_hz) {
            return Ok(h);
        }
        order += 2;
    }
    Err(CardioError::InvalidArgument(format!(
        "no low-pass of order <= {MAX_FILTER_ORDER} meets the response limits at {cutoff_hz} Hz"
    )))
}

/// Applies a symmetric odd-length kernel with reflect padding and group
/// delay compensation. Output has the input's length and no phase shift.
pub fn apply_zero_phase(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let half = (h.len() - 1) / 2;
    let padded: Vec<f64> = (-(half as isize)..(n + half) as isize)
        .map(|i| x[reflect_index(i, n)])
        .collect();
    (0..n)
        .map(|i| {
            padded[i..i + h.len()]
                .iter()
                .zip(h.iter().rev())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Zero-phase low-pass filter.
pub fn lowpass(ch: &Channel, cutoff_hz: f64) -> Result<Channel> {
    let h = design_lowpass(ch.fs, cutoff_hz)?;
    Ok(ch.with_samples(apply_zero_phase(&ch.samples, &h)))
}

fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Kaiser-windowed sinc low-pass with the transition band centred between
/// `pass_hz` and `stop_hz`. Unit DC gain, odd length.
pub(crate) fn kaiser_lowpass_kernel(fs: f64, pass_hz: f64, stop_hz: f64, atten_db: f64) -> Vec<f64> {
    let beta = if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    };
    let dw = 2.0 * PI * (stop_hz - pass_hz) / fs;
    let mut len = ((atten_db - 7.95) / (2.285 * dw)).ceil() as usize + 1;
    if len.is_multiple_of(2) {
        len += 1;
    }
    let fc = 0.5 * (pass_hz + stop_hz) / fs;
    let centre = (len - 1) as f64 / 2.0;
    let i0_beta = bessel_i0(beta);
    let mut h: Vec<f64> = (0..len)
        .map(|k| {
            let r = (k as f64 - centre) / centre;
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            2.0 * fc * sinc(2.0 * fc * (k as f64 - centre)) * w
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer up/down factors for a rate change `from -> to`.
pub(crate) fn rational_factors(from: f64, to: f64) -> (usize, usize) {
    let is_int = |v: f64| v.fract() == 0.0 && v < 1e12;
    if is_int(from) && is_int(to) {
        let (f, t) = (from as u64, to as u64);
        let g = gcd(f, t);
        return ((t / g) as usize, (f / g) as usize);
    }
    // Continued-fraction approximation of to/from with a bounded denominator.
    let target = to / from;
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = target;
    loop {
        let a = x.floor();
        let (p2, q2) = (a as u64 * p1 + p0, a as u64 * q1 + q0);
        if q2 > 10_000 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a;
        if frac < 1e-12 || ((p1 as f64 / q1 as f64) - target).abs() < 1e-12 * target {
            break;
        }
        x = 1.0 / frac;
    }
    (p1.max(1) as usize, q1.max(1) as usize)
}

const RESAMPLE_ATTEN_DB: f64 = 60.0;

/// Rational polyphase resampling to `target_fs`.
///
/// When reducing the rate, the anti-alias filter passes up to 0.40 and
/// stops from 0.50 of the target Nyquist (cutoff 0.45). When raising it,
/// the anti-image filter passes up to 0.8 of the source Nyquist.
/// Output length is `round(len * target_fs / fs)`.
pub fn resample(ch: &Channel, target_fs: f64) -> Result<Channel> {
    if !(target_fs.is_finite() && target_fs > 0.0) {
        return Err(CardioError::InvalidArgument(format!(
            "target rate must be positive, got {target_fs}"
        )));
    }
    if target_fs == ch.fs || ch.is_empty() {
        return Ok(Channel {
            samples: ch.samples.clone(),
            fs: target_fs,
            label: ch.label.clone(),
        });
    }
    let (up, down) = rational_factors(ch.fs, target_fs);
    let fs_up = ch.fs * up as f64;
    let (pass, stop) = if target_fs < ch.fs {
        let nyq = target_fs / 2.0;
        (0.40 * nyq, 0.50 * nyq)
    } else {
        let nyq = ch.fs / 2.0;
        (0.80 * nyq, nyq)
    };
    let h: Vec<f64> = kaiser_lowpass_kernel(fs_up, pass, stop, RESAMPLE_ATTEN_DB)
        .into_iter()
        .map(|v| v * up as f64)
        .collect();
    let delay = ((h.len() - 1) / 2) as isize;
    let n_in = ch.len();
    let n_out = (n_in as f64 * target_fs / ch.fs).round() as usize;
    let up_i = up as isize;

    let samples = (0..n_out)
        .map(|m| {
            let t = (m * down) as isize;
            let i_min = (t - delay).div_euclid(up_i) + ((t - delay).rem_euclid(up_i) != 0) as isize;
            let i_max = (t + delay).div_euclid(up_i);
            (i_min..=i_max)
                .map(|i| ch.samples[reflect_index(i, n_in)] * h[(t - i * up_i + delay) as usize])
                .sum()
        })
        .collect();
    Ok(Channel {
        samples,
        fs: target_fs,
        label: ch.label.clone(),
    })
}

/// Magnitude of the analytic signal, computed with an FFT.
pub fn hilbert_envelope(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 4 {
        return Err(CardioError::TooShort { needed: 4, got: n });
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    let positive_end = n.div_ceil(2);
    for (k, c) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            continue;
        }
        if k < positive_end {
            *c *= 2.0;
        } else {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.iter().map(|c| c.norm() * scale).collect())
}

/// Pearson correlation between `x[k]` and `y[k + lag]` over their overlap.
/// `None` when the overlap is shorter than two samples or has no variance.
pub fn correlation_at_lag(x: &[f64], y: &[f64], lag: isize) -> Option<f64> {
    let start = 0.max(-lag) as usize;
    let end = (x.len() as isize).min(y.len() as isize - lag);
    if end - (start as isize) < 2 {
        return None;
    }
    let end = end as usize;
    let xs = &x[start..end];
    let ys = &y[(start as isize + lag) as usize..(end as isize + lag) as usize];
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in xs.iter().zip(ys) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn has_variance(x: &[f64]) -> bool {
    x.len() >= 2 && x.iter().any(|&v| v != x[0])
}

/// Lag in `-max_lag..=max_lag` maximising the normalized cross-correlation.
///
/// A positive lag means `y` is a delayed copy of `x`. Exact ties resolve to
/// the smaller `|lag|`, then to the negative lag.
pub fn best_lag(x: &[f64], y: &[f64], max_lag: usize) -> Result<isize> {
    if !has_variance(x) || !has_variance(y) {
        return Err(CardioError::DegenerateCorrelation);
    }
    let mut best: Option<(isize, f64)> = None;
    let candidates = std::iter::once(0).chain((1..=max_lag as isize).flat_map(|l| [-l, l]));
    for lag in candidates {
        if let Some(r) = correlation_at_lag(x, y, lag) {
            if best.is_none_or(|(_, br)| r > br) {
                best = Some((lag, r));
            }
        }
    }
    best.map(|(l, _)| l).ok_or(CardioError::DegenerateCorrelation)
}
