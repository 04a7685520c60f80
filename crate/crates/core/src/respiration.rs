//! Lung volume from spirometer flow, and respiratory phase labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detection::ScgEvent;
use crate::error::{CardioError, Result};
use crate::signal::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowPhase {
    Inspiration,
    Expiration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumePhase {
    /// Below the recording-mean lung volume.
    Llv,
    /// Above the recording-mean lung volume.
    Hlv,
}

impl fmt::Display for FlowPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowPhase::Inspiration => "inspiration",
            FlowPhase::Expiration => "expiration",
        })
    }
}

impl fmt::Display for VolumePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolumePhase::Llv => "llv",
            VolumePhase::Hlv => "hlv",
        })
    }
}

/// Flow (L/s, positive on inspiration) with its integrated volume (L).
#[derive(Debug, Clone, PartialEq)]
pub struct RespirationTrace {
    pub flow: Channel,
    pub volume: Channel,
    pub mean_volume: f64,
}

/// Cumulative trapezoidal integral of flow, starting from zero volume.
///
/// With `detrend`, a constant flow offset is removed first. The offset is
/// the trapezoid-weighted mean flow, which makes the final volume sample
/// exactly zero.
pub fn integrate_flow(flow: &Channel, detrend: bool) -> Result<RespirationTrace> {
    let f = &flow.samples;
    if f.is_empty() {
        return Err(CardioError::EmptyWaveform);
    }
    let n = f.len();
    let offset = if detrend && n > 1 {
        let area: f64 = f.windows(2).map(|p| 0.5 * (p[0] + p[1])).sum();
        area / (n - 1) as f64
    } else {
        0.0
    };
    let dt = 1.0 / flow.fs;
    let mut volume = Vec::with_capacity(n);
    let mut acc = 0.0;
    volume.push(0.0);
    for p in f.windows(2) {
        acc += 0.5 * ((p[0] - offset) + (p[1] - offset)) * dt;
        volume.push(acc);
    }
    let mean_volume = volume.iter().sum::<f64>() / n as f64;
    Ok(RespirationTrace {
        flow: flow.clone(),
        volume: Channel {
            samples: volume,
            fs: flow.fs,
            label: "volume_l".into(),
        },
        mean_volume,
    })
}

/// Inspiration for positive flow; zero flow counts as expiration.
pub fn flow_phase_at(trace: &RespirationTrace, index: usize) -> Result<FlowPhase> {
    let v = *trace
        .flow
        .samples
        .get(index)
        .ok_or(CardioError::IndexOutOfRange {
            index,
            len: trace.flow.len(),
        })?;
    Ok(if v > 0.0 {
        FlowPhase::Inspiration
    } else {
        FlowPhase::Expiration
    })
}

/// HLV above the mean volume; equality counts as LLV.
pub fn volume_phase_at(trace: &RespirationTrace, index: usize) -> Result<VolumePhase> {
    let v = *trace
        .volume
        .samples
        .get(index)
        .ok_or(CardioError::IndexOutOfRange {
            index,
            len: trace.volume.len(),
        })?;
    Ok(if v > trace.mean_volume {
        VolumePhase::Hlv
    } else {
        VolumePhase::Llv
    })
}

/// Labels each event with the flow and volume phase at its reference
/// instant. `scg_fs` is the rate the event indices refer to.
pub fn label_events(
    events: Vec<ScgEvent>,
    trace: &RespirationTrace,
    scg_fs: f64,
) -> Result<Vec<ScgEvent>> {
    if (trace.flow.fs - scg_fs).abs() > 1e-9 * scg_fs {
        return Err(CardioError::RateMismatch(trace.flow.fs, scg_fs));
    }
    events
        .into_iter()
        .map(|mut e| {
            e.flow_phase = Some(flow_phase_at(trace, e.ref_index)?);
            e.volume_phase = Some(volume_phase_at(trace, e.ref_index)?);
            Ok(e)
        })
        .collect()
}
