//! Group-wise alignment, ensemble averaging, and the dissimilarity metrics
//! used to judge how well a respiratory criterion groups similar beats.
//!
//! For each event the RMS of its difference from a group average is
//! expressed as a percentage of that average's RMS. The mean of these
//! percentages against the event's own group ("same") and against the other
//! group ("alt") gives the relative difference
//! `rd = 100 * (alt - same) / same`; positive means the event resembles its
//! own group more.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detection::{window_slice, ScgEvent};
use crate::error::{CardioError, Result};
use crate::respiration::{FlowPhase, VolumePhase};
use crate::signal::{best_lag, rms, Channel};

/// Two RDs closer than this are reported as a tie.
pub const TIE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupId {
    Inspiration,
    Expiration,
    Llv,
    Hlv,
}

impl GroupId {
    pub const ALL: [GroupId; 4] = [
        GroupId::Inspiration,
        GroupId::Expiration,
        GroupId::Llv,
        GroupId::Hlv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupId::Inspiration => "inspiration",
            GroupId::Expiration => "expiration",
            GroupId::Llv => "llv",
            GroupId::Hlv => "hlv",
        }
    }

    pub fn criterion(self) -> Criterion {
        match self {
            GroupId::Inspiration | GroupId::Expiration => Criterion::FlowRate,
            GroupId::Llv | GroupId::Hlv => Criterion::LungVolume,
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    FlowRate,
    LungVolume,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::FlowRate => "flow_rate",
            Criterion::LungVolume => "lung_volume",
        }
    }

    /// The two groups this criterion splits events into.
    pub fn groups(self) -> [GroupId; 2] {
        match self {
            Criterion::FlowRate => [GroupId::Inspiration, GroupId::Expiration],
            Criterion::LungVolume => [GroupId::Llv, GroupId::Hlv],
        }
    }

    /// The group `e` falls in under this criterion, if it is labeled.
    pub fn group_of(self, e: &ScgEvent) -> Option<GroupId> {
        match self {
            Criterion::FlowRate => e.flow_phase.map(|p| match p {
                FlowPhase::Inspiration => GroupId::Inspiration,
                FlowPhase::Expiration => GroupId::Expiration,
            }),
            Criterion::LungVolume => e.volume_phase.map(|p| match p {
                VolumePhase::Llv => GroupId::Llv,
                VolumePhase::Hlv => GroupId::Hlv,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    FlowRate,
    LungVolume,
    Tie,
}

/// Mean and sample SD of a set of normalized dissimilarities (%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissimSummary {
    pub mean: f64,
    /// Sample SD (n - 1 denominator); reported as 0 when `n == 1`.
    pub sd: f64,
    pub n: usize,
}

impl DissimSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(CardioError::EmptyGroup);
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, sd, n })
    }

    /// False for a single event, where the SD is undefined.
    pub fn sd_defined(&self) -> bool {
        self.n > 1
    }
}

pub(crate) fn average_windows(windows: &[&[f64]]) -> Result<Vec<f64>> {
    let first = windows.first().ok_or(CardioError::EmptyGroup)?;
    let len = first.len();
    let mut acc = vec![0.0; len];
    for w in windows {
        if w.len() != len {
            return Err(CardioError::LengthMismatch(len, w.len()));
        }
        for (a, v) in acc.iter_mut().zip(w.iter()) {
            *a += v;
        }
    }
    let n = windows.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// Pointwise mean of the event windows.
pub fn ensemble_average(events: &[ScgEvent]) -> Result<Vec<f64>> {
    let windows: Vec<&[f64]> = events.iter().map(|e| e.window.as_slice()).collect();
    average_windows(&windows)
}

/// RMS of the pointwise difference between an event and a group average.
pub fn drms(event: &[f64], avg: &[f64]) -> Result<f64> {
    if event.len() != avg.len() {
        return Err(CardioError::LengthMismatch(event.len(), avg.len()));
    }
    let diff: Vec<f64> = event.iter().zip(avg).map(|(a, b)| a - b).collect();
    rms(&diff)
}

/// `100 * drms(event, avg) / rms(avg)`, in percent.
pub fn normalized_dissim(event: &[f64], avg: &[f64]) -> Result<f64> {
    let d = drms(event, avg)?;
    let r = rms(avg)?;
    if r == 0.0 {
        return Err(CardioError::DegenerateAverage);
    }
    Ok((d / r * 100.0).abs())
}

pub fn mean_dissimilarity(events: &[ScgEvent], avg: &[f64]) -> Result<DissimSummary> {
    if events.is_empty() {
        return Err(CardioError::EmptyGroup);
    }
    let values = events
        .iter()
        .map(|e| normalized_dissim(&e.window, avg))
        .collect::<Result<Vec<_>>>()?;
    DissimSummary::from_values(&values)
}

/// `100 * (mean_alt - mean_same) / mean_same`.
pub fn relative_difference(mean_same: f64, mean_alt: f64) -> Result<f64> {
    if mean_same == 0.0 {
        return Err(CardioError::ZeroReference);
    }
    Ok(100.0 * (mean_alt - mean_same) / mean_same)
}

/// Result of aligning one group.
#[derive(Debug, Clone)]
pub struct AlignedGroup {
    pub events: Vec<ScgEvent>,
    /// Events dropped because their window had no variance.
    pub dropped: usize,
}

fn is_constant(w: &[f64]) -> bool {
    w.iter().all(|&v| v == w[0])
}

/// Window of `event` re-extracted after aligning it to `target`. Falls back
/// to the unshifted window when the shifted one leaves the channel.
fn aligned_window(
    ch: &Channel,
    event: &ScgEvent,
    target: &[f64],
    max_shift: usize,
) -> Result<(isize, Vec<f64>)> {
    let len = target.len();
    let original = window_slice(&ch.samples, event.ref_index as isize, len)?;
    let lag = best_lag(target, original, max_shift)?;
    match window_slice(&ch.samples, event.ref_index as isize + lag, len) {
        Ok(w) => Ok((lag, w.to_vec())),
        Err(_) => Ok((0, original.to_vec())),
    }
}

/// Two-pass alignment: every event is first aligned to the highest-RMS
/// event, then re-aligned to the first-pass ensemble average. Shifts are
/// bounded by `max_shift` samples around each event's `ref_index`; windows
/// are re-extracted from `ch`.
pub fn align_events(ch: &Channel, events: &[ScgEvent], max_shift: usize) -> Result<AlignedGroup> {
    let len = events.first().ok_or(CardioError::EmptyGroup)?.window.len();
    if let Some(e) = events.iter().find(|e| e.window.len() != len) {
        return Err(CardioError::LengthMismatch(len, e.window.len()));
    }
    let mut kept: Vec<ScgEvent> = Vec::with_capacity(events.len());
    let mut dropped = 0;
    for e in events {
        let original = window_slice(&ch.samples, e.ref_index as isize, len)?;
        if is_constant(original) {
            dropped += 1;
            continue;
        }
        let mut e = e.clone();
        e.window = original.to_vec();
        e.align_shift = 0;
        kept.push(e);
    }
    if dropped > 0 {
        log::warn!("alignment dropped {dropped} event(s) with constant windows");
    }
    if kept.is_empty() {
        return Err(CardioError::EmptyGroup);
    }
    if kept.len() == 1 {
        return Ok(AlignedGroup {
            events: kept,
            dropped,
        });
    }

    let mut reference = 0;
    let mut best_rms = f64::NEG_INFINITY;
    for (i, e) in kept.iter().enumerate() {
        let r = rms(&e.window)?;
        if r > best_rms {
            best_rms = r;
            reference = i;
        }
    }
    let reference_window = kept[reference].window.clone();
    let first_pass = kept
        .iter()
        .map(|e| aligned_window(ch, e, &reference_window, max_shift))
        .collect::<Result<Vec<_>>>()?;
    let windows: Vec<&[f64]> = first_pass.iter().map(|(_, w)| w.as_slice()).collect();
    let first_avg = average_windows(&windows)?;

    let second_pass = if is_constant(&first_avg) {
        first_pass
    } else {
        kept.iter()
            .map(|e| aligned_window(ch, e, &first_avg, max_shift))
            .collect::<Result<Vec<_>>>()?
    };
    for (e, (lag, w)) in kept.iter_mut().zip(second_pass) {
        e.align_shift = lag;
        e.window = w;
    }
    Ok(AlignedGroup {
        events: kept,
        dropped,
    })
}

/// Per-group result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: GroupId,
    pub n: usize,
    pub ensemble_avg: Vec<f64>,
    /// Dissimilarity against the group's own average.
    pub same: DissimSummary,
    /// Dissimilarity against the other group's average.
    pub alt: DissimSummary,
    pub rd: f64,
    pub dropped: usize,
}

impl GroupStats {
    /// Builds a row from already-computed summaries, deriving `rd`.
    pub fn from_summaries(group: GroupId, same: DissimSummary, alt: DissimSummary) -> Result<Self> {
        Ok(Self {
            group,
            n: same.n,
            ensemble_avg: Vec::new(),
            rd: relative_difference(same.mean, alt.mean)?,
            same,
            alt,
            dropped: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionStats {
    pub criterion: Criterion,
    pub groups: [GroupStats; 2],
}

/// Splits labeled events by `criterion` and scores both groups.
pub fn evaluate_criterion(
    ch: &Channel,
    events: &[ScgEvent],
    criterion: Criterion,
    max_shift: usize,
) -> Result<CriterionStats> {
    let [ga, gb] = criterion.groups();
    let mut split: [Vec<ScgEvent>; 2] = [Vec::new(), Vec::new()];
    for e in events {
        match criterion.group_of(e) {
            Some(g) if g == ga => split[0].push(e.clone()),
            Some(_) => split[1].push(e.clone()),
            None => {
                return Err(CardioError::InvalidArgument(format!(
                    "event at {} has no {} label",
                    e.ref_index,
                    criterion.name()
                )))
            }
        }
    }
    for (g, members) in [ga, gb].iter().zip(&split) {
        if members.is_empty() {
            return Err(CardioError::DegenerateSplit {
                criterion: criterion.name(),
                group: g.name(),
            });
        }
    }

    let aligned = [
        align_events(ch, &split[0], max_shift)?,
        align_events(ch, &split[1], max_shift)?,
    ];
    let averages = [
        ensemble_average(&aligned[0].events)?,
        ensemble_average(&aligned[1].events)?,
    ];
    for avg in &averages {
        if rms(avg)? == 0.0 {
            return Err(CardioError::DegenerateAverage);
        }
    }

    let score = |own: usize| -> Result<GroupStats> {
        let other = 1 - own;
        let same = mean_dissimilarity(&aligned[own].events, &averages[own])?;
        let alt_values = aligned[own]
            .events
            .iter()
            .map(|e| {
                let (_, w) = aligned_window(ch, e, &averages[other], max_shift)?;
                normalized_dissim(&w, &averages[other])
            })
            .collect::<Result<Vec<_>>>()?;
        let alt = DissimSummary::from_values(&alt_values)?;
        Ok(GroupStats {
            group: [ga, gb][own],
            n: aligned[own].events.len(),
            ensemble_avg: averages[own].clone(),
            rd: relative_difference(same.mean, alt.mean)?,
            same,
            alt,
            dropped: aligned[own].dropped,
        })
    };
    Ok(CriterionStats {
        criterion,
        groups: [score(0)?, score(1)?],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWinner {
    pub flow_group: GroupId,
    pub volume_group: GroupId,
    pub winner: Winner,
}

/// Both criteria side by side, paired Inspiration with LLV and Expiration
/// with HLV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionComparison {
    pub flow_rate: CriterionStats,
    pub lung_volume: CriterionStats,
    pub pairs: [PairWinner; 2],
    /// Winner on the mean RD of each criterion's two groups.
    pub overall: Winner,
}

/// Larger RD wins; differences within [`TIE_TOLERANCE`] are ties.
pub fn pick_winner(rd_flow: f64, rd_volume: f64) -> Winner {
    let diff = rd_volume - rd_flow;
    if diff.abs() <= TIE_TOLERANCE {
        Winner::Tie
    } else if diff > 0.0 {
        Winner::LungVolume
    } else {
        Winner::FlowRate
    }
}

impl CriterionComparison {
    pub fn from_stats(flow_rate: CriterionStats, lung_volume: CriterionStats) -> Self {
        let pairs = [0, 1].map(|i| PairWinner {
            flow_group: flow_rate.groups[i].group,
            volume_group: lung_volume.groups[i].group,
            winner: pick_winner(flow_rate.groups[i].rd, lung_volume.groups[i].rd),
        });
        let mean_rd = |c: &CriterionStats| 0.5 * (c.groups[0].rd + c.groups[1].rd);
        let overall = pick_winner(mean_rd(&flow_rate), mean_rd(&lung_volume));
        Self {
            flow_rate,
            lung_volume,
            pairs,
            overall,
        }
    }

    pub fn group(&self, id: GroupId) -> &GroupStats {
        let c = match id.criterion() {
            Criterion::FlowRate => &self.flow_rate,
            Criterion::LungVolume => &self.lung_volume,
        };
        c.groups.iter().find(|g| g.group == id).expect("criterion holds its groups")
    }
}

pub fn compare_criteria(ch: &Channel, events: &[ScgEvent], max_shift: usize) -> Result<CriterionComparison> {
    let flow = evaluate_criterion(ch, events, Criterion::FlowRate, max_shift)?;
    let volume = evaluate_criterion(ch, events, Criterion::LungVolume, max_shift)?;
    Ok(CriterionComparison::from_stats(flow, volume))
}
