//! Seismocardiogram (SCG) heartbeat detection and respiration-gated
//! morphology analysis.
//!
//! The pipeline conditions a chest-acceleration channel, finds heartbeats
//! with a matched filter, labels each beat by respiratory flow direction
//! (inspiration/expiration) and by lung-volume half (low/high), and scores
//! how similar the beats within each group are. Comparing the two
//! criteria shows which one separates beat morphologies better.
//!
//! Modules, bottom-up:
//! - [`signal`]: channels, RMS, zero-phase low-pass, resampling, Hilbert
//!   envelope, lag search.
//! - [`detection`]: matched filtering and event extraction.
//! - [`respiration`]: flow integration and phase labels.
//! - [`grouping`]: alignment, ensemble averages, dissimilarity metrics.
//! - [`synth`]: synthetic recordings with ground truth.
//! - [`config`], [`io`], [`report`], [`plot`], [`pipeline`]: the CLI side.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detection;
pub mod error;
pub mod grouping;
pub mod io;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod respiration;
pub mod signal;
pub mod synth;

pub use config::PipelineConfig;
pub use detection::{DetectionParams, ScgEvent, Template};
pub use error::{CardioError, ErrorKind, Result};
pub use grouping::{CriterionComparison, GroupId, GroupStats, Winner};
pub use respiration::{FlowPhase, RespirationTrace, VolumePhase};
pub use signal::Channel;
pub use synth::{Coupling, GroundTruth, Recording, SynthConfig};
