//! C ABI for cardioseis.
//!
//! Every fallible call returns a [`CsStatus`]; on failure the message is
//! available from [`cs_last_error_message`] on the same thread. Objects
//! crossing the boundary are opaque handles created by a `*_new`/`*_run`/
//! `*_generate` call and released with the matching `*_free`.
//!
//! Buffers passed in are borrowed for the duration of the call only. Output
//! arrays are caller-allocated unless a function says otherwise.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cardioseis::config::PipelineConfig;
use cardioseis::detection::{detect_events, DetectionParams, ScgEvent, Template};
use cardioseis::error::{CardioError, ErrorKind};
use cardioseis::grouping::{normalized_dissim, relative_difference, GroupId, Winner};
use cardioseis::pipeline::{analyze_recording, run_pipeline, write_artifacts, PipelineOutput};
use cardioseis::report::{check_report, Report, ReportRow};
use cardioseis::signal::{best_lag, hilbert_envelope, lowpass, resample, rms, Channel};
use cardioseis::synth::{default_morphologies, gen_recording, Coupling, GroundTruth, Recording, SynthConfig, MORPHOLOGY_SECONDS};

/// Status codes. Values 2-4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, or an out-of-range argument at the boundary.
    InvalidArgument = 1,
    /// Bad input data or configuration.
    InputError = 2,
    /// The data cannot be analysed (empty group, zero average, ...).
    Degenerate = 3,
    /// Internal invariant violation or a caught panic.
    Internal = 4,
    /// Caller-provided output buffer is too small.
    BufferTooSmall = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsCoupling {
    Volume = 0,
    Flow = 1,
    None = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsGroup {
    Inspiration = 0,
    Expiration = 1,
    Llv = 2,
    Hlv = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsWinner {
    FlowRate = 0,
    LungVolume = 1,
    Tie = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsChannelKind {
    Scg = 0,
    Ecg = 1,
    Flow = 2,
}

/// Detected events (opaque).
pub struct CsEvents {
    events: Vec<ScgEvent>,
}

/// A synthetic recording with ground truth (opaque).
pub struct CsSynth {
    recording: Recording,
    truth: GroundTruth,
    morphology_len: usize,
}

/// Pipeline results for one or more recordings (opaque).
pub struct CsAnalysis {
    output: PipelineOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(kind: ErrorKind) -> CsStatus {
    match kind {
        ErrorKind::Input => CsStatus::InputError,
        ErrorKind::Degenerate => CsStatus::Degenerate,
        ErrorKind::Internal => CsStatus::Internal,
    }
}

struct Failure(CsStatus, String);

impl From<CardioError> for Failure {
    fn from(e: CardioError) -> Self {
        Failure(status_of(e.kind()), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(CsStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CsStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside cardioseis".into());
            CsStatus::Internal
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(invalid("null input buffer"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn out_ref<'a, T>(ptr: *mut T) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| invalid("null output pointer"))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, cap: usize) -> Result<(), Failure> {
    if values.len() > cap {
        return Err(Failure(
            CsStatus::BufferTooSmall,
            format!("need {} elements, buffer holds {cap}", values.len()),
        ));
    }
    if !values.is_empty() {
        if out.is_null() {
            return Err(invalid("null output buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(invalid("null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid("string is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Last error message on this thread, or NULL. Valid until the next
/// cardioseis call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Frees a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cs_rms(x: *const f64, len: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        *out_ref(out)? = rms(slice(x, len)?)?;
        Ok(())
    })
}

/// Zero-phase low-pass; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cs_lowpass(
    x: *const f64,
    len: usize,
    fs: f64,
    cutoff_hz: f64,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let ch = Channel::new(slice(x, len)?.to_vec(), fs, "ffi")?;
        copy_out(&lowpass(&ch, cutoff_hz)?.samples, out, len)
    })
}

/// Output length of [`cs_resample`] for the given input.
#[no_mangle]
pub extern "C" fn cs_resample_len(len: usize, fs: f64, target_fs: f64) -> usize {
    if !(fs > 0.0 && target_fs > 0.0) {
        return 0;
    }
    (len as f64 * target_fs / fs).round() as usize
}

/// Rational resampling. `out` holds `out_cap` values; the number written
/// goes to `out_len`.
#[no_mangle]
pub unsafe extern "C" fn cs_resample(
    x: *const f64,
    len: usize,
    fs: f64,
    target_fs: f64,
    out: *mut f64,
    out_cap: usize,
    out_len: *mut usize,
) -> CsStatus {
    guard(|| {
        let ch = Channel::new(slice(x, len)?.to_vec(), fs, "ffi")?;
        let y = resample(&ch, target_fs)?;
        let n = out_ref(out_len)?;
        *n = y.len();
        copy_out(&y.samples, out, out_cap)
    })
}

/// Hilbert envelope; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn cs_hilbert_envelope(x: *const f64, len: usize, out: *mut f64) -> CsStatus {
    guard(|| copy_out(&hilbert_envelope(slice(x, len)?)?, out, len))
}

#[no_mangle]
pub unsafe extern "C" fn cs_best_lag(
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    max_lag: usize,
    out: *mut isize,
) -> CsStatus {
    guard(|| {
        *out_ref(out)? = best_lag(slice(x, x_len)?, slice(y, y_len)?, max_lag)?;
        Ok(())
    })
}

/// Normalized dissimilarity (%) of `event` against `avg`, both `len` long.
#[no_mangle]
pub unsafe extern "C" fn cs_normalized_dissim(
    event: *const f64,
    avg: *const f64,
    len: usize,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        *out_ref(out)? = normalized_dissim(slice(event, len)?, slice(avg, len)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_relative_difference(mean_same: f64, mean_alt: f64, out: *mut f64) -> CsStatus {
    guard(|| {
        *out_ref(out)? = relative_difference(mean_same, mean_alt)?;
        Ok(())
    })
}

/// Detects events in a conditioned channel using the template at samples
/// `template_start .. template_start + template_len`.
#[no_mangle]
pub unsafe extern "C" fn cs_detect_events(
    x: *const f64,
    len: usize,
    fs: f64,
    template_start: usize,
    template_len: usize,
    threshold_frac: f64,
    min_separation_s: f64,
    out: *mut *mut CsEvents,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let ch = Channel::new(slice(x, len)?.to_vec(), fs, "scg")?;
        let end = template_start
            .checked_add(template_len)
            .filter(|&e| e <= len)
            .ok_or_else(|| invalid("template span outside the signal"))?;
        let mut tpl = Template::new(ch.samples[template_start..end].to_vec(), fs)?;
        tpl.source_span = Some((template_start, template_len));
        let params = DetectionParams {
            threshold_frac,
            min_separation_s,
        };
        let events = detect_events(&ch, &tpl, &params)?;
        *out = Box::into_raw(Box::new(CsEvents { events }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_events_count(events: *const CsEvents) -> usize {
    events.as_ref().map_or(0, |e| e.events.len())
}

/// Copies up to `cap` reference indices into `out`.
#[no_mangle]
pub unsafe extern "C" fn cs_events_ref_indices(events: *const CsEvents, out: *mut usize, cap: usize) -> CsStatus {
    guard(|| {
        let e = events.as_ref().ok_or_else(|| invalid("null events handle"))?;
        let idx: Vec<usize> = e.events.iter().map(|e| e.ref_index).collect();
        if idx.len() > cap {
            return Err(Failure(
                CsStatus::BufferTooSmall,
                format!("need {} elements, buffer holds {cap}", idx.len()),
            ));
        }
        if !idx.is_empty() {
            if out.is_null() {
                return Err(invalid("null output buffer"));
            }
            ptr::copy_nonoverlapping(idx.as_ptr(), out, idx.len());
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_events_free(events: *mut CsEvents) {
    if !events.is_null() {
        drop(Box::from_raw(events));
    }
}

/// Generates a synthetic recording with the default morphologies.
/// A non-finite `snr_db` produces a noiseless recording.
#[no_mangle]
pub unsafe extern "C" fn cs_synth_generate(
    seed: u64,
    coupling: CsCoupling,
    duration_s: f64,
    fs: f64,
    snr_db: f64,
    coupling_strength: f64,
    out: *mut *mut CsSynth,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let cfg = SynthConfig {
            duration_s,
            fs,
            coupling: match coupling {
                CsCoupling::Volume => Coupling::Volume,
                CsCoupling::Flow => Coupling::Flow,
                CsCoupling::None => Coupling::None,
            },
            coupling_strength,
            snr_db: snr_db.is_finite().then_some(snr_db),
            seed,
            ..Default::default()
        };
        let (m_low, m_high) = default_morphologies(fs);
        let (recording, truth) = gen_recording(&cfg, &m_low, &m_high)?;
        *out = Box::into_raw(Box::new(CsSynth {
            recording,
            truth,
            morphology_len: m_low.len(),
        }));
        Ok(())
    })
}

/// Borrows a channel of a synthetic recording. The pointer stays valid
/// until the handle is freed.
#[no_mangle]
pub unsafe extern "C" fn cs_synth_channel(
    synth: *const CsSynth,
    kind: CsChannelKind,
    data: *mut *const f64,
    len: *mut usize,
) -> CsStatus {
    guard(|| {
        let s = synth.as_ref().ok_or_else(|| invalid("null synth handle"))?;
        let ch = match kind {
            CsChannelKind::Scg => &s.recording.scg,
            CsChannelKind::Ecg => &s.recording.ecg,
            CsChannelKind::Flow => &s.recording.flow,
        };
        *out_ref(data)? = ch.samples.as_ptr();
        *out_ref(len)? = ch.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_synth_beat_count(synth: *const CsSynth) -> usize {
    synth.as_ref().map_or(0, |s| s.truth.beat_indices.len())
}

#[no_mangle]
pub unsafe extern "C" fn cs_synth_beat_indices(synth: *const CsSynth, out: *mut usize, cap: usize) -> CsStatus {
    guard(|| {
        let s = synth.as_ref().ok_or_else(|| invalid("null synth handle"))?;
        let idx = &s.truth.beat_indices;
        if idx.len() > cap {
            return Err(Failure(
                CsStatus::BufferTooSmall,
                format!("need {} elements, buffer holds {cap}", idx.len()),
            ));
        }
        if !idx.is_empty() {
            if out.is_null() {
                return Err(invalid("null output buffer"));
            }
            ptr::copy_nonoverlapping(idx.as_ptr(), out, idx.len());
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_synth_free(synth: *mut CsSynth) {
    if !synth.is_null() {
        drop(Box::from_raw(synth));
    }
}

/// Runs the pipeline described by a config file (inputs, rates, template
/// span). Nothing is written to disk; see [`cs_analysis_write`].
#[no_mangle]
pub unsafe extern "C" fn cs_analysis_run(config_path: *const c_char, out: *mut *mut CsAnalysis) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let cfg = PipelineConfig::from_file(Path::new(str_arg(config_path)?))?;
        let output = run_pipeline(&cfg).map_err(|e| Failure(status_of(e.kind()), e.to_string()))?;
        *out = Box::into_raw(Box::new(CsAnalysis { output }));
        Ok(())
    })
}

/// Analyses a synthetic recording in memory at `analysis_fs`, using its
/// first beat as the template and default settings otherwise.
#[no_mangle]
pub unsafe extern "C" fn cs_analysis_from_synth(
    synth: *const CsSynth,
    analysis_fs: f64,
    out: *mut *mut CsAnalysis,
) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let s = synth.as_ref().ok_or_else(|| invalid("null synth handle"))?;
        let fs = s.recording.fs();
        let first = *s
            .truth
            .beat_indices
            .first()
            .ok_or(CardioError::EmptyGroup)?;
        let cfg = PipelineConfig {
            acquisition_fs: fs,
            analysis_fs,
            template_start_s: (first - s.morphology_len / 2) as f64 / fs,
            template_length_s: MORPHOLOGY_SECONDS,
            ..Default::default()
        };
        let analysis = analyze_recording(&s.recording, &cfg)
            .map_err(|e| Failure(status_of(e.kind()), e.to_string()))?;
        let report = Report::new(vec![analysis.report_row()]);
        *out = Box::into_raw(Box::new(CsAnalysis {
            output: PipelineOutput {
                report,
                analyses: vec![analysis],
            },
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_analysis_recording_count(analysis: *const CsAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.output.report.rows.len())
}

unsafe fn row<'a>(analysis: *const CsAnalysis, index: usize) -> Result<&'a ReportRow, Failure> {
    let a = analysis.as_ref().ok_or_else(|| invalid("null analysis handle"))?;
    a.output
        .report
        .rows
        .get(index)
        .ok_or_else(|| invalid("recording index out of range"))
}

fn group_id(g: CsGroup) -> GroupId {
    match g {
        CsGroup::Inspiration => GroupId::Inspiration,
        CsGroup::Expiration => GroupId::Expiration,
        CsGroup::Llv => GroupId::Llv,
        CsGroup::Hlv => GroupId::Hlv,
    }
}

fn cs_winner(w: Winner) -> CsWinner {
    match w {
        Winner::FlowRate => CsWinner::FlowRate,
        Winner::LungVolume => CsWinner::LungVolume,
        Winner::Tie => CsWinner::Tie,
    }
}

/// Relative difference (%) and event count of one group of one recording.
#[no_mangle]
pub unsafe extern "C" fn cs_analysis_group(
    analysis: *const CsAnalysis,
    recording_index: usize,
    group: CsGroup,
    rd: *mut f64,
    n_events: *mut usize,
) -> CsStatus {
    guard(|| {
        let r = row(analysis, recording_index)?;
        let id = group_id(group);
        let g = r
            .groups
            .iter()
            .find(|g| g.group == id)
            .ok_or_else(|| Failure(CsStatus::Internal, "group missing from report".into()))?;
        *out_ref(rd)? = g.rd;
        *out_ref(n_events)? = g.n;
        Ok(())
    })
}

/// Winner for a pair (0 = inspiration/LLV, 1 = expiration/HLV) or, with
/// `pair == 2`, the overall winner.
#[no_mangle]
pub unsafe extern "C" fn cs_analysis_winner(
    analysis: *const CsAnalysis,
    recording_index: usize,
    pair: usize,
    out: *mut CsWinner,
) -> CsStatus {
    guard(|| {
        let r = row(analysis, recording_index)?;
        let w = match pair {
            0 | 1 => r.pairs.get(pair).map(|p| p.winner),
            2 => Some(r.overall),
            _ => None,
        }
        .ok_or_else(|| invalid("pair must be 0, 1 or 2"))?;
        *out_ref(out)? = cs_winner(w);
        Ok(())
    })
}

/// The JSON report as a new string; free it with [`cs_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cs_analysis_report_json(analysis: *const CsAnalysis, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let a = analysis.as_ref().ok_or_else(|| invalid("null analysis handle"))?;
        *out = into_c_string(a.output.report.to_json()?);
        Ok(())
    })
}

/// Writes the report and plot files into `out_dir`.
#[no_mangle]
pub unsafe extern "C" fn cs_analysis_write(analysis: *const CsAnalysis, out_dir: *const c_char) -> CsStatus {
    guard(|| {
        let a = analysis.as_ref().ok_or_else(|| invalid("null analysis handle"))?;
        write_artifacts(Path::new(str_arg(out_dir)?), &a.output)
            .map_err(|e| Failure(status_of(e.kind()), e.to_string()))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_analysis_free(analysis: *mut CsAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Checks a JSON report for internal consistency. `problems` receives the
/// number of inconsistencies found (0 means consistent).
#[no_mangle]
pub unsafe extern "C" fn cs_report_check_json(json: *const c_char, problems: *mut usize) -> CsStatus {
    guard(|| {
        let report = Report::from_json(str_arg(json)?)?;
        let found = check_report(&report);
        *out_ref(problems)? = found.len();
        Ok(())
    })
}
