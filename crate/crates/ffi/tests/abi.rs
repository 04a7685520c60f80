use std::ffi::{CStr, CString};
use std::ptr;

use cardioseis_ffi::*;

fn last_error() -> String {
    let p = cs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(cs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn rms_and_errors() {
    let x = [3.0, 4.0];
    let mut out = 0.0;
    assert_eq!(unsafe { cs_rms(x.as_ptr(), 2, &mut out) }, CsStatus::Ok);
    assert!((out - (12.5f64).sqrt()).abs() < 1e-12);
    assert!(cs_last_error_message().is_null());

    assert_eq!(unsafe { cs_rms(x.as_ptr(), 0, &mut out) }, CsStatus::InputError);
    assert!(last_error().contains("empty"));
    assert_eq!(unsafe { cs_rms(ptr::null(), 2, &mut out) }, CsStatus::InvalidArgument);
    assert_eq!(unsafe { cs_rms(x.as_ptr(), 2, ptr::null_mut()) }, CsStatus::InvalidArgument);
}

#[test]
fn lowpass_and_resample_through_the_abi() {
    let fs = 320.0;
    let x: Vec<f64> = (0..640).map(|i| (2.0 * std::f64::consts::PI * 5.0 * i as f64 / fs).sin()).collect();
    let mut y = vec![0.0; x.len()];
    assert_eq!(unsafe { cs_lowpass(x.as_ptr(), x.len(), fs, 100.0, y.as_mut_ptr()) }, CsStatus::Ok);
    let mid_err = x[100..540].iter().zip(&y[100..540]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(mid_err < 0.06);
    assert_eq!(
        unsafe { cs_lowpass(x.as_ptr(), x.len(), fs, 200.0, y.as_mut_ptr()) },
        CsStatus::InputError
    );
    assert!(last_error().contains("Nyquist"));

    let n = cs_resample_len(x.len(), fs, 1000.0);
    assert_eq!(n, 2000);
    let mut out = vec![0.0; n];
    let mut written = 0;
    let small = unsafe { cs_resample(x.as_ptr(), x.len(), fs, 1000.0, out.as_mut_ptr(), 10, &mut written) };
    assert_eq!(small, CsStatus::BufferTooSmall);
    assert_eq!(written, n);
    assert_eq!(
        unsafe { cs_resample(x.as_ptr(), x.len(), fs, 1000.0, out.as_mut_ptr(), n, &mut written) },
        CsStatus::Ok
    );
    assert_eq!(written, n);
}

#[test]
fn metrics_through_the_abi() {
    let mut v = 0.0;
    assert_eq!(unsafe { cs_relative_difference(25.0252, 33.2976, &mut v) }, CsStatus::Ok);
    assert!((v - 33.06).abs() < 0.02);
    assert_eq!(unsafe { cs_relative_difference(0.0, 1.0, &mut v) }, CsStatus::Degenerate);

    let (e, a) = ([2.0, 2.0], [1.0, 1.0]);
    assert_eq!(unsafe { cs_normalized_dissim(e.as_ptr(), a.as_ptr(), 2, &mut v) }, CsStatus::Ok);
    assert!((v - 100.0).abs() < 1e-12);
    let z = [0.0, 0.0];
    assert_eq!(
        unsafe { cs_normalized_dissim(e.as_ptr(), z.as_ptr(), 2, &mut v) },
        CsStatus::Degenerate
    );

    let x = [0.0, 1.0, 0.0, 0.0, 0.0];
    let y = [0.0, 0.0, 0.0, 1.0, 0.0];
    let mut lag = 0isize;
    assert_eq!(unsafe { cs_best_lag(x.as_ptr(), 5, y.as_ptr(), 5, 3, &mut lag) }, CsStatus::Ok);
    assert_eq!(lag, 2);

    let mut env = [0.0; 5];
    assert_eq!(unsafe { cs_hilbert_envelope(x.as_ptr(), 5, env.as_mut_ptr()) }, CsStatus::Ok);
}

#[test]
fn synth_detect_and_analyse() {
    let mut synth = ptr::null_mut();
    assert_eq!(
        unsafe { cs_synth_generate(7, CsCoupling::Volume, 60.0, 320.0, 20.0, 1.0, &mut synth) },
        CsStatus::Ok
    );
    let beats = unsafe { cs_synth_beat_count(synth) };
    assert!(beats > 50);
    let mut truth = vec![0usize; beats];
    assert_eq!(
        unsafe { cs_synth_beat_indices(synth, truth.as_mut_ptr(), beats) },
        CsStatus::Ok
    );

    let (mut data, mut len) = (ptr::null(), 0usize);
    assert_eq!(
        unsafe { cs_synth_channel(synth, CsChannelKind::Scg, &mut data, &mut len) },
        CsStatus::Ok
    );
    let mut events = ptr::null_mut();
    let start = truth[0] - 48;
    assert_eq!(
        unsafe { cs_detect_events(data, len, 320.0, start, 96, 0.5, 0.4, &mut events) },
        CsStatus::Ok
    );
    let n = unsafe { cs_events_count(events) };
    let mut idx = vec![0usize; n];
    assert_eq!(unsafe { cs_events_ref_indices(events, idx.as_mut_ptr(), n) }, CsStatus::Ok);
    assert_eq!(n, beats);
    for (d, t) in idx.iter().zip(&truth) {
        assert!(d.abs_diff(*t) <= 2);
    }
    unsafe { cs_events_free(events) };

    let mut analysis = ptr::null_mut();
    assert_eq!(
        unsafe { cs_analysis_from_synth(synth, 320.0, &mut analysis) },
        CsStatus::Ok
    );
    assert_eq!(unsafe { cs_analysis_recording_count(analysis) }, 1);
    let mut w = CsWinner::Tie;
    for pair in 0..3 {
        assert_eq!(unsafe { cs_analysis_winner(analysis, 0, pair, &mut w) }, CsStatus::Ok);
        assert_eq!(w, CsWinner::LungVolume);
    }
    assert_eq!(
        unsafe { cs_analysis_winner(analysis, 0, 3, &mut w) },
        CsStatus::InvalidArgument
    );
    let (mut rd, mut count) = (0.0, 0usize);
    assert_eq!(
        unsafe { cs_analysis_group(analysis, 0, CsGroup::Llv, &mut rd, &mut count) },
        CsStatus::Ok
    );
    assert!(rd > 10.0 && count > 0);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { cs_analysis_report_json(analysis, &mut json) }, CsStatus::Ok);
    let mut problems = usize::MAX;
    assert_eq!(unsafe { cs_report_check_json(json, &mut problems) }, CsStatus::Ok);
    assert_eq!(problems, 0);
    unsafe { cs_string_free(json) };

    let dir = tempfile_dir();
    let c_dir = CString::new(dir.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cs_analysis_write(analysis, c_dir.as_ptr()) }, CsStatus::Ok);
    assert!(dir.join("report.json").exists());
    std::fs::remove_dir_all(&dir).ok();

    unsafe {
        cs_analysis_free(analysis);
        cs_synth_free(synth);
    }
}

#[test]
fn null_handles_are_safe() {
    unsafe {
        cs_events_free(ptr::null_mut());
        cs_synth_free(ptr::null_mut());
        cs_analysis_free(ptr::null_mut());
        cs_string_free(ptr::null_mut());
        assert_eq!(cs_events_count(ptr::null()), 0);
        assert_eq!(cs_synth_beat_count(ptr::null()), 0);
        let mut out = ptr::null_mut();
        assert_eq!(cs_analysis_run(ptr::null(), &mut out), CsStatus::InvalidArgument);
        let missing = CString::new("/nonexistent/config.txt").unwrap();
        assert_eq!(cs_analysis_run(missing.as_ptr(), &mut out), CsStatus::InputError);
        assert!(out.is_null());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cardioseis.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() > 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct CsAnalysis CsAnalysis;"));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cardioseis-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
