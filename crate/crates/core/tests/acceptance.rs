//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cardioseis::detection::{detect_events, matched_filter_output, DetectionParams, ScgEvent, Template};
use cardioseis::grouping::{drms, ensemble_average, mean_dissimilarity, normalized_dissim, relative_difference, Winner};
use cardioseis::io::write_recording_csv;
use cardioseis::pipeline::run_pipeline;
use cardioseis::report::{check_report, Report};
use cardioseis::respiration::integrate_flow;
use cardioseis::signal::{design_lowpass, hilbert_envelope, lowpass, symmetric_amplitude, Channel};
use cardioseis::synth::{gen_respiration, Coupling};

use common::*;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/published_tables.json");

// Published RD columns, subjects 1-7: (insp, exp) then (llv, hlv).
const PUBLISHED_RD_FR: [(f64, f64); 7] = [
    (33.06, 18.29),
    (10.83, 5.92),
    (28.65, 13.97),
    (40.18, 50.30),
    (8.21, 14.17),
    (38.43, -1.43),
    (33.16, 20.53),
];
const PUBLISHED_RD_LV: [(f64, f64); 7] = [
    (52.52, 26.14),
    (7.26, 46.48),
    (84.31, 66.38),
    (76.54, 104.49),
    (47.14, 133.97),
    (90.39, 87.83),
    (131.98, 27.22),
];

const RD_TOL: f64 = 0.02;
const TABLE_BUDGET: Duration = Duration::from_secs(1);
const HEADLINE_SEEDS: u64 = 100;
const HEADLINE_MIN_WINS: usize = 95;
const HEADLINE_MIN_NULL: usize = 90;
const NULL_RD_LIMIT: f64 = 5.0;
const HEADLINE_BUDGET: Duration = Duration::from_secs(60);
const DETECTION_SEEDS: u64 = 20;
const DETECTION_TOL_SAMPLES: usize = 2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let report = match Report::read(Path::new(FIXTURE)) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("fixture unreadable: {e}")),
    };
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (row, (fr, lv)) in report.rows.iter().zip(PUBLISHED_RD_FR.iter().zip(&PUBLISHED_RD_LV)) {
        let published = [fr.0, fr.1, lv.0, lv.1];
        for (g, want) in row.groups.iter().zip(published) {
            let got = relative_difference(g.same_mean, g.alt_mean).unwrap_or(f64::NAN);
            worst = worst.max((got - want).abs());
            count += 1;
        }
    }
    let problems = check_report(&report);
    let cli = Command::new(env!("CARGO_BIN_EXE_cardioseis"))
        .args(["report", "--check", FIXTURE])
        .output()
        .map(|o| o.status.code() == Some(0))
        .unwrap_or(false);
    let in_process = start.elapsed();
    let pass = count == 28 && worst <= RD_TOL && problems.is_empty() && cli && in_process < TABLE_BUDGET;
    outcome(
        pass,
        format!(
            "{count}/28 RDs, max |err| {worst:.4} (tol {RD_TOL}), check problems {}, cli check {}, {:.3}s",
            problems.len(),
            if cli { "ok" } else { "failed" },
            in_process.as_secs_f64()
        ),
    )
}

fn headline() -> Outcome {
    let start = Instant::now();
    let mut volume_wins = 0;
    let mut flow_wins = 0;
    let mut null_ok = 0;
    let mut errors = 0;
    for seed in 0..HEADLINE_SEEDS {
        for coupling in [Coupling::Volume, Coupling::Flow, Coupling::None] {
            let cmp = match analyze_synth(&desk_config(coupling, seed, Some(20.0))) {
                Ok((a, _)) => a.comparison,
                Err(_) => {
                    errors += 1;
                    continue;
                }
            };
            let both = |w: Winner| cmp.pairs.iter().all(|p| p.winner == w);
            match coupling {
                Coupling::Volume => volume_wins += usize::from(both(Winner::LungVolume)),
                Coupling::Flow => flow_wins += usize::from(both(Winner::FlowRate)),
                Coupling::None => {
                    let rds = [
                        &cmp.flow_rate.groups[0],
                        &cmp.flow_rate.groups[1],
                        &cmp.lung_volume.groups[0],
                        &cmp.lung_volume.groups[1],
                    ];
                    null_ok += usize::from(rds.iter().all(|g| g.rd.abs() < NULL_RD_LIMIT));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = volume_wins >= HEADLINE_MIN_WINS
        && flow_wins >= HEADLINE_MIN_WINS
        && null_ok >= HEADLINE_MIN_NULL
        && elapsed < HEADLINE_BUDGET;
    outcome(
        pass,
        format!(
            "volume->lung_volume {volume_wins}/{HEADLINE_SEEDS}, flow->flow_rate {flow_wins}/{HEADLINE_SEEDS}, \
             none |RD|<{NULL_RD_LIMIT}% {null_ok}/{HEADLINE_SEEDS}, errors {errors}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// (truth beats, hits, detections, worst error) summed over seeds.
fn detection_counts(snr_db: f64) -> (usize, usize, usize, usize) {
    let (mut truth_n, mut hits, mut detected, mut worst) = (0, 0, 0, 0);
    for seed in 0..DETECTION_SEEDS {
        let (rec, truth) = synth(&desk_config(Coupling::Volume, seed, Some(snr_db)));
        let pcfg = pipeline_config_for(&rec, &truth);
        let Ok(scg) = lowpass(&rec.scg, pcfg.lowpass_hz) else { continue };
        let Ok(tpl) = Template::from_channel(&scg, pcfg.template_start_s, pcfg.template_length_s) else {
            continue;
        };
        let events = detect_events(&scg, &tpl, &DetectionParams::default()).unwrap_or_default();
        let idx: Vec<usize> = events.iter().map(|e| e.ref_index).collect();
        let (h, w) = match_beats(&truth.beat_indices, &idx, DETECTION_TOL_SAMPLES);
        truth_n += truth.beat_indices.len();
        hits += h;
        detected += idx.len();
        worst = worst.max(w);
    }
    (truth_n, hits, detected, worst)
}

fn detection_accuracy() -> Outcome {
    let (t20, h20, d20, w20) = detection_counts(20.0);
    let (t10, h10, _, _) = detection_counts(10.0);
    let recall20 = h20 as f64 / t20.max(1) as f64;
    let precision20 = h20 as f64 / d20.max(1) as f64;
    let recall10 = h10 as f64 / t10.max(1) as f64;
    let pass = recall20 >= 0.99 && precision20 >= 0.99 && w20 <= DETECTION_TOL_SAMPLES && recall10 >= 0.9;
    outcome(
        pass,
        format!(
            "20 dB recall {recall20:.4} precision {precision20:.4} max err {w20} samples; 10 dB recall {recall10:.4}"
        ),
    )
}

fn dsp_oracles() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // Matched filter against direct convolution.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..1000 {
        let l = rng.random_range(1..=64);
        let n = rng.random_range(l..=l + 400);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = matched_filter_output(&x, &w).expect("matched filter");
        let full = brute_convolution(&x, &w);
        let slow = &full[l - 1..l - 1 + n];
        let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let err = fast.iter().zip(slow).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_rel = worst_rel.max(err / scale);
    }
    pass &= worst_rel <= 1e-9;
    notes.push(format!("conv rel err {worst_rel:.1e}"));

    // Envelope of a unit 10 Hz sine.
    let fs = 1000.0;
    let x = sine(2000, fs, 10.0, 1.0);
    let env = hilbert_envelope(&x).expect("envelope");
    let lo = env.len() / 10;
    let flat = env[lo..env.len() - lo].iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    pass &= flat <= 0.01;
    notes.push(format!("envelope dev {flat:.1e}"));

    // Low-pass specification, from the kernel response and from tones.
    let fs = 320.0;
    let cutoff = 100.0;
    let h = design_lowpass(fs, cutoff).expect("design");
    let mut ripple: f64 = 0.0;
    let mut stop = f64::INFINITY;
    for k in 0..=1600 {
        let f = fs / 2.0 * k as f64 / 1600.0;
        let db = 20.0 * symmetric_amplitude(&h, fs, f).abs().max(1e-300).log10();
        if f <= 0.8 * cutoff {
            ripple = ripple.max(db.abs());
        } else if f >= 1.5 * cutoff {
            stop = stop.min(-db);
        }
    }
    let n = 3200;
    let tone_gain = |f: f64| {
        let ch = Channel::new(sine(n, fs, f, 1.0), fs, "t").unwrap();
        let y = lowpass(&ch, cutoff).unwrap().samples;
        let mid = &y[n / 4..3 * n / 4];
        20.0 * (tone_amplitude(mid, fs, f)).log10()
    };
    let pass_tone = tone_gain(20.0);
    let stop_tone = tone_gain(150.0);
    pass &= ripple <= 0.5 && stop >= 40.0 && pass_tone.abs() <= 0.5 && stop_tone <= -40.0;
    notes.push(format!(
        "lowpass ripple {ripple:.3} dB, stop {stop:.1} dB, 20 Hz {pass_tone:.3} dB, 150 Hz {stop_tone:.1} dB"
    ));

    // Integrated flow against the closed-form volume.
    let cfg = desk_config(Coupling::None, 0, None);
    let (flow, closed) = gen_respiration(&cfg).expect("respiration");
    let trace = integrate_flow(&flow, false).expect("integrate");
    let rel = rms_diff(&trace.volume.samples, &closed.samples) / rms_of(&closed.samples);
    pass &= rel <= 0.01;
    notes.push(format!("volume rms err {:.2e}", rel));

    outcome(pass, notes.join("; "))
}

fn metric_identities() -> Outcome {
    let mut pass = true;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..200);
        let e: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let k = rng.random_range(0.01..100.0);
        let ek: Vec<f64> = e.iter().map(|v| v * k).collect();
        let ak: Vec<f64> = a.iter().map(|v| v * k).collect();
        let d0 = normalized_dissim(&e, &a).unwrap();
        let d1 = normalized_dissim(&ek, &ak).unwrap();
        worst = worst.max((d0 - d1).abs() / d0.max(1e-300));
    }
    pass &= worst <= 1e-9;

    let w = vec![0.25, -1.5, 3.0, 0.125];
    let same: Vec<ScgEvent> = (0..7).map(|i| ScgEvent::new(100 * i, w.clone())).collect();
    let exact = ensemble_average(&same).unwrap() == w;
    pass &= exact;

    let micro = (drms(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12
        && (drms(&[1.0, 2.0], &[0.0, 0.0]).unwrap() - 1.5811).abs() < 1e-4
        && normalized_dissim(&w, &w).unwrap() == 0.0
        && (normalized_dissim(&[2.0, 2.0], &[1.0, 1.0]).unwrap() - 100.0).abs() < 1e-12;
    pass &= micro;

    // Two events at 10% and 30% of a unit average.
    let avg = vec![1.0, 1.0];
    let pair = vec![ScgEvent::new(0, vec![1.1, 1.1]), ScgEvent::new(1, vec![1.3, 1.3])];
    let s = mean_dissimilarity(&pair, &avg).unwrap();
    let sd_ok = (s.mean - 20.0).abs() < 1e-9 && (s.sd - 14.1421).abs() < 1e-4 && s.n == 2;
    pass &= sd_ok;

    outcome(
        pass,
        format!(
            "scale invariance err {worst:.1e}; identical-window average exact {exact}; micro-examples {micro}; \
             {{10,30}} -> ({:.4}, {:.4})",
            s.mean, s.sd
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let bin = env!("CARGO_BIN_EXE_cardioseis");
    let synth_ok = Command::new(bin)
        .args(["synth", "--seed", "42", "--coupling", "volume", "--fs", "1000", "--duration", "60", "--out"])
        .arg(dir.path())
        .status()
        .map(|s| s.success())
        .unwrap_or(false);
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let ok = Command::new(bin)
            .args(["run", "--config"])
            .arg(dir.path().join("config.txt"))
            .arg("--out")
            .arg(&out)
            .status()
            .map(|s| s.success())
            .unwrap_or(false);
        reports.push(if ok { std::fs::read(out.join("report.json")).ok() } else { None });
    }
    let cli_same = matches!((&reports[0], &reports[1]), (Some(a), Some(b)) if a == b);

    // In-process: regenerate the recording from the same seed, analyse twice.
    let (rec, truth) = synth(&desk_config(Coupling::Flow, 5, Some(20.0)));
    let csv = dir.path().join("inproc.csv");
    write_recording_csv(&csv, &rec).expect("write csv");
    let mut cfg = pipeline_config_for(&rec, &truth);
    cfg.inputs = vec![csv];
    let json = || run_pipeline(&cfg).ok().and_then(|o| o.report.to_json().ok());
    let a = json();
    let inproc_same = a.is_some() && a == json();

    outcome(
        synth_ok && cli_same && inproc_same,
        format!("cli reports identical {cli_same}; in-process reports identical {inproc_same}"),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Check; 6] = [
        ("1 table arithmetic reproduction", table_reproduction),
        ("2 headline criterion selection", headline),
        ("3 detection accuracy", detection_accuracy),
        ("4 dsp primitive oracles", dsp_oracles),
        ("5 metric identities", metric_identities),
        ("6 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
