use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cardioseis::config::PipelineConfig;
use cardioseis::error::{CardioError, ErrorKind};
use cardioseis::io::{write_ground_truth, write_recording_csv};
use cardioseis::pipeline::{run_pipeline, write_artifacts};
use cardioseis::report::{check_report, winner_name, Report};
use cardioseis::synth::{default_morphologies, gen_recording, Coupling, SynthConfig, MORPHOLOGY_SECONDS};

#[derive(Parser)]
#[command(name = "cardioseis", version, about = "SCG event detection and respiration-gated grouping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis pipeline and write reports and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Input CSV files; replaces any inputs listed in the config.
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra `key=value` overrides applied after the config file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Generate a synthetic recording, its ground truth, and a matching config.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "volume")]
        coupling: Coupling,
        #[arg(long)]
        out: PathBuf,
        /// Sampling rate of the written recording (Hz).
        #[arg(long, default_value_t = 1000.0)]
        fs: f64,
        #[arg(long, default_value_t = 120.0)]
        duration: f64,
        /// Omit for the default 20 dB; pass `inf` for a noiseless recording.
        #[arg(long, default_value_t = 20.0)]
        snr: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 66.0)]
        heart_rate: f64,
        #[arg(long, default_value_t = 0.25)]
        resp_freq: f64,
    },
    /// Inspect a report.
    Report {
        /// Recompute RDs and winners from each row's means.
        #[arg(long)]
        check: PathBuf,
    },
}

fn exit_code(kind: ErrorKind) -> ExitCode {
    match kind {
        ErrorKind::Input => ExitCode::from(2),
        ErrorKind::Degenerate => ExitCode::from(3),
        ErrorKind::Internal => ExitCode::from(4),
    }
}

fn fail(err: &CardioError) -> ExitCode {
    eprintln!("error: {err}");
    exit_code(err.kind())
}

fn run(config: &Path, input: Vec<PathBuf>, out: Option<PathBuf>, overrides: &[String]) -> ExitCode {
    let mut cfg = match PipelineConfig::from_file(config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let cwd = Path::new(".");
    for kv in overrides {
        let Some((k, v)) = kv.split_once('=') else {
            return fail(&CardioError::Config(format!("override '{kv}' is not key=value")));
        };
        if let Err(e) = cfg.set(k.trim(), v.trim(), cwd) {
            return fail(&e);
        }
    }
    if !input.is_empty() {
        cfg.inputs = input;
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }

    let output = match run_pipeline(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(e.kind());
        }
    };
    if let Err(e) = write_artifacts(&cfg.out_dir, &output) {
        eprintln!("error: {e}");
        return exit_code(e.kind());
    }
    for row in &output.report.rows {
        let rds: Vec<String> = row
            .groups
            .iter()
            .map(|g| format!("{} {:.2}% (n={})", g.group, g.rd, g.n))
            .collect();
        println!(
            "{}: {} events | {} | winner {}",
            row.recording_id,
            row.n_events,
            rds.join(", "),
            winner_name(row.overall)
        );
    }
    let problems = check_report(&output.report);
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("inconsistent report: {p}");
        }
        return ExitCode::from(4);
    }
    println!("report written to {}", cfg.out_dir.join("report.json").display());
    ExitCode::SUCCESS
}

#[allow(clippy::too_many_arguments)]
fn synth(
    seed: u64,
    coupling: Coupling,
    out: &Path,
    fs: f64,
    duration: f64,
    snr: f64,
    alpha: f64,
    heart_rate: f64,
    resp_freq: f64,
) -> ExitCode {
    let cfg = SynthConfig {
        duration_s: duration,
        fs,
        resp_freq,
        heart_rate_bpm: heart_rate,
        coupling,
        coupling_strength: alpha,
        snr_db: snr.is_finite().then_some(snr),
        seed,
        ..Default::default()
    };
    let (m_low, m_high) = default_morphologies(fs);
    let (rec, truth) = match gen_recording(&cfg, &m_low, &m_high) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        return fail(&CardioError::Io {
            path: out.to_path_buf(),
            source: e,
        });
    }
    let csv_path = out.join("recording.csv");
    if let Err(e) = write_recording_csv(&csv_path, &rec) {
        return fail(&e);
    }
    if let Err(e) = write_ground_truth(&out.join("ground_truth.json"), &truth) {
        return fail(&e);
    }

    // Template: the first generated beat.
    let m_len = m_low.len();
    let first = truth.beat_indices.first().copied().unwrap_or(m_len);
    let pipeline = PipelineConfig {
        inputs: vec![PathBuf::from("recording.csv")],
        acquisition_fs: fs,
        analysis_fs: fs.min(320.0),
        template_start_s: (first - m_len / 2) as f64 / fs,
        template_length_s: MORPHOLOGY_SECONDS,
        out_dir: PathBuf::from("results"),
        seed,
        ..Default::default()
    };
    let cfg_path = out.join("config.txt");
    if let Err(e) = std::fs::write(&cfg_path, pipeline.to_config_string()) {
        return fail(&CardioError::Io {
            path: cfg_path,
            source: e,
        });
    }
    println!(
        "wrote {} beats ({} coupling, seed {seed}) to {}",
        truth.beat_indices.len(),
        coupling,
        out.display()
    );
    ExitCode::SUCCESS
}

fn report_check(path: &Path) -> ExitCode {
    let report = match Report::read(path) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let problems = check_report(&report);
    if problems.is_empty() {
        println!("{}: {} rows consistent", path.display(), report.rows.len());
        ExitCode::SUCCESS
    } else {
        for p in &problems {
            println!("FAIL {p}");
        }
        ExitCode::from(4)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            input,
            out,
            overrides,
        } => run(&config, input, out, &overrides),
        Command::Synth {
            seed,
            coupling,
            out,
            fs,
            duration,
            snr,
            alpha,
            heart_rate,
            resp_freq,
        } => synth(seed, coupling, &out, fs, duration, snr, alpha, heart_rate, resp_freq),
        Command::Report { check } => report_check(&check),
    }
}
