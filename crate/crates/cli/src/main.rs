//! Sweeps the noise parameter of one family and writes the win probability
//! with and without local recovery as CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pseudotelepathy::channels::NoiseKind;
use pseudotelepathy::sweep::{
    emit, run_sweep_with, save_channels, threshold_crossing, OutputFormat, SweepConfig, SweepRow,
};
use pseudotelepathy::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNCERTIFIED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "pseudotelepathy", version, about)]
struct Args {
    /// depolarizing, amplitude-damping, phase-damping, phase-flip, bit-flip or bit-phase-flip
    #[arg(long, default_value = "depolarizing")]
    channel: NoiseKind,
    #[arg(long, default_value_t = 0.0)]
    alpha_start: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_stop: f64,
    /// Grid points, endpoints included
    #[arg(long, default_value_t = 21)]
    alpha_steps: usize,
    /// Starting points per grid point; the first is always the identity channel
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    #[arg(long, default_value_t = 1e-7)]
    conv_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    sdp_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only report the unrecovered win probability
    #[arg(long)]
    no_recovery: bool,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; standard output if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the optimized channels of every grid point here
    #[arg(long)]
    save_channels: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Exit with status 3 if any inner SDP failed to certify
    #[arg(long)]
    strict: bool,
}

impl Args {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            family: self.channel,
            alpha_start: self.alpha_start,
            alpha_stop: self.alpha_stop,
            alpha_steps: self.alpha_steps,
            restarts: self.restarts,
            max_rounds: self.max_rounds,
            conv_tol: self.conv_tol,
            sdp_tol: self.sdp_tol,
            master_seed: self.seed,
            recovery_enabled: !self.no_recovery,
            output_format: self.format,
            save_dir: self.save_channels.clone(),
            jobs: self.jobs,
        }
    }
}

fn log_row(row: &SweepRow) {
    match (row.p_recovered, row.certified) {
        (Some(p), Some(cert)) => eprintln!(
            "alpha={} p_noisy={:.6} p_recovered={p:.6} certified={cert}",
            row.alpha, row.p_noisy
        ),
        _ => eprintln!("alpha={} p_noisy={:.6}", row.alpha, row.p_noisy),
    }
}

fn fmt_crossing(a: Option<f64>) -> String {
    a.map_or_else(|| "none".into(), |a| format!("{a:.6}"))
}

fn run(args: &Args) -> Result<bool, Error> {
    let cfg = args.config();
    let points = run_sweep_with(&cfg, log_row)?;
    let rows: Vec<SweepRow> = points.iter().map(|p| p.row.clone()).collect();

    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            emit(&rows, cfg.output_format, BufWriter::new(file))?;
        }
        None => emit(&rows, cfg.output_format, io::stdout().lock())?,
    }
    if let Some(dir) = &cfg.save_dir {
        save_channels(cfg.family, &points, dir)?;
    }

    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let noisy: Vec<f64> = rows.iter().map(|r| r.p_noisy).collect();
    eprint!(
        "crossing without recovery: {}",
        fmt_crossing(threshold_crossing(&alphas, &noisy))
    );
    if cfg.recovery_enabled {
        let rec: Vec<f64> = rows.iter().filter_map(|r| r.p_recovered).collect();
        eprint!(
            ", with recovery: {}",
            fmt_crossing(threshold_crossing(&alphas, &rec))
        );
    }
    eprintln!();

    Ok(rows.iter().all(|r| r.certified != Some(false)))
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = args.config().validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if args.strict => {
            eprintln!("error: some solves were not certified");
            ExitCode::from(EXIT_UNCERTIFIED)
        }
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
