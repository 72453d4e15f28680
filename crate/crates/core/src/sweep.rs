//! α-sweeps over one noise family.
//!
//! Every grid point is an independent task with its own generator, seeded
//! from the master seed and the task coordinates by [`task_seed`]. Results
//! are collected in grid order, so the output does not depend on how many
//! threads ran the sweep.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{choi_product, ChannelFile, ChannelMeta, ChoiMatrix, NoiseFamily, NoiseKind};
use crate::error::{Error, Result};
use crate::game::{standard_game, CLASSICAL_THRESHOLD};
use crate::recovery::{optimize_recovery, RecoveryOptions, RecoveryResult};
use crate::sdp::SdpOptions;

pub const CSV_HEADER: &str = "alpha,p_noisy,p_recovered,objective,certified,restarts_used";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub family: NoiseKind,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_steps: usize,
    pub restarts: usize,
    pub max_rounds: usize,
    pub conv_tol: f64,
    pub sdp_tol: f64,
    pub master_seed: u64,
    pub recovery_enabled: bool,
    pub output_format: OutputFormat,
    pub save_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every available core. Never changes results.
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let rec = RecoveryOptions::default();
        Self {
            family: NoiseKind::Depolarizing,
            alpha_start: 0.0,
            alpha_stop: 1.0,
            alpha_steps: 21,
            restarts: rec.restarts,
            max_rounds: rec.max_rounds,
            conv_tol: rec.conv_tol,
            sdp_tol: rec.sdp.tol,
            master_seed: 0,
            recovery_enabled: true,
            output_format: OutputFormat::Csv,
            save_dir: None,
            jobs: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let unit = 0.0..=1.0;
        if !unit.contains(&self.alpha_start) || !unit.contains(&self.alpha_stop) {
            return bad(format!(
                "alpha range [{}, {}] leaves [0, 1]",
                self.alpha_start, self.alpha_stop
            ));
        }
        if self.alpha_start > self.alpha_stop {
            return bad(format!(
                "alpha start {} exceeds stop {}",
                self.alpha_start, self.alpha_stop
            ));
        }
        if self.alpha_steps < 2 {
            return bad(format!(
                "need at least 2 alpha steps, got {}",
                self.alpha_steps
            ));
        }
        if self.restarts < 1 || self.max_rounds < 1 {
            return bad("restarts and max rounds must be at least 1".into());
        }
        if !(self.conv_tol > 0.0 && self.sdp_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.save_dir.is_some() && !self.recovery_enabled {
            return bad("saving channels needs recovery enabled".into());
        }
        Ok(())
    }

    /// Uniform grid with both endpoints.
    pub fn alphas(&self) -> Vec<f64> {
        let n = self.alpha_steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.alpha_stop
                } else {
                    self.alpha_start
                        + (self.alpha_stop - self.alpha_start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn recovery_options(&self) -> RecoveryOptions {
        RecoveryOptions {
            restarts: self.restarts,
            max_rounds: self.max_rounds,
            conv_tol: self.conv_tol,
            sdp: SdpOptions {
                tol: self.sdp_tol,
                ..SdpOptions::DEFAULT
            },
            ..RecoveryOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub p_noisy: f64,
    pub p_recovered: Option<f64>,
    pub objective: Option<f64>,
    pub certified: Option<bool>,
    pub restarts_used: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub row: SweepRow,
    pub recovery: Option<RecoveryResult>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for grid point `index` of `family`:
/// `splitmix64(master ^ splitmix64(code << 32 | index))`.
pub fn task_seed(master: u64, family: NoiseKind, index: usize) -> u64 {
    splitmix64(master ^ splitmix64((family.code() << 32) | index as u64))
}

fn run_point(cfg: &SweepConfig, index: usize, alpha: f64) -> Result<SweepPoint> {
    let g = standard_game();
    let family = NoiseFamily::new(cfg.family, alpha)?;
    let p_noisy = g.noisy_probability(family)?;
    let mut row = SweepRow {
        alpha,
        p_noisy,
        p_recovered: None,
        objective: None,
        certified: None,
        restarts_used: None,
    };
    if !cfg.recovery_enabled {
        return Ok(SweepPoint {
            row,
            recovery: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(cfg.master_seed, cfg.family, index));
    let rec = optimize_recovery(family, &g, &cfg.recovery_options(), &mut rng)?;
    row.p_recovered = Some(rec.p_recovered);
    row.objective = Some(rec.objective);
    row.certified = Some(rec.certified);
    row.restarts_used = Some(rec.restarts_used);
    Ok(SweepPoint {
        row,
        recovery: Some(rec),
    })
}

/// Runs every grid point, calling `on_row` as each finishes (in any order).
/// The returned points are in grid order.
pub fn run_sweep_with(
    cfg: &SweepConfig,
    on_row: impl Fn(&SweepRow) + Sync,
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let alphas = cfg.alphas();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        alphas
            .par_iter()
            .enumerate()
            .map(|(i, &a)| {
                let point = run_point(cfg, i, a)?;
                on_row(&point.row);
                Ok(point)
            })
            .collect()
    })
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    Ok(run_sweep_with(cfg, |_| {})?
        .into_iter()
        .map(|p| p.row)
        .collect())
}

fn push_opt<T: std::fmt::Display>(line: &mut String, v: &Option<T>) {
    line.push(',');
    if let Some(v) = v {
        let _ = write!(line, "{v}");
    }
}

/// CSV text; floats use Rust's shortest round-trip formatting.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.alpha, r.p_noisy);
        push_opt(&mut out, &r.p_recovered);
        push_opt(&mut out, &r.objective);
        push_opt(&mut out, &r.certified);
        push_opt(&mut out, &r.restarts_used);
        out.push('\n');
    }
    out
}

pub fn emit<W: Write>(rows: &[SweepRow], format: OutputFormat, mut dest: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to emit".into()));
    }
    let io = |source| Error::Io {
        path: PathBuf::from("<output>"),
        source,
    };
    match format {
        OutputFormat::Csv => dest.write_all(to_csv(rows).as_bytes()).map_err(io)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut dest, rows)?;
            dest.write_all(b"\n").map_err(io)?;
        }
    }
    dest.flush().map_err(io)
}

/// Where the win probability crosses the classical bound: the last grid
/// point with p ≥ 8/9, moved toward the next point by linear interpolation
/// of p. `None` if no point reaches the bound.
pub fn threshold_crossing(alphas: &[f64], probs: &[f64]) -> Option<f64> {
    let k = probs.iter().rposition(|&p| p >= CLASSICAL_THRESHOLD)?;
    if k + 1 == probs.len() {
        return Some(alphas[k]);
    }
    let (p0, p1) = (probs[k], probs[k + 1]);
    let frac = (p0 - CLASSICAL_THRESHOLD) / (p0 - p1);
    Some(alphas[k] + frac * (alphas[k + 1] - alphas[k]))
}

/// The three channels of one optimized grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryFile {
    pub family: String,
    pub alpha: f64,
    pub objective: f64,
    pub p_recovered: f64,
    pub certified: bool,
    pub y: ChannelFile,
    pub z: ChannelFile,
    pub t: ChannelFile,
}

pub fn recovery_file_name(family: NoiseKind, alpha: f64) -> String {
    format!("{}_alpha_{alpha}.json", family.name())
}

fn channel_entry(
    j: &ChoiMatrix,
    family: NoiseKind,
    alpha: f64,
    objective: f64,
) -> Result<ChannelFile> {
    let meta = ChannelMeta {
        family: Some(family.name().into()),
        alpha: Some(alpha),
        objective: Some(objective),
        residuals: Some(j.report()?),
    };
    Ok(ChannelFile::from_choi(j, meta))
}

/// Writes one file per optimized grid point into `dir` (created if needed).
pub fn save_channels(family: NoiseKind, points: &[SweepPoint], dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for p in points {
        let Some(rec) = &p.recovery else {
            return Err(Error::InvalidArgument(
                "saving channels needs recovery results".into(),
            ));
        };
        let alpha = p.row.alpha;
        let file = RecoveryFile {
            family: family.name().into(),
            alpha,
            objective: rec.objective,
            p_recovered: rec.p_recovered,
            certified: rec.certified,
            y: channel_entry(&rec.y, family, alpha, rec.objective)?,
            z: channel_entry(&rec.z, family, alpha, rec.objective)?,
            t: channel_entry(&rec.t, family, alpha, rec.objective)?,
        };
        let path = dir.join(recovery_file_name(family, alpha));
        fs::write(&path, serde_json::to_string(&file)?).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a file written by [`save_channels`], validating all three channels
/// at `tol` and checking that t is the product of y and z.
pub fn load_recovery(path: &Path, tol: f64) -> Result<(RecoveryFile, [ChoiMatrix; 3])> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: RecoveryFile = serde_json::from_str(&text)?;
    let y = file.y.to_choi(tol)?;
    let z = file.z.to_choi(tol)?;
    let t = file.t.to_choi(tol)?;
    let diff = choi_product(&y, &z).matrix().max_abs_diff(t.matrix())?;
    if diff > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "stored product differs from y ⊗ z by {diff:e}"
        )));
    }
    Ok((file, [y, z, t]))
}
