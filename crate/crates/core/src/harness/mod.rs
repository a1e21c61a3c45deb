//! Configuration, grid generation, validation and file output behind the
//! `carpetlab` command line.

pub mod config;
pub mod output;
pub mod validate;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::carpet::{
    carpet_factorized, carpet_gaussian_raw, trace_catalog, uniform, CarpetGrid, Evaluator,
    GridMetadata, TraceEvent,
};
use crate::error::{Error, Result};
use crate::propagator::probability_direct;
use crate::wavepacket::{expand, SpectralState};

pub use config::{Cutoff, OutputFormat, PacketConfig, RunConfig, Scenario};
pub use output::RunMetadata;
pub use validate::{CheckRecord, ValidationOptions, ValidationReport};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CARPETLAB_THREADS";

/// Worker cap from `CARPETLAB_THREADS`; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
    }
}

/// Run `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn with_env_threads<R: Send>(f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    with_threads(threads_from_env()?, f)?
}

/// Eigenmode expansion of the scenario's packet at its resolved cutoff.
pub fn spectral_state(scenario: &Scenario) -> Result<SpectralState> {
    expand(&scenario.packet, &scenario.cfg, scenario.mode_cutoff)
}

/// W on the scenario grid with the given evaluator, on the current pool.
pub fn compute_carpet(scenario: &Scenario, evaluator: Evaluator) -> Result<CarpetGrid> {
    let cfg = &scenario.cfg;
    let t_range = (0.0, scenario.t_max);
    let (nx, nt) = (scenario.nx, scenario.nt);
    match evaluator {
        Evaluator::Direct => {
            let state = spectral_state(scenario)?;
            let meta = GridMetadata {
                evaluator,
                mode_cutoff: Some(scenario.mode_cutoff),
                line_truncation: None,
                tail_bound: None,
                min_raw_value: 0.0,
            };
            CarpetGrid::fill(cfg, nx, nt, t_range, meta, |x, t| {
                probability_direct(&state, cfg, x, t)
            })
        }
        Evaluator::GaussianLines | Evaluator::Factorized => {
            let packet = scenario.gaussian()?;
            let trunc = scenario.line_truncation()?;
            let meta = GridMetadata {
                evaluator,
                mode_cutoff: None,
                line_truncation: Some(trunc),
                tail_bound: Some(trunc.tail_bound(packet, cfg)),
                min_raw_value: 0.0,
            };
            if evaluator == Evaluator::GaussianLines {
                CarpetGrid::fill(cfg, nx, nt, t_range, meta, |x, t| {
                    carpet_gaussian_raw(packet, cfg, x, t, &trunc)
                })
            } else {
                let pair = packet.factorize();
                CarpetGrid::fill(cfg, nx, nt, t_range, meta, |x, t| {
                    carpet_factorized(&pair, cfg, x, t, &trunc)
                })
            }
        }
    }
}

/// Result of `carpet`: the grid and where it was written.
#[derive(Debug, Clone)]
pub struct CarpetRun {
    pub grid: CarpetGrid,
    pub metadata: RunMetadata,
    pub path: PathBuf,
    pub sidecar: PathBuf,
}

/// Compute the configured carpet and write it plus its metadata sidecar.
/// `out` overrides the configured output path.
pub fn cmd_carpet(config: &RunConfig, out: Option<&Path>) -> Result<CarpetRun> {
    let scenario = config.resolve()?;
    let grid = with_env_threads(|| compute_carpet(&scenario, scenario.evaluator))?;
    let format = config.output.format;
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => config
            .output
            .path
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("carpet.{}", format.extension()))),
    };
    let metadata = RunMetadata::new(config, &scenario, &grid);
    output::write_grid_file(&path, format, &grid, &metadata)?;
    let sidecar = output::sidecar_path(&path);
    output::write_json_file(&sidecar, &metadata)?;
    Ok(CarpetRun {
        grid,
        metadata,
        path,
        sidecar,
    })
}

/// Run every applicable identity check on the configured scenario.
pub fn cmd_validate(config: &RunConfig) -> Result<ValidationReport> {
    let scenario = config.resolve()?;
    with_env_threads(|| validate::run_validation(&scenario, &ValidationOptions::default()))
}

/// Default relative threshold of the trace catalog.
pub const DEFAULT_TRACE_THRESHOLD: f64 = 1e-3;

/// Visible trace families of the configured Gaussian packet.
pub fn cmd_traces(config: &RunConfig, threshold: f64) -> Result<Vec<TraceEvent>> {
    let scenario = config.resolve()?;
    let packet = scenario.gaussian()?;
    trace_catalog(packet, &scenario.cfg, threshold).map_err(|e| match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    })
}

/// Direction of a one-dimensional cut through the carpet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceAxis {
    /// Fixed t (value in units of T), varying x over the nx grid points.
    FixedT,
    /// Fixed x (value in units of L), varying t over the nt grid points.
    FixedX,
}

impl FromStr for SliceAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-t" => Ok(SliceAxis::FixedT),
            "fixed-x" => Ok(SliceAxis::FixedX),
            other => Err(Error::Config(format!("unknown slice axis {other:?}"))),
        }
    }
}

/// One sample of a slice. `coordinate` is x/L or t/T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceRow {
    pub coordinate: f64,
    pub w_direct: f64,
    pub w_lines: f64,
    pub abs_diff: f64,
}

/// W along a cut, from both the eigenmode sum and the line sum.
pub fn cmd_slice(config: &RunConfig, axis: SliceAxis, value: f64) -> Result<Vec<SliceRow>> {
    let mut scenario = config.resolve()?;
    let packet = *scenario.gaussian()?;
    let cfg = scenario.cfg;
    if !value.is_finite() {
        return Err(Error::Config(format!(
            "slice value must be finite, got {value}"
        )));
    }
    let points: Vec<(f64, f64, f64)> = match axis {
        SliceAxis::FixedT => {
            if value < 0.0 {
                return Err(Error::Config(format!(
                    "slice time must be >= 0, got t/T = {value}"
                )));
            }
            let t = value * cfg.revival_time();
            if t > scenario.t_max && config.truncations.l_max == Cutoff::Auto {
                let n_max = scenario.line_truncation()?.n_max;
                scenario.lines = Some(crate::carpet::LineTruncation {
                    n_max,
                    l_max: crate::carpet::auto_l_max(n_max, &cfg, t),
                });
            }
            uniform((0.0, cfg.length()), scenario.nx)
                .into_iter()
                .map(|x| (x / cfg.length(), x, t))
                .collect()
        }
        SliceAxis::FixedX => {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Config(format!(
                    "slice position must lie in [0, 1], got x/L = {value}"
                )));
            }
            let x = value * cfg.length();
            uniform((0.0, scenario.t_max), scenario.nt)
                .into_iter()
                .map(|t| (t / cfg.revival_time(), x, t))
                .collect()
        }
    };
    let trunc = scenario.line_truncation()?;
    let state = with_env_threads(|| spectral_state(&scenario))?;
    Ok(points
        .into_iter()
        .map(|(coordinate, x, t)| {
            let w_direct = probability_direct(&state, &cfg, x, t);
            let w_lines = carpet_gaussian_raw(&packet, &cfg, x, t, &trunc).max(0.0);
            SliceRow {
                coordinate,
                w_direct,
                w_lines,
                abs_diff: (w_direct - w_lines).abs(),
            }
        })
        .collect())
}
