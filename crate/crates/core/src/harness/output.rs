//! Grid, slice and metadata writers. Every writer is deterministic: the same
//! grid always produces the same bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::boxmodel::BoxParams;
use crate::carpet::{CarpetGrid, Evaluator, LineTruncation, TraceEvent};
use crate::error::Result;
use crate::wavepacket::{Packet, ENVELOPE_CUTOFF, EXPANSION_TOLERANCE, LEAKAGE_THRESHOLD};

use super::config::{GridConfig, OutputFormat, PacketConfig, RunConfig, Scenario};
use super::SliceRow;

/// Tail bounds above this produce a warning in the metadata.
pub const TAIL_WARNING: f64 = 1e-12;

/// Numerical settings recorded next to every output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub expansion_quadrature: f64,
    pub leakage_threshold: f64,
    pub envelope_cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            expansion_quadrature: EXPANSION_TOLERANCE,
            leakage_threshold: LEAKAGE_THRESHOLD,
            envelope_cutoff: ENVELOPE_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedTruncations {
    #[serde(rename = "M_max")]
    pub mode_cutoff: usize,
    pub n_max: Option<i64>,
    pub l_max: Option<i64>,
    pub tail_bound: Option<f64>,
}

/// Sidecar describing how a carpet file was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub evaluator: Evaluator,
    #[serde(rename = "box")]
    pub box_params: BoxParams,
    pub packet: PacketConfig,
    pub grid: GridConfig,
    pub revival_time: f64,
    pub truncations: ResolvedTruncations,
    pub tolerances: Tolerances,
    #[serde(rename = "W_min")]
    pub w_min: f64,
    #[serde(rename = "W_max")]
    pub w_max: f64,
    /// Most negative value before clamping.
    pub min_raw_value: f64,
    pub warnings: Vec<String>,
}

impl RunMetadata {
    pub fn new(config: &RunConfig, scenario: &Scenario, grid: &CarpetGrid) -> Self {
        let (w_min, w_max) = grid.min_max();
        let lines: Option<LineTruncation> = grid.metadata.line_truncation;
        let tail_bound = grid.metadata.tail_bound;
        let mut warnings = Vec::new();
        if let Packet::Gaussian(g) = &scenario.packet {
            if g.boundary_unsafe() {
                warnings.push(format!(
                    "packet leaks outside the box: left {:e}, right {:e}",
                    g.left_leakage(),
                    g.right_leakage()
                ));
            }
        }
        if let Some(bound) = tail_bound {
            if bound > TAIL_WARNING {
                warnings.push(format!(
                    "line truncation tail bound {bound:e} exceeds {TAIL_WARNING:e}"
                ));
            }
        }
        if grid.metadata.min_raw_value < 0.0 {
            warnings.push(format!(
                "negative values down to {:e} were clamped to zero",
                grid.metadata.min_raw_value
            ));
        }
        Self {
            evaluator: grid.metadata.evaluator,
            box_params: config.box_params,
            packet: config.packet,
            grid: config.grid,
            revival_time: scenario.cfg.revival_time(),
            truncations: ResolvedTruncations {
                mode_cutoff: scenario.mode_cutoff,
                n_max: lines.map(|t| t.n_max),
                l_max: lines.map(|t| t.l_max),
                tail_bound,
            },
            tolerances: Tolerances::default(),
            w_min,
            w_max,
            min_raw_value: grid.metadata.min_raw_value,
            warnings,
        }
    }
}

/// `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// 16-bit binary PGM. The top image row is t_max, the left column x = 0.
/// Intensities are `round(65535 (W - min)/(max - min))`; a constant grid
/// is all zeros.
pub fn write_pgm16<W: Write>(grid: &CarpetGrid, mut w: W) -> Result<()> {
    let (lo, hi) = grid.min_max();
    let span = hi - lo;
    write!(w, "P5\n{} {}\n65535\n", grid.nx, grid.nt)?;
    let mut row = Vec::with_capacity(2 * grid.nx);
    for j in (0..grid.nt).rev() {
        row.clear();
        for i in 0..grid.nx {
            let level = if span > 0.0 {
                (65535.0 * (grid.get(i, j) - lo) / span)
                    .round()
                    .clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            row.extend_from_slice(&level.to_be_bytes());
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `x_over_L,t_over_T,W` in row-major order (t outer, x inner), 17
/// significant digits.
pub fn write_grid_csv<W: Write>(
    grid: &CarpetGrid,
    length: f64,
    period: f64,
    mut w: W,
) -> Result<()> {
    writeln!(w, "x_over_L,t_over_T,W")?;
    let xs = grid.x_coords();
    for (j, t) in grid.t_coords().into_iter().enumerate() {
        for (i, x) in xs.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                x / length,
                t / period,
                grid.get(i, j)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GridDocument<'a> {
    nx: usize,
    nt: usize,
    #[serde(rename = "x_over_L")]
    x_over_length: Vec<f64>,
    #[serde(rename = "t_over_T")]
    t_over_period: Vec<f64>,
    /// Row j is t_j.
    #[serde(rename = "W")]
    w: Vec<&'a [f64]>,
    metadata: &'a RunMetadata,
}

pub fn write_grid_json<W: Write>(
    grid: &CarpetGrid,
    metadata: &RunMetadata,
    mut w: W,
) -> Result<()> {
    let length = metadata.box_params.length;
    let doc = GridDocument {
        nx: grid.nx,
        nt: grid.nt,
        x_over_length: grid.x_coords().into_iter().map(|x| x / length).collect(),
        t_over_period: grid
            .t_coords()
            .into_iter()
            .map(|t| t / metadata.revival_time)
            .collect(),
        w: grid.values.chunks(grid.nx).collect(),
        metadata,
    };
    serde_json::to_writer(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_grid_file(
    path: &Path,
    format: OutputFormat,
    grid: &CarpetGrid,
    metadata: &RunMetadata,
) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Pgm16 => write_pgm16(grid, w),
        OutputFormat::Csv => {
            write_grid_csv(grid, metadata.box_params.length, metadata.revival_time, w)
        }
        OutputFormat::Json => write_grid_json(grid, metadata, w),
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_json(value, BufWriter::new(File::create(path)?))
}

pub fn write_traces<W: Write>(events: &[TraceEvent], w: W) -> Result<()> {
    write_json(events, w)
}

/// Columns `coordinate,W_direct,W_lines,abs_diff`, 17 significant digits.
pub fn write_slice_csv<W: Write>(rows: &[SliceRow], mut w: W) -> Result<()> {
    writeln!(w, "coordinate,W_direct,W_lines,abs_diff")?;
    for r in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            r.coordinate, r.w_direct, r.w_lines, r.abs_diff
        )?;
    }
    w.flush()?;
    Ok(())
}
