//! W(x,t) as a sum over spacetime lines.
//!
//! For the Gaussian packet every line χ_{n,l} carries three contributions:
//!
//! ```text
//! W = 1/(2L) Σ_{n,l} (-1)^{nl} { e^{-((Lχ - x̄)/Δx)²} e^{-((κ_n - k̄)/Δκ)²}           classical
//!                             + e^{-((Lχ + x̄)/Δx)²} e^{-((κ_n + k̄)/Δκ)²}           mirror
//!                             - 2 e^{-(κ_n/Δκ)²} e^{-(Lχ/Δx)²} cos[2(k̄Lχ - κ_n x̄)] } interference
//! ```
//!
//! The general factorized form evaluates the same sum through φ±, φ̃±.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxmodel::BoxConfig;
use crate::error::{domain, Result};
use crate::numerics::{cos_pi, parity_sign, ComplexSum, NeumaierSum};
use crate::propagator::chi_scaled;
use crate::wavepacket::{FactorSign, FactorizedPair, GaussianPacket};

/// exp(-a²) is exactly zero in f64 for a ≥ this value.
const UNDERFLOW_ARGUMENT: f64 = 28.0;

/// Envelope widths covered by the automatic n cutoff.
pub const LINE_ENVELOPE_WIDTHS: f64 = 8.0;

/// Cutoffs |n| ≤ n_max, |l| ≤ l_max of the line sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTruncation {
    pub n_max: i64,
    pub l_max: i64,
}

impl LineTruncation {
    /// n_max = ceil((|k̄| + 8Δκ)·2L/π) and l_max = ceil(|t_max|/(T/2)·n_max) + 2.
    pub fn auto(packet: &GaussianPacket, cfg: &BoxConfig, t_max: f64) -> Self {
        let n_max = auto_n_max(packet, cfg);
        Self {
            n_max,
            l_max: auto_l_max(n_max, cfg, t_max),
        }
    }

    /// Bound on what the lines beyond the cutoffs can contribute:
    /// exp[-(κ_{n_max} - |k̄|)²/Δκ²] + exp[-((l_max L - L - x̄)/Δx)²].
    pub fn tail_bound(&self, packet: &GaussianPacket, cfg: &BoxConfig) -> f64 {
        let dk = packet.width_wave_number();
        let kn = cfg.line_wave_number(self.n_max) - packet.wave_number().abs();
        let n_tail = if kn > 0.0 {
            (-(kn / dk).powi(2)).exp()
        } else {
            1.0
        };
        let reach = self.l_max as f64 * cfg.length() - cfg.length() - packet.center();
        let l_tail = if reach > 0.0 {
            (-(reach / packet.width()).powi(2)).exp()
        } else {
            1.0
        };
        n_tail + l_tail
    }
}

pub fn auto_n_max(packet: &GaussianPacket, cfg: &BoxConfig) -> i64 {
    let reach = packet.wave_number().abs() + LINE_ENVELOPE_WIDTHS * packet.width_wave_number();
    (reach * 2.0 * cfg.length() / std::f64::consts::PI).ceil() as i64
}

pub fn auto_l_max(n_max: i64, cfg: &BoxConfig, t_max: f64) -> i64 {
    let half_periods = (t_max / (0.5 * cfg.revival_time())).abs();
    (half_periods * n_max as f64).ceil() as i64 + 2
}

/// The l for which any Gaussian factor centered within `offset` of the
/// line can be nonzero, clipped to |l| ≤ l_max. Terms outside underflow to
/// exactly zero, so skipping them leaves compensated sums unchanged.
fn line_window(center: f64, reach: f64, l_max: i64) -> RangeInclusive<i64> {
    let lo = ((center - reach).floor() as i64 - 1).max(-l_max);
    let hi = ((center + reach).ceil() as i64 + 1).min(l_max);
    lo..=hi
}

/// The three partial sums of the Gaussian line representation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TermParts {
    pub classical: f64,
    pub mirror: f64,
    pub interference: f64,
}

impl TermParts {
    pub fn total(&self) -> f64 {
        NeumaierSum::sum_iter([self.classical, self.mirror, self.interference])
    }
}

/// cos[2(k̄Lχ - κ_n x̄)], evaluated as cos(π·(2k̄Lχ/π - n x̄/L)) so that
/// half-integer arguments give exact zeros.
pub fn interference_modulation(packet: &GaussianPacket, cfg: &BoxConfig, n: i64, chi: f64) -> f64 {
    cos_pi(modulation_argument(packet, cfg, n, chi))
}

/// The modulation phase divided by π.
fn modulation_argument(packet: &GaussianPacket, cfg: &BoxConfig, n: i64, chi: f64) -> f64 {
    let length = cfg.length();
    2.0 * packet.wave_number() * length * chi / std::f64::consts::PI
        - n as f64 * packet.center() / length
}

/// Classical, mirror and interference partial sums at (x, t).
///
/// Summation order: n ascending outside, l ascending inside, each part
/// compensated.
pub fn term_decomposition(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    x: f64,
    t: f64,
    trunc: &LineTruncation,
) -> TermParts {
    let length = cfg.length();
    let xi = cfg.xi(x);
    let h = 2.0 * cfg.tau(t);
    let center = packet.center();
    let width = packet.width();
    let kbar = packet.wave_number();
    let dk = packet.width_wave_number();
    let reach = (center.abs() + UNDERFLOW_ARGUMENT * width) / length;

    let mut classical = NeumaierSum::new();
    let mut mirror = NeumaierSum::new();
    let mut interference = NeumaierSum::new();
    for n in -trunc.n_max..=trunc.n_max {
        let kappa = cfg.line_wave_number(n);
        let env_classical = (-((kappa - kbar) / dk).powi(2)).exp();
        let env_mirror = (-((kappa + kbar) / dk).powi(2)).exp();
        let env_interference = (-(kappa / dk).powi(2)).exp();
        for l in line_window(xi - n as f64 * h, reach, trunc.l_max) {
            let chi = chi_scaled(n, l, xi, h);
            let lchi = length * chi;
            let parity = parity_sign(n * l);
            classical.add(parity * (-((lchi - center) / width).powi(2)).exp() * env_classical);
            mirror.add(parity * (-((lchi + center) / width).powi(2)).exp() * env_mirror);
            let modulation = interference_modulation(packet, cfg, n, chi);
            interference.add(
                -2.0 * parity * env_interference * (-(lchi / width).powi(2)).exp() * modulation,
            );
        }
    }
    let scale = 1.0 / (2.0 * length);
    TermParts {
        classical: classical.value() * scale,
        mirror: mirror.value() * scale,
        interference: interference.value() * scale,
    }
}

/// Closed-form Gaussian W(x,t) from the line sum, before clamping.
pub fn carpet_gaussian_raw(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    x: f64,
    t: f64,
    trunc: &LineTruncation,
) -> f64 {
    term_decomposition(packet, cfg, x, t, trunc).total()
}

/// Closed-form Gaussian W(x,t) from the line sum, clamped at zero.
pub fn carpet_gaussian(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    x: f64,
    t: f64,
    trunc: &LineTruncation,
) -> f64 {
    carpet_gaussian_raw(packet, cfg, x, t, trunc).max(0.0)
}

/// W(x,t) for a factorized initial state, before discarding the imaginary
/// part:
///
/// ```text
/// ½ Σ (-1)^{nl} { φ̃₋(κ_n)[φ₊(2Lχ_{n,l}(x,t)) + φ₊(2Lχ_{n,l}(-x,t))]
///              - φ̃₊(κ_n)[φ₋(2Lχ_{n,l}(x,t)) + φ₋(2Lχ_{n,l}(-x,t))] }
/// ```
pub fn carpet_factorized_complex(
    pair: &FactorizedPair,
    cfg: &BoxConfig,
    x: f64,
    t: f64,
    trunc: &LineTruncation,
) -> Complex64 {
    let length = cfg.length();
    let xi = cfg.xi(x);
    let h = 2.0 * cfg.tau(t);
    let reach = (pair.center().abs() + UNDERFLOW_ARGUMENT * pair.width()) / length;
    let two_l = 2.0 * length;

    let mut acc = ComplexSum::new();
    for n in -trunc.n_max..=trunc.n_max {
        let ft_minus = pair.fourier_factor(FactorSign::Minus, n);
        let ft_plus = pair.fourier_factor(FactorSign::Plus, n);
        let forward = line_window(xi - n as f64 * h, reach, trunc.l_max);
        let reflected = line_window(-xi - n as f64 * h, reach, trunc.l_max);
        let lo = *forward.start().min(reflected.start());
        let hi = *forward.end().max(reflected.end());
        for l in lo..=hi {
            let y_fwd = two_l * chi_scaled(n, l, xi, h);
            let y_ref = two_l * chi_scaled(n, l, -xi, h);
            let term = ft_minus * (pair.plus(y_fwd) + pair.plus(y_ref))
                - ft_plus * (pair.minus(y_fwd) + pair.minus(y_ref));
            acc.add(term * parity_sign(n * l));
        }
    }
    acc.value() * 0.5
}

/// W(x,t) for a factorized initial state (real part of
/// [`carpet_factorized_complex`]).
pub fn carpet_factorized(
    pair: &FactorizedPair,
    cfg: &BoxConfig,
    x: f64,
    t: f64,
    trunc: &LineTruncation,
) -> f64 {
    carpet_factorized_complex(pair, cfg, x, t, trunc).re
}

/// Which term of the Gaussian line sum produces a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceClass {
    Classical,
    Mirror,
    Interference,
}

/// Ridge: brighter than the background. Canal: darker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contrast {
    Ridge,
    Canal,
    Mixed,
}

/// One predicted trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub n: i64,
    pub l: i64,
    /// Time advances by (T/2)/n per box length along the line.
    pub slope_inverse: i64,
    /// Where the line meets t = 0, in [0, 1), modulo images at x = lL.
    #[serde(rename = "origin_x_over_L")]
    pub origin_x_over_length: f64,
    pub term_class: TraceClass,
    pub weight: f64,
    /// Argument of the cosine factor at the line center (interference only).
    pub modulation_phase: Option<f64>,
    pub classification: Contrast,
}

/// Enumerate the visible traces of a Gaussian packet.
///
/// Each line is reported once per term at the image whose origin lies in
/// the box: classical lines start at x̄ (l = 0), mirror lines at L - x̄
/// (l = 1), interference lines at both walls (l = 0, 1). Weights are the
/// line-center amplitudes of the term; interference weights include
/// |cos| of the modulation. Events whose weight falls below
/// `threshold · max weight` are dropped. Classical and mirror events that
/// land on the same line (x̄ = L/2) are merged into one classical event with
/// the summed weight.
///
/// The result is sorted by descending weight, ties by (|n|, n, l, class).
pub fn trace_catalog(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    threshold: f64,
) -> Result<Vec<TraceEvent>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(domain(format!(
            "threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let length = cfg.length();
    let n_max = auto_n_max(packet, cfg);
    let dk = packet.width_wave_number();
    let kbar = packet.wave_number();
    let origin_classical = (packet.center() / length).rem_euclid(1.0);
    let origin_mirror = (1.0 - packet.center() / length).rem_euclid(1.0);

    let mut candidates: Vec<TraceEvent> = Vec::new();
    let mut line_index: HashMap<(i64, u64), usize> = HashMap::new();
    for n in -n_max..=n_max {
        let kappa = cfg.line_wave_number(n);
        for (class, l, origin, weight) in [
            (
                TraceClass::Classical,
                0,
                origin_classical,
                (-((kappa - kbar) / dk).powi(2)).exp(),
            ),
            (
                TraceClass::Mirror,
                1,
                origin_mirror,
                (-((kappa + kbar) / dk).powi(2)).exp(),
            ),
        ] {
            let key = (n, origin.to_bits());
            if let Some(&idx) = line_index.get(&key) {
                candidates[idx].weight += weight;
                continue;
            }
            line_index.insert(key, candidates.len());
            candidates.push(TraceEvent {
                n,
                l,
                slope_inverse: n,
                origin_x_over_length: origin,
                term_class: class,
                weight,
                modulation_phase: None,
                classification: Contrast::Ridge,
            });
        }
        let envelope = (-(kappa / dk).powi(2)).exp();
        let argument = modulation_argument(packet, cfg, n, 0.0);
        let cosine = cos_pi(argument);
        for l in [0_i64, 1] {
            // The term enters W with an overall minus sign.
            let signed = parity_sign(n * l) * cosine;
            let classification = if signed > 0.0 {
                Contrast::Canal
            } else if signed < 0.0 {
                Contrast::Ridge
            } else {
                Contrast::Mixed
            };
            candidates.push(TraceEvent {
                n,
                l,
                slope_inverse: n,
                origin_x_over_length: 0.0,
                term_class: TraceClass::Interference,
                weight: 2.0 * envelope * cosine.abs(),
                modulation_phase: Some(std::f64::consts::PI * argument),
                classification,
            });
        }
    }

    let max_weight = candidates.iter().map(|e| e.weight).fold(0.0, f64::max);
    let cut = threshold * max_weight;
    let mut events: Vec<TraceEvent> = candidates
        .into_iter()
        .filter(|e| e.weight > 0.0 && e.weight >= cut)
        .collect();
    events.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.n.abs().cmp(&b.n.abs()))
            .then(a.n.cmp(&b.n))
            .then(a.l.cmp(&b.l))
            .then(a.term_class.cmp(&b.term_class))
    });
    Ok(events)
}

/// Which representation fills a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    Direct,
    GaussianLines,
    Factorized,
}

impl Evaluator {
    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Direct => "direct",
            Evaluator::GaussianLines => "gaussian-lines",
            Evaluator::Factorized => "factorized",
        }
    }
}

impl std::str::FromStr for Evaluator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Evaluator::Direct),
            "gaussian-lines" => Ok(Evaluator::GaussianLines),
            "factorized" => Ok(Evaluator::Factorized),
            other => Err(crate::Error::Config(format!("unknown evaluator {other:?}"))),
        }
    }
}

/// Provenance recorded with every grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMetadata {
    pub evaluator: Evaluator,
    pub mode_cutoff: Option<usize>,
    pub line_truncation: Option<LineTruncation>,
    pub tail_bound: Option<f64>,
    /// Most negative value produced before clamping to zero.
    pub min_raw_value: f64,
}

/// W sampled on a uniform (x, t) lattice. Row j holds t_j, column i holds x_i.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarpetGrid {
    pub nx: usize,
    pub nt: usize,
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    pub values: Vec<f64>,
    pub metadata: GridMetadata,
}

/// Values below this are treated as evaluation errors rather than rounding.
pub const NEGATIVE_TOLERANCE: f64 = -1e-12;

impl CarpetGrid {
    /// Sample `w` on nx × nt points spanning [0, L] × [t_start, t_end].
    ///
    /// Rows are filled in parallel on the current rayon pool; each value
    /// depends only on its own (x, t), so the grid is independent of the
    /// worker count.
    pub fn fill<F>(
        cfg: &BoxConfig,
        nx: usize,
        nt: usize,
        t_range: (f64, f64),
        mut metadata: GridMetadata,
        w: F,
    ) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        if nx < 2 || nt < 2 {
            return Err(domain(format!(
                "grid needs at least 2×2 points, got {nx}×{nt}"
            )));
        }
        let x_range = (0.0, cfg.length());
        let xs = uniform(x_range, nx);
        let ts = uniform(t_range, nt);
        let rows: Vec<Vec<f64>> = ts
            .par_iter()
            .map(|&t| xs.iter().map(|&x| w(x, t)).collect())
            .collect();
        let mut values = Vec::with_capacity(nx * nt);
        let mut min_raw = f64::INFINITY;
        for v in rows.into_iter().flatten() {
            if !v.is_finite() {
                return Err(domain("carpet evaluator produced a non-finite value"));
            }
            if v < NEGATIVE_TOLERANCE {
                return Err(domain(format!("carpet evaluator produced W = {v:e} < 0")));
            }
            min_raw = min_raw.min(v);
            values.push(v.max(0.0));
        }
        metadata.min_raw_value = min_raw;
        Ok(Self {
            nx,
            nt,
            x_range,
            t_range,
            values,
            metadata,
        })
    }

    pub fn x_coords(&self) -> Vec<f64> {
        uniform(self.x_range, self.nx)
    }

    pub fn t_coords(&self) -> Vec<f64> {
        uniform(self.t_range, self.nt)
    }

    /// W at column i (x), row j (t).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// n points from `range.0` to `range.1` inclusive, endpoints exact.
pub fn uniform(range: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = range;
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * (i as f64 / last)
            }
        })
        .collect()
}
