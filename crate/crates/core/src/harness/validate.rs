//! Cross-checks between the independent evaluation routes.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boxmodel::BoxConfig;
use crate::carpet::{
    auto_l_max, carpet_factorized, carpet_gaussian_raw, interference_modulation, trace_catalog,
    uniform, Evaluator, LineTruncation, TraceClass, NEGATIVE_TOLERANCE,
};
use crate::error::Result;
use crate::numerics::{cos_pi, integrate, integrate_real, Quadrature};
use crate::propagator::{
    d_pair_sum_truncated, d_resummed_truncated, evolve, green_truncated, probability_direct, DArgs,
    DTruncation,
};
use crate::wavepacket::{expand, FactorSign, GaussianPacket, InitialState, SpectralState};

use super::config::Scenario;

/// Agreement required between the eigenmode and line grids, relative to max W.
pub const LINES_VS_DIRECT: f64 = 1e-6;
/// Agreement required between two closed forms of the same sum.
pub const CLOSED_FORMS: f64 = 1e-12;
pub const NORMALIZATION: f64 = 1e-9;
pub const BOUNDARY: f64 = 1e-12;
pub const REVIVAL: f64 = 1e-9;
pub const GREEN_CHAIN: f64 = 1e-9;
pub const FOURIER_QUADRATURE: f64 = 1e-10;

/// Sizes and seed of the sampled checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    pub random_points: usize,
    pub d_tuples: usize,
    pub sample_times: usize,
    /// Also time the eigenmode grid at twice the mode cutoff.
    pub timings: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed_ca29,
            random_points: 1000,
            d_tuples: 100,
            sample_times: 10,
            timings: true,
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckRecord {
    /// `pass` is `max_abs_error <= tolerance`; NaN fails.
    pub fn new(name: &str, max_abs_error: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            max_abs_error,
            tolerance,
            pass: max_abs_error <= tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub label: String,
    pub evaluator: Evaluator,
    pub mode_cutoff: Option<usize>,
    pub points: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub mode_cutoff: usize,
    pub line_truncation: Option<LineTruncation>,
    pub checks: Vec<CheckRecord>,
    pub timings: Vec<Timing>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "M_max = {}", self.mode_cutoff)?;
        if let Some(t) = self.line_truncation {
            writeln!(f, "n_max = {}, l_max = {}", t.n_max, t.l_max)?;
        }
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<32} error {:>10.3e}  tolerance {:>9.2e}  {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_abs_error,
                c.tolerance,
                c.detail
            )?;
        }
        for t in &self.timings {
            writeln!(
                f,
                "time {:<32} {:>9.4} s  ({} points)",
                t.label, t.seconds, t.points
            )?;
        }
        write!(
            f,
            "{}",
            if self.passed {
                "all checks passed"
            } else {
                "validation FAILED"
            }
        )
    }
}

/// Run every check that applies to the scenario's packet.
pub fn run_validation(
    scenario: &Scenario,
    options: &ValidationOptions,
) -> Result<ValidationReport> {
    let cfg = &scenario.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut checks = Vec::new();
    let mut timings = Vec::new();

    let start = Instant::now();
    let state = expand(&scenario.packet, cfg, scenario.mode_cutoff)?;
    let direct = compute_carpet_with_state(scenario, &state)?;
    timings.push(Timing {
        label: "direct".into(),
        evaluator: Evaluator::Direct,
        mode_cutoff: Some(scenario.mode_cutoff),
        points: scenario.nx * scenario.nt,
        seconds: start.elapsed().as_secs_f64(),
    });
    if options.timings {
        let doubled = 2 * scenario.mode_cutoff;
        let start = Instant::now();
        let state2 = expand(&scenario.packet, cfg, doubled)?;
        let mut sc = scenario.clone();
        sc.mode_cutoff = doubled;
        compute_carpet_with_state(&sc, &state2)?;
        timings.push(Timing {
            label: "direct (2 M_max)".into(),
            evaluator: Evaluator::Direct,
            mode_cutoff: Some(doubled),
            points: scenario.nx * scenario.nt,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    let times: Vec<f64> = (0..options.sample_times.max(1))
        .map(|_| rng.gen::<f64>() * scenario.t_max)
        .collect();
    checks.push(normalization_check(cfg, &state, &times)?);
    checks.push(boundary_check(cfg, &times, "boundary_direct", |x, t| {
        probability_direct(&state, cfg, x, t)
    }));
    checks.push(parseval_check(&state));
    checks.extend(revival_checks(cfg, &state, scenario.nx.max(257)));
    checks.push(green_chain_check(scenario, &state, &mut rng)?);
    checks.push(d_identity_check(
        cfg,
        scenario.t_max,
        options.d_tuples,
        &mut rng,
    ));

    if let (Some(packet), Some(trunc)) = (scenario.packet.as_gaussian(), scenario.lines) {
        let start = Instant::now();
        // Sampled without the negativity guard so that a poor truncation is
        // reported as a failed check rather than an error.
        let lines = sample_raw(scenario, |x, t| {
            carpet_gaussian_raw(packet, cfg, x, t, &trunc)
        });
        timings.push(Timing {
            label: "gaussian-lines".into(),
            evaluator: Evaluator::GaussianLines,
            mode_cutoff: None,
            points: scenario.nx * scenario.nt,
            seconds: start.elapsed().as_secs_f64(),
        });
        let (_, w_max) = direct.min_max();
        let err = direct
            .values
            .iter()
            .zip(&lines)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, worst);
        let most_negative = lines.iter().fold(0.0_f64, |m, &v| m.min(v));
        checks.push(CheckRecord::new(
            "lines_nonnegative",
            -most_negative,
            -NEGATIVE_TOLERANCE,
            "most negative line-sum value on the grid",
        ));
        checks.push(CheckRecord::new(
            "lines_vs_direct",
            err,
            LINES_VS_DIRECT * w_max,
            format!(
                "{}×{} grid, n_max {}, l_max {}",
                scenario.nx, scenario.nt, trunc.n_max, trunc.l_max
            ),
        ));
        let tail = trunc.tail_bound(packet, cfg);
        checks.push(CheckRecord::new(
            "line_truncation_tail",
            tail / (2.0 * cfg.length()),
            LINES_VS_DIRECT * w_max,
            "bound on the omitted lines",
        ));
        checks.push(truncation_monotonicity_check(
            packet,
            cfg,
            &trunc,
            scenario.t_max,
            &mut rng,
        ));
        checks.push(factorized_vs_lines_check(
            packet,
            cfg,
            &trunc,
            scenario.t_max,
            options.random_points,
            &mut rng,
        ));
        checks.push(boundary_check(cfg, &times, "boundary_lines", |x, t| {
            carpet_gaussian_raw(packet, cfg, x, t, &trunc).abs()
        }));
        checks.push(line_periodicity_check(
            packet,
            cfg,
            &trunc,
            scenario.t_max,
            &mut rng,
        ));
        checks.push(factorization_check(packet));
        checks.push(fourier_factor_check(packet)?);
        if let Some(c) = suppression_check(packet, cfg, &trunc)? {
            checks.push(c);
        }
    } else {
        checks.push(stationarity_check(&direct.values, scenario.nx));
    }

    let passed = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        mode_cutoff: scenario.mode_cutoff,
        line_truncation: scenario.lines,
        checks,
        timings,
        passed,
    })
}

/// Maximum that propagates NaN, so a broken evaluation cannot pass a check.
fn worst(acc: f64, value: f64) -> f64 {
    if acc.is_nan() || value.is_nan() {
        f64::NAN
    } else {
        acc.max(value)
    }
}

fn sample_raw<F: Fn(f64, f64) -> f64 + Sync>(scenario: &Scenario, w: F) -> Vec<f64> {
    let xs = uniform((0.0, scenario.cfg.length()), scenario.nx);
    uniform((0.0, scenario.t_max), scenario.nt)
        .par_iter()
        .flat_map_iter(|&t| xs.iter().map(|&x| w(x, t)).collect::<Vec<_>>())
        .collect()
}

fn compute_carpet_with_state(
    scenario: &Scenario,
    state: &SpectralState,
) -> Result<crate::carpet::CarpetGrid> {
    let cfg = &scenario.cfg;
    let meta = crate::carpet::GridMetadata {
        evaluator: Evaluator::Direct,
        mode_cutoff: Some(state.cutoff()),
        line_truncation: None,
        tail_bound: None,
        min_raw_value: 0.0,
    };
    crate::carpet::CarpetGrid::fill(
        cfg,
        scenario.nx,
        scenario.nt,
        (0.0, scenario.t_max),
        meta,
        |x, t| probability_direct(state, cfg, x, t),
    )
}

/// |∫₀ᴸ W dx - 1| at the given times.
fn normalization_check(
    cfg: &BoxConfig,
    state: &SpectralState,
    times: &[f64],
) -> Result<CheckRecord> {
    let mut err: f64 = 0.0;
    for &t in times {
        let total = integrate_real(
            |x| probability_direct(state, cfg, x, t),
            0.0,
            cfg.length(),
            Quadrature::with_tolerance(1e-12),
        )?;
        err = worst(err, (total - 1.0).abs());
    }
    Ok(CheckRecord::new(
        "normalization",
        err,
        NORMALIZATION,
        format!("{} random times in [0, t_max]", times.len()),
    ))
}

fn boundary_check<F: Fn(f64, f64) -> f64>(
    cfg: &BoxConfig,
    times: &[f64],
    name: &str,
    w: F,
) -> CheckRecord {
    let err = times
        .iter()
        .map(|&t| worst(w(0.0, t), w(cfg.length(), t)))
        .fold(0.0, worst);
    CheckRecord::new(name, err, BOUNDARY, "W at x = 0 and x = L")
}

fn parseval_check(state: &SpectralState) -> CheckRecord {
    CheckRecord::new(
        "parseval",
        state.truncation_residual().abs(),
        NORMALIZATION,
        format!("Σ|ψ_m|² over {} modes vs ∫|φ|²", state.cutoff()),
    )
}

/// W(x, t + T) = W(x, t) and W(x, T/2) = W(L - x, 0).
fn revival_checks(cfg: &BoxConfig, state: &SpectralState, nx: usize) -> [CheckRecord; 2] {
    let period = cfg.revival_time();
    let length = cfg.length();
    let xs = uniform((0.0, length), nx);
    let mut full: f64 = 0.0;
    let mut mirror: f64 = 0.0;
    for &x in &xs {
        for t0 in [0.0, 0.137 * period, 0.5 * period] {
            let a = probability_direct(state, cfg, x, t0);
            let b = probability_direct(state, cfg, x, t0 + period);
            full = worst(full, (a - b).abs());
        }
        let a = probability_direct(state, cfg, x, 0.5 * period);
        let b = probability_direct(state, cfg, length - x, 0.0);
        mirror = worst(mirror, (a - b).abs());
    }
    [
        CheckRecord::new("full_revival", full, REVIVAL, "W(x, t + T) vs W(x, t)"),
        CheckRecord::new(
            "mirror_revival",
            mirror,
            REVIVAL,
            "W(x, T/2) vs W(L - x, 0)",
        ),
    ]
}

/// ∫ G(x,t|x') φ(x') dx' against the eigenmode evolution at random points.
fn green_chain_check(
    scenario: &Scenario,
    state: &SpectralState,
    rng: &mut ChaCha8Rng,
) -> Result<CheckRecord> {
    let cfg = &scenario.cfg;
    let mut err: f64 = 0.0;
    for _ in 0..4 {
        let x = rng.gen::<f64>() * cfg.length();
        let t = rng.gen::<f64>() * scenario.t_max;
        let chained = integrate(
            |xs| green_truncated(cfg, x, t, xs, state.cutoff()) * scenario.packet.amplitude(xs),
            0.0,
            cfg.length(),
            Quadrature::with_tolerance(1e-12),
        )?
        .value;
        err = worst(err, (chained - evolve(state, cfg, x, t)).norm());
    }
    Ok(CheckRecord::new(
        "green_chain",
        err,
        GREEN_CHAIN,
        "∫G φ dx' vs eigenmode sum at 4 points",
    ))
}

/// Pair sum against its Dirichlet regrouping, over all four kernel patterns.
fn d_identity_check(
    cfg: &BoxConfig,
    t_max: f64,
    tuples: usize,
    rng: &mut ChaCha8Rng,
) -> CheckRecord {
    let trunc = DTruncation::default();
    let mut err: f64 = 0.0;
    let per_pattern = tuples.div_ceil(4).max(1);
    for _ in 0..per_pattern {
        let x1 = rng.gen::<f64>() * cfg.length();
        let x2 = rng.gen::<f64>() * cfg.length();
        let xi = rng.gen::<f64>();
        let tau = rng.gen::<f64>() * cfg.tau(t_max);
        let (s, d) = crate::propagator::source_coordinates(cfg, x1, x2);
        for (_, args) in DArgs::kernel_patterns(xi, tau, s, d) {
            let a = d_pair_sum_truncated(&args, &trunc);
            let b = d_resummed_truncated(&args, &trunc);
            err = worst(err, (a - b).norm());
        }
    }
    CheckRecord::new(
        "d_identity",
        err,
        CLOSED_FORMS,
        format!("{} tuples × 4 patterns, K = {}", per_pattern, trunc.k_m),
    )
}

/// Relative gap between the factorized and Gaussian line sums at random
/// points, measured against max(|W|, 1/L).
fn factorized_vs_lines_check(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    trunc: &LineTruncation,
    t_max: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> CheckRecord {
    let pair = packet.factorize();
    let floor = 1.0 / cfg.length();
    let mut err: f64 = 0.0;
    for _ in 0..count {
        let x = rng.gen::<f64>() * cfg.length();
        let t = rng.gen::<f64>() * t_max;
        let a = carpet_gaussian_raw(packet, cfg, x, t, trunc);
        let b = carpet_factorized(&pair, cfg, x, t, trunc);
        err = worst(err, (a - b).abs() / a.abs().max(floor));
    }
    CheckRecord::new(
        "factorized_vs_lines",
        err,
        CLOSED_FORMS,
        format!("{count} random points, relative to max(|W|, 1/L)"),
    )
}

/// Raising both cutoffs must not move W by more than the tail bound.
fn truncation_monotonicity_check(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    trunc: &LineTruncation,
    t_max: f64,
    rng: &mut ChaCha8Rng,
) -> CheckRecord {
    let wider = LineTruncation {
        n_max: trunc.n_max + 4,
        l_max: trunc.l_max + 4,
    };
    let mut err: f64 = 0.0;
    let mut w_max: f64 = 0.0;
    for _ in 0..64 {
        let x = rng.gen::<f64>() * cfg.length();
        let t = rng.gen::<f64>() * t_max;
        let a = carpet_gaussian_raw(packet, cfg, x, t, trunc);
        let b = carpet_gaussian_raw(packet, cfg, x, t, &wider);
        err = worst(err, (a - b).abs());
        w_max = worst(w_max, a.abs());
    }
    let tolerance = trunc.tail_bound(packet, cfg) / (2.0 * cfg.length())
        * (2 * wider.n_max + 1) as f64
        + 16.0 * f64::EPSILON * w_max;
    CheckRecord::new(
        "truncation_monotonicity",
        err,
        tolerance,
        "n_max + 4, l_max + 4 at 64 points",
    )
}

/// W(x, t + T) = W(x, t) within the line sum itself.
fn line_periodicity_check(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    trunc: &LineTruncation,
    t_max: f64,
    rng: &mut ChaCha8Rng,
) -> CheckRecord {
    let period = cfg.revival_time();
    let longer = LineTruncation {
        n_max: trunc.n_max,
        l_max: trunc
            .l_max
            .max(auto_l_max(trunc.n_max, cfg, t_max + period)),
    };
    let mut err: f64 = 0.0;
    for _ in 0..64 {
        let x = rng.gen::<f64>() * cfg.length();
        let t = rng.gen::<f64>() * t_max;
        let a = carpet_gaussian_raw(packet, cfg, x, t, &longer);
        let b = carpet_gaussian_raw(packet, cfg, x, t + period, &longer);
        err = worst(err, (a - b).abs());
    }
    CheckRecord::new(
        "line_periodicity",
        err,
        REVIVAL,
        "line sum at t and t + T, 64 points",
    )
}

/// g*(x') g(x'') against φ₊(x' + x'') φ₋(x' - x'') around the packet.
fn factorization_check(packet: &GaussianPacket) -> CheckRecord {
    let pair = packet.factorize();
    let peak = packet.amplitude_prefactor().powi(2);
    let span = 4.0 * packet.width();
    let pts = uniform((packet.center() - span, packet.center() + span), 21);
    let mut err: f64 = 0.0;
    for &x1 in &pts {
        for &x2 in &pts {
            let lhs = packet.amplitude(x1).conj() * packet.amplitude(x2);
            let rhs = pair.plus(x1 + x2) * pair.minus(x1 - x2);
            err = worst(err, (lhs - rhs).norm() / peak);
        }
    }
    CheckRecord::new(
        "factorization",
        err,
        CLOSED_FORMS,
        "21×21 grid, relative to peak |g|²",
    )
}

/// Closed-form φ̃± against quadrature for |n| ≤ 64.
fn fourier_factor_check(packet: &GaussianPacket) -> Result<CheckRecord> {
    let pair = packet.factorize();
    let length = pair.length();
    let mut err: f64 = 0.0;
    for n in -64..=64_i64 {
        let kappa = n as f64 * std::f64::consts::PI / (2.0 * length);
        for sign in [FactorSign::Minus, FactorSign::Plus] {
            // φ₊ is centered at 2x̄ with width 2Δx, φ₋ at 0 with width 2Δx.
            let mid = match sign {
                FactorSign::Plus => 2.0 * packet.center(),
                FactorSign::Minus => 0.0,
            };
            let (a, b) = (mid - 40.0 * packet.width(), mid + 40.0 * packet.width());
            let q = integrate(
                |y| Complex64::from_polar(1.0, kappa * y) * pair.eval(sign, y),
                a,
                b,
                Quadrature::with_tolerance(1e-13),
            )?
            .value
                / (2.0 * length);
            err = worst(err, (q - pair.fourier_factor(sign, n)).norm());
        }
    }
    Ok(CheckRecord::new(
        "fourier_factors",
        err,
        FOURIER_QUADRATURE,
        "closed form vs quadrature, |n| ≤ 64",
    ))
}

/// For k̄ = 0, lines with n x̄/L a half-integer have an exactly vanishing
/// interference term and must not appear in the trace catalog.
fn suppression_check(
    packet: &GaussianPacket,
    cfg: &BoxConfig,
    trunc: &LineTruncation,
) -> Result<Option<CheckRecord>> {
    if packet.wave_number() != 0.0 {
        return Ok(None);
    }
    let ratio = packet.center() / cfg.length();
    let suppressed: Vec<i64> = (-trunc.n_max..=trunc.n_max)
        .filter(|&n| n != 0 && cos_pi(n as f64 * ratio) == 0.0)
        .collect();
    if suppressed.is_empty() {
        return Ok(None);
    }
    let mut err: f64 = 0.0;
    for &n in &suppressed {
        for chi in [-0.3, 0.0, 0.11, 0.5] {
            err = worst(err, interference_modulation(packet, cfg, n, chi).abs());
        }
    }
    let catalog = trace_catalog(packet, cfg, 1e-12)?;
    let leaked = catalog
        .iter()
        .filter(|e| e.term_class == TraceClass::Interference && suppressed.contains(&e.n))
        .count();
    if leaked > 0 {
        err = worst(err, 1.0);
    }
    Ok(Some(CheckRecord::new(
        "interference_suppression",
        err,
        0.0,
        format!(
            "{} lines, smallest |n| = {}, {leaked} catalog events",
            suppressed.len(),
            suppressed.iter().map(|n| n.abs()).min().unwrap_or(0)
        ),
    )))
}

/// For an eigenmode packet every row of the direct grid equals the first.
fn stationarity_check(values: &[f64], nx: usize) -> CheckRecord {
    let first = &values[..nx];
    let err = values
        .chunks(nx)
        .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, worst);
    CheckRecord::new("stationarity", err, BOUNDARY, "W(x, t) vs W(x, 0)")
}
