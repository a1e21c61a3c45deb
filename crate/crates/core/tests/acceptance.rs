//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any gating criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use carpetlab::boxmodel::BoxConfig;
use carpetlab::carpet::{
    carpet_factorized, carpet_gaussian_raw, interference_modulation, term_decomposition, uniform,
    Evaluator, TraceClass,
};
use carpetlab::harness::{cmd_traces, compute_carpet, spectral_state, RunConfig, Scenario};
use carpetlab::numerics::{integrate_real, Quadrature};
use carpetlab::propagator::{
    d_pair_sum_truncated, d_resummed_truncated, probability_direct, source_coordinates, DArgs,
    DTruncation,
};
use carpetlab::wavepacket::GaussianPacket;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    gating: bool,
    detail: String,
}

impl Outcome {
    fn gate(pass: bool, detail: String) -> Self {
        Self {
            pass,
            gating: true,
            detail,
        }
    }

    fn info(detail: String) -> Self {
        Self {
            pass: true,
            gating: false,
            detail,
        }
    }
}

fn resting() -> RunConfig {
    RunConfig::gaussian(0.25, 0.05, 0.0)
}

fn moving() -> RunConfig {
    RunConfig::gaussian(0.25, 0.05, 20.0 * std::f64::consts::PI)
}

fn scenario(config: &RunConfig) -> Scenario {
    config.resolve().expect("valid configuration")
}

fn representation_equivalence() -> Outcome {
    let sc = scenario(&resting());
    let direct = compute_carpet(&sc, Evaluator::Direct).unwrap();
    let lines = compute_carpet(&sc, Evaluator::GaussianLines).unwrap();
    let (_, w_max) = direct.min_max();
    let err = direct
        .values
        .iter()
        .zip(&lines.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let tol = 1e-6 * w_max;
    Outcome::gate(
        err <= tol,
        format!("128×128 grid, max |W_direct - W_lines| = {err:.3e} <= {tol:.3e}"),
    )
}

fn factorized_matches_gaussian_lines() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for config in [resting(), moving()] {
        let sc = scenario(&config);
        let packet = sc.gaussian().unwrap();
        let pair = packet.factorize();
        let trunc = sc.lines.unwrap();
        let floor = 1.0 / sc.cfg.length();
        for _ in 0..1000 {
            let x = rng.gen::<f64>() * sc.cfg.length();
            let t = rng.gen::<f64>() * sc.t_max;
            let a = carpet_gaussian_raw(packet, &sc.cfg, x, t, &trunc);
            let b = carpet_factorized(&pair, &sc.cfg, x, t, &trunc);
            worst = worst.max((a - b).abs() / a.abs().max(floor));
        }
    }
    Outcome::gate(
        worst <= 1e-12,
        format!("2 × 1000 random points, max relative gap {worst:.3e} <= 1e-12"),
    )
}

fn d_identity() -> Outcome {
    let cfg = BoxConfig::unit();
    let trunc = DTruncation { k_m: 24, k_k: 24 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 100 {
        let (s, d) = source_coordinates(&cfg, rng.gen(), rng.gen());
        let xi: f64 = rng.gen();
        let tau: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        for (_, args) in DArgs::kernel_patterns(xi, tau, s, d) {
            let err =
                (d_pair_sum_truncated(&args, &trunc) - d_resummed_truncated(&args, &trunc)).norm();
            worst = worst.max(err);
            count += 1;
        }
    }
    Outcome::gate(
        worst <= 1e-12,
        format!(
            "{count} tuples over 4 patterns, K = 24, max |pair - regrouped| = {worst:.3e} <= 1e-12"
        ),
    )
}

fn suppression() -> Outcome {
    let config = resting();
    let sc = scenario(&config);
    let packet = sc.gaussian().unwrap();
    let mut worst: f64 = 0.0;
    for n in [-2, 2] {
        for chi in uniform((-1.0, 1.0), 41) {
            worst = worst.max(interference_modulation(packet, &sc.cfg, n, chi).abs());
        }
    }
    let events = cmd_traces(&config, 1e-12).unwrap();
    let leaked = events
        .iter()
        .filter(|e| e.term_class == TraceClass::Interference && e.n.abs() == 2)
        .count();
    let visible = events
        .iter()
        .any(|e| e.term_class == TraceClass::Interference && e.n.abs() == 1);
    Outcome::gate(
        worst <= f64::EPSILON && leaked == 0 && visible,
        format!("max |modulation(n = ±2)| = {worst:e}, {leaked} n = ±2 interference events, n = ±1 present: {visible}"),
    )
}

fn unitarity_and_boundary() -> Outcome {
    let sc = scenario(&resting());
    let state = spectral_state(&sc).unwrap();
    let cfg = sc.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut norm_err: f64 = 0.0;
    let mut wall: f64 = 0.0;
    for _ in 0..10 {
        let t = rng.gen::<f64>() * cfg.revival_time();
        let total = integrate_real(
            |x| probability_direct(&state, &cfg, x, t),
            0.0,
            cfg.length(),
            Quadrature::with_tolerance(1e-12),
        )
        .unwrap();
        norm_err = norm_err.max((total - 1.0).abs());
        wall = wall
            .max(probability_direct(&state, &cfg, 0.0, t))
            .max(probability_direct(&state, &cfg, cfg.length(), t));
    }
    Outcome::gate(
        norm_err <= 1e-9 && wall <= 1e-12,
        format!("10 random times, |∫W dx - 1| <= {norm_err:.3e}, max wall value {wall:.3e}"),
    )
}

fn revival_and_mirror() -> Outcome {
    let sc = scenario(&resting());
    let state = spectral_state(&sc).unwrap();
    let cfg = sc.cfg;
    let period = cfg.revival_time();
    let mut full: f64 = 0.0;
    let mut mirror: f64 = 0.0;
    for x in uniform((0.0, cfg.length()), 1001) {
        let w0 = probability_direct(&state, &cfg, x, 0.0);
        full = full.max((probability_direct(&state, &cfg, x, period) - w0).abs());
        let reflected = probability_direct(&state, &cfg, cfg.length() - x, 0.0);
        mirror = mirror.max((probability_direct(&state, &cfg, x, 0.5 * period) - reflected).abs());
    }
    Outcome::gate(
        full <= 1e-9 && mirror <= 1e-9,
        format!("1001 points, full revival {full:.3e}, mirror {mirror:.3e}"),
    )
}

/// Time at which the main diagonals are farthest from every other visible
/// interference line, so a transverse cut sees one line only.
fn isolated_time(packet: &GaussianPacket, cfg: &BoxConfig, n_max: i64) -> f64 {
    let dk = packet.width_wave_number();
    let visible: Vec<i64> = (-n_max..=n_max)
        .filter(|&n| (-(cfg.line_wave_number(n) / dk).powi(2)).exp() > 1e-3)
        .collect();
    let mut best = (0.0, 0.25);
    for tau in uniform((0.12, 0.38), 400) {
        let target = 2.0 * tau;
        let mut gap = f64::INFINITY;
        for &n in &visible {
            for l in -(n_max + 1)..=(n_max + 1) {
                if (n, l) == (1, 0) {
                    continue;
                }
                let xi = 2.0 * n as f64 * tau + l as f64;
                gap = gap.min((xi - target).abs());
            }
        }
        if gap > best.0 {
            best = (gap, tau);
        }
    }
    best.1
}

/// Kind of the extremum nearest the cut center and of its two neighbours:
/// -1 for a local minimum, +1 for a local maximum.
fn extremum_pattern(samples: &[f64]) -> Option<(i8, i8, i8)> {
    let mid = samples.len() / 2;
    let extrema: Vec<(usize, i8)> = (1..samples.len() - 1)
        .filter_map(|i| {
            let (a, b, c) = (samples[i - 1], samples[i], samples[i + 1]);
            if b < a && b < c {
                Some((i, -1))
            } else if b > a && b > c {
                Some((i, 1))
            } else {
                None
            }
        })
        .collect();
    let k = (0..extrema.len()).min_by_key(|&k| extrema[k].0.abs_diff(mid))?;
    if k == 0 || k + 1 >= extrema.len() {
        return None;
    }
    Some((extrema[k - 1].1, extrema[k].1, extrema[k + 1].1))
}

fn fine_structure() -> Outcome {
    let sc = scenario(&moving());
    let packet = sc.gaussian().unwrap();
    let cfg = sc.cfg;
    let trunc = sc.lines.unwrap();
    let tau = isolated_time(packet, &cfg, trunc.n_max);
    let t = tau * cfg.revival_time();
    let half_span = 0.9 * packet.width();
    let cut = |center: f64| -> Vec<f64> {
        uniform((center - half_span, center + half_span), 721)
            .into_iter()
            .map(|x| term_decomposition(packet, &cfg, x, t, &trunc).interference)
            .collect()
    };
    let forward = extremum_pattern(&cut(2.0 * tau * cfg.length()));
    let backward = extremum_pattern(&cut((1.0 - 2.0 * tau) * cfg.length()));
    let pass = forward == Some((1, -1, 1)) && backward == Some((-1, 1, -1));
    Outcome::gate(
        pass,
        format!("t/T = {tau:.4}, n = 1 cut {forward:?} (max, min, max expected), n = -1 cut {backward:?}"),
    )
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn render(config: &Path, out: &Path, threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carpetlab"));
    cmd.args(["carpet", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out);
    match threads {
        Some(n) => cmd.env("CARPETLAB_THREADS", n),
        None => cmd.env_remove("CARPETLAB_THREADS"),
    };
    let status = cmd.output().expect("run carpetlab");
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    std::fs::read(out).expect("read carpet")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = manifest_dir().join("configs/resting.json");
    let runs: Vec<(&str, Vec<u8>)> = [None, Some("1"), Some("3")]
        .into_iter()
        .enumerate()
        .map(|(i, threads)| {
            let out = dir.path().join(format!("run{i}.pgm"));
            (threads.unwrap_or("unset"), render(&config, &out, threads))
        })
        .collect();
    let first = &runs[0].1;
    let identical = runs.iter().all(|(_, bytes)| bytes == first);
    let sidecars: Vec<Vec<u8>> = (0..runs.len())
        .map(|i| std::fs::read(dir.path().join(format!("run{i}.pgm.meta.json"))).unwrap())
        .collect();
    let sidecars_identical = sidecars.iter().all(|s| s == &sidecars[0]);
    let labels: Vec<&str> = runs.iter().map(|(l, _)| *l).collect();
    Outcome::gate(
        identical && sidecars_identical && first.len() == 17 + 2 * 128 * 128,
        format!(
            "{} PGM runs with CARPETLAB_THREADS {labels:?}, identical: {identical}",
            runs.len()
        ),
    )
}

fn performance() -> Outcome {
    let base = scenario(&resting());
    let mut timings = Vec::new();
    for scale in [1, 2] {
        let mut sc = base.clone();
        sc.mode_cutoff *= scale;
        let start = Instant::now();
        compute_carpet(&sc, Evaluator::Direct).unwrap();
        timings.push((
            format!("direct M_max = {}", sc.mode_cutoff),
            start.elapsed().as_secs_f64(),
        ));
        let start = Instant::now();
        compute_carpet(&sc, Evaluator::GaussianLines).unwrap();
        timings.push((
            format!("lines at M_max = {}", sc.mode_cutoff),
            start.elapsed().as_secs_f64(),
        ));
    }
    let text: Vec<String> = timings
        .iter()
        .map(|(l, s)| format!("{l}: {s:.3} s"))
        .collect();
    Outcome::info(format!("128×128 grid; {}", text.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("representation equivalence", representation_equivalence),
        (
            "factorized vs Gaussian line sum",
            factorized_matches_gaussian_lines,
        ),
        ("pair sum vs Dirichlet regrouping", d_identity),
        ("n = ±2 interference suppression", suppression),
        ("unitarity and boundary", unitarity_and_boundary),
        ("revival and mirror", revival_and_mirror),
        ("diagonal fine structure", fine_structure),
        ("byte-identical output", determinism),
        ("evaluator timing", performance),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let tag = match (outcome.gating, outcome.pass) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        println!("criterion {} [{tag}] {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
