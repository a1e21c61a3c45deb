use carpetlab::boxmodel::BoxConfig;
use carpetlab::carpet::Evaluator;
use carpetlab::carpet::{
    carpet_factorized, carpet_gaussian_raw, term_decomposition, trace_catalog, uniform,
    LineTruncation, TraceClass,
};
use carpetlab::harness::{compute_carpet, RunConfig};
use carpetlab::propagator::probability_direct;
use carpetlab::wavepacket::{auto_mode_cutoff, expand, GaussianPacket};
use proptest::prelude::*;

#[test]
fn coarse_grid_equivalence_with_fixed_cutoffs() {
    let mut config = RunConfig::gaussian(0.3, 0.04, 12.0);
    config.grid.nx = 48;
    config.grid.nt = 40;
    config.grid.t_max_over_period = 1.0;
    let sc = config.resolve().unwrap();
    let direct = compute_carpet(&sc, Evaluator::Direct).unwrap();
    let factorized = compute_carpet(&sc, Evaluator::Factorized).unwrap();
    let (_, w_max) = direct.min_max();
    for (a, b) in direct.values.iter().zip(&factorized.values) {
        assert!((a - b).abs() <= 1e-6 * w_max);
    }
}

#[test]
fn larger_cutoffs_do_not_move_the_carpet() {
    let cfg = BoxConfig::unit();
    let g = GaussianPacket::from_scaled(&cfg, 0.5, 0.05, 30.0).unwrap();
    let t_max = 0.5 * cfg.revival_time();
    let base = LineTruncation::auto(&g, &cfg, t_max);
    let wider = LineTruncation {
        n_max: base.n_max + 10,
        l_max: base.l_max + 10,
    };
    let bound = base.tail_bound(&g, &cfg);
    assert!(bound < 1e-20);
    for x in uniform((0.0, 1.0), 17) {
        for t in uniform((0.0, t_max), 9) {
            let a = carpet_gaussian_raw(&g, &cfg, x, t, &base);
            let b = carpet_gaussian_raw(&g, &cfg, x, t, &wider);
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }
}

#[test]
fn undersized_cutoffs_are_flagged_by_the_tail_bound() {
    let cfg = BoxConfig::unit();
    let g = GaussianPacket::from_scaled(&cfg, 0.25, 0.05, 0.0).unwrap();
    let tiny = LineTruncation { n_max: 3, l_max: 2 };
    assert!(tiny.tail_bound(&g, &cfg) > 0.1);
}

#[test]
fn resting_packet_catalog_is_symmetric_in_slope() {
    let cfg = BoxConfig::unit();
    let g = GaussianPacket::from_scaled(&cfg, 0.25, 0.05, 0.0).unwrap();
    let events = trace_catalog(&g, &cfg, 1e-6).unwrap();
    for e in &events {
        let partner = events
            .iter()
            .find(|p| p.n == -e.n && p.term_class == e.term_class && p.l == e.l)
            .unwrap_or_else(|| panic!("no partner for n = {} {:?}", e.n, e.term_class));
        assert_eq!(partner.weight, e.weight);
    }
    assert!(events
        .iter()
        .all(|e| e.term_class != TraceClass::Interference || e.n.abs() % 4 != 2));
}

#[test]
fn interference_lines_start_at_the_walls() {
    let cfg = BoxConfig::unit();
    let g = GaussianPacket::from_scaled(&cfg, 0.25, 0.05, 20.0 * std::f64::consts::PI).unwrap();
    for e in trace_catalog(&g, &cfg, 1e-3).unwrap() {
        match e.term_class {
            TraceClass::Interference => assert_eq!(e.origin_x_over_length, 0.0),
            TraceClass::Classical => assert_eq!(e.origin_x_over_length, 0.25),
            TraceClass::Mirror => assert_eq!(e.origin_x_over_length, 0.75),
        }
    }
}

fn packet_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.3f64..0.7, 0.03f64..0.06, -40.0f64..40.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn line_sum_is_periodic_in_the_revival_time((xbar, dx, kbar) in packet_strategy(), x in 0.0f64..1.0, tf in 0.0f64..0.5) {
        let cfg = BoxConfig::unit();
        let g = GaussianPacket::from_scaled(&cfg, xbar, dx, kbar).unwrap();
        let t = tf * cfg.revival_time();
        let trunc = LineTruncation::auto(&g, &cfg, t + cfg.revival_time());
        let a = carpet_gaussian_raw(&g, &cfg, x, t, &trunc);
        let b = carpet_gaussian_raw(&g, &cfg, x, t + cfg.revival_time(), &trunc);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn factorized_and_gaussian_forms_agree((xbar, dx, kbar) in packet_strategy(), x in 0.0f64..1.0, tf in 0.0f64..1.0) {
        let cfg = BoxConfig::unit();
        let g = GaussianPacket::from_scaled(&cfg, xbar, dx, kbar).unwrap();
        let t = tf * cfg.revival_time();
        let trunc = LineTruncation::auto(&g, &cfg, t);
        let a = carpet_gaussian_raw(&g, &cfg, x, t, &trunc);
        let b = carpet_factorized(&g.factorize(), &cfg, x, t, &trunc);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn line_sum_matches_eigenmode_sum((xbar, dx, kbar) in packet_strategy(), x in 0.0f64..1.0, tf in 0.0f64..1.0) {
        let cfg = BoxConfig::unit();
        let g = GaussianPacket::from_scaled(&cfg, xbar, dx, kbar).unwrap();
        prop_assume!(!g.boundary_unsafe());
        let t = tf * cfg.revival_time();
        let state = expand(&g, &cfg, auto_mode_cutoff(&g, &cfg)).unwrap();
        let trunc = LineTruncation::auto(&g, &cfg, t);
        let lines = carpet_gaussian_raw(&g, &cfg, x, t, &trunc);
        let direct = probability_direct(&state, &cfg, x, t);
        let peak = 1.0 / (std::f64::consts::PI.sqrt() * dx);
        prop_assert!((lines - direct).abs() <= 1e-6 * peak);
    }

    #[test]
    fn mirror_term_reflects_the_classical_term((xbar, dx, kbar) in packet_strategy(), x in 0.0f64..1.0, tf in 0.0f64..1.0) {
        let cfg = BoxConfig::unit();
        let g = GaussianPacket::from_scaled(&cfg, xbar, dx, kbar).unwrap();
        let t = tf * cfg.revival_time();
        let trunc = LineTruncation::auto(&g, &cfg, t);
        let here = term_decomposition(&g, &cfg, x, t, &trunc);
        let there = term_decomposition(&g, &cfg, -x, t, &trunc);
        prop_assert!((here.mirror - there.classical).abs() <= 1e-13 * here.mirror.abs().max(1.0));
    }
}
