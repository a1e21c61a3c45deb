//! Time evolution in the eigenbasis, the truncated Green's function, and the
//! line (δ-comb) structure of the two-point kernel.
//!
//! The kernel K(x,t|x',x'') = G*(x,t|x') G(x,t|x'') is a combination of four
//! copies of the double sum
//!
//! ```text
//! D(η; ζ) = Σ_{m',m''} e^{iπ(m'+m'')η} e^{-iπ(m'-m'')[ξ - (m'+m'')2τ + ζ]}
//! ```
//!
//! Regrouping by n = m' + m'' turns the inner sum into a Dirichlet kernel
//! that concentrates on the spacetime lines χ_{n,l}(x,t) = x/L - n t/(T/2) - l.
//! Both routes are implemented here at finite truncation, where they agree
//! exactly.

use num_complex::Complex64;
use serde::Serialize;

use crate::boxmodel::BoxConfig;
use crate::numerics::{expi_pi, parity_sign, reduced_product, sin_pi, ComplexSum};
use crate::wavepacket::SpectralState;

/// ψ(x,t) = (1/(i√(2L))) Σ_{m=-M}^{M} ψ_m exp[iπm(x/L - 2mt/T)].
///
/// Terms are accumulated in ascending m with compensated summation.
pub fn evolve(state: &SpectralState, cfg: &BoxConfig, x: f64, t: f64) -> Complex64 {
    let xi = cfg.xi(x);
    let minus_two_tau = -2.0 * cfg.tau(t);
    let mut acc = ComplexSum::new();
    for (m, c) in state.signed_coefficients() {
        if m == 0 {
            continue;
        }
        let angle = reduced_product(m, xi) + reduced_product(m * m, minus_two_tau);
        acc.add(c * expi_pi(angle));
    }
    // 1/(i√(2L)) = -i/√(2L)
    acc.value() * Complex64::new(0.0, -1.0 / (2.0 * cfg.length()).sqrt())
}

/// W(x,t) = |ψ(x,t)|².
pub fn probability_direct(state: &SpectralState, cfg: &BoxConfig, x: f64, t: f64) -> f64 {
    evolve(state, cfg, x, t).norm_sqr().max(0.0)
}

/// Truncated Green's function
///
/// G(x,t|x') = (1/2L) Σ_{|m| ≤ M} [e^{-iπmx'/L} - e^{iπmx'/L}] e^{iπm(x/L - 2mt/T)}.
///
/// The full series is a distribution; pointwise values depend on the
/// cutoff and only integrals against smooth states are meaningful.
pub fn green_truncated(cfg: &BoxConfig, x: f64, t: f64, source: f64, cutoff: usize) -> Complex64 {
    let xi = cfg.xi(x);
    let xs = cfg.xi(source);
    let minus_two_tau = -2.0 * cfg.tau(t);
    let mut acc = ComplexSum::new();
    let m_max = cutoff as i64;
    for m in -m_max..=m_max {
        if m == 0 {
            continue;
        }
        let source_factor = expi_pi(-reduced_product(m, xs)) - expi_pi(reduced_product(m, xs));
        let propagation = expi_pi(reduced_product(m, xi) + reduced_product(m * m, minus_two_tau));
        acc.add(source_factor * propagation);
    }
    acc.value() / (2.0 * cfg.length())
}

/// χ_{n,l}(x,t) with the ingredients it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiValue {
    pub value: f64,
    /// x/L
    pub xi: f64,
    /// t/(T/2)
    pub half_periods: f64,
    pub n: i64,
    pub l: i64,
}

/// χ_{n,l}(x,t) = x/L - n·t/(T/2) - l.
pub fn chi(n: i64, l: i64, x: f64, t: f64, cfg: &BoxConfig) -> ChiValue {
    let xi = cfg.xi(x);
    let half_periods = 2.0 * cfg.tau(t);
    ChiValue {
        value: chi_scaled(n, l, xi, half_periods),
        xi,
        half_periods,
        n,
        l,
    }
}

/// χ from ξ = x/L and h = t/(T/2).
#[inline]
pub(crate) fn chi_scaled(n: i64, l: i64, xi: f64, half_periods: f64) -> f64 {
    (xi - n as f64 * half_periods) - l as f64
}

/// Which sign of the ∓ in `x/L ∓ s - l` a line uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LineBranch {
    /// x/L - s - l = n t/(T/2)
    Minus,
    /// x/L + s - l = n t/(T/2)
    Plus,
}

/// Where a line meets the left wall x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WallCrossing {
    Time(f64),
    /// n = 0: the line is vertical and never crosses the wall.
    Vertical,
}

impl WallCrossing {
    pub fn time(self) -> Option<f64> {
        match self {
            WallCrossing::Time(t) => Some(t),
            WallCrossing::Vertical => None,
        }
    }
}

/// t_{n,l}(x = 0) = (T/2)·(∓s - l)/n for a source coordinate
/// s = (x' ± x'')/(2L).
pub fn wall_crossing_time(
    cfg: &BoxConfig,
    n: i64,
    l: i64,
    source: f64,
    branch: LineBranch,
) -> WallCrossing {
    if n == 0 {
        return WallCrossing::Vertical;
    }
    let signed = match branch {
        LineBranch::Minus => -source,
        LineBranch::Plus => source,
    };
    WallCrossing::Time(0.5 * cfg.revival_time() * (signed - l as f64) / n as f64)
}

/// Both branches, `[Minus, Plus]`.
pub fn wall_crossing_times(cfg: &BoxConfig, n: i64, l: i64, source: f64) -> [WallCrossing; 2] {
    [
        wall_crossing_time(cfg, n, l, source, LineBranch::Minus),
        wall_crossing_time(cfg, n, l, source, LineBranch::Plus),
    ]
}

/// The four δ-families of the kernel's line representation.
///
/// With s = (x'+x'')/2L and d = (x'-x'')/2L, the kernel is
///
/// ```text
/// 4L² K = Σ (-1)^{nl} { e^{iπnd} δ[χ - s] + e^{-iπnd} δ[χ + s]
///                     - e^{iπns} δ[χ - d] - e^{-iπns} δ[χ + d] }
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelTerm {
    SumPlus,
    SumMinus,
    DiffPlus,
    DiffMinus,
}

impl KernelTerm {
    pub const ALL: [KernelTerm; 4] = [
        KernelTerm::SumPlus,
        KernelTerm::SumMinus,
        KernelTerm::DiffPlus,
        KernelTerm::DiffMinus,
    ];

    /// +1 for the sum families, -1 for the difference families.
    pub fn sign(self) -> f64 {
        match self {
            KernelTerm::SumPlus | KernelTerm::SumMinus => 1.0,
            KernelTerm::DiffPlus | KernelTerm::DiffMinus => -1.0,
        }
    }

    /// (δ-offset, phase coordinate) chosen from (s, d) with their signs.
    fn offsets(self, s: f64, d: f64) -> (f64, f64) {
        match self {
            KernelTerm::SumPlus => (s, d),
            KernelTerm::SumMinus => (-s, -d),
            KernelTerm::DiffPlus => (d, s),
            KernelTerm::DiffMinus => (-d, -s),
        }
    }
}

/// One line family (n, l) of one kernel term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LineFamily {
    pub n: i64,
    pub l: i64,
    pub parity_weight: i8,
    pub term_class: KernelTerm,
}

impl LineFamily {
    pub fn new(n: i64, l: i64, term_class: KernelTerm) -> Self {
        Self {
            n,
            l,
            parity_weight: parity_sign(n * l) as i8,
            term_class,
        }
    }

    /// Complex prefactor of this family's δ-function in K, including 1/(4L²).
    pub fn weight(&self, cfg: &BoxConfig, x1: f64, x2: f64) -> Complex64 {
        let (s, d) = source_coordinates(cfg, x1, x2);
        let (_, phase_coord) = self.term_class.offsets(s, d);
        let scale = self.term_class.sign() * self.parity_weight as f64
            / (4.0 * cfg.length() * cfg.length());
        expi_pi(reduced_product(self.n, phase_coord)) * scale
    }

    /// The δ-function argument χ_{n,l}(x,t) ∓ (s or d); the family lives
    /// where it vanishes.
    pub fn delta_argument(&self, cfg: &BoxConfig, x: f64, t: f64, x1: f64, x2: f64) -> f64 {
        let (s, d) = source_coordinates(cfg, x1, x2);
        let (offset, _) = self.term_class.offsets(s, d);
        chi(self.n, self.l, x, t, cfg).value - offset
    }

    /// Time at which this family's line crosses x = 0.
    pub fn wall_crossing(&self, cfg: &BoxConfig, x1: f64, x2: f64) -> WallCrossing {
        let (s, d) = source_coordinates(cfg, x1, x2);
        let (offset, _) = self.term_class.offsets(s, d);
        // χ(0,t) = offset ⇔ t/(T/2) = (-offset - l)/n
        wall_crossing_time(cfg, self.n, self.l, offset, LineBranch::Minus)
    }
}

/// (s, d) = ((x'+x'')/2L, (x'-x'')/2L).
pub fn source_coordinates(cfg: &BoxConfig, x1: f64, x2: f64) -> (f64, f64) {
    let two_l = 2.0 * cfg.length();
    ((x1 + x2) / two_l, (x1 - x2) / two_l)
}

/// Dimensionless arguments of D(η; ζ) at the spacetime point (ξ, τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DArgs {
    pub eta: f64,
    pub zeta: f64,
    pub xi: f64,
    pub tau: f64,
}

impl DArgs {
    /// The four argument tuples whose D-values make up the kernel, with
    /// their signs: (d; -s), (-d; s), (s; -d), (-s; d).
    pub fn kernel_patterns(xi: f64, tau: f64, s: f64, d: f64) -> [(f64, DArgs); 4] {
        let mk = |eta, zeta| DArgs { eta, zeta, xi, tau };
        [
            (1.0, mk(d, -s)),
            (1.0, mk(-d, s)),
            (-1.0, mk(s, -d)),
            (-1.0, mk(-s, d)),
        ]
    }

    /// ξ - n·2τ + ζ, shared by both evaluation routes.
    #[inline]
    fn bracket(&self, n: i64) -> f64 {
        (self.xi - n as f64 * (2.0 * self.tau)) + self.zeta
    }
}

/// Truncation of D as a rectangle in the regrouped indices:
/// |m| ≤ `k_m`, |k| ≤ `k_k`, both parities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DTruncation {
    pub k_m: i64,
    pub k_k: i64,
}

impl Default for DTruncation {
    fn default() -> Self {
        Self { k_m: 24, k_k: 24 }
    }
}

impl DTruncation {
    /// The (m', m'') pairs covered by the rectangle, sorted ascending:
    /// m' = m + k, m'' = m - k (even) and m' = m + k + 1, m'' = m - k (odd).
    pub fn pair_set(&self) -> Vec<(i64, i64)> {
        let mut pairs = Vec::with_capacity(2 * ((2 * self.k_m + 1) * (2 * self.k_k + 1)) as usize);
        for m in -self.k_m..=self.k_m {
            for k in -self.k_k..=self.k_k {
                pairs.push((m + k, m - k));
                pairs.push((m + k + 1, m - k));
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

#[inline]
fn pair_term(args: &DArgs, m1: i64, m2: i64) -> Complex64 {
    let n = m1 + m2;
    let k = m1 - m2;
    expi_pi(reduced_product(n, args.eta) - reduced_product(k, args.bracket(n)))
}

/// Direct double sum of D(η; ζ) over an explicit set of index pairs.
pub fn d_pair_sum_over(args: &DArgs, pairs: &[(i64, i64)]) -> Complex64 {
    let mut acc = ComplexSum::new();
    for &(m1, m2) in pairs {
        acc.add(pair_term(args, m1, m2));
    }
    acc.value()
}

/// D(η; ζ) summed pair by pair over the truncation's pair set.
pub fn d_pair_sum_truncated(args: &DArgs, trunc: &DTruncation) -> Complex64 {
    d_pair_sum_over(args, &trunc.pair_set())
}

/// Pair sum restricted to the diagonal m' + m'' = n.
pub fn d_pair_sum_diagonal(args: &DArgs, trunc: &DTruncation, n: i64) -> Complex64 {
    let pairs: Vec<_> = trunc
        .pair_set()
        .into_iter()
        .filter(|(a, b)| a + b == n)
        .collect();
    d_pair_sum_over(args, &pairs)
}

/// Below this |sin(πθ)| the Dirichlet kernel takes its limit value 2K+1.
pub const DIRICHLET_SINGULAR: f64 = 1e-12;

/// Σ_{k=-K}^{K} e^{-2πikθ} = sin((2K+1)πθ)/sin(πθ).
pub fn dirichlet_kernel(theta: f64, k: i64) -> f64 {
    let order = (2 * k + 1) as f64;
    let r = theta - theta.round();
    let denom = sin_pi(r);
    if denom.abs() < DIRICHLET_SINGULAR {
        order
    } else {
        sin_pi(order * r) / denom
    }
}

/// Per-n contributions of the regrouped sum, ascending in n.
///
/// Even n = 2m: e^{iπnη} D_K(θ_n). Odd n = 2m+1: e^{iπnη} e^{-iπθ_n} D_K(θ_n),
/// with θ_n = ξ - n·2τ + ζ.
pub fn d_resummed_terms(args: &DArgs, trunc: &DTruncation) -> Vec<(i64, Complex64)> {
    let mut terms = Vec::with_capacity((4 * trunc.k_m + 2) as usize);
    for n in -2 * trunc.k_m..=2 * trunc.k_m + 1 {
        let theta = args.bracket(n);
        let dirichlet = dirichlet_kernel(theta, trunc.k_k);
        let mut angle = reduced_product(n, args.eta);
        if n.rem_euclid(2) == 1 {
            angle -= reduced_product(1, theta);
        }
        terms.push((n, expi_pi(angle) * dirichlet));
    }
    terms
}

/// D(η; ζ) with the inner sum in closed form.
pub fn d_resummed_truncated(args: &DArgs, trunc: &DTruncation) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (_, term) in d_resummed_terms(args, trunc) {
        acc.add(term);
    }
    acc.value()
}

/// Which evaluation of D to use when assembling the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DRoute {
    PairSum,
    Resummed,
}

/// Truncated kernel (1/4L²)[D(d;-s) + D(-d;s) - D(s;-d) - D(-s;d)].
pub fn kernel_truncated(
    cfg: &BoxConfig,
    x: f64,
    t: f64,
    x1: f64,
    x2: f64,
    trunc: &DTruncation,
    route: DRoute,
) -> Complex64 {
    let (s, d) = source_coordinates(cfg, x1, x2);
    let mut acc = ComplexSum::new();
    for (sign, args) in DArgs::kernel_patterns(cfg.xi(x), cfg.tau(t), s, d) {
        let value = match route {
            DRoute::PairSum => d_pair_sum_truncated(&args, trunc),
            DRoute::Resummed => d_resummed_truncated(&args, trunc),
        };
        acc.add(value * sign);
    }
    acc.value() / (4.0 * cfg.length() * cfg.length())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{expand, EigenSuperposition, GaussianPacket, InitialState};

    #[test]
    fn stationary_state_density_is_time_independent() {
        let cfg = BoxConfig::unit();
        let state = SpectralState::from_positive(vec![Complex64::new(1.0, 0.0)]).unwrap();
        for &t in &[0.0, 0.1, 0.77, 3.0] {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let expected = 2.0 * (std::f64::consts::PI * x).sin().powi(2);
                assert!((probability_direct(&state, &cfg, x, t) - expected).abs() < 1e-14);
            }
        }
        assert!((probability_direct(&state, &cfg, 0.5, 0.3) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn evolve_reproduces_eigenmode_sum_at_t0() {
        let cfg = BoxConfig::new(1.0, 1.3, 1.0).unwrap();
        let s = EigenSuperposition::new(
            &cfg,
            vec![(1, Complex64::new(0.6, 0.0)), (4, Complex64::new(0.0, 0.8))],
        )
        .unwrap();
        let state = expand(&s, &cfg, 6).unwrap();
        for i in 0..=10 {
            let x = 1.3 * i as f64 / 10.0;
            assert!((evolve(&state, &cfg, x, 0.0) - s.amplitude(x)).norm() < 1e-10);
        }
    }

    #[test]
    fn walls_vanish_at_all_times() {
        let cfg = BoxConfig::unit();
        let g = GaussianPacket::from_scaled(&cfg, 0.3, 0.05, 31.0).unwrap();
        let state = expand(&g, &cfg, 90).unwrap();
        for i in 0..25 {
            let t = 0.0537 * i as f64;
            assert!(evolve(&state, &cfg, 0.0, t).norm() < 1e-12);
            assert!(evolve(&state, &cfg, 1.0, t).norm() < 1e-12);
        }
    }

    #[test]
    fn green_function_is_odd_in_source() {
        let cfg = BoxConfig::unit();
        for &(x, t, src) in &[(0.3, 0.1, 0.2), (0.9, 1.7, 0.65), (0.05, 0.0, 0.5)] {
            let a = green_truncated(&cfg, x, t, src, 40);
            let b = green_truncated(&cfg, x, t, -src, 40);
            assert!((a + b).norm() < 1e-15);
        }
    }

    #[test]
    fn chi_examples() {
        let cfg = BoxConfig::new(1.0, 2.0, 1.0).unwrap();
        let t_half = 0.5 * cfg.revival_time();
        assert_eq!(chi(0, 0, 0.7, 3.3, &cfg).value, 0.35);
        assert_eq!(chi(1, 0, 2.0, t_half, &cfg).value, 0.0);
        for &(n, l, x, t) in &[
            (3_i64, -2_i64, 0.4, 0.9),
            (-5, 7, 1.7, 2.2),
            (2, 1, 0.0, 0.1),
        ] {
            let lhs = chi(-n, -l, x, t, &cfg).value;
            let rhs = -chi(n, l, -x, t, &cfg).value;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn wall_crossing_examples() {
        let cfg = BoxConfig::unit();
        let t_rev = cfg.revival_time();
        let [minus, plus] = wall_crossing_times(&cfg, 1, 0, 0.25);
        assert!((minus.time().unwrap() + t_rev / 8.0).abs() < 1e-15);
        assert!((plus.time().unwrap() - t_rev / 8.0).abs() < 1e-15);
        let t = wall_crossing_time(&cfg, 2, 1, 0.0, LineBranch::Minus)
            .time()
            .unwrap();
        assert!((t + t_rev / 4.0).abs() < 1e-15);
        assert_eq!(
            wall_crossing_time(&cfg, 0, 3, 0.1, LineBranch::Plus),
            WallCrossing::Vertical
        );
    }

    #[test]
    fn line_family_parity_and_delta_support() {
        let cfg = BoxConfig::unit();
        for n in -4..=4 {
            for l in -4..=4 {
                for term in KernelTerm::ALL {
                    let fam = LineFamily::new(n, l, term);
                    assert_eq!(fam.parity_weight as f64, (-1.0_f64).powi((n * l) as i32));
                    if n != 0 {
                        // The δ argument vanishes on the wall crossing it reports.
                        let t = fam.wall_crossing(&cfg, 0.3, 0.1).time().unwrap();
                        assert!(fam.delta_argument(&cfg, 0.0, t, 0.3, 0.1).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn dirichlet_limit_and_closed_form() {
        for k in [0_i64, 1, 5, 24] {
            for j in -3..=3 {
                assert_eq!(dirichlet_kernel(j as f64, k), (2 * k + 1) as f64);
            }
            for &theta in &[0.1, 0.37, -0.49, 2.71, -13.3] {
                let brute: Complex64 = (-k..=k)
                    .map(|kk| {
                        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * kk as f64 * theta)
                    })
                    .sum();
                assert!((brute.re - dirichlet_kernel(theta, k)).abs() < 1e-12);
                assert!(brute.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_examples() {
        let single = DTruncation { k_m: 0, k_k: 0 };
        // Pairs (0,0) and (1,0); restricting to n = 0 leaves the single pair.
        let args = DArgs {
            eta: 0.3,
            zeta: 0.1,
            xi: 0.7,
            tau: 0.2,
        };
        assert_eq!(
            d_pair_sum_diagonal(&args, &single, 0),
            Complex64::new(1.0, 0.0)
        );

        let trunc = DTruncation { k_m: 3, k_k: 5 };
        let aligned = DArgs {
            eta: 0.0,
            zeta: -0.42,
            xi: 0.42,
            tau: 0.0,
        };
        let count = trunc.pair_set().len() as f64;
        assert_eq!(count, 2.0 * 7.0 * 11.0);
        assert!(
            (d_pair_sum_truncated(&aligned, &trunc) - Complex64::new(count, 0.0)).norm() < 1e-12
        );
    }

    #[test]
    fn pair_set_is_a_bijection_image() {
        let trunc = DTruncation { k_m: 4, k_k: 6 };
        let pairs = trunc.pair_set();
        let mut dedup = pairs.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), pairs.len());
    }

    #[test]
    fn per_n_grouping_matches_diagonals() {
        let trunc = DTruncation { k_m: 5, k_k: 7 };
        let args = DArgs {
            eta: 0.13,
            zeta: -0.61,
            xi: 0.29,
            tau: 0.083,
        };
        for (n, term) in d_resummed_terms(&args, &trunc) {
            let diag = d_pair_sum_diagonal(&args, &trunc, n);
            assert!((term - diag).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn kernel_is_green_product_on_square_pair_set() {
        // With the square |m'|, |m''| ≤ M the four-D assembly equals G*·G.
        let cfg = BoxConfig::unit();
        let cutoff = 9_i64;
        let mut square = Vec::new();
        for a in -cutoff..=cutoff {
            for b in -cutoff..=cutoff {
                square.push((a, b));
            }
        }
        for &(x, t, x1, x2) in &[(0.3, 0.21, 0.4, 0.15), (0.8, 0.9, 0.55, 0.7)] {
            let g1 = green_truncated(&cfg, x, t, x1, cutoff as usize);
            let g2 = green_truncated(&cfg, x, t, x2, cutoff as usize);
            let (s, d) = source_coordinates(&cfg, x1, x2);
            let mut acc = Complex64::new(0.0, 0.0);
            for (sign, args) in DArgs::kernel_patterns(cfg.xi(x), cfg.tau(t), s, d) {
                acc += d_pair_sum_over(&args, &square) * sign;
            }
            let kernel = acc / (4.0 * cfg.length() * cfg.length());
            assert!((kernel - g1.conj() * g2).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_routes_agree() {
        let cfg = BoxConfig::unit();
        let trunc = DTruncation::default();
        let a = kernel_truncated(&cfg, 0.4, 0.3, 0.2, 0.35, &trunc, DRoute::PairSum);
        let b = kernel_truncated(&cfg, 0.4, 0.3, 0.2, 0.35, &trunc, DRoute::Resummed);
        assert!((a - b).norm() < 1e-12);
    }
}
