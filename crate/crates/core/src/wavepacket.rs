//! Initial states, their eigenmode expansion, and the sum/difference
//! factorization of the Gaussian packet with its Fourier factors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::boxmodel::BoxConfig;
use crate::error::{domain, Error, Result};
use crate::numerics::{expi_pi_mul, integrate, integrate_real, sin_pi, Quadrature};

/// A packet is flagged boundary-unsafe when its density at either wall,
/// relative to the peak, exceeds this value.
pub const LEAKAGE_THRESHOLD: f64 = 1e-9;

/// Absolute tolerance for each expansion coefficient.
pub const EXPANSION_TOLERANCE: f64 = 1e-12;

/// Spectral envelope level below which eigenmodes are dropped by
/// [`auto_mode_cutoff`].
pub const ENVELOPE_CUTOFF: f64 = 1e-14;

/// Lower bound on the automatic eigenmode cutoff.
pub const MIN_MODE_CUTOFF: usize = 32;

/// Anything that can be sampled as an initial wavefunction on [0, L].
pub trait InitialState: Sync {
    fn amplitude(&self, x: f64) -> Complex64;
}

impl<F> InitialState for F
where
    F: Fn(f64) -> Complex64 + Sync,
{
    fn amplitude(&self, x: f64) -> Complex64 {
        self(x)
    }
}

/// g(x) = (√π Δx)^{-1/2} exp[-½((x - x̄)/Δx)²] exp[i k̄ (x - x̄)].
///
/// Normalized on the whole real line; the part of the norm lying outside
/// the box is reported through the leakage diagnostics, not corrected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPacket {
    center: f64,
    width: f64,
    momentum: f64,
    wave_number: f64,
    width_wave_number: f64,
    length: f64,
    left_leakage: f64,
    right_leakage: f64,
}

impl GaussianPacket {
    /// `center` must lie strictly inside the box, `width` must be positive.
    /// `momentum` is p̄; the wave number k̄ = p̄/ħ is derived.
    pub fn new(cfg: &BoxConfig, center: f64, width: f64, momentum: f64) -> Result<Self> {
        let length = cfg.length();
        if !(center > 0.0 && center < length) {
            return Err(domain(format!(
                "packet center {center} must lie inside (0, {length})"
            )));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(domain(format!(
                "packet width must be positive, got {width}"
            )));
        }
        if !momentum.is_finite() {
            return Err(domain("packet momentum must be finite"));
        }
        let left_leakage = (-(center / width).powi(2)).exp();
        let right_leakage = (-((length - center) / width).powi(2)).exp();
        Ok(Self {
            center,
            width,
            momentum,
            wave_number: momentum / cfg.hbar(),
            width_wave_number: 1.0 / width,
            length,
            left_leakage,
            right_leakage,
        })
    }

    /// Construct from x̄/L, Δx/L and k̄·L.
    pub fn from_scaled(
        cfg: &BoxConfig,
        center_over_length: f64,
        width_over_length: f64,
        wave_number_times_length: f64,
    ) -> Result<Self> {
        let length = cfg.length();
        let momentum = cfg.hbar() * wave_number_times_length / length;
        Self::new(
            cfg,
            center_over_length * length,
            width_over_length * length,
            momentum,
        )
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    /// k̄ = p̄/ħ.
    pub fn wave_number(&self) -> f64 {
        self.wave_number
    }

    /// Δκ = 1/Δx.
    pub fn width_wave_number(&self) -> f64 {
        self.width_wave_number
    }

    /// exp[-(x̄/Δx)²].
    pub fn left_leakage(&self) -> f64 {
        self.left_leakage
    }

    /// exp[-((L - x̄)/Δx)²].
    pub fn right_leakage(&self) -> f64 {
        self.right_leakage
    }

    pub fn boundary_unsafe(&self) -> bool {
        self.left_leakage > LEAKAGE_THRESHOLD || self.right_leakage > LEAKAGE_THRESHOLD
    }

    /// (√π Δx)^{-1/2}.
    pub fn amplitude_prefactor(&self) -> f64 {
        (std::f64::consts::PI.sqrt() * self.width).powf(-0.5)
    }

    pub fn factorize(&self) -> FactorizedPair {
        FactorizedPair {
            prefactor: self.amplitude_prefactor(),
            center: self.center,
            width: self.width,
            wave_number: self.wave_number,
            length: self.length,
        }
    }
}

impl InitialState for GaussianPacket {
    fn amplitude(&self, x: f64) -> Complex64 {
        let u = (x - self.center) / self.width;
        let envelope = self.amplitude_prefactor() * (-0.5 * u * u).exp();
        Complex64::from_polar(envelope, self.wave_number * (x - self.center))
    }
}

/// Finite superposition Σ c_m u_m(x) of box eigenmodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSuperposition {
    modes: Vec<(i64, Complex64)>,
    length: f64,
}

impl EigenSuperposition {
    pub fn new(cfg: &BoxConfig, modes: Vec<(i64, Complex64)>) -> Result<Self> {
        if modes.is_empty() {
            return Err(domain("eigenmode superposition needs at least one mode"));
        }
        if let Some((m, _)) = modes.iter().find(|(m, _)| *m < 1) {
            return Err(domain(format!("eigenmode index must be >= 1, got {m}")));
        }
        Ok(Self {
            modes,
            length: cfg.length(),
        })
    }

    /// A single normalized eigenmode u_m.
    pub fn single(cfg: &BoxConfig, m: i64) -> Result<Self> {
        Self::new(cfg, vec![(m, Complex64::new(1.0, 0.0))])
    }

    pub fn modes(&self) -> &[(i64, Complex64)] {
        &self.modes
    }

    pub fn highest_mode(&self) -> i64 {
        self.modes.iter().map(|(m, _)| *m).max().unwrap_or(1)
    }
}

impl InitialState for EigenSuperposition {
    fn amplitude(&self, x: f64) -> Complex64 {
        let norm = (2.0 / self.length).sqrt();
        let xi = x / self.length;
        self.modes
            .iter()
            .map(|(m, c)| c * (norm * sin_pi(*m as f64 * xi)))
            .sum()
    }
}

/// The initial states the harness knows how to build from configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Packet {
    Gaussian(GaussianPacket),
    Eigenmodes(EigenSuperposition),
}

impl Packet {
    pub fn as_gaussian(&self) -> Option<&GaussianPacket> {
        match self {
            Packet::Gaussian(g) => Some(g),
            Packet::Eigenmodes(_) => None,
        }
    }

    /// Default eigenmode cutoff for this state.
    pub fn auto_mode_cutoff(&self, cfg: &BoxConfig) -> usize {
        match self {
            Packet::Gaussian(g) => auto_mode_cutoff(g, cfg),
            Packet::Eigenmodes(s) => s.highest_mode() as usize,
        }
    }
}

impl InitialState for Packet {
    fn amplitude(&self, x: f64) -> Complex64 {
        match self {
            Packet::Gaussian(g) => g.amplitude(x),
            Packet::Eigenmodes(s) => s.amplitude(x),
        }
    }
}

/// Only Gaussian packets have a closed-form factorization.
pub fn factorize(packet: &Packet) -> Result<FactorizedPair> {
    match packet {
        Packet::Gaussian(g) => Ok(g.factorize()),
        Packet::Eigenmodes(_) => Err(Error::NotFactorizable(
            "only Gaussian packets factorize into sum and difference parts".into(),
        )),
    }
}

/// Smallest M ≥ 32 with k_M > |k̄| and exp[-(k_M - |k̄|)² Δx² / 2] < 1e-14.
pub fn auto_mode_cutoff(packet: &GaussianPacket, cfg: &BoxConfig) -> usize {
    let kbar = packet.wave_number().abs();
    let needed = (2.0 * -ENVELOPE_CUTOFF.ln()).sqrt() / packet.width();
    let mut m = ((kbar + needed) / cfg.wave_number(1)).floor().max(1.0) as usize;
    loop {
        let excess = cfg.wave_number(m as i64) - kbar;
        if excess > 0.0 && (-0.5 * (excess * packet.width()).powi(2)).exp() < ENVELOPE_CUTOFF {
            break;
        }
        m += 1;
    }
    m.max(MIN_MODE_CUTOFF)
}

/// Coefficients ψ_m for m in [-M, M], with ψ_0 = 0 and ψ_{-m} = -ψ_m.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    // Index m + M.
    coefficients: Vec<Complex64>,
    cutoff: usize,
    in_box_norm: f64,
}

impl SpectralState {
    /// Build from ψ_1..ψ_M; the in-box norm is taken to be Σ|ψ_m|².
    pub fn from_positive(positive: Vec<Complex64>) -> Result<Self> {
        let norm = positive.iter().map(|c| c.norm_sqr()).sum();
        Self::assemble(positive, norm)
    }

    fn assemble(positive: Vec<Complex64>, in_box_norm: f64) -> Result<Self> {
        let cutoff = positive.len();
        if cutoff == 0 {
            return Err(domain("spectral state needs at least one mode"));
        }
        let mut coefficients = Vec::with_capacity(2 * cutoff + 1);
        coefficients.extend(positive.iter().rev().map(|c| -c));
        coefficients.push(Complex64::new(0.0, 0.0));
        coefficients.extend(positive);
        Ok(Self {
            coefficients,
            cutoff,
            in_box_norm,
        })
    }

    /// M_max.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// ψ_m for any signed m; zero beyond the cutoff.
    pub fn coefficient(&self, m: i64) -> Complex64 {
        let idx = m + self.cutoff as i64;
        if idx < 0 || idx as usize >= self.coefficients.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[idx as usize]
        }
    }

    /// (m, ψ_m) in ascending m from -M to M.
    pub fn signed_coefficients(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m0 = -(self.cutoff as i64);
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, c)| (m0 + i as i64, *c))
    }

    /// Σ_{m ≥ 1} |ψ_m|².
    pub fn spectral_norm(&self) -> f64 {
        self.coefficients[self.cutoff + 1..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// ∫₀ᴸ |φ|² dx of the state that was expanded.
    pub fn in_box_norm(&self) -> f64 {
        self.in_box_norm
    }

    /// In-box norm minus the captured spectral norm.
    pub fn truncation_residual(&self) -> f64 {
        self.in_box_norm - self.spectral_norm()
    }
}

/// ψ_m = ∫₀ᴸ u_m(x) φ(x) dx for 1 ≤ m ≤ `cutoff`, by adaptive quadrature.
///
/// Coefficients are computed in parallel; each one is independent, so the
/// result does not depend on the worker count.
pub fn expand<S: InitialState + ?Sized>(
    state: &S,
    cfg: &BoxConfig,
    cutoff: usize,
) -> Result<SpectralState> {
    if cutoff == 0 {
        return Err(domain("eigenmode cutoff must be >= 1"));
    }
    let length = cfg.length();
    let norm = (2.0 / length).sqrt();
    let settings = Quadrature::with_tolerance(EXPANSION_TOLERANCE);
    let positive: Vec<Result<Complex64>> = (1..=cutoff as i64)
        .into_par_iter()
        .map(|m| {
            integrate(
                |x| state.amplitude(x) * (norm * sin_pi(m as f64 * x / length)),
                0.0,
                length,
                settings,
            )
            .map(|r| r.value)
        })
        .collect();
    let positive = positive.into_iter().collect::<Result<Vec<_>>>()?;
    let in_box_norm = integrate_real(|x| state.amplitude(x).norm_sqr(), 0.0, length, settings)?;
    SpectralState::assemble(positive, in_box_norm)
}

/// Which factor of the sum/difference factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FactorSign {
    /// φ₊, a function of x' + x''.
    Plus,
    /// φ₋, a function of x' - x''.
    Minus,
}

/// Closed-form factors with g*(x') g(x'') = φ₊(x' + x'') φ₋(x' - x''):
///
/// φ₊(y) = (√π Δx)^{-1/2} exp[-((y/2 - x̄)/Δx)²]
/// φ₋(y) = (√π Δx)^{-1/2} exp[-(y/(2Δx))²] exp(-i k̄ y)
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorizedPair {
    prefactor: f64,
    center: f64,
    width: f64,
    wave_number: f64,
    length: f64,
}

impl FactorizedPair {
    pub fn plus(&self, y: f64) -> Complex64 {
        let u = (0.5 * y - self.center) / self.width;
        Complex64::new(self.prefactor * (-u * u).exp(), 0.0)
    }

    pub fn minus(&self, y: f64) -> Complex64 {
        let u = y / (2.0 * self.width);
        Complex64::from_polar(self.prefactor * (-u * u).exp(), -self.wave_number * y)
    }

    pub fn eval(&self, sign: FactorSign, y: f64) -> Complex64 {
        match sign {
            FactorSign::Plus => self.plus(y),
            FactorSign::Minus => self.minus(y),
        }
    }

    /// (1/2L)·(√π Δx)^{-1/2}·2√π Δx, the common amplitude of both Fourier
    /// factors.
    fn fourier_amplitude(&self) -> f64 {
        self.prefactor * 2.0 * std::f64::consts::PI.sqrt() * self.width / (2.0 * self.length)
    }

    /// φ̃±(κ_n) = (1/2L) ∫ dy e^{iκ_n y} φ±(y), κ_n = nπ/(2L), in closed form:
    ///
    /// φ̃₋(κ) = A exp[-((κ - k̄)/Δκ)²]
    /// φ̃₊(κ) = A exp[-(κ/Δκ)²] e^{2iκx̄}
    ///
    /// with A = (√π Δx)^{1/2}/L.
    pub fn fourier_factor(&self, sign: FactorSign, n: i64) -> Complex64 {
        let kappa = n as f64 * std::f64::consts::PI / (2.0 * self.length);
        let amp = self.fourier_amplitude();
        match sign {
            FactorSign::Minus => {
                let u = (kappa - self.wave_number) * self.width;
                Complex64::new(amp * (-u * u).exp(), 0.0)
            }
            FactorSign::Plus => {
                let u = kappa * self.width;
                // e^{2iκ_n x̄} = e^{iπ n x̄/L}
                expi_pi_mul(n, self.center / self.length) * (amp * (-u * u).exp())
            }
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn wave_number(&self) -> f64 {
        self.wave_number
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// φ̃±(κ_n) for `pair`; `cfg` supplies L and must match the packet's box.
pub fn fourier_factor(
    pair: &FactorizedPair,
    sign: FactorSign,
    n: i64,
    cfg: &BoxConfig,
) -> Complex64 {
    debug_assert_eq!(pair.length(), cfg.length());
    pair.fourier_factor(sign, n)
}
