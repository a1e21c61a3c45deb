//! Geometry, spectrum and eigenfunctions of the infinite square well.
//!
//! Numeric code downstream works in the dimensionless coordinates
//! ξ = x/L and τ = t/T, where T is the revival time. Physical units appear
//! only at the API surface.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::sin_pi;

/// Mass, box length and ħ, together with the derived revival time
/// `T = 4 M L² / (π ħ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxConfig {
    mass: f64,
    length: f64,
    hbar: f64,
    revival_time: f64,
}

impl BoxConfig {
    pub fn new(mass: f64, length: f64, hbar: f64) -> Result<Self> {
        let revival_time = revival_time(mass, length, hbar)?;
        Ok(Self {
            mass,
            length,
            hbar,
            revival_time,
        })
    }

    /// M = L = ħ = 1, so T = 4/π.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("unit box is valid")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn revival_time(&self) -> f64 {
        self.revival_time
    }

    /// ξ = x/L.
    #[inline]
    pub fn xi(&self, x: f64) -> f64 {
        x / self.length
    }

    /// τ = t/T.
    #[inline]
    pub fn tau(&self, t: f64) -> f64 {
        t / self.revival_time
    }

    /// k_m = mπ/L.
    pub fn wave_number(&self, m: i64) -> f64 {
        m as f64 * std::f64::consts::PI / self.length
    }

    /// κ_n = nπ/(2L), the wave numbers selected by the line representation.
    pub fn line_wave_number(&self, n: i64) -> f64 {
        n as f64 * std::f64::consts::PI / (2.0 * self.length)
    }

    pub fn contains(&self, x: f64) -> bool {
        (0.0..=self.length).contains(&x)
    }
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self::unit()
    }
}

/// Raw JSON shape of a box: `{"M": .., "L": .., "hbar": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxParams {
    #[serde(rename = "M", default = "one")]
    pub mass: f64,
    #[serde(rename = "L", default = "one")]
    pub length: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for BoxParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 1.0,
            hbar: 1.0,
        }
    }
}

impl TryFrom<BoxParams> for BoxConfig {
    type Error = crate::Error;

    fn try_from(p: BoxParams) -> Result<Self> {
        BoxConfig::new(p.mass, p.length, p.hbar)
    }
}

/// T = 4 M L² / (π ħ).
pub fn revival_time(mass: f64, length: f64, hbar: f64) -> Result<f64> {
    for (name, v) in [("mass", mass), ("length", length), ("hbar", hbar)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(domain(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(4.0 * mass * length * length / (std::f64::consts::PI * hbar))
}

/// u_m(x) = √(2/L) sin(mπx/L) for m ≥ 1 and x in [0, L].
///
/// The sine is evaluated with exact reduction, so both walls give exactly 0.
pub fn eigenfunction(cfg: &BoxConfig, m: i64, x: f64) -> Result<f64> {
    if m < 1 {
        return Err(domain(format!("eigenmode index must be >= 1, got {m}")));
    }
    if !cfg.contains(x) {
        return Err(domain(format!(
            "position {x} outside the box [0, {}]",
            cfg.length()
        )));
    }
    Ok((2.0 / cfg.length()).sqrt() * sin_pi(m as f64 * cfg.xi(x)))
}

/// E_m t / ħ = m² · 2π t / T.
pub fn eigenphase(cfg: &BoxConfig, m: i64, t: f64) -> f64 {
    let m2 = (m * m) as f64;
    m2 * (2.0 * std::f64::consts::PI * cfg.tau(t))
}
