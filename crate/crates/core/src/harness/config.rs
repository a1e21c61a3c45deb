//! JSON run configuration. Lengths are in units of L, times in units of T,
//! wave numbers in units of 1/L.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::boxmodel::{BoxConfig, BoxParams};
use crate::carpet::{auto_l_max, auto_n_max, Evaluator, LineTruncation};
use crate::error::{Error, Result};
use crate::wavepacket::{EigenSuperposition, GaussianPacket, Packet};

/// A truncation that is either chosen automatically or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cutoff {
    #[default]
    Auto,
    Fixed(u64),
}

impl Cutoff {
    pub fn resolve(self, auto: impl FnOnce() -> u64) -> u64 {
        match self {
            Cutoff::Auto => auto(),
            Cutoff::Fixed(v) => v,
        }
    }
}

impl Serialize for Cutoff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cutoff::Auto => s.serialize_str("auto"),
            Cutoff::Fixed(v) => s.serialize_u64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Cutoff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct CutoffVisitor;

        impl Visitor<'_> for CutoffVisitor {
            type Value = Cutoff;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a positive integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Cutoff, E> {
                if v == "auto" {
                    Ok(Cutoff::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Cutoff, E> {
                if v == 0 {
                    Err(E::invalid_value(de::Unexpected::Unsigned(v), &self))
                } else {
                    Ok(Cutoff::Fixed(v))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Cutoff, E> {
                if v <= 0 {
                    Err(E::invalid_value(de::Unexpected::Signed(v), &self))
                } else {
                    Ok(Cutoff::Fixed(v as u64))
                }
            }

            fn visit_unit<E: de::Error>(self) -> std::result::Result<Cutoff, E> {
                Ok(Cutoff::Auto)
            }
        }

        d.deserialize_any(CutoffVisitor)
    }
}

/// Initial state. A Gaussian is described by x̄/L, Δx/L, k̄L; an eigenmode
/// by its index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PacketConfig {
    Gaussian(GaussianSpec),
    Eigenmode(EigenmodeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    #[serde(rename = "xbar_over_L")]
    pub center_over_length: f64,
    #[serde(rename = "dx_over_L")]
    pub width_over_length: f64,
    #[serde(rename = "kbar_times_L", default)]
    pub wave_number_times_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenmodeSpec {
    pub mode: i64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig::Gaussian(GaussianSpec {
            center_over_length: 0.25,
            width_over_length: 0.05,
            wave_number_times_length: 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub nx: usize,
    #[serde(default = "default_points")]
    pub nt: usize,
    #[serde(rename = "t_max_over_T", default = "default_t_max")]
    pub t_max_over_period: f64,
}

fn default_points() -> usize {
    128
}

fn default_t_max() -> f64 {
    0.5
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: default_points(),
            nt: default_points(),
            t_max_over_period: default_t_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(rename = "M_max", default)]
    pub mode_cutoff: Cutoff,
    #[serde(default)]
    pub n_max: Cutoff,
    #[serde(default)]
    pub l_max: Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Pgm16,
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Pgm16 => "pgm",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Everything a run needs, as read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "box", default)]
    pub box_params: BoxParams,
    #[serde(default)]
    pub packet: PacketConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub truncations: TruncationConfig,
    #[serde(default = "default_evaluator")]
    pub evaluator: Evaluator,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_evaluator() -> Evaluator {
    Evaluator::GaussianLines
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            box_params: BoxParams::default(),
            packet: PacketConfig::default(),
            grid: GridConfig::default(),
            truncations: TruncationConfig::default(),
            evaluator: default_evaluator(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Gaussian packet with the given x̄/L, Δx/L, k̄L and defaults elsewhere.
    pub fn gaussian(
        center_over_length: f64,
        width_over_length: f64,
        wave_number_times_length: f64,
    ) -> Self {
        Self {
            packet: PacketConfig::Gaussian(GaussianSpec {
                center_over_length,
                width_over_length,
                wave_number_times_length,
            }),
            ..Self::default()
        }
    }

    /// Structural checks; physical ones happen in [`RunConfig::resolve`].
    pub fn check(&self) -> Result<()> {
        if self.grid.nx < 2 || self.grid.nt < 2 {
            return Err(Error::Config(format!(
                "grid needs nx, nt >= 2, got {}×{}",
                self.grid.nx, self.grid.nt
            )));
        }
        if !(self.grid.t_max_over_period > 0.0 && self.grid.t_max_over_period.is_finite()) {
            return Err(Error::Config(format!(
                "t_max_over_T must be positive, got {}",
                self.grid.t_max_over_period
            )));
        }
        if matches!(self.packet, PacketConfig::Eigenmode(_)) && self.evaluator != Evaluator::Direct
        {
            return Err(Error::Config(format!(
                "evaluator {} needs a Gaussian packet",
                self.evaluator.name()
            )));
        }
        Ok(())
    }

    /// Build the physical objects and resolve every "auto" truncation.
    pub fn resolve(&self) -> Result<Scenario> {
        self.check()?;
        let cfg = BoxConfig::try_from(self.box_params).map_err(as_config)?;
        let packet = match self.packet {
            PacketConfig::Gaussian(GaussianSpec {
                center_over_length,
                width_over_length,
                wave_number_times_length,
            }) => Packet::Gaussian(
                GaussianPacket::from_scaled(
                    &cfg,
                    center_over_length,
                    width_over_length,
                    wave_number_times_length,
                )
                .map_err(as_config)?,
            ),
            PacketConfig::Eigenmode(EigenmodeSpec { mode }) => {
                Packet::Eigenmodes(EigenSuperposition::single(&cfg, mode).map_err(as_config)?)
            }
        };
        let t_max = self.grid.t_max_over_period * cfg.revival_time();
        let mode_cutoff = self
            .truncations
            .mode_cutoff
            .resolve(|| packet.auto_mode_cutoff(&cfg) as u64) as usize;
        let lines = packet.as_gaussian().map(|g| {
            let n_max = self
                .truncations
                .n_max
                .resolve(|| auto_n_max(g, &cfg) as u64) as i64;
            let l_max = self
                .truncations
                .l_max
                .resolve(|| auto_l_max(n_max, &cfg, t_max) as u64) as i64;
            LineTruncation { n_max, l_max }
        });
        Ok(Scenario {
            cfg,
            packet,
            t_max,
            nx: self.grid.nx,
            nt: self.grid.nt,
            mode_cutoff,
            lines,
            evaluator: self.evaluator,
        })
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    }
}

/// A resolved configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: BoxConfig,
    pub packet: Packet,
    /// Upper end of the time window, physical units.
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
    pub mode_cutoff: usize,
    /// Present for Gaussian packets.
    pub lines: Option<LineTruncation>,
    pub evaluator: Evaluator,
}

impl Scenario {
    pub fn gaussian(&self) -> Result<&GaussianPacket> {
        self.packet
            .as_gaussian()
            .ok_or_else(|| Error::Config("this operation needs a Gaussian packet".into()))
    }

    pub fn line_truncation(&self) -> Result<LineTruncation> {
        self.lines
            .ok_or_else(|| Error::Config("this operation needs a Gaussian packet".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_document_parses() {
        let cfg = RunConfig::from_json(
            r#"{
                "box": {"M": 1, "L": 1, "hbar": 1},
                "packet": {"xbar_over_L": 0.25, "dx_over_L": 0.05, "kbar_times_L": 62.83185307179586},
                "grid": {"nx": 64, "nt": 32, "t_max_over_T": 0.5},
                "truncations": {"M_max": "auto", "n_max": 7, "l_max": "auto"},
                "evaluator": "factorized",
                "output": {"format": "csv", "path": "out.csv"}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.evaluator, Evaluator::Factorized);
        assert_eq!(cfg.truncations.n_max, Cutoff::Fixed(7));
        assert_eq!(cfg.output.format, OutputFormat::Csv);
        let scenario = cfg.resolve().unwrap();
        assert_eq!(scenario.lines.unwrap().n_max, 7);
        assert_eq!(scenario.lines.unwrap().l_max, 9);
        assert_eq!(scenario.mode_cutoff, 72);
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg =
            RunConfig::from_json(r#"{"packet": {"xbar_over_L": 0.3, "dx_over_L": 0.04}}"#).unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.evaluator, Evaluator::GaussianLines);
        assert_eq!(cfg.output.format, OutputFormat::Pgm16);
        assert_eq!(cfg.box_params.length, 1.0);
    }

    #[test]
    fn eigenmode_packet() {
        let cfg =
            RunConfig::from_json(r#"{"packet": {"mode": 3}, "evaluator": "direct"}"#).unwrap();
        let scenario = cfg.resolve().unwrap();
        assert!(scenario.lines.is_none());
        assert_eq!(scenario.mode_cutoff, 3);
        assert!(RunConfig::from_json(r#"{"packet": {"mode": 3}}"#).is_err());
    }

    #[test]
    fn invalid_documents_are_config_errors() {
        for text in [
            r#"{"grid": {"nx": 1}}"#,
            r#"{"grid": {"t_max_over_T": 0}}"#,
            r#"{"evaluator": "spectral"}"#,
            r#"{"truncations": {"n_max": 0}}"#,
            r#"{"truncations": {"n_max": "many"}}"#,
            r#"{"output": {"format": "png"}}"#,
            r#"{"colour": true}"#,
            "not json",
        ] {
            assert!(
                matches!(RunConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
        let bad_packet = RunConfig::gaussian(1.2, 0.05, 0.0);
        assert!(matches!(bad_packet.resolve(), Err(Error::Config(_))));
    }
}
