//! JSON run configuration.
//!
//! Lengths in a config file are measured either in units of the cavity
//! half-width `L` (the default) or of the full cavity length `2L`, selected by
//! `length_unit`. Everything is converted to half-width units on load; the
//! commands convert positions back when reading flags and writing output.

use std::path::Path;

use catbell::SystemConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    #[default]
    HalfWidth,
    FullWidth,
}

impl LengthUnit {
    /// Length of one file unit in half-widths.
    pub fn factor(self) -> f64 {
        match self {
            LengthUnit::HalfWidth => 1.0,
            LengthUnit::FullWidth => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub n_points: Option<usize>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scale_product: f64,
    #[serde(rename = "z0_over_L")]
    z0_over_l: f64,
    #[serde(rename = "alpha_over_L")]
    alpha_over_l: f64,
    k0_scaled: f64,
    gamma_t: f64,
    #[serde(default)]
    length_unit: LengthUnit,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    seed: u64,
    /// Switch the cavity coupling off in the oracle.
    #[serde(default)]
    uncoupled: bool,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Parameters in half-width units.
    pub system: SystemConfig,
    pub unit: LengthUnit,
    /// Grid bounds here are still in file units.
    pub grid: GridSpec,
    pub seed: u64,
    pub uncoupled: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let f: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let s = f.length_unit.factor();
        let system = SystemConfig::new(f.scale_product / s, f.z0_over_l * s, f.alpha_over_l * s, f.k0_scaled, f.gamma_t)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(n) = f.grid.n_points {
            if !n.is_power_of_two() {
                return Err(CliError::Config(format!("grid.n_points must be a power of two, got {n}")));
            }
        }
        Ok(Self { system, unit: f.length_unit, grid: f.grid, seed: f.seed, uncoupled: f.uncoupled })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// File units to half-widths.
    pub fn to_half_width(&self, z: f64) -> f64 {
        z * self.unit.factor()
    }

    pub fn from_half_width(&self, z: f64) -> f64 {
        z / self.unit.factor()
    }
}
