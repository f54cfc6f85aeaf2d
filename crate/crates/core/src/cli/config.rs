//! `key = value` configuration files.
//!
//! Recognised keys: `shell.planes`, `shell.sats_per_plane`,
//! `shell.altitude_km`, `shell.inclination_deg`, `constants.earth_radius_km`,
//! `constants.mu`, `constants.c_km_s`, `sim.duration_s`, `sim.step_s`.
//! Blank lines and lines starting with `#` are skipped.

use std::path::Path;

use crate::geom::{PhysicalConstants, ShellParams};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub planes: Option<usize>,
    pub sats_per_plane: Option<usize>,
    pub altitude_km: Option<f64>,
    pub inclination_deg: Option<f64>,
    pub earth_radius_km: Option<f64>,
    pub mu: Option<f64>,
    pub light_speed_km_s: Option<f64>,
    pub duration_s: Option<f64>,
    pub step_s: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = || format!("line {}", lineno + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}: expected key = value", at()))?;
            let (key, value) = (key.trim(), value.trim());
            let float = || {
                value
                    .parse::<f64>()
                    .map_err(|_| format!("{}: {key} expects a number, got '{value}'", at()))
            };
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|_| format!("{}: {key} expects an integer, got '{value}'", at()))
            };
            match key {
                "shell.planes" => cfg.planes = Some(count()?),
                "shell.sats_per_plane" => cfg.sats_per_plane = Some(count()?),
                "shell.altitude_km" => cfg.altitude_km = Some(float()?),
                "shell.inclination_deg" => cfg.inclination_deg = Some(float()?),
                "constants.earth_radius_km" => cfg.earth_radius_km = Some(float()?),
                "constants.mu" => cfg.mu = Some(float()?),
                "constants.c_km_s" => cfg.light_speed_km_s = Some(float()?),
                "sim.duration_s" => cfg.duration_s = Some(float()?),
                "sim.step_s" => cfg.step_s = Some(float()?),
                _ => return Err(format!("{}: unknown key '{key}'", at())),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Shell from `base` with every key set in this file applied on top.
    /// Without a base all four shell keys must be present.
    pub fn shell(&self, base: Option<ShellParams>) -> Result<ShellParams, String> {
        let missing = |k: &str| format!("config lacks {k} and no preset was given");
        let shell = ShellParams {
            planes: self
                .planes
                .or(base.map(|b| b.planes))
                .ok_or_else(|| missing("shell.planes"))?,
            sats_per_plane: self
                .sats_per_plane
                .or(base.map(|b| b.sats_per_plane))
                .ok_or_else(|| missing("shell.sats_per_plane"))?,
            altitude_km: self
                .altitude_km
                .or(base.map(|b| b.altitude_km))
                .ok_or_else(|| missing("shell.altitude_km"))?,
            inclination_deg: self
                .inclination_deg
                .or(base.map(|b| b.inclination_deg))
                .ok_or_else(|| missing("shell.inclination_deg"))?,
        };
        shell.validate().map_err(|e| e.to_string())?;
        Ok(shell)
    }

    pub fn constants(&self) -> Result<PhysicalConstants, String> {
        let d = PhysicalConstants::default();
        let c = PhysicalConstants {
            earth_radius_km: self.earth_radius_km.unwrap_or(d.earth_radius_km),
            mu: self.mu.unwrap_or(d.mu),
            light_speed_km_s: self.light_speed_km_s.unwrap_or(d.light_speed_km_s),
        };
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}
