//! Run configuration: a TOML file of record plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use curvemom_core::farfield::AngularGrid;
use curvemom_core::geometry::CurvedMonopoleParams;
use curvemom_core::mom::{Frequency, GroundModel};
use serde::{Deserialize, Serialize};

/// Bad input from the user: config file, flags or data files.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub(crate) fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Kappa,
    LStraight,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Kappa => "kappa",
            SweepParameter::LStraight => "l_straight",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParameter::Kappa => vec![0.0, 0.25, 0.5, 0.75, 1.0],
            SweepParameter::LStraight => vec![1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }

    pub fn apply(self, base: &CurvedMonopoleParams, value: f64) -> CurvedMonopoleParams {
        let mut p = *base;
        match self {
            SweepParameter::Kappa => p.kappa = value,
            SweepParameter::LStraight => p.l_straight = value,
        }
        p
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Must match the sweep command when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<SweepParameter>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            start: 12e6,
            stop: 18e6,
            points: 61,
        }
    }
}

impl FrequencyGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start.is_finite() && self.stop.is_finite()) {
            return Err(config_error(format!("frequency start {} must be positive", self.start)));
        }
        if !(self.start < self.stop) {
            return Err(config_error(format!(
                "frequency start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(config_error("frequency grid needs at least 2 points"));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        let n = self.points - 1;
        (0..self.points)
            .map(|i| {
                let f = self.start + (self.stop - self.start) * i as f64 / n as f64;
                Frequency::new(f).expect("validated grid")
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySpec {
    pub n_elements: usize,
    pub spacing: f64,
    pub steer_theta_deg: f64,
    pub steer_phi_deg: f64,
}

impl Default for ArraySpec {
    fn default() -> Self {
        ArraySpec {
            n_elements: 12,
            spacing: 9.0,
            steer_theta_deg: 30.0,
            steer_phi_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    S1p,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "s1p" => Ok(Format::S1p),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, s1p, json, svg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ground: GroundModel,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    /// Reference impedance (ohm).
    pub z0: f64,
    pub threshold_db: f64,
    pub geometry: CurvedMonopoleParams,
    pub frequency: FrequencyGrid,
    pub sweep: SweepSpec,
    pub array: ArraySpec,
    pub pattern: AngularGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ground: GroundModel::InfinitePec,
            out: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::S1p, Format::Json, Format::Svg],
            z0: curvemom_core::rf::DEFAULT_Z0,
            threshold_db: curvemom_core::rf::DEFAULT_THRESHOLD_DB,
            geometry: CurvedMonopoleParams::default(),
            frequency: FrequencyGrid::default(),
            sweep: SweepSpec::default(),
            array: ArraySpec::default(),
            pattern: AngularGrid::default(),
        }
    }
}

/// Flag values that win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub freq_start: Option<f64>,
    pub freq_stop: Option<f64>,
    pub freq_points: Option<usize>,
    pub kappa: Option<f64>,
    pub l_straight: Option<f64>,
    pub l_ref: Option<f64>,
    pub n_elements: Option<usize>,
    pub spacing: Option<f64>,
    pub steer_theta_deg: Option<f64>,
    pub ground: Option<GroundModel>,
    pub formats: Option<Vec<Format>>,
    pub values: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.freq_start {
            self.frequency.start = v;
        }
        if let Some(v) = o.freq_stop {
            self.frequency.stop = v;
        }
        if let Some(v) = o.freq_points {
            self.frequency.points = v;
        }
        if let Some(v) = o.kappa {
            self.geometry.kappa = v;
        }
        if let Some(v) = o.l_straight {
            self.geometry.l_straight = v;
        }
        if let Some(v) = o.l_ref {
            self.geometry.l_ref = v;
        }
        if let Some(v) = o.n_elements {
            self.array.n_elements = v;
        }
        if let Some(v) = o.spacing {
            self.array.spacing = v;
        }
        if let Some(v) = o.steer_theta_deg {
            self.array.steer_theta_deg = v;
        }
        if let Some(v) = o.ground {
            self.ground = v;
        }
        if let Some(v) = &o.formats {
            self.formats = v.clone();
        }
        if let Some(v) = &o.values {
            self.sweep.values = v.clone();
        }
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        self.frequency.validate()?;
        // the geometry itself may be swept; only the fixed parts are checked here
        let g = &self.geometry;
        if !(g.f_c > 0.0 && g.wire_radius > 0.0 && g.l_ref > 0.0) {
            return Err(config_error("f_c, l_ref and wire_radius must be positive"));
        }
        if g.segments_per_wavelength < 10 {
            return Err(config_error(format!(
                "segments_per_wavelength {} is below 10",
                g.segments_per_wavelength
            )));
        }
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(config_error(format!("z0 {} must be positive", self.z0)));
        }
        if !(self.threshold_db < 0.0) {
            return Err(config_error(format!(
                "threshold_db {} must be negative",
                self.threshold_db
            )));
        }
        if self.formats.is_empty() {
            return Err(config_error("no output formats selected"));
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return Err(config_error("sweep values must be finite"));
        }
        let a = &self.array;
        if a.n_elements < 1 || !(a.spacing > 0.0) {
            return Err(config_error("array needs n_elements >= 1 and spacing > 0"));
        }
        if !(0.0..=90.0).contains(&a.steer_theta_deg) {
            return Err(config_error(format!(
                "steer_theta_deg {} outside [0, 90]",
                a.steer_theta_deg
            )));
        }
        self.pattern
            .thetas(self.ground)
            .and_then(|_| self.pattern.phis())
            .map_err(|e| config_error(e.to_string()))?;
        Ok(())
    }

    /// Values for a sweep command; the config must not name a different
    /// parameter.
    pub fn sweep_values(&self, param: SweepParameter) -> Result<Vec<f64>> {
        if let Some(p) = self.sweep.parameter {
            if p != param {
                return Err(config_error(format!(
                    "config sweeps `{}` but the command sweeps `{}`",
                    p.name(),
                    param.name()
                )));
            }
        }
        if self.sweep.values.is_empty() {
            Ok(param.default_values())
        } else {
            Ok(self.sweep.values.clone())
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
