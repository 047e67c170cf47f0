//! Experiment configuration files.
//!
//! One TOML file describes one run:
//!
//! ```toml
//! kind = "ghost-image"
//! seed = 7
//!
//! [source]
//! pump_wavelength = 351e-9
//! sigma_theta = 0.02
//! pump_waist = 0.05
//!
//! [monte_carlo]
//! trials = 1000000
//!
//! [[layout.element]]
//! type = "mask"
//! position = 0.0
//! mask = { pitch = 1e-5, cells = [1.0, 0.0, 1.0] }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::coincidence::{McOptions, SourceModel, DEFAULT_SHARDS};
use crate::geometry::OpticalLayout;
use crate::kinematics::{CrystalMedium, DispersionTable};
use crate::units::Units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Phasematch,
    Twm,
    Mirror,
    Diffract,
    GhostImage,
    GhostDiffract,
    DirectQm,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Phasematch,
        Self::Twm,
        Self::Mirror,
        Self::Diffract,
        Self::GhostImage,
        Self::GhostDiffract,
        Self::DirectQm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Phasematch => "phasematch",
            Self::Twm => "twm",
            Self::Mirror => "mirror",
            Self::Diffract => "diffract",
            Self::GhostImage => "ghost-image",
            Self::GhostDiffract => "ghost-diffract",
            Self::DirectQm => "direct-qm",
        }
    }

    /// Kinds driven by the random number generator.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Self::GhostImage | Self::GhostDiffract | Self::DirectQm)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown output format {s:?} (csv or json)")),
        }
    }
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn fixed(v: f64) -> Self {
        Self { start: v, stop: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        crate::diffraction::linspace(self.start, self.stop, self.count)
    }

    fn validate(&self, key: &str) -> Result<(), HarnessError> {
        if self.count == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(HarnessError::validation(key, "needs finite start/stop and count >= 1"));
        }
        Ok(())
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_precision() -> usize {
    crate::csv::DEFAULT_CSV_DIGITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// Significant digits in CSV cells.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out(), format: OutputFormat::Csv, precision: default_precision() }
    }
}

fn half() -> f64 {
    0.5
}

/// Pump and pair-emission parameters. Give exactly one of `pump_omega` or
/// `pump_wavelength`, and one of `sigma_q` (1/m) or `sigma_theta` (rad,
/// converted with the signal wavenumber).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_waist: Option<f64>,
    #[serde(default = "half")]
    pub signal_fraction: f64,
}

/// Crystal dispersion: an inline `[[omega, n], ...]` table, a two-column
/// file, or a constant index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<f64>,
    #[serde(default = "one")]
    pub thickness: f64,
}

fn one() -> f64 {
    1.0
}

/// Slit or double slit for the analytic `diffract` kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitSection {
    pub a: f64,
    #[serde(default)]
    pub d_sep: f64,
    pub lambda: f64,
    pub z2: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    /// Scan of the detector coordinate `x2`.
    pub x2: Sweep,
}

/// Swept parameters; which ones are needed depends on the kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Signal frequency (phasematch).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<Sweep>,
    /// Coupling magnitude, phase, mismatch and crystal length (twm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_abs: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_phase: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_k: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<Sweep>,
    /// Object distance (mirror).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_s: Option<Sweep>,
    /// Relative offsets of the D2 distance around focus (ghost-image).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_prime_offset: Option<Sweep>,
}

fn default_trials() -> u64 {
    100_000
}

fn default_efficiency() -> f64 {
    1.0
}

fn default_shards() -> usize {
    DEFAULT_SHARDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_shards")]
    pub shards: usize,
    #[serde(default = "default_efficiency")]
    pub efficiency_d1: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency_d2: f64,
    #[serde(default)]
    pub background: f64,
    /// Off-axis object height (direct-qm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_height: Option<f64>,
    /// Gate direct-qm rays as if by a coincidence circuit.
    #[serde(default)]
    pub coincidence_enabled: bool,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            shards: default_shards(),
            efficiency_d1: 1.0,
            efficiency_d2: 1.0,
            background: 0.0,
            object_height: None,
            coincidence_enabled: false,
        }
    }
}

impl MonteCarloSection {
    pub fn options(&self) -> McOptions {
        McOptions {
            shards: self.shards,
            efficiency_d1: self.efficiency_d1,
            efficiency_d2: self.efficiency_d2,
            background: self.background,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Work in units with c = 1.
    #[serde(default)]
    pub natural_units: bool,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slit: Option<SlitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<OpticalLayout>,
    /// Directory relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

/// Parses configuration text, fills defaults and validates it.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::from_toml(&e))?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn units(&self) -> Units {
        Units::from_natural_flag(self.natural_units)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises to TOML")
    }

    fn fill_defaults(&mut self) {
        if self.kind.is_stochastic() && self.monte_carlo.is_none() {
            self.monte_carlo = Some(MonteCarloSection::default());
        }
    }

    /// Checks that the sections the kind needs are present and sane.
    pub fn validate(&self) -> Result<(), HarnessError> {
        use ExperimentKind::*;
        let need = |present: bool, key: &str| {
            if present { Ok(()) } else { Err(HarnessError::validation(key, format!("required for kind {}", self.kind))) }
        };
        if self.kind.is_stochastic() {
            need(self.seed.is_some(), "seed")?;
        }
        if self.output.precision == 0 || self.output.precision > 17 {
            return Err(HarnessError::validation("output.precision", "must lie in 1..=17"));
        }
        match self.kind {
            Phasematch => {
                need(self.source.is_some(), "source")?;
                need(self.medium.is_some(), "medium")?;
                need(self.sweep.as_ref().is_some_and(|s| s.omega_s.is_some()), "sweep.omega_s")?;
            }
            Twm => {
                let s = self.sweep.as_ref();
                need(s.is_some_and(|s| s.g_abs.is_some()), "sweep.g_abs")?;
                need(s.is_some_and(|s| s.delta_k.is_some()), "sweep.delta_k")?;
                need(s.is_some_and(|s| s.length.is_some()), "sweep.length")?;
            }
            Mirror => {
                need(self.source.is_some(), "source")?;
                need(self.layout.is_some(), "layout")?;
                need(self.sweep.as_ref().is_some_and(|s| s.z_s.is_some()), "sweep.z_s")?;
            }
            Diffract => need(self.slit.is_some(), "slit")?,
            GhostImage | GhostDiffract => {
                need(self.source.is_some(), "source")?;
                need(self.layout.is_some(), "layout")?;
            }
            DirectQm => {
                need(self.source.is_some(), "source")?;
                need(self.layout.is_some(), "layout")?;
                need(
                    self.monte_carlo.as_ref().is_some_and(|m| m.object_height.is_some()),
                    "monte_carlo.object_height",
                )?;
            }
        }
        if let Some(src) = &self.source {
            if src.pump_omega.is_some() == src.pump_wavelength.is_some() {
                return Err(HarnessError::validation("source.pump_omega", "give exactly one of pump_omega or pump_wavelength"));
            }
            if self.kind.is_stochastic() && src.sigma_q.is_some() == src.sigma_theta.is_some() {
                return Err(HarnessError::validation("source.sigma_q", "give exactly one of sigma_q or sigma_theta"));
            }
        }
        if let Some(m) = &self.medium {
            let n = [m.dispersion.is_some(), m.dispersion_file.is_some(), m.index.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if n != 1 {
                return Err(HarnessError::validation("medium.dispersion", "give exactly one of dispersion, dispersion_file or index"));
            }
        }
        if let Some(sw) = &self.sweep {
            for (key, s) in [
                ("sweep.omega_s", sw.omega_s),
                ("sweep.g_abs", sw.g_abs),
                ("sweep.g_phase", sw.g_phase),
                ("sweep.delta_k", sw.delta_k),
                ("sweep.length", sw.length),
                ("sweep.z_s", sw.z_s),
                ("sweep.s_prime_offset", sw.s_prime_offset),
            ] {
                if let Some(s) = s {
                    s.validate(key)?;
                }
            }
        }
        if let Some(slit) = &self.slit {
            slit.x2.validate("slit.x2")?;
        }
        if let Some(mc) = &self.monte_carlo {
            mc.options().validate().map_err(|e| HarnessError::validation("monte_carlo", e.to_string()))?;
        }
        Ok(())
    }

    /// Pump angular frequency in the run's units.
    pub fn pump_omega(&self) -> Result<f64, HarnessError> {
        let src = self.source.as_ref().ok_or_else(|| HarnessError::validation("source", "missing"))?;
        match (src.pump_omega, src.pump_wavelength) {
            (Some(w), None) => Ok(w),
            (None, Some(l)) if l > 0.0 => Ok(self.units().omega_from_wavelength(l)),
            _ => Err(HarnessError::validation("source.pump_wavelength", "must be > 0")),
        }
    }

    /// Source model for the stochastic kinds.
    pub fn source_model(&self) -> Result<SourceModel, HarnessError> {
        let src = self.source.as_ref().ok_or_else(|| HarnessError::validation("source", "missing"))?;
        let seed = self.seed.ok_or_else(|| HarnessError::validation("seed", "required for Monte Carlo kinds"))?;
        let units = self.units();
        let pump_omega = self.pump_omega()?;
        let k_s = units.wavenumber(pump_omega * src.signal_fraction);
        let sigma_q = match (src.sigma_q, src.sigma_theta) {
            (Some(q), _) => q,
            (None, Some(t)) => t * k_s,
            (None, None) => return Err(HarnessError::validation("source.sigma_q", "missing")),
        };
        let model = SourceModel {
            pump_omega,
            sigma_q,
            pump_waist: src.pump_waist,
            signal_fraction: src.signal_fraction,
            seed,
            units,
        };
        model.validate().map_err(|e| HarnessError::validation("source", e.to_string()))?;
        Ok(model)
    }

    /// Crystal medium with the configured dispersion.
    pub fn crystal(&self) -> Result<CrystalMedium, HarnessError> {
        let m = self.medium.as_ref().ok_or_else(|| HarnessError::validation("medium", "missing"))?;
        let table = if let Some(t) = &m.dispersion {
            t.clone()
        } else if let Some(p) = &m.dispersion_file {
            let path = self.base_dir.join(p);
            DispersionTable::load(&path).map_err(|e| HarnessError::validation("medium.dispersion_file", e.to_string()))?
        } else {
            let n = m.index.unwrap_or(1.0);
            DispersionTable::constant(n).map_err(|e| HarnessError::validation("medium.index", e.to_string()))?
        };
        CrystalMedium::new(table, num_complex::Complex64::new(0.0, 0.0), m.thickness, self.units())
            .map_err(|e| HarnessError::validation("medium", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GHOST: &str = r#"
kind = "ghost-image"
seed = 3

[source]
pump_wavelength = 351e-9
sigma_theta = 0.02

[[layout.element]]
type = "mask"
position = 0.0
mask = { pitch = 1e-5, cells = [1.0] }

[[layout.element]]
type = "lens"
position = 0.3
focal_length = 0.2

[[layout.element]]
type = "mirror"
position = 0.4
kind = "planar"
pump_omega = 5.366e15

[[layout.element]]
type = "detector"
position = 0.9
scan = { min = -2.5e-3, max = 2.5e-3 }
"#;

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config(GHOST).unwrap();
        let mc = cfg.monte_carlo.as_ref().unwrap();
        assert_eq!(mc.efficiency_d1, 1.0);
        assert_eq!(mc.efficiency_d2, 1.0);
        assert_eq!(mc.shards, DEFAULT_SHARDS);
        assert_eq!(cfg.layout.as_ref().unwrap().detector().unwrap().1.bins, 201);
        assert_eq!(cfg.output.format, OutputFormat::Csv);
        assert_eq!(cfg.output.precision, 9);
    }

    #[test]
    fn missing_seed_names_the_key() {
        let text = GHOST.replace("seed = 3\n", "");
        match parse_config(&text) {
            Err(HarnessError::Validation { key, .. }) => assert_eq!(key, "seed"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn typo_gets_a_suggestion() {
        let text = GHOST.replace("type = \"lens\"", "type = \"lense\"");
        match parse_config(&text) {
            Err(HarnessError::Validation { key, suggestion, .. }) => {
                assert_eq!(key, "lense");
                assert_eq!(suggestion.as_deref(), Some("lens"));
            }
            other => panic!("{other:?}"),
        }
        let text = GHOST.replace("focal_length", "focal_lenght");
        match parse_config(&text) {
            Err(HarnessError::Validation { key, suggestion, .. }) => {
                assert_eq!(key, "focal_lenght");
                assert_eq!(suggestion.as_deref(), Some("focal_length"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_through_toml() {
        let cfg = parse_config(GHOST).unwrap();
        let again = parse_config(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn sections_required_per_kind() {
        assert!(parse_config("kind = \"twm\"").is_err());
        assert!(parse_config("kind = \"diffract\"").is_err());
        let twm = "kind = \"twm\"\n[sweep]\ng_abs = {start = 0.1, stop = 1, count = 3}\ndelta_k = {start = 0, stop = 1, count = 2}\nlength = {start = 1, stop = 1, count = 1}\n";
        assert!(parse_config(twm).is_ok());
    }

    #[test]
    fn source_conversion() {
        let cfg = parse_config(GHOST).unwrap();
        let src = cfg.source_model().unwrap();
        let k_s = 2.0 * std::f64::consts::PI / 702e-9;
        assert!((src.sigma_q / (0.02 * k_s) - 1.0).abs() < 1e-12);
        assert_eq!(src.seed, 3);
    }
}
