//! Run configuration: a TOML file with one section per module.
//!
//! Keys carry the symbol names of the nominal parameter table (`X`, `r1`,
//! `Theta_half_deg`, `eta_d`, ...). Every key is optional and defaults to its
//! nominal value, so an empty file is a valid configuration.
//!
//! ```toml
//! [geometry]
//! Theta_half_deg = 30.0
//!
//! [experiments]
//! scenario = "lamp-corner"
//! fov_min_deg = 1.0
//! fov_max_deg = 20.0
//! fov_steps = 20
//! ```

// Field names follow the parameter-table symbols.
#![allow(non_snake_case)]

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{lambert_mode, DetectorParams, Resolution};
use crate::experiments::{lin_space, log_space, FilterBandwidth, FovWindow, Scenario, ScenarioName, SystemParams};
use crate::geometry::RoomDims;
use crate::keyrate::ProtocolParams;
use crate::noise::AmbientField;
use crate::spectra::{CurveKind, SpectraError, SpectralCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    UnknownKey,
    Invariant,
    UndefinedMode,
    MissingFile,
    Spectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// `section.key`, or empty when the problem is not tied to one key.
    pub key: String,
    /// 1-based line in the config (or spectrum) file, when known.
    pub line: Option<u64>,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind,
            key: key.into(),
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::UnknownKey => "unknown key",
            DiagnosticKind::Invariant => "invalid value",
            DiagnosticKind::UndefinedMode => "undefined Lambert mode",
            DiagnosticKind::MissingFile => "missing file",
            DiagnosticKind::Spectrum => "spectrum",
        };
        write!(f, "{kind}")?;
        if !self.key.is_empty() {
            write!(f, " [{}]", self.key)?;
        }
        if let Some(l) = self.line {
            write!(f, " (line {l})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthKeyword {
    Matched,
}

/// `"matched"` or a bandwidth in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandwidthSetting {
    Keyword(BandwidthKeyword),
    Nm(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometrySection {
    pub X: f64,
    pub Y: f64,
    pub Z: f64,
    pub r1: f64,
    pub r2: f64,
    pub Phi_half_deg: f64,
    pub Theta_half_deg: f64,
    /// Receiver axis follows the transmitter; `false` keeps it pointing down.
    pub receiver_tracks_transmitter: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lamp_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lamp_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectraSection {
    pub lambda_nm: f64,
    /// Lamp PSD at `lambda_nm`, W/nm. Replaced by the value read from
    /// `lamp_spectrum` when that is set.
    pub S_w_per_nm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lamp_spectrum: Option<PathBuf>,
    pub lamp_spectrum_kind: CurveKind,
    /// Distance of an irradiance measurement from the bulb, m.
    pub measurement_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSection {
    pub A_m2: f64,
    pub n: f64,
    pub T_s: f64,
    pub Psi_c_deg: f64,
    pub patches_per_meter: u32,
    pub max_patches_per_meter: u32,
    pub convergence_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSection {
    pub eta_d: f64,
    pub tau_s: f64,
    pub n_D_rate_per_s: f64,
    pub delta_lambda_nm: BandwidthSetting,
    /// Ambient spectral irradiance in lamp scenarios, W/nm/m².
    pub p_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeyrateSection {
    pub mu: f64,
    pub q: f64,
    pub f: f64,
    pub e_d: f64,
}

/// Sweep axes. The noise axis is the lamp PSD `S` (W/nm) for lamp scenarios
/// and the ambient irradiance `p_n` (W/nm/m²) for ambient-only ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentsSection {
    pub scenario: String,
    pub fov_min_deg: f64,
    pub fov_max_deg: f64,
    pub fov_steps: usize,
    pub fov_scale: Scale,
    pub noise_min: f64,
    pub noise_max: f64,
    pub noise_steps: usize,
    pub noise_scale: Scale,
    /// FOV range searched for the ambient-noise optimum, degrees.
    pub window_min_deg: f64,
    pub window_max_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliSection {
    pub out: PathBuf,
    /// Treat an unconverged reflection integral as a failure.
    pub strict: bool,
    /// Monte-Carlo samples for the reflection cross-check; 0 disables it.
    pub mc_samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub spectra: SpectraSection,
    pub channel: ChannelSection,
    pub noise: NoiseSection,
    pub keyrate: KeyrateSection,
    pub experiments: ExperimentsSection,
    pub cli: CliSection,
    /// Directory relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            X: p.room.x,
            Y: p.room.y,
            Z: p.room.z,
            r1: p.wall_reflectivity,
            r2: p.floor_reflectivity,
            Phi_half_deg: p.lamp_semi_angle_deg,
            Theta_half_deg: p.transmitter_semi_angle_deg,
            receiver_tracks_transmitter: p.receiver_tracks_transmitter,
            lamp_x: None,
            lamp_y: None,
        }
    }
}

impl Default for SpectraSection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            lambda_nm: p.wavelength_nm,
            S_w_per_nm: p.lamp_psd_w_per_nm,
            lamp_spectrum: None,
            lamp_spectrum_kind: CurveKind::SourcePsd,
            measurement_distance_m: 0.5,
        }
    }
}

impl Default for ChannelSection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            A_m2: p.area_m2,
            n: p.concentrator_index,
            T_s: p.filter_transmission,
            Psi_c_deg: p.fov_deg,
            patches_per_meter: p.resolution.patches_per_meter,
            max_patches_per_meter: p.resolution.max_patches_per_meter,
            convergence_tolerance: p.resolution.tolerance,
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            eta_d: p.detector.eta_d,
            tau_s: p.detector.pulse_width,
            n_D_rate_per_s: p.detector.dark_rate,
            delta_lambda_nm: BandwidthSetting::Keyword(BandwidthKeyword::Matched),
            p_n: p.ambient.p_n,
        }
    }
}

impl Default for KeyrateSection {
    fn default() -> Self {
        let p = ProtocolParams::default();
        Self { mu: p.mu, q: p.q, f: p.f, e_d: p.e_d }
    }
}

impl Default for ExperimentsSection {
    fn default() -> Self {
        Self {
            scenario: ScenarioName::LampCenter.as_str().into(),
            fov_min_deg: 1.0,
            fov_max_deg: 30.0,
            fov_steps: 30,
            fov_scale: Scale::Linear,
            noise_min: 1e-7,
            noise_max: 1e-3,
            noise_steps: 17,
            noise_scale: Scale::Log,
            window_min_deg: FovWindow::PLOTTED.min_deg,
            window_max_deg: FovWindow::PLOTTED.max_deg,
        }
    }
}

impl Default for CliSection {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            strict: false,
            mc_samples: 0,
            seed: 1,
        }
    }
}

const OPTIONAL_KEYS: &[(&str, &str)] = &[
    ("geometry", "lamp_x"),
    ("geometry", "lamp_y"),
    ("spectra", "lamp_spectrum"),
];

fn line_of(text: &str, key: &str) -> Option<u64> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| {
                let rest = rest.trim_start();
                rest.starts_with('=') || rest.starts_with(']')
            }) || l.strip_prefix('[').is_some_and(|r| r.trim_start().starts_with(key))
        })
        .map(|i| i as u64 + 1)
}

fn toml_line(text: &str, err: &toml::de::Error) -> Option<u64> {
    err.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1) as u64)
}

/// Keys present in `table` that the schema does not know.
fn unknown_keys(text: &str, table: &toml::Table) -> Vec<Diagnostic> {
    let known = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
    let mut out = Vec::new();
    for (section, value) in table {
        let Some(known_section) = known.get(section).and_then(|v| v.as_table()) else {
            let mut d = Diagnostic::new(DiagnosticKind::UnknownKey, section.clone(), "unknown section");
            d.line = line_of(text, section);
            out.push(d);
            continue;
        };
        let Some(entries) = value.as_table() else {
            out.push(Diagnostic::new(DiagnosticKind::Syntax, section.clone(), "expected a section"));
            continue;
        };
        for key in entries.keys() {
            let optional = OPTIONAL_KEYS.iter().any(|&(s, k)| s == section && k == key);
            if !optional && !known_section.contains_key(key) {
                let mut d = Diagnostic::new(DiagnosticKind::UnknownKey, format!("{section}.{key}"), "not a known parameter");
                d.line = line_of(text, key);
                out.push(d);
            }
        }
    }
    out
}

impl RunConfig {
    /// Parses a config, rejecting unknown keys. Parameter values are not
    /// checked here; see [`RunConfig::validate`].
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let (cfg, diags) = parse(text);
        match cfg {
            Some(cfg) if diags.is_empty() => Ok(cfg),
            _ => Err(ConfigError::Invalid(diags)),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scenario_name(&self) -> Result<ScenarioName, Diagnostic> {
        self.experiments
            .scenario
            .parse()
            .map_err(|e: crate::experiments::ExperimentError| Diagnostic::new(DiagnosticKind::Invariant, "experiments.scenario", e.to_string()))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Lamp PSD at the link wavelength: from the spectrum file if one is
    /// given, else `S_w_per_nm`.
    pub fn lamp_psd(&self) -> Result<f64, Diagnostic> {
        let s = &self.spectra;
        let Some(file) = &s.lamp_spectrum else {
            return Ok(s.S_w_per_nm);
        };
        let path = self.resolve(file);
        let key = "spectra.lamp_spectrum";
        if !path.is_file() {
            return Err(Diagnostic::new(DiagnosticKind::MissingFile, key, format!("{} does not exist", path.display())));
        }
        let to_diag = |e: SpectraError| {
            let mut d = Diagnostic::new(DiagnosticKind::Spectrum, key, format!("{}: {e}", path.display()));
            if let SpectraError::Malformed { line, .. } = e {
                d.line = Some(line);
            }
            d
        };
        let mut curve = SpectralCurve::from_csv_path(&path, s.lamp_spectrum_kind).map_err(to_diag)?;
        if curve.kind() == CurveKind::Irradiance {
            curve = curve.irradiance_to_psd(s.measurement_distance_m).map_err(to_diag)?;
        }
        curve.density_at(s.lambda_nm).map_err(to_diag)
    }

    /// Effective physical parameters. Does not check invariants.
    pub fn system_params(&self) -> Result<SystemParams, Diagnostic> {
        let (g, c, n, k) = (&self.geometry, &self.channel, &self.noise, &self.keyrate);
        let lamp_xy = match (g.lamp_x, g.lamp_y) {
            (None, None) => None,
            (x, y) => Some((x.unwrap_or(g.X / 2.0), y.unwrap_or(g.Y / 2.0))),
        };
        Ok(SystemParams {
            room: RoomDims { x: g.X, y: g.Y, z: g.Z },
            wall_reflectivity: g.r1,
            floor_reflectivity: g.r2,
            lamp_semi_angle_deg: g.Phi_half_deg,
            lamp_xy,
            transmitter_semi_angle_deg: g.Theta_half_deg,
            receiver_tracks_transmitter: g.receiver_tracks_transmitter,
            wavelength_nm: self.spectra.lambda_nm,
            lamp_psd_w_per_nm: self.lamp_psd()?,
            ambient: AmbientField { p_n: n.p_n },
            fov_deg: c.Psi_c_deg,
            area_m2: c.A_m2,
            concentrator_index: c.n,
            filter_transmission: c.T_s,
            filter_bandwidth: match n.delta_lambda_nm {
                BandwidthSetting::Keyword(BandwidthKeyword::Matched) => FilterBandwidth::Matched,
                BandwidthSetting::Nm(v) => FilterBandwidth::Fixed(v),
            },
            detector: DetectorParams {
                eta_d: n.eta_d,
                dark_rate: n.n_D_rate_per_s,
                pulse_width: n.tau_s,
            },
            protocol: ProtocolParams { mu: k.mu, q: k.q, f: k.f, e_d: k.e_d },
            resolution: Resolution {
                patches_per_meter: c.patches_per_meter,
                max_patches_per_meter: c.max_patches_per_meter,
                tolerance: c.convergence_tolerance,
            },
        })
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let d = self.validate();
        if !d.is_empty() {
            return Err(ConfigError::Invalid(d));
        }
        let name = self.scenario_name().map_err(|d| ConfigError::Invalid(vec![d]))?;
        let params = self.system_params().map_err(|d| ConfigError::Invalid(vec![d]))?;
        Ok(Scenario::with_params(name, params))
    }

    pub fn fov_values(&self) -> Vec<f64> {
        let e = &self.experiments;
        axis(e.fov_min_deg, e.fov_max_deg, e.fov_steps, e.fov_scale)
    }

    pub fn noise_values(&self) -> Vec<f64> {
        let e = &self.experiments;
        axis(e.noise_min, e.noise_max, e.noise_steps, e.noise_scale)
    }

    pub fn window(&self) -> FovWindow {
        FovWindow {
            min_deg: self.experiments.window_min_deg,
            max_deg: self.experiments.window_max_deg,
        }
    }

    /// Every problem with the parameters; empty when the config can run.
    /// Does not modify anything.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if let Err(d) = self.scenario_name() {
            out.push(d);
        }
        for (key, v) in [
            ("geometry.Phi_half_deg", self.geometry.Phi_half_deg),
            ("geometry.Theta_half_deg", self.geometry.Theta_half_deg),
        ] {
            if let Err(e) = lambert_mode(v) {
                out.push(Diagnostic::new(DiagnosticKind::UndefinedMode, key, e.to_string()));
            }
        }
        let e = &self.experiments;
        for (key, steps) in [("experiments.fov_steps", e.fov_steps), ("experiments.noise_steps", e.noise_steps)] {
            if steps == 0 {
                out.push(Diagnostic::new(DiagnosticKind::Invariant, key, "sweep needs at least 1 step"));
            }
        }
        if !(e.fov_min_deg > 0.0 && e.fov_min_deg <= e.fov_max_deg && e.fov_max_deg <= 90.0) {
            out.push(Diagnostic::new(
                DiagnosticKind::Invariant,
                "experiments.fov_min_deg",
                format!("FOV axis must satisfy 0 < min <= max <= 90, got [{}, {}]", e.fov_min_deg, e.fov_max_deg),
            ));
        }
        let noise_floor = if e.noise_scale == Scale::Log { f64::MIN_POSITIVE } else { 0.0 };
        if !(e.noise_min >= noise_floor && e.noise_min <= e.noise_max && e.noise_max.is_finite()) {
            out.push(Diagnostic::new(
                DiagnosticKind::Invariant,
                "experiments.noise_min",
                format!("noise axis must satisfy 0 <= min <= max (min > 0 on a log scale), got [{}, {}]", e.noise_min, e.noise_max),
            ));
        }
        if !(e.window_min_deg > 0.0 && e.window_min_deg <= e.window_max_deg && e.window_max_deg <= 90.0) {
            out.push(Diagnostic::new(
                DiagnosticKind::Invariant,
                "experiments.window_min_deg",
                format!("FOV window must satisfy 0 < min <= max <= 90, got [{}, {}]", e.window_min_deg, e.window_max_deg),
            ));
        }
        if self.channel.max_patches_per_meter < self.channel.patches_per_meter {
            out.push(Diagnostic::new(
                DiagnosticKind::Invariant,
                "channel.max_patches_per_meter",
                "must be >= patches_per_meter",
            ));
        }
        match self.system_params() {
            Err(d) => out.push(d),
            Ok(params) => {
                // modes were reported above
                let already = out.iter().any(|d| d.kind == DiagnosticKind::UndefinedMode);
                if !already {
                    let name = self.scenario_name().unwrap_or(ScenarioName::LampCenter);
                    if let Err(err) = Scenario::with_params(name, params).validate() {
                        let msg = err.to_string();
                        let msg = msg.strip_prefix("invalid parameters: ").unwrap_or(&msg);
                        for m in msg.split("; ") {
                            let m = m.strip_prefix("invalid scenario: ").unwrap_or(m);
                            out.push(Diagnostic::new(DiagnosticKind::Invariant, "", m));
                        }
                    }
                }
            }
        }
        out
    }
}

fn axis(lo: f64, hi: f64, steps: usize, scale: Scale) -> Vec<f64> {
    match scale {
        Scale::Linear => lin_space(lo, hi, steps),
        Scale::Log => log_space(lo, hi, steps),
    }
}

/// Parses `text`, collecting syntax errors and unknown keys.
pub fn parse(text: &str) -> (Option<RunConfig>, Vec<Diagnostic>) {
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let mut d = Diagnostic::new(DiagnosticKind::Syntax, "", e.message().to_string());
            d.line = toml_line(text, &e);
            return (None, vec![d]);
        }
    };
    let diags = unknown_keys(text, &table);
    match toml::from_str::<RunConfig>(text) {
        Ok(cfg) => (Some(cfg), diags),
        Err(e) if diags.is_empty() => {
            let mut d = Diagnostic::new(DiagnosticKind::Syntax, "", e.message().to_string());
            d.line = toml_line(text, &e);
            (None, vec![d])
        }
        Err(_) => (None, diags),
    }
}

/// Parse and validate in one pass, reporting everything found.
pub fn validate_text(text: &str, base_dir: &Path) -> Vec<Diagnostic> {
    match parse(text) {
        (Some(mut cfg), mut diags) => {
            cfg.base_dir = base_dir.to_path_buf();
            diags.extend(cfg.validate());
            diags
        }
        (None, diags) => diags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_are_valid() {
        assert!(RunConfig::default().validate().is_empty());
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
        let p = RunConfig::default().system_params().unwrap();
        assert_eq!(p, SystemParams::default());
    }

    #[test]
    fn dump_reparses() {
        let text = RunConfig::default().to_toml_string();
        assert!(text.contains("[geometry]") && text.contains("Theta_half_deg = 30.0"));
        assert!(text.contains("delta_lambda_nm = \"matched\""));
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), RunConfig::default());
    }

    #[test]
    fn reflectivity_above_one_is_invalid() {
        let cfg = RunConfig::from_toml_str("[geometry]\nr1 = 1.5\n").unwrap();
        let d = cfg.validate();
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, DiagnosticKind::Invariant);
        assert!(d[0].message.contains("r1"));
    }

    #[test]
    fn wide_source_has_undefined_mode() {
        let cfg = RunConfig::from_toml_str("[geometry]\nTheta_half_deg = 95\n").unwrap();
        let d = cfg.validate();
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, DiagnosticKind::UndefinedMode);
        assert_eq!(d[0].key, "geometry.Theta_half_deg");
    }

    #[test]
    fn unknown_keys_are_reported_with_lines() {
        let text = "[geometry]\nr1 = 0.5\nr3 = 0.2\n\n[lamps]\nk = 1\n";
        let (_, d) = parse(text);
        assert_eq!(d.len(), 2, "{d:?}");
        assert_eq!(d[0].key, "geometry.r3");
        assert_eq!(d[0].line, Some(3));
        assert_eq!(d[1].key, "lamps");
        assert_eq!(d[1].line, Some(5));
        assert!(RunConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn syntax_error_has_line() {
        let (cfg, d) = parse("[keyrate]\nmu = 0.5\nq = = 1\n");
        assert!(cfg.is_none());
        assert_eq!(d[0].kind, DiagnosticKind::Syntax);
        assert_eq!(d[0].line, Some(3));
    }

    #[test]
    fn unknown_scenario() {
        let cfg = RunConfig::from_toml_str("[experiments]\nscenario = \"attic\"\n").unwrap();
        assert!(cfg.validate().iter().any(|d| d.key == "experiments.scenario"));
        assert!(cfg.scenario().is_err());
    }

    #[test]
    fn dangling_spectrum_file() {
        let cfg = RunConfig::from_toml_str("[spectra]\nlamp_spectrum = \"nowhere.csv\"\n").unwrap();
        let d = cfg.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::MissingFile);
    }

    #[test]
    fn spectrum_file_sets_psd() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("flat.csv"), "wavelength_nm,density\n800,2e-5\n900,2e-5\n").unwrap();
        std::fs::write(dir.path().join("bad.csv"), "wavelength_nm,density\n800,2e-5\n900,x\n").unwrap();
        std::fs::write(dir.path().join("irr.csv"), "wavelength_nm,density\n800,1e-6\n900,1e-6\n").unwrap();
        let load = |body: &str| {
            let path = dir.path().join("run.toml");
            std::fs::write(&path, body).unwrap();
            RunConfig::from_path(&path).unwrap()
        };
        let cfg = load("[spectra]\nlamp_spectrum = \"flat.csv\"\n");
        assert_eq!(cfg.lamp_psd().unwrap(), 2e-5);
        let cfg = load("[spectra]\nlamp_spectrum = \"irr.csv\"\nlamp_spectrum_kind = \"irradiance\"\n");
        assert!((cfg.lamp_psd().unwrap() - std::f64::consts::PI * 1e-6).abs() < 1e-18);
        let cfg = load("[spectra]\nlamp_spectrum = \"bad.csv\"\n");
        let d = cfg.lamp_psd().unwrap_err();
        assert_eq!((d.kind, d.line), (DiagnosticKind::Spectrum, Some(3)));
        let cfg = load("[spectra]\nlamp_spectrum = \"flat.csv\"\nlambda_nm = 950.0\n");
        assert!(cfg.lamp_psd().unwrap_err().message.contains("outside"));
    }

    #[test]
    fn fixed_bandwidth() {
        let cfg = RunConfig::from_toml_str("[noise]\ndelta_lambda_nm = 0.1\n").unwrap();
        assert_eq!(cfg.system_params().unwrap().filter_bandwidth, FilterBandwidth::Fixed(0.1));
        assert!(RunConfig::from_toml_str("[noise]\ndelta_lambda_nm = \"wide\"\n").is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        let cfg = RunConfig::from_toml_str("[experiments]\nfov_steps = 0\n").unwrap();
        assert!(cfg.validate().iter().any(|d| d.key == "experiments.fov_steps"));
    }

    #[test]
    fn axes() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.fov_values().len(), 30);
        assert_eq!(cfg.noise_values()[0], 1e-7);
        cfg.experiments.fov_steps = 1;
        assert_eq!(cfg.fov_values(), vec![1.0]);
    }

    proptest! {
        #[test]
        fn dumped_configs_round_trip(
            r1 in 0.0f64..=1.0,
            theta in 0.5f64..89.0,
            mu in 0.0f64..2.0,
            steps in 1usize..100,
            tracks: bool,
            bw in prop::option::of(1e-3f64..10.0),
        ) {
            let mut cfg = RunConfig::default();
            cfg.geometry.r1 = r1;
            cfg.geometry.Theta_half_deg = theta;
            cfg.geometry.receiver_tracks_transmitter = tracks;
            cfg.keyrate.mu = mu;
            cfg.experiments.fov_steps = steps;
            if let Some(bw) = bw {
                cfg.noise.delta_lambda_nm = BandwidthSetting::Nm(bw);
            }
            let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            prop_assert_eq!(back.system_params().unwrap(), cfg.system_params().unwrap());
            prop_assert_eq!(back, cfg);
        }
    }
}
