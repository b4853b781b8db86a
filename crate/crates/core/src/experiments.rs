//! Named room scenarios, parameter sweeps and secure-region searches.
//!
//! A [`Scenario`] fixes where the transmitter stands and whether the lamp is
//! on. Lamp scenarios treat the noise level as the lamp PSD `S` (W/nm);
//! ambient-only scenarios switch the lamp off and treat the noise level as
//! the isotropic spectral irradiance `p_n` (W/nm/m²).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{self, lambert_mode, ChannelError, ChannelGains, DetectorParams, ReflectedGain, Resolution};
use crate::geometry::{link_geometry, GeometryError, Lamp, Point3, Pose, Receiver, RoomDims, RoomScenario, Transmitter};
use crate::keyrate::{secret_key_rate, KeyRateReport, ProtocolParams};
use crate::noise::{self, AmbientField, NoiseBudget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("{0} is not an ambient-only scenario")]
    NotAmbientOnly(ScenarioName),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    AmbientOnlyCenter,
    AmbientOnlyCorner,
    LampCenter,
    LampCorner,
    LampCornerSteered,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::AmbientOnlyCenter,
        ScenarioName::AmbientOnlyCorner,
        ScenarioName::LampCenter,
        ScenarioName::LampCorner,
        ScenarioName::LampCornerSteered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::AmbientOnlyCenter => "ambient-only-center",
            ScenarioName::AmbientOnlyCorner => "ambient-only-corner",
            ScenarioName::LampCenter => "lamp-center",
            ScenarioName::LampCorner => "lamp-corner",
            ScenarioName::LampCornerSteered => "lamp-corner-steered",
        }
    }

    pub fn is_ambient_only(self) -> bool {
        matches!(self, ScenarioName::AmbientOnlyCenter | ScenarioName::AmbientOnlyCorner)
    }

    pub fn noise_axis(self) -> NoiseAxis {
        if self.is_ambient_only() {
            NoiseAxis::AmbientIrradiance
        } else {
            NoiseAxis::LampPsd
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ExperimentError::UnknownScenario(s.to_string()))
    }
}

/// What the noise-level axis of a sweep means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseAxis {
    /// Lamp PSD `S`, W/nm.
    LampPsd,
    /// Ambient spectral irradiance `p_n`, W/nm/m².
    AmbientIrradiance,
}

/// Optical filter bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterBandwidth {
    /// Matched to the pulse width, `λ² / (τ c)`.
    Matched,
    Fixed(f64),
}

/// Every physical parameter of the link. Defaults are the nominal values
/// of the 4 x 4 x 3 m reference room.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub room: RoomDims,
    pub wall_reflectivity: f64,
    pub floor_reflectivity: f64,
    pub lamp_semi_angle_deg: f64,
    /// Lamp position on the ceiling plane; `None` puts it at the center,
    /// co-located with the receiver.
    pub lamp_xy: Option<(f64, f64)>,
    pub transmitter_semi_angle_deg: f64,
    /// Aim the receiver's axis at the transmitter instead of straight down.
    pub receiver_tracks_transmitter: bool,
    pub wavelength_nm: f64,
    /// Nominal lamp PSD at the link wavelength, W/nm.
    pub lamp_psd_w_per_nm: f64,
    /// Ambient light present in lamp scenarios.
    pub ambient: AmbientField,
    pub fov_deg: f64,
    pub area_m2: f64,
    pub concentrator_index: f64,
    pub filter_transmission: f64,
    pub filter_bandwidth: FilterBandwidth,
    pub detector: DetectorParams,
    pub protocol: ProtocolParams,
    pub resolution: Resolution,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            room: RoomDims { x: 4.0, y: 4.0, z: 3.0 },
            wall_reflectivity: 0.7,
            floor_reflectivity: 0.1,
            lamp_semi_angle_deg: 70.0,
            lamp_xy: None,
            transmitter_semi_angle_deg: 30.0,
            receiver_tracks_transmitter: true,
            wavelength_nm: 880.0,
            lamp_psd_w_per_nm: 1e-5,
            ambient: AmbientField::DARK,
            fov_deg: 11.0,
            area_m2: 1e-4,
            concentrator_index: 1.5,
            filter_transmission: 1.0,
            filter_bandwidth: FilterBandwidth::Matched,
            detector: DetectorParams {
                eta_d: 0.6,
                dark_rate: 1000.0,
                pulse_width: 100e-12,
            },
            protocol: ProtocolParams::default(),
            resolution: Resolution::default(),
        }
    }
}

impl SystemParams {
    pub fn filter_bandwidth_nm(&self) -> f64 {
        match self.filter_bandwidth {
            FilterBandwidth::Matched => noise::matched_filter_bandwidth_nm(self.wavelength_nm, self.detector.pulse_width),
            FilterBandwidth::Fixed(nm) => nm,
        }
    }

    /// Invariant violations that do not depend on a scenario.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("Phi_half", self.lamp_semi_angle_deg), ("Theta_half", self.transmitter_semi_angle_deg)] {
            if let Err(e) = lambert_mode(v) {
                out.push(format!("{name}: {e}"));
            }
        }
        if !(self.wavelength_nm > 0.0) {
            out.push(format!("lambda must be > 0, got {}", self.wavelength_nm));
        }
        if !(self.ambient.p_n >= 0.0) {
            out.push(format!("p_n must be >= 0, got {}", self.ambient.p_n));
        }
        if self.resolution.patches_per_meter == 0 {
            out.push("resolution must be at least 1 patch per meter".into());
        }
        out.extend(self.detector.violations());
        out.extend(self.protocol.violations());
        out
    }
}

/// Transmitter placement of a named scenario, overridable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub transmitter: Option<Pose>,
    pub transmitter_semi_angle_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub params: SystemParams,
    pub overrides: Overrides,
}

/// Semi-angle of the narrowed beam used when steering from the corner.
pub const STEERED_SEMI_ANGLE_DEG: f64 = 5.0;

/// Range of receiver fields of view over which path-loss and ambient-noise
/// curves are drawn, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FovWindow {
    pub min_deg: f64,
    pub max_deg: f64,
}

impl FovWindow {
    /// Window of the reference path-loss and ambient-noise plots.
    pub const PLOTTED: FovWindow = FovWindow { min_deg: 10.0, max_deg: 30.0 };

    pub fn grid(&self, step_deg: f64) -> Vec<f64> {
        let n = ((self.max_deg - self.min_deg) / step_deg).round() as usize;
        (0..=n).map(|i| (self.min_deg + i as f64 * step_deg).min(self.max_deg)).collect()
    }
}

/// LOS and reflected gains at one field of view; everything that does not
/// depend on the noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub fov_deg: f64,
    pub gains: ChannelGains,
    /// Present for lamp scenarios.
    pub reflected: Option<ReflectedGain>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub fov_deg: f64,
    /// `S` or `p_n`, depending on the scenario.
    pub level: f64,
    pub gains: ChannelGains,
    pub noise: NoiseBudget,
    pub report: KeyRateReport,
    pub reflected: Option<ReflectedGain>,
}

impl PointResult {
    pub fn rate(&self) -> f64 {
        self.report.rate
    }

    pub fn converged(&self) -> bool {
        self.reflected.map_or(true, |r| r.converged)
    }
}

impl Scenario {
    pub fn new(name: ScenarioName) -> Self {
        Self::with_params(name, SystemParams::default())
    }

    pub fn with_params(name: ScenarioName, params: SystemParams) -> Self {
        Self {
            name,
            params,
            overrides: Overrides::default(),
        }
    }

    pub fn transmitter(&self) -> Result<Transmitter, ExperimentError> {
        let dims = self.params.room;
        let receiver_at = dims.ceiling_center();
        let (pose, semi_angle) = match self.name {
            ScenarioName::AmbientOnlyCenter | ScenarioName::LampCenter => {
                (Pose::facing_up(dims.floor_center()), self.params.transmitter_semi_angle_deg)
            }
            ScenarioName::AmbientOnlyCorner | ScenarioName::LampCorner => {
                (Pose::facing_up(Point3::origin()), self.params.transmitter_semi_angle_deg)
            }
            ScenarioName::LampCornerSteered => (Pose::aimed_at(Point3::origin(), receiver_at)?, STEERED_SEMI_ANGLE_DEG),
        };
        Ok(Transmitter {
            pose: self.overrides.transmitter.unwrap_or(pose),
            semi_angle_deg: self.overrides.transmitter_semi_angle_deg.unwrap_or(semi_angle),
        })
    }

    /// The full room at field of view `fov_deg` with the lamp at `lamp_psd`.
    pub fn room(&self, fov_deg: f64, lamp_psd: f64) -> Result<RoomScenario, ExperimentError> {
        let p = &self.params;
        let dims = p.room;
        let transmitter = self.transmitter()?;
        let rx_pos = dims.ceiling_center();
        let rx_pose = if p.receiver_tracks_transmitter {
            Pose::aimed_at(rx_pos, transmitter.pose.position)?
        } else {
            Pose::facing_down(rx_pos)
        };
        let lamp_pos = match p.lamp_xy {
            Some((x, y)) => Point3::new(x, y, dims.z),
            None => rx_pos,
        };
        let room = RoomScenario {
            dims,
            wall_reflectivity: p.wall_reflectivity,
            floor_reflectivity: p.floor_reflectivity,
            lamp: Lamp {
                pose: Pose::facing_down(lamp_pos),
                semi_angle_deg: p.lamp_semi_angle_deg,
                psd_w_per_nm: lamp_psd,
            },
            transmitter,
            receiver: Receiver {
                pose: rx_pose,
                fov_deg,
                area_m2: p.area_m2,
                concentrator_index: p.concentrator_index,
                filter_transmission: p.filter_transmission,
                filter_bandwidth_nm: p.filter_bandwidth_nm(),
            },
        };
        room.validate()?;
        Ok(room)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut v = self.params.violations();
        if v.is_empty() {
            match self.room(self.params.fov_deg, self.params.lamp_psd_w_per_nm) {
                Ok(_) => {}
                Err(ExperimentError::Geometry(GeometryError::InvalidScenario(msg))) => v.push(msg),
                Err(e) => v.push(e.to_string()),
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::InvalidParameters(v.join("; ")))
        }
    }

    /// Gains at one field of view. Computes the reflection integral for
    /// lamp scenarios.
    pub fn channel_at(&self, fov_deg: f64) -> Result<ChannelState, ExperimentError> {
        let room = self.room(fov_deg, self.params.lamp_psd_w_per_nm)?;
        let h_dc = channel::room_los_gain(&room)?;
        let reflected = if self.name.is_ambient_only() {
            None
        } else {
            Some(channel::total_reflected_gain(&room, self.params.resolution)?)
        };
        Ok(ChannelState {
            fov_deg,
            gains: ChannelGains {
                h_dc,
                eta: self.params.detector.eta_d * h_dc,
                h_ref_total: reflected.map_or(0.0, |r| r.value),
            },
            reflected,
        })
    }

    /// Noise budget and key rate for a channel state at noise level `level`.
    pub fn evaluate_with(&self, ch: &ChannelState, level: f64) -> PointResult {
        let p = &self.params;
        let det = &p.detector;
        let dl = p.filter_bandwidth_nm();
        let (p_n, lamp_psd) = if self.name.is_ambient_only() {
            (level, 0.0)
        } else {
            (p.ambient.p_n, level)
        };
        let power = noise::isotropic_noise_power(p_n, dl, p.filter_transmission, p.area_m2, p.concentrator_index);
        let n_b1 = noise::photons_per_pulse(power, det.pulse_width, det.eta_d, p.wavelength_nm);
        let n_b2 = noise::lamp_noise_photons(lamp_psd, dl, det.pulse_width, det.eta_d, p.wavelength_nm, ch.gains.h_ref_total);
        let budget = NoiseBudget::assemble(n_b1, n_b2, det.dark_rate, det.pulse_width);
        PointResult {
            fov_deg: ch.fov_deg,
            level,
            gains: ch.gains,
            noise: budget,
            report: secret_key_rate(&p.protocol, ch.gains.eta, budget.n_n),
            reflected: ch.reflected,
        }
    }
}

/// Full pipeline at one operating point: geometry, LOS gain, noise budget,
/// key rate.
pub fn evaluate_point(scenario: &Scenario, fov_deg: f64, level: f64) -> Result<PointResult, ExperimentError> {
    let ch = scenario.channel_at(fov_deg)?;
    Ok(scenario.evaluate_with(&ch, level))
}

/// Results over a field-of-view x noise-level grid. `results[i][j]` is at
/// `fov_values[i]`, `levels[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axis: NoiseAxis,
    pub fov_values: Vec<f64>,
    pub levels: Vec<f64>,
    pub results: Vec<Vec<PointResult>>,
}

impl SweepGrid {
    pub fn points(&self) -> impl Iterator<Item = &PointResult> {
        self.results.iter().flatten()
    }
}

pub fn sweep(scenario: &Scenario, fov_values: &[f64], levels: &[f64]) -> Result<SweepGrid, ExperimentError> {
    let results = fov_values
        .par_iter()
        .map(|&fov| {
            let ch = scenario.channel_at(fov)?;
            Ok(levels.iter().map(|&l| scenario.evaluate_with(&ch, l)).collect())
        })
        .collect::<Result<Vec<Vec<_>>, ExperimentError>>()?;
    Ok(SweepGrid {
        axis: scenario.name.noise_axis(),
        fov_values: fov_values.to_vec(),
        levels: levels.to_vec(),
        results,
    })
}

/// Outcome of a secure field-of-view search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FovBoundary {
    /// Largest secure field of view, degrees.
    Secure(f64),
    /// No field of view down to [`MIN_FOV_DEG`] gives a positive rate.
    NoneSecure,
}

impl FovBoundary {
    pub fn degrees(self) -> Option<f64> {
        match self {
            FovBoundary::Secure(d) => Some(d),
            FovBoundary::NoneSecure => None,
        }
    }
}

pub const MIN_FOV_DEG: f64 = 0.1;
pub const MAX_FOV_DEG: f64 = 90.0;
/// Width of the final bracket of the field-of-view bisection, degrees.
pub const FOV_BISECTION_WIDTH_DEG: f64 = 0.01;

/// Largest field of view with a positive key rate at noise level `level`.
///
/// Scans whole degrees to bracket the first secure-to-insecure transition,
/// then bisects it.
pub fn secure_fov_boundary(scenario: &Scenario, level: f64) -> Result<FovBoundary, ExperimentError> {
    let secure = |fov: f64| -> Result<bool, ExperimentError> { Ok(evaluate_point(scenario, fov, level)?.report.is_secure()) };
    let mut grid = vec![MIN_FOV_DEG];
    grid.extend((1..=MAX_FOV_DEG as u32).map(f64::from));

    let mut last_secure = None;
    let mut first_insecure = None;
    for &fov in &grid {
        if secure(fov)? {
            last_secure = Some(fov);
        } else if last_secure.is_some() {
            first_insecure = Some(fov);
            break;
        }
    }
    let (Some(mut lo), Some(mut hi)) = (last_secure, first_insecure) else {
        return Ok(match last_secure {
            Some(_) => FovBoundary::Secure(MAX_FOV_DEG),
            None => FovBoundary::NoneSecure,
        });
    };
    while hi - lo > FOV_BISECTION_WIDTH_DEG {
        let mid = 0.5 * (lo + hi);
        if secure(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FovBoundary::Secure(lo))
}

/// Width of the final bracket of the log-scale noise bisections, decades.
pub const LOG_BISECTION_WIDTH_DECADES: f64 = 0.01;

/// Largest value in `[lo, hi]` (log-spaced) for which `secure` holds, or
/// `None` if it fails at `lo`. Assumes `secure` is monotone decreasing.
fn log_bisect(lo: f64, hi: f64, mut secure: impl FnMut(f64) -> Result<bool, ExperimentError>) -> Result<Option<f64>, ExperimentError> {
    let (mut a, mut b) = (lo.log10(), hi.log10());
    if !secure(lo)? {
        return Ok(None);
    }
    if secure(hi)? {
        return Ok(Some(hi));
    }
    while b - a > LOG_BISECTION_WIDTH_DECADES {
        let mid = 0.5 * (a + b);
        if secure(10f64.powf(mid))? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(10f64.powf(a)))
}

/// Largest lamp PSD (W/nm) with a positive rate at a fixed field of view,
/// searched over `[1e-12, 1]`. `None` when even a dark lamp is insecure.
pub fn psd_tolerance(scenario: &Scenario, fov_deg: f64) -> Result<Option<f64>, ExperimentError> {
    if !secure_at_zero_lamp(scenario, fov_deg)? {
        return Ok(None);
    }
    let ch = scenario.channel_at(fov_deg)?;
    log_bisect(1e-12, 1.0, |s| Ok(scenario.evaluate_with(&ch, s).report.is_secure()))
}

fn secure_at_zero_lamp(scenario: &Scenario, fov_deg: f64) -> Result<bool, ExperimentError> {
    Ok(evaluate_point(scenario, fov_deg, 0.0)?.report.is_secure())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientTolerance {
    /// Largest tolerable ambient spectral irradiance, W/nm/m².
    pub p_n: f64,
    /// Field of view at which it is reached, degrees.
    pub fov_deg: f64,
}

/// Best key rate over the window: 1° scan, then golden-section refinement
/// around the best grid point.
pub fn best_fov(scenario: &Scenario, level: f64, window: FovWindow) -> Result<PointResult, ExperimentError> {
    let eval = |fov: f64| evaluate_point(scenario, fov, level);
    let mut best = eval(window.min_deg)?;
    for fov in window.grid(1.0).into_iter().skip(1) {
        let r = eval(fov)?;
        if r.rate() > best.rate() {
            best = r;
        }
    }
    let (mut a, mut b) = (
        (best.fov_deg - 1.0).max(window.min_deg),
        (best.fov_deg + 1.0).min(window.max_deg),
    );
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-3 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        let (rc, rd) = (eval(c)?, eval(d)?);
        if rc.rate() >= rd.rate() {
            b = d;
            if rc.rate() > best.rate() {
                best = rc;
            }
        } else {
            a = c;
            if rd.rate() > best.rate() {
                best = rd;
            }
        }
    }
    Ok(best)
}

/// Largest ambient spectral irradiance that still leaves a positive rate at
/// the best field of view inside `window`, searched over `[1e-20, 1e-2]`.
pub fn ambient_tolerance(scenario: &Scenario, window: FovWindow) -> Result<Option<AmbientTolerance>, ExperimentError> {
    if !scenario.name.is_ambient_only() {
        return Err(ExperimentError::NotAmbientOnly(scenario.name));
    }
    let p_n = log_bisect(1e-20, 1e-2, |p| Ok(best_fov(scenario, p, window)?.report.is_secure()))?;
    match p_n {
        Some(p_n) => Ok(Some(AmbientTolerance {
            p_n,
            fov_deg: best_fov(scenario, p_n, window)?.fov_deg,
        })),
        None => Ok(None),
    }
}

/// Path loss `-10 log10 H_DC` (dB) of the scenario's LOS link at each field
/// of view. Infinite where no signal reaches the detector.
pub fn path_loss_profile(scenario: &Scenario, fov_values: &[f64]) -> Result<Vec<f64>, ExperimentError> {
    fov_values
        .iter()
        .map(|&fov| {
            let room = scenario.room(fov, 0.0)?;
            let geom = link_geometry(&room.transmitter.pose, &room.receiver.pose)?;
            let m = lambert_mode(room.transmitter.semi_angle_deg)?;
            let h = channel::los_dc_gain(&geom, m, &room.receiver);
            Ok(-10.0 * h.log10())
        })
        .collect()
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
