//! Optical-wireless DC-gain models: Lambertian emitters, the non-imaging
//! concentrator, the direct line-of-sight link and single-bounce diffuse
//! reflections of the lamp off the walls and floor.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{self, link_geometry, GeometryError, LinkGeometry, Point3, Pose, Receiver, RoomScenario, SurfacePatch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("Lambert mode undefined for semi-angle {0} degrees (must be in (0, 90))")]
    UndefinedMode(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Gains of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelGains {
    /// Line-of-sight DC gain.
    pub h_dc: f64,
    /// Total transmittance, detector efficiency times `h_dc`.
    pub eta: f64,
    /// Reflected lamp gain summed over walls and floor.
    pub h_ref_total: f64,
}

/// Detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Single-photon detection efficiency.
    pub eta_d: f64,
    /// Dark counts per second per detector.
    pub dark_rate: f64,
    /// Pulse width, seconds.
    pub pulse_width: f64,
}

impl DetectorParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            out.push(format!("eta_d must lie in (0, 1], got {}", self.eta_d));
        }
        if !(self.pulse_width > 0.0) {
            out.push(format!("pulse width tau must be > 0, got {}", self.pulse_width));
        }
        if !(self.dark_rate >= 0.0) {
            out.push(format!("dark count rate must be >= 0, got {}", self.dark_rate));
        }
        out
    }

    /// Dark counts per pulse per detector.
    pub fn dark_counts_per_pulse(&self) -> f64 {
        self.dark_rate * self.pulse_width
    }
}

/// Lambert mode number `m = -ln 2 / ln cos(semi_angle)`.
pub fn lambert_mode(semi_angle_deg: f64) -> Result<f64, ChannelError> {
    if !(semi_angle_deg > 0.0 && semi_angle_deg < 90.0) {
        return Err(ChannelError::UndefinedMode(semi_angle_deg));
    }
    let c = semi_angle_deg.to_radians().cos();
    if c <= 0.0 {
        return Err(ChannelError::UndefinedMode(semi_angle_deg));
    }
    Ok(-LN_2 / c.ln())
}

/// Ideal non-imaging concentrator gain `n² / sin²(fov)` inside the field of
/// view (boundary included), zero outside. Angles in radians.
pub fn concentrator_gain(psi: f64, index: f64, fov: f64) -> f64 {
    if psi >= 0.0 && psi <= fov {
        let s = fov.sin();
        index * index / (s * s)
    } else {
        0.0
    }
}

/// Line-of-sight DC gain for a transmitter of Lambert mode `tx_mode`.
///
/// Zero when the receiver is outside the transmitter's forward hemisphere or
/// the incidence angle exceeds the field of view. The value is capped at 1:
/// for very small fields of view the ideal concentrator gain grows without
/// bound and the formula would otherwise collect more power than was sent.
pub fn los_dc_gain(geom: &LinkGeometry, tx_mode: f64, rx: &Receiver) -> f64 {
    let cos_phi = geom.phi.cos();
    if cos_phi < 0.0 {
        return 0.0;
    }
    let g = concentrator_gain(geom.psi, rx.concentrator_index, rx.fov_rad());
    if g == 0.0 {
        return 0.0;
    }
    let h = rx.area_m2 * (tx_mode + 1.0) / (2.0 * PI * geom.d * geom.d)
        * cos_phi.powf(tx_mode)
        * rx.filter_transmission
        * g
        * geom.psi.cos();
    h.min(1.0)
}

/// Gain of the lamp -> patch -> receiver path for one surface element,
/// evaluated at the patch center.
///
/// Returns `None` when the patch center coincides with the lamp or the
/// receiver, which makes the geometry undefined.
pub fn reflected_dc_gain(patch: &SurfacePatch, lamp: &Pose, lamp_mode: f64, rx: &Receiver) -> Option<f64> {
    let to_patch = patch.center - lamp.position;
    let d1 = to_patch.norm();
    let to_rx = rx.pose.position - patch.center;
    let d2 = to_rx.norm();
    if d1 == 0.0 || d2 == 0.0 {
        return None;
    }
    let u1 = to_patch / d1;
    let u2 = to_rx / d2;
    let n = patch.normal.into_inner();

    let cos_psi = -rx.pose.axis.dot(&u2);
    let psi = cos_psi.clamp(-1.0, 1.0).acos();
    let g = concentrator_gain(psi, rx.concentrator_index, rx.fov_rad());
    if g == 0.0 {
        return Some(0.0);
    }
    let cos_phi = lamp.axis.dot(&u1).max(0.0);
    let cos_alpha = (-n.dot(&u1)).max(0.0);
    let cos_beta = n.dot(&u2).max(0.0);
    let cos_psi = cos_psi.max(0.0);

    Some(
        rx.area_m2 * (lamp_mode + 1.0) / (2.0 * PI * PI * d1 * d1 * d2 * d2)
            * cos_phi.powf(lamp_mode)
            * patch.reflectivity
            * rx.filter_transmission
            * g
            * patch.area
            * cos_alpha
            * cos_beta
            * cos_psi,
    )
}

/// Grid-refinement schedule for the reflection integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Starting grid density.
    pub patches_per_meter: u32,
    /// Densest grid tried before giving up on convergence.
    pub max_patches_per_meter: u32,
    /// Relative change between successive doublings treated as converged.
    pub tolerance: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            patches_per_meter: 10,
            max_patches_per_meter: 80,
            tolerance: 5e-3,
        }
    }
}

impl Resolution {
    pub fn fixed(patches_per_meter: u32) -> Self {
        Self {
            patches_per_meter,
            ..Self::default()
        }
    }
}

/// Result of the wall/floor reflection integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedGain {
    /// Estimate on the finest grid evaluated.
    pub value: f64,
    /// Grid density of `value`.
    pub resolution: u32,
    /// Estimate on the previous (half-density) grid.
    pub previous: f64,
    pub converged: bool,
    /// Patches dropped because their center coincided with the lamp or receiver.
    pub skipped_patches: usize,
}

impl ReflectedGain {
    pub fn relative_change(&self) -> f64 {
        relative_change(self.previous, self.value)
    }
}

fn relative_change(previous: f64, current: f64) -> f64 {
    if current == previous {
        0.0
    } else {
        ((current - previous) / current).abs()
    }
}

/// Depth of the quad-tree refinement applied to patches cut by the edge of
/// the receiver's field of view. Depth 6 splits such a patch into 4096 cells.
pub const FOV_EDGE_REFINEMENT_DEPTH: u32 = 6;

fn accepted(p: &Point3, rx: &Receiver, fov: f64) -> bool {
    let v = rx.pose.position - p;
    let d = v.norm();
    if d == 0.0 {
        return false;
    }
    let cos_psi = -rx.pose.axis.dot(&(v / d));
    cos_psi.clamp(-1.0, 1.0).acos() <= fov
}

/// True when the field-of-view boundary may cut through the patch: either
/// the acceptance test disagrees between corners and center, or the
/// receiver's axis pierces the patch (small cones can hide between corners).
fn straddles_fov_edge(patch: &SurfacePatch, rx: &Receiver, fov: f64) -> bool {
    let c = patch.corners();
    let first = accepted(&patch.center, rx, fov);
    if c.iter().any(|p| accepted(p, rx, fov) != first) {
        return true;
    }
    !first && patch.hit_by_ray(&rx.pose.position, &rx.pose.axis)
}

fn patch_gain(patch: &SurfacePatch, lamp: &Pose, lamp_mode: f64, rx: &Receiver, fov: f64, depth: u32) -> Option<f64> {
    if depth > 0 && straddles_fov_edge(patch, rx, fov) {
        let mut sum = 0.0;
        for q in patch.quarters() {
            sum += patch_gain(&q, lamp, lamp_mode, rx, fov, depth - 1)?;
        }
        Some(sum)
    } else {
        reflected_dc_gain(patch, lamp, lamp_mode, rx)
    }
}

/// Sum with recursive halving, so the result does not depend on how the
/// terms were distributed across threads.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// The reflection integral on one grid, with FOV-edge refinement.
/// Returns the gain and the number of skipped patches.
pub fn reflected_gain_on_grid(room: &RoomScenario, patches_per_meter: u32) -> Result<(f64, usize), ChannelError> {
    let lamp_mode = lambert_mode(room.lamp.semi_angle_deg)?;
    let patches = geometry::tessellate(room, patches_per_meter)?;
    let rx = &room.receiver;
    let fov = rx.fov_rad();
    let lamp = &room.lamp.pose;
    let terms: Vec<Option<f64>> = patches
        .par_iter()
        .map(|p| patch_gain(p, lamp, lamp_mode, rx, fov, FOV_EDGE_REFINEMENT_DEPTH))
        .collect();
    let skipped = terms.iter().filter(|t| t.is_none()).count();
    let values: Vec<f64> = terms.into_iter().flatten().collect();
    Ok((pairwise_sum(&values), skipped))
}

/// Integral of the reflected lamp gain over the walls and floor.
///
/// The grid is doubled from `resolution.patches_per_meter` until two
/// successive estimates agree within `resolution.tolerance`, or the maximum
/// density is reached, in which case `converged` is false and the last two
/// estimates are reported.
pub fn total_reflected_gain(room: &RoomScenario, resolution: Resolution) -> Result<ReflectedGain, ChannelError> {
    if resolution.patches_per_meter == 0 {
        return Err(GeometryError::ZeroResolution.into());
    }
    let mut k = resolution.patches_per_meter;
    let (mut previous, mut skipped) = reflected_gain_on_grid(room, k)?;
    loop {
        let next_k = k * 2;
        let (value, s) = reflected_gain_on_grid(room, next_k)?;
        skipped = skipped.max(s);
        let converged = relative_change(previous, value) < resolution.tolerance;
        if converged || next_k * 2 > resolution.max_patches_per_meter {
            return Ok(ReflectedGain {
                value,
                resolution: next_k,
                previous,
                converged,
                skipped_patches: skipped,
            });
        }
        previous = value;
        k = next_k;
    }
}

/// LOS gain between the room's transmitter and receiver.
pub fn room_los_gain(room: &RoomScenario) -> Result<f64, ChannelError> {
    let geom = link_geometry(&room.transmitter.pose, &room.receiver.pose)?;
    let m = lambert_mode(room.transmitter.semi_angle_deg)?;
    Ok(los_dc_gain(&geom, m, &room.receiver))
}
