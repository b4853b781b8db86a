//! Room geometry: device poses, the room scenario, surface tessellation and
//! the distance/angle pairs consumed by the channel formulas.
//!
//! The frame has its origin at one floor corner with `z` pointing up. The
//! room spans `[0, X] x [0, Y] x [0, Z]`.

use nalgebra::{Unit, Vector3};
use thiserror::Error;

pub type Point3 = nalgebra::Point3<f64>;
pub type Direction = Unit<Vector3<f64>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: emitter and collector coincide at {0:?}")]
    Coincident(Point3),
    #[error("axis must be a finite non-zero vector, got {0:?}")]
    BadAxis(Vector3<f64>),
    #[error("point has non-finite components: {0:?}")]
    NonFinite(Point3),
    #[error("patches_per_meter must be at least 1")]
    ZeroResolution,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Position and optical axis of a device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Point3,
    pub axis: Direction,
}

impl Pose {
    pub fn new(position: Point3, axis: Vector3<f64>) -> Result<Self, GeometryError> {
        if !position.coords.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFinite(position));
        }
        let norm = axis.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(GeometryError::BadAxis(axis));
        }
        Ok(Self {
            position,
            axis: Unit::new_normalize(axis),
        })
    }

    /// A pose at `position` whose axis points at `target`.
    pub fn aimed_at(position: Point3, target: Point3) -> Result<Self, GeometryError> {
        let v = target - position;
        if v.norm() == 0.0 {
            return Err(GeometryError::Coincident(position));
        }
        Self::new(position, v)
    }

    pub fn facing_down(position: Point3) -> Self {
        Self {
            position,
            axis: -Vector3::z_axis(),
        }
    }

    pub fn facing_up(position: Point3) -> Self {
        Self {
            position,
            axis: Vector3::z_axis(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomDims {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl RoomDims {
    pub fn ceiling_center(&self) -> Point3 {
        Point3::new(self.x / 2.0, self.y / 2.0, self.z)
    }

    pub fn floor_center(&self) -> Point3 {
        Point3::new(self.x / 2.0, self.y / 2.0, 0.0)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0.0..=self.x).contains(&p.x) && (0.0..=self.y).contains(&p.y) && (0.0..=self.z).contains(&p.z)
    }

    /// Area of the four walls plus the floor. The ceiling is not a reflector.
    pub fn reflecting_area(&self) -> f64 {
        2.0 * (self.x + self.y) * self.z + self.x * self.y
    }
}

/// The ceiling light source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lamp {
    pub pose: Pose,
    /// Semi-angle at half power, degrees.
    pub semi_angle_deg: f64,
    /// Power spectral density at the link wavelength, W/nm.
    pub psd_w_per_nm: f64,
}

/// The mobile QKD source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub pose: Pose,
    /// Semi-angle at half power, degrees.
    pub semi_angle_deg: f64,
}

/// Ceiling-mounted QKD receiver with a non-imaging concentrator and a
/// band-pass filter in front of the detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Receiver {
    pub pose: Pose,
    /// Field of view, degrees.
    pub fov_deg: f64,
    /// Detector area, m².
    pub area_m2: f64,
    /// Refractive index of the concentrator.
    pub concentrator_index: f64,
    pub filter_transmission: f64,
    pub filter_bandwidth_nm: f64,
}

impl Receiver {
    pub fn fov_rad(&self) -> f64 {
        self.fov_deg.to_radians()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomScenario {
    pub dims: RoomDims,
    /// Wall reflection coefficient.
    pub wall_reflectivity: f64,
    /// Floor reflection coefficient.
    pub floor_reflectivity: f64,
    pub lamp: Lamp,
    pub transmitter: Transmitter,
    pub receiver: Receiver,
}

impl RoomScenario {
    /// Every violated invariant, as a human-readable message. Empty when the
    /// scenario is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let d = &self.dims;
        for (name, v) in [("X", d.x), ("Y", d.y), ("Z", d.z)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("room dimension {name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("r1", self.wall_reflectivity),
            ("r2", self.floor_reflectivity),
            ("T_s", self.receiver.filter_transmission),
        ] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        for (name, v) in [
            ("Phi_half", self.lamp.semi_angle_deg),
            ("Theta_half", self.transmitter.semi_angle_deg),
            ("Psi_c", self.receiver.fov_deg),
        ] {
            if !(v > 0.0 && v <= 90.0) {
                out.push(format!("{name} must lie in (0, 90] degrees, got {v}"));
            }
        }
        if !(self.receiver.area_m2 > 0.0) {
            out.push(format!("detector area A must be > 0, got {}", self.receiver.area_m2));
        }
        if !(self.receiver.concentrator_index >= 1.0) {
            out.push(format!(
                "concentrator index n must be >= 1, got {}",
                self.receiver.concentrator_index
            ));
        }
        if !(self.receiver.filter_bandwidth_nm >= 0.0) {
            out.push(format!(
                "filter bandwidth must be >= 0, got {}",
                self.receiver.filter_bandwidth_nm
            ));
        }
        if !(self.lamp.psd_w_per_nm >= 0.0) {
            out.push(format!("lamp PSD S must be >= 0, got {}", self.lamp.psd_w_per_nm));
        }
        if out.is_empty() {
            if !d.contains(&self.transmitter.pose.position) {
                out.push(format!(
                    "transmitter {:?} lies outside the room",
                    self.transmitter.pose.position
                ));
            }
            for (name, p) in [
                ("lamp", self.lamp.pose.position),
                ("receiver", self.receiver.pose.position),
            ] {
                if (p.z - d.z).abs() > 1e-9 || !d.contains(&Point3::new(p.x, p.y, d.z)) {
                    out.push(format!("{name} must sit on the ceiling plane z = {}, got {p:?}", d.z));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(GeometryError::InvalidScenario(v.join("; ")))
        }
    }
}

/// Distance and angles of one emitter-to-collector link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Separation, meters.
    pub d: f64,
    /// Irradiance angle off the emitter axis, radians.
    pub phi: f64,
    /// Incidence angle off the collector axis, radians.
    pub psi: f64,
}

fn clamped_acos(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

pub fn link_geometry(emitter: &Pose, collector: &Pose) -> Result<LinkGeometry, GeometryError> {
    let v = collector.position - emitter.position;
    let d = v.norm();
    if d == 0.0 {
        return Err(GeometryError::Coincident(emitter.position));
    }
    let u = v / d;
    Ok(LinkGeometry {
        d,
        phi: clamped_acos(emitter.axis.dot(&u)),
        psi: clamped_acos(-collector.axis.dot(&u)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Surface {
    Floor,
    /// Wall at x = 0.
    WallWest,
    /// Wall at x = X.
    WallEast,
    /// Wall at y = 0.
    WallSouth,
    /// Wall at y = Y.
    WallNorth,
}

impl Surface {
    pub const ALL: [Surface; 5] = [
        Surface::Floor,
        Surface::WallWest,
        Surface::WallEast,
        Surface::WallSouth,
        Surface::WallNorth,
    ];

    pub fn is_wall(self) -> bool {
        self != Surface::Floor
    }

    pub fn area(self, dims: &RoomDims) -> f64 {
        match self {
            Surface::Floor => dims.x * dims.y,
            Surface::WallWest | Surface::WallEast => dims.y * dims.z,
            Surface::WallSouth | Surface::WallNorth => dims.x * dims.z,
        }
    }
}

/// A rectangular element of a reflecting surface.
///
/// `half_u` and `half_v` span the rectangle from its center, so the corners
/// are `center ± half_u ± half_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePatch {
    pub center: Point3,
    /// Unit normal pointing into the room.
    pub normal: Direction,
    pub area: f64,
    pub reflectivity: f64,
    pub surface: Surface,
    pub half_u: Vector3<f64>,
    pub half_v: Vector3<f64>,
}

impl SurfacePatch {
    pub fn corners(&self) -> [Point3; 4] {
        let c = self.center;
        [
            c - self.half_u - self.half_v,
            c + self.half_u - self.half_v,
            c + self.half_u + self.half_v,
            c - self.half_u + self.half_v,
        ]
    }

    /// Splits the patch into four equal quarters.
    pub fn quarters(&self) -> [SurfacePatch; 4] {
        let hu = self.half_u / 2.0;
        let hv = self.half_v / 2.0;
        let mk = |su: f64, sv: f64| SurfacePatch {
            center: self.center + hu * su + hv * sv,
            area: self.area / 4.0,
            half_u: hu,
            half_v: hv,
            ..*self
        };
        [mk(-1.0, -1.0), mk(1.0, -1.0), mk(1.0, 1.0), mk(-1.0, 1.0)]
    }

    /// Whether the line `origin + t * dir` (t > 0) crosses the patch.
    pub fn hit_by_ray(&self, origin: &Point3, dir: &Vector3<f64>) -> bool {
        let n = self.normal.into_inner();
        let denom = n.dot(dir);
        if denom.abs() < 1e-15 {
            return false;
        }
        let t = n.dot(&(self.center - origin)) / denom;
        if t <= 0.0 {
            return false;
        }
        let offset = origin + dir * t - self.center;
        let fu = offset.dot(&self.half_u) / self.half_u.norm_squared();
        let fv = offset.dot(&self.half_v) / self.half_v.norm_squared();
        fu.abs() <= 1.0 && fv.abs() <= 1.0
    }
}

fn cells(len: f64, per_meter: u32) -> usize {
    ((len * per_meter as f64).round() as usize).max(1)
}

fn tessellate_rect(
    out: &mut Vec<SurfacePatch>,
    surface: Surface,
    origin: Point3,
    u_edge: Vector3<f64>,
    v_edge: Vector3<f64>,
    normal: Vector3<f64>,
    reflectivity: f64,
    per_meter: u32,
) {
    let nu = cells(u_edge.norm(), per_meter);
    let nv = cells(v_edge.norm(), per_meter);
    let du = u_edge / nu as f64;
    let dv = v_edge / nv as f64;
    let area = du.norm() * dv.norm();
    let normal = Unit::new_normalize(normal);
    for j in 0..nv {
        for i in 0..nu {
            out.push(SurfacePatch {
                center: origin + du * (i as f64 + 0.5) + dv * (j as f64 + 0.5),
                normal,
                area,
                reflectivity,
                surface,
                half_u: du / 2.0,
                half_v: dv / 2.0,
            });
        }
    }
}

/// Partitions the floor and the four walls into a uniform grid of patches,
/// roughly `patches_per_meter` along every edge, each represented by its
/// cell midpoint.
pub fn tessellate(room: &RoomScenario, patches_per_meter: u32) -> Result<Vec<SurfacePatch>, GeometryError> {
    if patches_per_meter == 0 {
        return Err(GeometryError::ZeroResolution);
    }
    let RoomDims { x, y, z } = room.dims;
    let k = patches_per_meter;
    let r1 = room.wall_reflectivity;
    let r2 = room.floor_reflectivity;
    let o = Point3::origin();
    let ex = Vector3::new(x, 0.0, 0.0);
    let ey = Vector3::new(0.0, y, 0.0);
    let ez = Vector3::new(0.0, 0.0, z);

    let mut out = Vec::new();
    tessellate_rect(&mut out, Surface::Floor, o, ex, ey, Vector3::z(), r2, k);
    tessellate_rect(&mut out, Surface::WallWest, o, ey, ez, Vector3::x(), r1, k);
    tessellate_rect(&mut out, Surface::WallEast, o + ex, ey, ez, -Vector3::x(), r1, k);
    tessellate_rect(&mut out, Surface::WallSouth, o, ex, ez, Vector3::y(), r1, k);
    tessellate_rect(&mut out, Surface::WallNorth, o + ey, ex, ez, -Vector3::y(), r1, k);
    Ok(out)
}
