//! Ray-sampling estimate of the lamp's reflected gain.
//!
//! Emission directions are drawn from the lamp's `cos^m` intensity pattern
//! and traced to the first wall or floor hit. Each hit is then connected
//! directly to the receiver, weighted by the diffuse (cosine-lobe) reflection
//! toward it and accepted only inside the field of view. This estimates the
//! same single-bounce gain as [`crate::channel::total_reflected_gain`] but
//! shares none of its code: no tessellation, no quadrature.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{Point3, RoomScenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// One-sigma standard error of `mean`.
    pub std_error: f64,
    pub samples: u64,
}

impl MonteCarloEstimate {
    pub fn relative_error(&self) -> f64 {
        self.std_error / self.mean
    }
}

const CHUNK: u64 = 1 << 16;

struct Tracer {
    origin: Point3,
    frame: [Vector3<f64>; 3],
    exponent: f64,
    dims: [f64; 3],
    r_wall: f64,
    r_floor: f64,
    rx_pos: Point3,
    rx_axis: Vector3<f64>,
    cos_fov: f64,
    collect: f64,
}

impl Tracer {
    fn new(room: &RoomScenario) -> Self {
        let axis = room.lamp.pose.axis.into_inner();
        let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let t1 = axis.cross(&helper).normalize();
        let t2 = axis.cross(&t1);
        let half = room.lamp.semi_angle_deg.to_radians();
        let rx = &room.receiver;
        let fov = rx.fov_deg.to_radians();
        Self {
            origin: room.lamp.pose.position,
            frame: [t1, t2, axis],
            exponent: 0.5f64.ln() / half.cos().ln(),
            dims: [room.dims.x, room.dims.y, room.dims.z],
            r_wall: room.wall_reflectivity,
            r_floor: room.floor_reflectivity,
            rx_pos: rx.pose.position,
            rx_axis: rx.pose.axis.into_inner(),
            cos_fov: fov.cos(),
            // effective aperture: A T_s n² / sin²(fov)
            collect: rx.area_m2 * rx.filter_transmission * rx.concentrator_index.powi(2) / fov.sin().powi(2),
        }
    }

    /// Direction with pdf `(m+1)/(2π) cos^m θ` about the lamp axis.
    fn emit(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let u: f64 = rng.gen();
        let cos_t = (1.0 - u).powf(1.0 / (self.exponent + 1.0));
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let az = 2.0 * PI * rng.gen::<f64>();
        let [t1, t2, a] = &self.frame;
        t1 * (sin_t * az.cos()) + t2 * (sin_t * az.sin()) + a * cos_t
    }

    /// First hit with a wall or the floor: point, inward normal, reflectivity.
    fn hit(&self, dir: &Vector3<f64>) -> Option<(Point3, Vector3<f64>, f64)> {
        let o = self.origin;
        let mut best: Option<(f64, Vector3<f64>, f64)> = None;
        let mut consider = |t: f64, n: Vector3<f64>, r: f64| {
            if t > 1e-12 && best.map_or(true, |b| t < b.0) {
                best = Some((t, n, r));
            }
        };
        for axis in 0..2 {
            let d = dir[axis];
            if d < 0.0 {
                let mut n = Vector3::zeros();
                n[axis] = 1.0;
                consider(-o[axis] / d, n, self.r_wall);
            } else if d > 0.0 {
                let mut n = Vector3::zeros();
                n[axis] = -1.0;
                consider((self.dims[axis] - o[axis]) / d, n, self.r_wall);
            }
        }
        if dir.z < 0.0 {
            consider(-o.z / dir.z, Vector3::z(), self.r_floor);
        }
        let (t, n, r) = best?;
        let p = o + dir * t;
        // ray left through the ceiling before reaching a wall
        if p.z > self.dims[2] + 1e-9 {
            return None;
        }
        Some((p, n, r))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let dir = self.emit(rng);
        let Some((p, n, r)) = self.hit(&dir) else {
            return 0.0;
        };
        let v = self.rx_pos - p;
        let d2 = v.norm_squared();
        let u = v / d2.sqrt();
        let cos_beta = n.dot(&u);
        let cos_psi = -self.rx_axis.dot(&u);
        if cos_beta <= 0.0 || cos_psi < self.cos_fov {
            return 0.0;
        }
        r * cos_beta * cos_psi * self.collect / (PI * d2)
    }
}

/// Estimates the reflected lamp gain of `room` from `samples` emitted rays.
/// Deterministic for a given `seed` regardless of thread count.
pub fn reflected_gain_estimate(room: &RoomScenario, samples: u64, seed: u64) -> MonteCarloEstimate {
    let tracer = Tracer::new(room);
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(samples - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let x = tracer.sample(&mut rng);
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    MonteCarloEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples,
    }
}
