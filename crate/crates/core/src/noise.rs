//! Background photon budget per pulse and per detector.

use std::f64::consts::PI;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Photon energy `hc/λ` in joules.
pub fn photon_energy(lambda_nm: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / (lambda_nm * 1e-9)
}

/// Filter bandwidth matched to a pulse of width `tau_s`: `Δλ = λ² / (τ c)`, nm.
pub fn matched_filter_bandwidth_nm(lambda_nm: f64, tau_s: f64) -> f64 {
    let lambda_m = lambda_nm * 1e-9;
    lambda_m * lambda_m / (tau_s * SPEED_OF_LIGHT) * 1e9
}

/// Isotropic ambient light, characterised by its spectral irradiance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmbientField {
    /// W/nm/m².
    pub p_n: f64,
}

impl AmbientField {
    pub const DARK: AmbientField = AmbientField { p_n: 0.0 };

    /// Spectral irradiance of a black body at `kelvin` seen over a full
    /// hemisphere, `π B(λ, T)`.
    pub fn blackbody(kelvin: f64, lambda_nm: f64) -> Self {
        let lambda = lambda_nm * 1e-9;
        let x = PLANCK * SPEED_OF_LIGHT / (lambda * BOLTZMANN * kelvin);
        // spectral radiance per metre of wavelength
        let radiance = 2.0 * PLANCK * SPEED_OF_LIGHT * SPEED_OF_LIGHT / lambda.powi(5) / x.exp_m1();
        Self { p_n: PI * radiance * 1e-9 }
    }

    /// Room-temperature thermal background at 880 nm, about 1e-18 W/nm/m².
    pub fn room_temperature_880nm() -> Self {
        Self::blackbody(300.0, 880.0)
    }
}

/// Received power from isotropic ambient light through a concentrator with
/// constant gain: `P = p_n Δλ T_s A n²`, watts.
pub fn isotropic_noise_power(p_n: f64, delta_lambda_nm: f64, filter_transmission: f64, area_m2: f64, index: f64) -> f64 {
    p_n * delta_lambda_nm * filter_transmission * area_m2 * index * index
}

/// Detected photons per pulse per detector for received optical power
/// `power_w`. The received light splits evenly between the two detectors.
pub fn photons_per_pulse(power_w: f64, tau_s: f64, eta_d: f64, lambda_nm: f64) -> f64 {
    power_w * tau_s * eta_d / 2.0 / photon_energy(lambda_nm)
}

/// Lamp photons per pulse per detector after diffuse reflections.
pub fn lamp_noise_photons(psd_w_per_nm: f64, delta_lambda_nm: f64, tau_s: f64, eta_d: f64, lambda_nm: f64, h_ref_total: f64) -> f64 {
    psd_w_per_nm * delta_lambda_nm * tau_s * (eta_d / 2.0) / photon_energy(lambda_nm) * h_ref_total
}

/// Per-pulse, per-detector noise counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseBudget {
    /// Ambient background.
    pub n_b1: f64,
    /// Lamp background.
    pub n_b2: f64,
    /// Dark counts.
    pub n_d: f64,
    /// Total, `n_b1 + n_b2 + n_d`.
    pub n_n: f64,
}

impl NoiseBudget {
    pub fn assemble(n_b1: f64, n_b2: f64, dark_rate: f64, tau_s: f64) -> Self {
        let n_d = dark_rate * tau_s;
        Self {
            n_b1,
            n_b2,
            n_d,
            n_n: n_b1 + n_b2 + n_d,
        }
    }

    pub fn background(&self) -> f64 {
        self.n_b1 + self.n_b2
    }
}
