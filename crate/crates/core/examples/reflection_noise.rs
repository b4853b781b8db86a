//! Lamp light reflected off the walls and floor: the quadrature estimate of
//! the reflection integral, its Monte-Carlo cross-check, and the photon
//! counts it puts into each detector per pulse.
//!
//!     cargo run --release --example reflection_noise

use indoor_qkd::channel::{total_reflected_gain, Resolution};
use indoor_qkd::experiments::{evaluate_point, Scenario, ScenarioName};
use indoor_qkd::montecarlo::reflected_gain_estimate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::new(ScenarioName::LampCenter);
    let psd = scenario.params.lamp_psd_w_per_nm;
    println!("{:>6}  {:>12}  {:>8}  {:>22}  {:>10}", "FOV", "grid", "patches/m", "Monte-Carlo (1e6)", "n_b2");
    for fov in [5.0, 11.0, 20.0, 30.0, 60.0] {
        let room = scenario.room(fov, psd)?;
        let grid = total_reflected_gain(&room, Resolution::default())?;
        let mc = reflected_gain_estimate(&room, 1_000_000, 7);
        let point = evaluate_point(&scenario, fov, psd)?;
        println!(
            "{fov:>6.1}  {:>12.4e}  {:>8}  {:>12.4e} +- {:>5.2}%  {:>10.3e}",
            grid.value,
            grid.resolution,
            mc.mean,
            100.0 * mc.relative_error(),
            point.noise.n_b2
        );
    }
    let p = evaluate_point(&scenario, 11.0, psd)?;
    println!(
        "budget at 11 deg: ambient {:.3e} + lamp {:.3e} + dark {:.3e} = {:.3e} photons per pulse",
        p.noise.n_b1, p.noise.n_b2, p.noise.n_d, p.noise.n_n
    );
    Ok(())
}
