//! Corner transmitter with and without beam steering: rate over a FOV x PSD
//! grid, and the largest lamp PSD each tolerates.
//!
//!     cargo run --release --example steering_sweep

use indoor_qkd::experiments::{lin_space, log_space, psd_tolerance, sweep, Scenario, ScenarioName};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fovs = lin_space(2.0, 20.0, 10);
    let psds = log_space(1e-7, 1e-3, 5);
    for name in [ScenarioName::LampCorner, ScenarioName::LampCornerSteered] {
        let s = Scenario::new(name);
        let grid = sweep(&s, &fovs, &psds)?;
        println!("{name} (Theta_half = {} deg)", s.transmitter()?.semi_angle_deg);
        print!("{:>8}", "FOV\\S");
        for p in &psds {
            print!("{p:>11.0e}");
        }
        println!();
        for (fov, row) in fovs.iter().zip(&grid.results) {
            print!("{fov:>8.1}");
            for point in row {
                print!("{:>11.3e}", point.rate());
            }
            println!();
        }
        for fov in [5.0, 10.0] {
            let t = psd_tolerance(&s, fov)?.map_or("none".into(), |v| format!("{v:.3e} W/nm"));
            println!("  PSD tolerance at {fov} deg: {t}");
        }
    }
    Ok(())
}
