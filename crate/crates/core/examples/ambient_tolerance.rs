//! Lamp off: how much isotropic ambient light each transmitter position
//! tolerates, and how far room-temperature blackbody light is below that.
//!
//!     cargo run --release --example ambient_tolerance

use indoor_qkd::experiments::{ambient_tolerance, best_fov, log_space, FovWindow, Scenario, ScenarioName};
use indoor_qkd::noise::AmbientField;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let window = FovWindow::PLOTTED;
    let bb = AmbientField::room_temperature_880nm().p_n;
    println!("blackbody at 300 K, 880 nm: {bb:.2e} W/nm/m^2");
    for name in [ScenarioName::AmbientOnlyCenter, ScenarioName::AmbientOnlyCorner] {
        let s = Scenario::new(name);
        match ambient_tolerance(&s, window)? {
            Some(t) => println!("{name}: tolerates p_n up to {:.3e} W/nm/m^2 (best FOV {:.1} deg)", t.p_n, t.fov_deg),
            None => println!("{name}: insecure even in the dark"),
        }
        for p_n in log_space(1e-10, 1e-7, 4) {
            let best = best_fov(&s, p_n, window)?;
            println!("    p_n {p_n:.0e}: best rate {:.3e} at {:.1} deg", best.rate(), best.fov_deg);
        }
    }
    Ok(())
}
