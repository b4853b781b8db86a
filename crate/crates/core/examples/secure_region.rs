//! Largest secure receiver field of view versus lamp PSD, center and corner.
//!
//!     cargo run --release --example secure_region

use std::time::Instant;

use indoor_qkd::experiments::{log_space, secure_fov_boundary, FovBoundary, Scenario, ScenarioName};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let center = Scenario::new(ScenarioName::LampCenter);
    let corner = Scenario::new(ScenarioName::LampCorner);
    println!("{:>12}  {:>14}  {:>14}", "S [W/nm]", "center [deg]", "corner [deg]");
    for s in log_space(1e-7, 1e-3, 9) {
        let show = |b: FovBoundary| match b {
            FovBoundary::Secure(d) => format!("{d:.2}"),
            FovBoundary::NoneSecure => "none".into(),
        };
        let t = Instant::now();
        let a = secure_fov_boundary(&center, s)?;
        let b = secure_fov_boundary(&corner, s)?;
        println!("{s:>12.3e}  {:>14}  {:>14}   ({:.1} s)", show(a), show(b), t.elapsed().as_secs_f64());
    }
    Ok(())
}
