//! LOS path loss versus receiver FOV for an aligned narrow-beam source at
//! the floor center and a wide-beam source in a corner.
//!
//!     cargo run --release --example path_loss

use indoor_qkd::experiments::{lin_space, path_loss_profile, Scenario, ScenarioName};
use indoor_qkd::geometry::link_geometry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut center = Scenario::new(ScenarioName::LampCenter);
    center.overrides.transmitter_semi_angle_deg = Some(7.0);
    let corner = Scenario::new(ScenarioName::LampCorner);

    let room = corner.room(10.0, 0.0)?;
    let g = link_geometry(&room.transmitter.pose, &room.receiver.pose)?;
    println!(
        "corner link: d = {:.3} m, irradiance angle {:.2} deg, incidence angle {:.2} deg",
        g.d,
        g.phi.to_degrees(),
        g.psi.to_degrees()
    );

    let fovs = lin_space(5.0, 60.0, 12);
    let a = path_loss_profile(&center, &fovs)?;
    let b = path_loss_profile(&corner, &fovs)?;
    println!("{:>8}  {:>18}  {:>18}", "FOV", "center, 7 deg [dB]", "corner, 30 deg [dB]");
    for ((f, a), b) in fovs.iter().zip(a).zip(b) {
        println!("{f:>8.1}  {a:>18.2}  {b:>18.2}");
    }

    // a receiver that keeps looking straight down never sees the corner source
    let mut fixed = corner;
    fixed.params.receiver_tracks_transmitter = false;
    let loss = path_loss_profile(&fixed, &[30.0, 45.0])?;
    println!("fixed downward receiver, corner source: {:.2} dB at 30 deg, {:.2} dB at 45 deg", loss[0], loss[1]);
    Ok(())
}
