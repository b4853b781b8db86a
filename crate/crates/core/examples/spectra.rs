//! Load the shipped LED spectra and read off the lamp PSD at the link
//! wavelength.
//!
//!     cargo run --release --example spectra

use std::path::Path;

use indoor_qkd::spectra::{CurveKind, SpectralCurve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let lambda = 880.0;

    let a = SpectralCurve::from_csv_path(data.join("white_led_a_psd.csv"), CurveKind::SourcePsd)?;
    let (lo, hi) = a.band();
    println!("bulb A: {} samples over {lo}-{hi} nm", a.samples().len());
    println!("  S({lambda} nm) = {:.3e} W/nm", a.density_at(lambda)?);
    println!("  S(455 nm) = {:.3e} W/nm", a.density_at(455.0)?);

    let b = SpectralCurve::from_csv_path(data.join("white_led_b_irradiance_0p5m.csv"), CurveKind::Irradiance)?;
    let e = b.density_at(lambda)?;
    let s = b.irradiance_to_psd(0.5)?.density_at(lambda)?;
    println!("bulb B: E({lambda} nm) = {e:.3e} W/nm/m^2 at 0.5 m -> S = {s:.3e} W/nm (full-sphere model)");

    match a.density_at(1200.0) {
        Ok(v) => println!("unexpected: {v}"),
        Err(err) => println!("1200 nm: {err}"),
    }
    Ok(())
}
