//! Drive the batch front-end from code: build a config, run it, and read
//! back the CSV it wrote.
//!
//!     cargo run --release --example batch_run -- [OUT_DIR]

use indoor_qkd::cli;
use indoor_qkd::config::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "batch-out".into());
    let mut cfg = RunConfig::default();
    cfg.experiments.scenario = "lamp-corner-steered".into();
    cfg.experiments.fov_steps = 10;
    cfg.experiments.noise_steps = 5;
    cfg.cli.out = out.into();
    cfg.cli.mc_samples = 200_000;

    for d in cfg.validate() {
        println!("{d}");
    }
    let outcome = cli::run(&cfg)?;
    let secure = outcome.grid.points().filter(|p| p.report.is_secure()).count();
    println!("{} points, {secure} secure", outcome.grid.points().count());
    print!("{}", std::fs::read_to_string(&outcome.summary_txt)?);
    Ok(())
}
