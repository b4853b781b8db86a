//! Batch front-end: load a config, sweep the scenario, write `sweep.csv`
//! and `summary.txt`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 config error, 3 reflection
//! integral not converged under `--strict`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::config::{self, ConfigError, RunConfig};
use crate::experiments::{
    ambient_tolerance, evaluate_point, psd_tolerance, secure_fov_boundary, sweep, ExperimentError, FovBoundary, NoiseAxis,
    Scenario, SweepGrid,
};
use crate::montecarlo;

#[derive(Debug, Parser)]
#[command(name = "indoor-qkd", version, about = "Indoor wireless QKD key-rate sweeps")]
pub struct Args {
    /// TOML config; nominal parameters when omitted.
    pub config: Option<PathBuf>,
    /// Scenario name, overriding the config.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Starting tessellation density, patches per meter.
    #[arg(long)]
    pub resolution: Option<u32>,
    /// Fail with exit code 3 if a reflection integral does not converge.
    #[arg(long)]
    pub strict: bool,
    /// Print the default config and exit.
    #[arg(long)]
    pub dump_defaults: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Check the config, print diagnostics and exit.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    ConfigError = 2,
    ConvergenceWarning = 3,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl RunError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            RunError::Config(_) => ExitStatus::ConfigError,
            _ => ExitStatus::Failure,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub sweep_csv: PathBuf,
    pub summary_txt: PathBuf,
    pub grid: SweepGrid,
    pub warnings: Vec<String>,
    pub status: ExitStatus,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "fov_deg",
    "level",
    "h_dc",
    "eta",
    "n_b1",
    "n_b2",
    "n_n",
    "y1",
    "q1",
    "e1",
    "q_mu",
    "e_mu",
    "rate_bits_per_pulse",
    "secure_flag",
];

fn level_column(axis: NoiseAxis) -> &'static str {
    match axis {
        NoiseAxis::LampPsd => "psd_w_per_nm",
        NoiseAxis::AmbientIrradiance => "pn_w_per_nm_m2",
    }
}

fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn write_sweep_csv(grid: &SweepGrid, path: &Path) -> Result<(), RunError> {
    let err = |e: csv::Error| RunError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let mut header = CSV_COLUMNS;
    header[1] = level_column(grid.axis);
    w.write_record(header).map_err(err)?;
    for p in grid.points() {
        let r = &p.report;
        let mut row: Vec<String> = [
            p.fov_deg, p.level, p.gains.h_dc, p.gains.eta, p.noise.n_b1, p.noise.n_b2, p.noise.n_n, r.y1, r.q1, r.e1,
            r.q_mu, r.e_mu, r.rate,
        ]
        .into_iter()
        .map(sci)
        .collect();
        row.push(r.is_secure().to_string());
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| RunError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn summarize(cfg: &RunConfig, scenario: &Scenario, grid: &SweepGrid, warnings: &[String]) -> Result<String, RunError> {
    let p = &scenario.params;
    let mut s = String::new();
    let tx = scenario.transmitter()?;
    let pos = tx.pose.position;
    writeln!(s, "scenario: {}", scenario.name).unwrap();
    writeln!(
        s,
        "transmitter: ({:.3}, {:.3}, {:.3}) m, Theta_half = {} deg",
        pos.x, pos.y, pos.z, tx.semi_angle_deg
    )
    .unwrap();
    writeln!(s, "receiver tracks transmitter: {}", p.receiver_tracks_transmitter).unwrap();
    writeln!(s, "filter bandwidth: {} nm", sci(p.filter_bandwidth_nm())).unwrap();
    writeln!(
        s,
        "sweep: {} FOV values x {} noise levels ({} points)",
        grid.fov_values.len(),
        grid.levels.len(),
        grid.points().count()
    )
    .unwrap();
    let secure = grid.points().filter(|q| q.report.is_secure()).count();
    writeln!(s, "secure points: {secure}").unwrap();

    let fov = p.fov_deg;
    if scenario.name.is_ambient_only() {
        match ambient_tolerance(scenario, cfg.window())? {
            Some(t) => writeln!(
                s,
                "ambient tolerance: p_n = {} W/nm/m^2 at FOV {:.2} deg (window {}-{} deg)",
                sci(t.p_n),
                t.fov_deg,
                cfg.experiments.window_min_deg,
                cfg.experiments.window_max_deg
            )
            .unwrap(),
            None => writeln!(s, "ambient tolerance: none (insecure even in the dark)").unwrap(),
        }
    } else {
        let level = p.lamp_psd_w_per_nm;
        let b = match secure_fov_boundary(scenario, level)? {
            FovBoundary::Secure(d) => format!("{d:.2} deg"),
            FovBoundary::NoneSecure => "none secure".into(),
        };
        writeln!(s, "secure FOV boundary at S = {} W/nm: {b}", sci(level)).unwrap();
        match psd_tolerance(scenario, fov)? {
            Some(t) => writeln!(s, "PSD tolerance at FOV {fov} deg: {} W/nm", sci(t)).unwrap(),
            None => writeln!(s, "PSD tolerance at FOV {fov} deg: none").unwrap(),
        }
        let point = evaluate_point(scenario, fov, level)?;
        writeln!(
            s,
            "rate at FOV {fov} deg, S = {}: {} bits/pulse",
            sci(level),
            sci(point.rate())
        )
        .unwrap();
        if cfg.cli.mc_samples > 0 {
            let room = scenario.room(fov, level)?;
            let mc = montecarlo::reflected_gain_estimate(&room, cfg.cli.mc_samples, cfg.cli.seed);
            let quad = point.gains.h_ref_total;
            writeln!(
                s,
                "reflection integral at FOV {fov} deg: grid {}, Monte-Carlo {} +- {} ({} samples, seed {}), difference {:.3}%",
                sci(quad),
                sci(mc.mean),
                sci(mc.std_error),
                mc.samples,
                cfg.cli.seed,
                100.0 * (quad - mc.mean) / mc.mean
            )
            .unwrap();
        }
    }
    if warnings.is_empty() {
        writeln!(s, "warnings: none").unwrap();
    } else {
        for w in warnings {
            writeln!(s, "warning: {w}").unwrap();
        }
    }
    Ok(s)
}

/// Runs the configured sweep and writes its outputs into `cfg.cli.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let scenario = cfg.scenario()?;
    let grid = sweep(&scenario, &cfg.fov_values(), &cfg.noise_values())?;
    let warnings: Vec<String> = grid
        .results
        .iter()
        .filter_map(|row| row.first())
        .filter_map(|p| p.reflected.filter(|r| !r.converged).map(|r| (p.fov_deg, r)))
        .map(|(fov, r)| {
            format!(
                "reflection integral at FOV {fov} deg not converged: {:.3}% change at {} patches/m",
                100.0 * r.relative_change(),
                r.resolution
            )
        })
        .collect();

    let out = &cfg.cli.out;
    fs::create_dir_all(out).map_err(|e| RunError::Output {
        path: out.clone(),
        message: e.to_string(),
    })?;
    let sweep_csv = out.join("sweep.csv");
    write_sweep_csv(&grid, &sweep_csv)?;
    let summary_txt = out.join("summary.txt");
    let summary = summarize(cfg, &scenario, &grid, &warnings)?;
    fs::write(&summary_txt, summary).map_err(|e| RunError::Output {
        path: summary_txt.clone(),
        message: e.to_string(),
    })?;
    let status = if cfg.cli.strict && !warnings.is_empty() {
        ExitStatus::ConvergenceWarning
    } else {
        ExitStatus::Success
    };
    Ok(RunOutcome {
        sweep_csv,
        summary_txt,
        grid,
        warnings,
        status,
    })
}

fn load(args: &Args) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &args.scenario {
        cfg.experiments.scenario = s.clone();
    }
    if let Some(r) = args.resolution {
        cfg.channel.patches_per_meter = r;
        cfg.channel.max_patches_per_meter = cfg.channel.max_patches_per_meter.max(r);
    }
    if args.strict {
        cfg.cli.strict = true;
    }
    if let Some(o) = &args.out {
        cfg.cli.out = o.clone();
    }
    Ok(cfg)
}

/// Entry point of the `indoor-qkd` binary. Returns the process exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::ConfigError as i32 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if args.dump_defaults {
        print!("{}", RunConfig::default().to_toml_string());
        return ExitStatus::Success as i32;
    }
    if args.validate {
        let diags = match &args.config {
            Some(path) => match fs::read_to_string(path) {
                Ok(text) => config::validate_text(&text, path.parent().unwrap_or(Path::new(""))),
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitStatus::ConfigError as i32;
                }
            },
            None => Vec::new(),
        };
        let mut diags = diags;
        if diags.is_empty() {
            match load(&args) {
                Ok(cfg) => diags = cfg.validate(),
                Err(ConfigError::Invalid(d)) => diags = d,
                Err(e) => diags.push(config::Diagnostic {
                    kind: config::DiagnosticKind::MissingFile,
                    key: String::new(),
                    line: None,
                    message: e.to_string(),
                }),
            }
        }
        for d in &diags {
            println!("{d}");
        }
        return if diags.is_empty() {
            println!("ok");
            ExitStatus::Success as i32
        } else {
            ExitStatus::ConfigError as i32
        };
    }
    let result = load(&args).map_err(RunError::from).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", outcome.sweep_csv.display());
            println!("wrote {}", outcome.summary_txt.display());
            outcome.status as i32
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_status() as i32
        }
    }
}
