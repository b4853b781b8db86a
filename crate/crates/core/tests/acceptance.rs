//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use indoor_qkd::channel::{total_reflected_gain, Resolution};
use indoor_qkd::experiments::{
    ambient_tolerance, evaluate_point, lin_space, log_space, path_loss_profile, psd_tolerance, secure_fov_boundary, sweep,
    FovBoundary, FovWindow, Scenario, ScenarioName,
};
use indoor_qkd::geometry::tessellate;
use indoor_qkd::keyrate::{binary_entropy, secret_key_rate, ProtocolParams};
use indoor_qkd::montecarlo::reflected_gain_estimate;
use indoor_qkd::noise::{isotropic_noise_power, lamp_noise_photons, matched_filter_bandwidth_nm, photons_per_pulse};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const S_NOMINAL: f64 = 1e-5;

fn boundary(name: ScenarioName, target: f64) -> Outcome {
    let s = Scenario::new(name);
    let t = Instant::now();
    let b = secure_fov_boundary(&s, S_NOMINAL).unwrap();
    let secs = t.elapsed().as_secs_f64();
    match b {
        FovBoundary::Secure(d) => check(
            (d - target).abs() <= 2.0 && secs < 30.0,
            format!("boundary {d:.2} deg (want {target} +- 2), {secs:.1} s (want < 30 s)"),
        ),
        FovBoundary::NoneSecure => check(false, "no secure FOV"),
    }
}

fn c1_center_boundary() -> Outcome {
    boundary(ScenarioName::LampCenter, 11.0)
}

fn c2_corner_boundary() -> Outcome {
    boundary(ScenarioName::LampCorner, 5.0)
}

fn c3_rate_magnitude() -> Outcome {
    let r = evaluate_point(&Scenario::new(ScenarioName::LampCenter), 5.0, S_NOMINAL).unwrap().rate();
    let ratio = r / 3e-4;
    check(
        (0.5..=2.0).contains(&ratio),
        format!("rate {r:.3e} bits/pulse = {:.1} kbps at 100 MHz (want 3e-4 within x2)", r * 1e8 / 1e3),
    )
}

fn c4_ambient_tolerance() -> Outcome {
    let w = FovWindow::PLOTTED;
    let c = ambient_tolerance(&Scenario::new(ScenarioName::AmbientOnlyCenter), w).unwrap();
    let k = ambient_tolerance(&Scenario::new(ScenarioName::AmbientOnlyCorner), w).unwrap();
    let (Some(c), Some(k)) = (c, k) else {
        return check(false, "no tolerance found");
    };
    let decades = (c.p_n / 1e-8).log10().abs();
    check(
        decades <= 1.0 && k.p_n < c.p_n,
        format!(
            "center {:.3e} W/nm/m^2 at {:.1} deg ({decades:.2} decades from 1e-8), corner {:.3e} at {:.1} deg",
            c.p_n, c.fov_deg, k.p_n, k.fov_deg
        ),
    )
}

fn c5_path_loss() -> Outcome {
    let w = FovWindow::PLOTTED;
    let fovs = w.grid(0.5);
    let corner = path_loss_profile(&Scenario::new(ScenarioName::LampCorner), &fovs).unwrap();
    let mut center = Scenario::new(ScenarioName::LampCenter);
    center.overrides.transmitter_semi_angle_deg = Some(7.0);
    let center = path_loss_profile(&center, &fovs).unwrap();
    let (lo, hi) = corner.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let in_band = lo >= 40.0 && hi <= 50.0;
    let ordered = center.iter().zip(&corner).all(|(c, k)| c < k);
    check(
        in_band && ordered,
        format!(
            "corner {lo:.2}-{hi:.2} dB over {}-{} deg (want within 40-50), center 7 deg {:.2}-{:.2} dB, below corner everywhere: {ordered}",
            w.min_deg,
            w.max_deg,
            center[0],
            center[center.len() - 1]
        ),
    )
}

fn c6_steering() -> Outcome {
    let fovs = lin_space(1.0, 30.0, 30);
    let levels = log_space(1e-7, 1e-3, 9);
    let plain = sweep(&Scenario::new(ScenarioName::LampCorner), &fovs, &levels).unwrap();
    let steered = sweep(&Scenario::new(ScenarioName::LampCornerSteered), &fovs, &levels).unwrap();
    let dominated = plain.points().zip(steered.points()).filter(|(a, b)| b.rate() < a.rate()).count();
    let fov = 5.0;
    let tp = psd_tolerance(&Scenario::new(ScenarioName::LampCorner), fov).unwrap();
    let ts = psd_tolerance(&Scenario::new(ScenarioName::LampCornerSteered), fov).unwrap();
    let larger = match (tp, ts) {
        (Some(a), Some(b)) => b > a,
        (None, Some(_)) => true,
        _ => false,
    };
    let show = |t: Option<f64>| t.map_or("none".to_string(), |v| format!("{v:.3e}"));
    check(
        dominated == 0 && larger,
        format!(
            "{dominated} of {} grid points where steering loses; PSD tolerance at {fov} deg: {} -> {} W/nm",
            fovs.len() * levels.len(),
            show(tp),
            show(ts)
        ),
    )
}

fn c7_monte_carlo() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for fov in [5.0, 11.0, 30.0] {
        let room = Scenario::new(ScenarioName::LampCenter).room(fov, S_NOMINAL).unwrap();
        let quad = total_reflected_gain(&room, Resolution::default()).unwrap();
        let mc = reflected_gain_estimate(&room, 10_000_000, 2024);
        let rel = (quad.value - mc.mean).abs() / mc.mean;
        worst = worst.max(rel);
        parts.push(format!(
            "{fov} deg: {:.4e} vs {:.4e} (+-{:.2}%) -> {:.2}%",
            quad.value,
            mc.mean,
            100.0 * mc.relative_error(),
            100.0 * rel
        ));
    }
    check(worst < 0.02, parts.join("; "))
}

fn c8_properties() -> Outcome {
    let mut failures = Vec::new();

    // binary entropy
    let h = |x| binary_entropy(x).unwrap();
    if h(0.0) != 0.0 || h(1.0) != 0.0 || (h(0.5) - 1.0).abs() > 1e-12 {
        failures.push("entropy end points".to_string());
    }
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        if (h(x) - h(1.0 - x)).abs() > 1e-12 {
            failures.push(format!("entropy symmetry at {x}"));
            break;
        }
    }

    // rate monotone in eta and n_n, never negative
    let p = ProtocolParams::default();
    let etas = log_space(1e-6, 1.0, 50);
    let noises = log_space(1e-9, 1e-1, 50);
    let rates: Vec<Vec<f64>> = etas
        .iter()
        .map(|&e| noises.iter().map(|&n| secret_key_rate(&p, e, n).rate).collect())
        .collect();
    let mut bad_eta = 0;
    let mut bad_noise = 0;
    let mut negative = 0;
    for i in 0..50 {
        for j in 0..50 {
            negative += usize::from(rates[i][j] < 0.0);
            if i > 0 && rates[i][j] < rates[i - 1][j] {
                bad_eta += 1;
            }
            if j > 0 && rates[i][j] > rates[i][j - 1] {
                bad_noise += 1;
            }
        }
    }
    if bad_eta + bad_noise + negative > 0 {
        failures.push(format!("rate grid: {bad_eta} eta, {bad_noise} noise monotonicity breaks, {negative} negative"));
    }

    // noise counts do not depend on tau under a matched filter
    let lambda = 880.0;
    let reference = |tau: f64| {
        let dl = matched_filter_bandwidth_nm(lambda, tau);
        let n1 = photons_per_pulse(isotropic_noise_power(1e-8, dl, 1.0, 1e-4, 1.5), tau, 0.6, lambda);
        let n2 = lamp_noise_photons(1e-5, dl, tau, 0.6, lambda, 6.4e-7);
        (n1, n2)
    };
    let (a1, a2) = reference(1e-10);
    let mut worst_tau: f64 = 0.0;
    for tau in log_space(1e-12, 1e-6, 25) {
        let (b1, b2) = reference(tau);
        worst_tau = worst_tau.max(((b1 - a1) / a1).abs()).max(((b2 - a2) / a2).abs());
    }
    if worst_tau > 1e-12 {
        failures.push(format!("tau invariance: {worst_tau:.2e}"));
    }

    // tessellation and reflection-grid convergence
    let mut worst_area: f64 = 0.0;
    let mut worst_conv: f64 = 0.0;
    for fov in [5.0, 11.0, 30.0, 60.0] {
        let room = Scenario::new(ScenarioName::LampCenter).room(fov, S_NOMINAL).unwrap();
        if fov == 5.0 {
            for k in 1..=40 {
                let total: f64 = tessellate(&room, k).unwrap().iter().map(|p| p.area).sum();
                worst_area = worst_area.max((total / room.dims.reflecting_area() - 1.0).abs());
            }
        }
        let g = total_reflected_gain(&room, Resolution::default()).unwrap();
        let change = if g.converged { g.relative_change() } else { f64::INFINITY };
        worst_conv = worst_conv.max(change);
    }
    if worst_area > 1e-10 {
        failures.push(format!("tessellation area error {worst_area:.2e}"));
    }
    if worst_conv >= 5e-3 {
        failures.push(format!("grid convergence {:.3}%", 100.0 * worst_conv));
    }

    let detail = format!(
        "entropy identities, 50x50 rate grid, tau invariance {worst_tau:.1e}, area {worst_area:.1e}, grid change {:.3}%",
        100.0 * worst_conv
    );
    if failures.is_empty() {
        check(true, detail)
    } else {
        check(false, format!("{detail}; failed: {}", failures.join(", ")))
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "secure FOV boundary, center", c1_center_boundary),
        (2, "secure FOV boundary, corner", c2_corner_boundary),
        (3, "key-rate magnitude", c3_rate_magnitude),
        (4, "ambient-noise tolerance", c4_ambient_tolerance),
        (5, "path-loss band and ordering", c5_path_loss),
        (6, "steering dominance", c6_steering),
        (7, "reflection integral vs Monte-Carlo", c7_monte_carlo),
        (8, "property suites", c8_properties),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!("criterion {id} [{tag}] {name}: {} ({:.1} s)", outcome.detail, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
