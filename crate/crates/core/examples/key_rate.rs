//! The decoy-state key-rate bound and its ingredients as channel
//! transmittance and background noise vary.
//!
//!     cargo run --release --example key_rate

use indoor_qkd::experiments::log_space;
use indoor_qkd::keyrate::{secret_key_rate, ProtocolParams};

fn main() {
    let p = ProtocolParams::default();
    println!("mu = {}, f = {}, q = {}, e_d = {}", p.mu, p.f, p.q, p.e_d);
    println!("{:>10} {:>10} {:>11} {:>11} {:>11} {:>11} {:>11}", "eta", "n_N", "Y1", "e1", "Q_mu", "E_mu", "R");
    for eta in [3.8e-4, 1e-3] {
        for n_n in log_space(1e-7, 1e-4, 4) {
            let r = secret_key_rate(&p, eta, n_n);
            println!(
                "{eta:>10.1e} {n_n:>10.1e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}",
                r.y1, r.e1, r.q_mu, r.e_mu, r.rate
            );
        }
    }
    // the bound is zero when no photons are sent
    let dark = ProtocolParams { mu: 0.0, ..p };
    println!("mu = 0: R = {}", secret_key_rate(&dark, 1e-3, 1e-7).rate);
}
