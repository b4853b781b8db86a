//! Asymptotic decoy-state BB84 key rate with infinitely many decoys.
//!
//! All quantities are per transmitted signal pulse. The background error
//! probability `e_0` is fixed at one half.

use thiserror::Error;

/// Error probability of a click caused by background alone.
pub const E0: f64 = 0.5;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum KeyRateError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
    #[error("error rate undefined: no clicks (yield/gain is zero)")]
    NoClicks,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Mean photon number of the signal state.
    pub mu: f64,
    /// Basis-sift factor.
    pub q: f64,
    /// Error-correction inefficiency.
    pub f: f64,
    /// Relative-phase distortion probability.
    pub e_d: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self { mu: 0.5, q: 1.0, f: 1.16, e_d: 0.0 }
    }
}

impl ProtocolParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            out.push(format!("mu must be >= 0, got {}", self.mu));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            out.push(format!("q must lie in (0, 1], got {}", self.q));
        }
        if !(self.f >= 1.0) {
            out.push(format!("f must be >= 1, got {}", self.f));
        }
        if !(0.0..=0.5).contains(&self.e_d) {
            out.push(format!("e_d must lie in [0, 0.5], got {}", self.e_d));
        }
        out
    }
}

/// `h(x) = -x log2 x - (1-x) log2 (1-x)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64, KeyRateError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(KeyRateError::Domain(x));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(x) + term(1.0 - x))
}

/// Single-photon yield `1 - (1 - η)(1 - n_N)²`.
pub fn yield_single(eta: f64, n_n: f64) -> f64 {
    -(eta.neg_ln_1p() + 2.0 * n_n.neg_ln_1p()).exp_m1()
}

/// Single-photon gain `Y1 μ e^{-μ}`.
pub fn gain_single(y1: f64, mu: f64) -> f64 {
    y1 * mu * (-mu).exp()
}

/// Single-photon error probability.
pub fn error_single(y1: f64, eta: f64, n_n: f64, e_d: f64) -> Result<f64, KeyRateError> {
    if !(y1 > 0.0) {
        return Err(KeyRateError::NoClicks);
    }
    Ok((E0 * y1 - (E0 - e_d) * eta * (1.0 - n_n)) / y1)
}

/// Signal-state gain `1 - e^{-ημ}(1 - n_N)²`.
pub fn gain_mu(eta: f64, mu: f64, n_n: f64) -> f64 {
    -(-eta * mu + 2.0 * n_n.neg_ln_1p()).exp_m1()
}

/// Overall quantum bit error rate of the signal state.
pub fn qber_mu(q_mu: f64, eta: f64, mu: f64, n_n: f64, e_d: f64) -> Result<f64, KeyRateError> {
    if !(q_mu > 0.0) {
        return Err(KeyRateError::NoClicks);
    }
    let signal_click = -(-eta * mu).exp_m1();
    Ok((E0 * q_mu - (E0 - e_d) * signal_click * (1.0 - n_n)) / q_mu)
}

trait NegLn1p {
    /// `ln(1 - self)`.
    fn neg_ln_1p(self) -> f64;
}

impl NegLn1p for f64 {
    fn neg_ln_1p(self) -> f64 {
        (-self).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KeyRateReport {
    pub y1: f64,
    pub q1: f64,
    pub e1: f64,
    pub q_mu: f64,
    pub e_mu: f64,
    /// Lower bound before clamping; negative means insecure.
    pub bound: f64,
    /// Secret bits per transmitted pulse, `max(0, bound)`.
    pub rate: f64,
    /// Set when an error rate was undefined and the rate forced to zero.
    pub undefined: Option<KeyRateError>,
}

impl KeyRateReport {
    pub fn is_secure(&self) -> bool {
        self.rate > 0.0
    }
}

fn entropy_clamped(x: f64) -> f64 {
    // rounding can push x a few ulps outside [0, 1]
    binary_entropy(x.clamp(0.0, 1.0)).unwrap_or(0.0)
}

/// Key-rate lower bound `q {Q1 [1 - h(e1)] - f Qμ h(Eμ)}`, clamped at zero.
pub fn secret_key_rate(params: &ProtocolParams, eta: f64, n_n: f64) -> KeyRateReport {
    let y1 = yield_single(eta, n_n);
    let q1 = gain_single(y1, params.mu);
    let q_mu = gain_mu(eta, params.mu, n_n);
    let mut report = KeyRateReport { y1, q1, q_mu, ..Default::default() };

    let e1 = match error_single(y1, eta, n_n, params.e_d) {
        Ok(e) => e,
        Err(e) => {
            report.undefined = Some(e);
            return report;
        }
    };
    let e_mu = match qber_mu(q_mu, eta, params.mu, n_n, params.e_d) {
        Ok(e) => e,
        Err(e) => {
            report.e1 = e1;
            report.undefined = Some(e);
            return report;
        }
    };
    let bound = params.q * (q1 * (1.0 - entropy_clamped(e1)) - params.f * q_mu * entropy_clamped(e_mu));
    KeyRateReport {
        e1,
        e_mu,
        bound,
        rate: bound.max(0.0),
        ..report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Values below were evaluated at 30 significant digits.

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(binary_entropy(0.11).unwrap(), 0.499915958164528, max_relative = 1e-13);
        assert!(matches!(binary_entropy(1.1), Err(KeyRateError::Domain(_))));
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn entropy_matches_series_near_zero() {
        // h(x) ~ x log2(e/x) for small x
        let x: f64 = 1e-9;
        let series = x * (std::f64::consts::E / x).log2();
        assert_relative_eq!(binary_entropy(x).unwrap(), series, max_relative = 1e-8);
    }

    #[test]
    fn yields() {
        assert_eq!(yield_single(1.0, 0.3), 1.0);
        assert_eq!(yield_single(0.0, 0.0), 0.0);
        assert_relative_eq!(yield_single(0.1, 1e-5), 0.10001799991, max_relative = 1e-12);
    }

    #[test]
    fn single_photon_gain() {
        assert_eq!(gain_single(0.7, 0.0), 0.0);
        assert_relative_eq!(gain_single(1.0, 0.5), 0.303265329856317, max_relative = 1e-14);
        let at = |mu: f64| gain_single(1.0, mu);
        assert!(at(1.0) > at(0.99) && at(1.0) > at(1.01));
    }

    #[test]
    fn single_photon_error() {
        assert_eq!(error_single(0.2, 0.2, 0.0, 0.0).unwrap(), 0.0);
        let y1 = yield_single(0.0, 1e-4);
        assert_relative_eq!(error_single(y1, 0.0, 1e-4, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        let y1 = yield_single(0.01, 1e-5);
        assert_relative_eq!(error_single(y1, 0.01, 1e-5, 0.0).unwrap(), 9.93028862682874e-4, max_relative = 1e-10);
        assert_eq!(error_single(0.0, 0.0, 0.0, 0.0), Err(KeyRateError::NoClicks));
    }

    #[test]
    fn signal_gain() {
        assert_relative_eq!(gain_mu(0.2, 0.5, 0.0), 1.0 - (-0.1f64).exp(), max_relative = 1e-14);
        assert_eq!(gain_mu(0.0, 0.5, 0.0), 0.0);
        assert_relative_eq!(gain_mu(6.4e-4, 0.5, 1e-6), 3.21948164563605e-4, max_relative = 1e-12);
    }

    #[test]
    fn signal_qber() {
        let q = gain_mu(0.01, 0.5, 0.0);
        assert_relative_eq!(qber_mu(q, 0.01, 0.5, 0.0, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        let q = gain_mu(0.0, 0.5, 1e-3);
        assert_relative_eq!(qber_mu(q, 0.0, 0.5, 1e-3, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        let q = gain_mu(0.01, 0.5, 1e-14);
        assert_relative_eq!(qber_mu(q, 0.01, 0.5, 1e-14, 0.03).unwrap(), 0.03, max_relative = 1e-6);
        assert_eq!(qber_mu(0.0, 0.0, 0.5, 0.0, 0.0), Err(KeyRateError::NoClicks));
    }

    #[test]
    fn perfect_channel_rate() {
        let p = ProtocolParams::default();
        let r = secret_key_rate(&p, 1.0, 0.0);
        assert_relative_eq!(r.rate, 0.5 * (-0.5f64).exp(), max_relative = 1e-14);
        assert!(r.undefined.is_none());
    }

    #[test]
    fn no_transmission_no_key() {
        let p = ProtocolParams::default();
        let r = secret_key_rate(&p, 0.0, 1e-6);
        assert_eq!(r.rate, 0.0);
        assert!(!r.is_secure());
        let r = secret_key_rate(&p, 0.0, 0.0);
        assert_eq!(r.rate, 0.0);
        assert_eq!(r.undefined, Some(KeyRateError::NoClicks));
    }

    #[test]
    fn no_signal_photons_no_key() {
        let p = ProtocolParams { mu: 0.0, ..Default::default() };
        assert_eq!(secret_key_rate(&p, 0.1, 1e-6).rate, 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(ProtocolParams::default().violations().is_empty());
        let bad = ProtocolParams { mu: -1.0, q: 0.0, f: 0.9, e_d: 0.6 };
        assert_eq!(bad.violations().len(), 4);
    }

    proptest! {
        #[test]
        fn entropy_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn ideal_rate_is_mu_exp_minus_mu(mu in 1e-6f64..=1.0) {
            let p = ProtocolParams { mu, q: 1.0, f: 1.0, e_d: 0.0 };
            let r = secret_key_rate(&p, 1.0, 0.0);
            prop_assert!((r.rate - mu * (-mu).exp()).abs() <= 1e-15);
        }

        #[test]
        fn probabilities_in_range(eta in 0.0f64..=1.0, n_n in 0.0f64..0.5, e_d in 0.0f64..=0.5) {
            let p = ProtocolParams { e_d, ..Default::default() };
            let r = secret_key_rate(&p, eta, n_n);
            for v in [r.y1, r.q1, r.e1, r.q_mu, r.e_mu] {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
            prop_assert!(r.e1 <= 0.5 + 1e-12);
            prop_assert!(r.rate >= 0.0);
        }
    }
}
