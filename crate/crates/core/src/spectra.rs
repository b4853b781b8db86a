//! Sampled spectral curves for light sources.
//!
//! Curves are read from two-column CSV files (`wavelength_nm,density`) with a
//! header row. Evaluation is plain linear interpolation with no smoothing and
//! no extrapolation.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("wavelength {lambda_nm} nm is outside the sampled band [{first}, {last}] nm")]
    OutOfBand { lambda_nm: f64, first: f64, last: f64 },
    #[error("expected a {expected:?} curve, got {actual:?}")]
    KindMismatch { expected: CurveKind, actual: CurveKind },
    #[error("a spectral curve needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("wavelengths must be strictly increasing (sample {index}: {prev} nm then {next} nm)")]
    NotIncreasing { index: usize, prev: f64, next: f64 },
    #[error("density must be finite and non-negative (sample {index}: {value})")]
    BadDensity { index: usize, value: f64 },
    #[error("measurement distance must be > 0, got {0}")]
    BadDistance(f64),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// Source power spectral density, W/nm.
    SourcePsd,
    /// Spectral irradiance at some distance, W/nm/m².
    Irradiance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    samples: Vec<(f64, f64)>,
    kind: CurveKind,
}

impl SpectralCurve {
    pub fn new(samples: Vec<(f64, f64)>, kind: CurveKind) -> Result<Self, SpectraError> {
        if samples.len() < 2 {
            return Err(SpectraError::TooFewSamples(samples.len()));
        }
        for (i, &(w, v)) in samples.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SpectraError::BadDensity { index: i, value: v });
            }
            if i > 0 {
                let prev = samples[i - 1].0;
                if !(w > prev) {
                    return Err(SpectraError::NotIncreasing { index: i, prev, next: w });
                }
            }
        }
        Ok(Self { samples, kind })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn band(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Linearly interpolated density at `lambda_nm`.
    pub fn density_at(&self, lambda_nm: f64) -> Result<f64, SpectraError> {
        let (first, last) = self.band();
        if !(lambda_nm >= first && lambda_nm <= last) {
            return Err(SpectraError::OutOfBand { lambda_nm, first, last });
        }
        // index of the first sample with wavelength > lambda
        let hi = self.samples.partition_point(|&(w, _)| w <= lambda_nm);
        if hi == 0 {
            return Ok(self.samples[0].1);
        }
        let (w0, v0) = self.samples[hi - 1];
        if w0 == lambda_nm || hi == self.samples.len() {
            return Ok(v0);
        }
        let (w1, v1) = self.samples[hi];
        let t = (lambda_nm - w0) / (w1 - w0);
        Ok(v0 + t * (v1 - v0))
    }

    /// Converts a spectral irradiance measured at `distance_m` from the bulb
    /// into a source PSD, assuming the bulb radiates uniformly over the full
    /// sphere: `S = 4π d² E`. Real bulbs are not isotropic, so treat the
    /// result as an approximation.
    pub fn irradiance_to_psd(&self, distance_m: f64) -> Result<SpectralCurve, SpectraError> {
        if self.kind != CurveKind::Irradiance {
            return Err(SpectraError::KindMismatch {
                expected: CurveKind::Irradiance,
                actual: self.kind,
            });
        }
        if !(distance_m > 0.0 && distance_m.is_finite()) {
            return Err(SpectraError::BadDistance(distance_m));
        }
        let factor = 4.0 * PI * distance_m * distance_m;
        Ok(SpectralCurve {
            samples: self.samples.iter().map(|&(w, e)| (w, e * factor)).collect(),
            kind: CurveKind::SourcePsd,
        })
    }

    pub fn from_csv_reader<R: Read>(reader: R, kind: CurveKind) -> Result<Self, SpectraError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| SpectraError::Malformed {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 2 {
                return Err(SpectraError::Malformed {
                    line,
                    message: format!("expected 2 columns, found {}", rec.len()),
                });
            }
            let parse = |i: usize| {
                rec[i].parse::<f64>().map_err(|e| SpectraError::Malformed {
                    line,
                    message: format!("column {}: {:?}: {e}", i + 1, &rec[i]),
                })
            };
            samples.push((parse(0)?, parse(1)?));
        }
        Self::new(samples, kind)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, kind: CurveKind) -> Result<Self, SpectraError> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn psd(samples: &[(f64, f64)]) -> SpectralCurve {
        SpectralCurve::new(samples.to_vec(), CurveKind::SourcePsd).unwrap()
    }

    #[test]
    fn flat_curve() {
        let c = psd(&[(800.0, 2e-5), (900.0, 2e-5)]);
        assert_eq!(c.density_at(880.0).unwrap(), 2e-5);
    }

    #[test]
    fn midpoint_of_segment() {
        let c = psd(&[(800.0, 0.0), (900.0, 4e-5)]);
        assert_relative_eq!(c.density_at(850.0).unwrap(), 2e-5, max_relative = 1e-12);
    }

    #[test]
    fn exact_at_samples() {
        let c = psd(&[(400.0, 1.0), (500.0, 3.0), (600.0, 2.0)]);
        assert_eq!(c.density_at(400.0).unwrap(), 1.0);
        assert_eq!(c.density_at(500.0).unwrap(), 3.0);
        assert_eq!(c.density_at(600.0).unwrap(), 2.0);
    }

    #[test]
    fn no_extrapolation() {
        let c = psd(&[(400.0, 1.0), (500.0, 3.0)]);
        assert!(matches!(c.density_at(399.9), Err(SpectraError::OutOfBand { .. })));
        assert!(matches!(c.density_at(880.0), Err(SpectraError::OutOfBand { .. })));
        assert!(c.density_at(f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(matches!(
            SpectralCurve::new(vec![(1.0, 1.0)], CurveKind::SourcePsd),
            Err(SpectraError::TooFewSamples(1))
        ));
        assert!(matches!(
            SpectralCurve::new(vec![(2.0, 1.0), (1.0, 1.0)], CurveKind::SourcePsd),
            Err(SpectraError::NotIncreasing { .. })
        ));
        assert!(matches!(
            SpectralCurve::new(vec![(1.0, -1.0), (2.0, 1.0)], CurveKind::SourcePsd),
            Err(SpectraError::BadDensity { .. })
        ));
    }

    #[test]
    fn irradiance_at_half_meter() {
        let e = SpectralCurve::new(vec![(800.0, 1e-6), (900.0, 1e-6)], CurveKind::Irradiance).unwrap();
        let s = e.irradiance_to_psd(0.5).unwrap();
        assert_eq!(s.kind(), CurveKind::SourcePsd);
        assert_relative_eq!(s.density_at(850.0).unwrap(), PI * 1e-6, max_relative = 1e-12);
        let s2 = e.irradiance_to_psd(1.0).unwrap();
        assert_relative_eq!(s2.density_at(850.0).unwrap(), 4.0 * PI * 1e-6, max_relative = 1e-12);
    }

    #[test]
    fn zero_irradiance_stays_zero() {
        let e = SpectralCurve::new(vec![(800.0, 0.0), (900.0, 0.0)], CurveKind::Irradiance).unwrap();
        assert!(e.irradiance_to_psd(0.5).unwrap().samples().iter().all(|s| s.1 == 0.0));
    }

    #[test]
    fn conversion_requires_irradiance() {
        let c = psd(&[(800.0, 1.0), (900.0, 1.0)]);
        assert!(matches!(c.irradiance_to_psd(0.5), Err(SpectraError::KindMismatch { .. })));
        let e = SpectralCurve::new(vec![(800.0, 1.0), (900.0, 1.0)], CurveKind::Irradiance).unwrap();
        assert!(matches!(e.irradiance_to_psd(0.0), Err(SpectraError::BadDistance(_))));
    }

    #[test]
    fn csv_parsing() {
        let text = "wavelength_nm,density\n800, 1e-5\n# comment\n900,3e-5\n";
        let c = SpectralCurve::from_csv_reader(text.as_bytes(), CurveKind::SourcePsd).unwrap();
        assert_eq!(c.samples(), &[(800.0, 1e-5), (900.0, 3e-5)]);
    }

    #[test]
    fn csv_reports_line_of_bad_field() {
        let text = "wavelength_nm,density\n800,1e-5\n850,abc\n";
        match SpectralCurve::from_csv_reader(text.as_bytes(), CurveKind::SourcePsd) {
            Err(SpectraError::Malformed { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "wavelength_nm,density\n800,1e-5,7\n";
        assert!(matches!(
            SpectralCurve::from_csv_reader(text.as_bytes(), CurveKind::SourcePsd),
            Err(SpectraError::Malformed { line: 2, .. })
        ));
    }

    fn curve_strategy() -> impl Strategy<Value = SpectralCurve> {
        prop::collection::vec((0.1f64..10.0, 0.0f64..1.0), 2..20).prop_map(|steps| {
            let mut w = 300.0;
            let samples = steps
                .into_iter()
                .map(|(dw, v)| {
                    w += dw;
                    (w, v)
                })
                .collect();
            SpectralCurve::new(samples, CurveKind::Irradiance).unwrap()
        })
    }

    proptest! {
        #[test]
        fn interpolation_stays_within_bracketing_samples(c in curve_strategy(), t in 0.0f64..1.0) {
            let (a, b) = c.band();
            let lambda = a + t * (b - a);
            let v = c.density_at(lambda).unwrap();
            let hi = c.samples().partition_point(|s| s.0 < lambda).min(c.samples().len() - 1).max(1);
            let (lo_v, hi_v) = (c.samples()[hi - 1].1, c.samples()[hi].1);
            prop_assert!(v >= 0.0);
            prop_assert!(v >= lo_v.min(hi_v) - 1e-15 && v <= lo_v.max(hi_v) + 1e-15);
        }

        #[test]
        fn psd_conversion_is_linear(c in curve_strategy(), k in 0.0f64..10.0, d in 0.1f64..3.0) {
            let scaled = SpectralCurve::new(
                c.samples().iter().map(|&(w, v)| (w, k * v)).collect(),
                CurveKind::Irradiance,
            ).unwrap();
            let a = c.irradiance_to_psd(d).unwrap();
            let b = scaled.irradiance_to_psd(d).unwrap();
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!((k * x.1 - y.1).abs() <= 1e-12 * (1.0 + y.1.abs()));
            }
        }
    }
}
