use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sample of a tabulated pump field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSample {
    pub x: f64,
    pub re: f64,
    pub im: f64,
}

/// Transverse pump field at the source double-slit plane. Lengths in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PumpProfile {
    PlaneWave,
    Gaussian { waist: f64, center: f64 },
    /// First-order odd mode `(x/w)·exp(-(x/w)²)`, with a node on the axis.
    OddMode { waist: f64 },
    /// Linearly interpolated samples; zero outside the sampled range.
    Tabulated { samples: Vec<PumpSample> },
}

impl PumpProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            PumpProfile::PlaneWave => Ok(()),
            PumpProfile::Gaussian { waist, center } => {
                if !(waist.is_finite() && *waist > 0.0) {
                    return Err(Error::Pump(format!("gaussian waist must be > 0, got {waist}")));
                }
                if !center.is_finite() {
                    return Err(Error::Pump("gaussian center must be finite".into()));
                }
                Ok(())
            }
            PumpProfile::OddMode { waist } => {
                if waist.is_finite() && *waist > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Pump(format!("odd-mode waist must be > 0, got {waist}")))
                }
            }
            PumpProfile::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Pump("tabulated profile needs at least 2 samples".into()));
                }
                if samples.iter().any(|p| !(p.x.is_finite() && p.re.is_finite() && p.im.is_finite())) {
                    return Err(Error::Pump("tabulated samples must be finite".into()));
                }
                if samples.windows(2).any(|w| w[1].x <= w[0].x) {
                    return Err(Error::Pump("tabulated x must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    /// Field amplitude `W(x)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            PumpProfile::PlaneWave => Complex64::new(1.0, 0.0),
            PumpProfile::Gaussian { waist, center } => {
                let u = (x - center) / waist;
                Complex64::new((-u * u).exp(), 0.0)
            }
            PumpProfile::OddMode { waist } => {
                let u = x / waist;
                Complex64::new(u * (-u * u).exp(), 0.0)
            }
            PumpProfile::Tabulated { samples } => interpolate(samples, x),
        }
    }
}

fn interpolate(samples: &[PumpSample], x: f64) -> Complex64 {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Complex64::new(0.0, 0.0),
    };
    if x < first.x || x > last.x {
        return Complex64::new(0.0, 0.0);
    }
    let i = samples.partition_point(|p| p.x <= x).clamp(1, samples.len() - 1);
    let (p0, p1) = (&samples[i - 1], &samples[i]);
    let t = (x - p0.x) / (p1.x - p0.x);
    Complex64::new(p0.re + t * (p1.re - p0.re), p0.im + t * (p1.im - p0.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_is_constant() {
        assert_eq!(PumpProfile::PlaneWave.eval(0.3e-3), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn odd_mode_has_axial_node() {
        let p = PumpProfile::OddMode { waist: 1e-3 };
        assert_eq!(p.eval(0.0).norm(), 0.0);
        assert_eq!(p.eval(0.2e-3), -p.eval(-0.2e-3));
    }

    #[test]
    fn gaussian_at_one_waist() {
        let p = PumpProfile::Gaussian { waist: 1e-3, center: 0.0 };
        assert!((p.eval(1e-3).re - 0.3679).abs() < 1e-4);
        assert!((p.eval(1e-3).re - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_outside() {
        let p = PumpProfile::Tabulated {
            samples: vec![
                PumpSample { x: -1.0, re: 0.0, im: 0.0 },
                PumpSample { x: 1.0, re: 2.0, im: -4.0 },
            ],
        };
        assert!(p.validate().is_ok());
        assert_eq!(p.eval(0.0), Complex64::new(1.0, -2.0));
        assert_eq!(p.eval(1.0), Complex64::new(2.0, -4.0));
        assert_eq!(p.eval(1.5), Complex64::new(0.0, 0.0));
        assert_eq!(p.eval(-1.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tabulated_rejects_unsorted_or_short() {
        let s = |x| PumpSample { x, re: 1.0, im: 0.0 };
        assert!(PumpProfile::Tabulated { samples: vec![s(0.0)] }.validate().is_err());
        assert!(PumpProfile::Tabulated { samples: vec![s(1.0), s(0.0)] }.validate().is_err());
        assert!(PumpProfile::Tabulated { samples: vec![s(0.0), s(0.0)] }.validate().is_err());
    }
}
