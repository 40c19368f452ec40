//! Experimental geometry of the twin-photon double-slit setup.
//!
//! All lengths are in metres internally. Slit centres sit at `±s`, the source
//! slits have half-width `a` and the detection slits half-width `b`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw geometry as configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Pump wavelength.
    pub lambda_pump: f64,
    /// Crystal to source double-slit distance.
    pub z_a: f64,
    /// Absolute position of the detection plane (`z > z_a`).
    pub z: f64,
    /// Slit-centre offset from the optical axis.
    pub s: f64,
    /// Source slit half-width.
    pub a: f64,
    /// Detection slit half-width.
    pub b: f64,
    /// Manual diffraction-pattern width.
    pub l_override: Option<f64>,
}

/// The optical parameters that the propagation integrals depend on.
///
/// Kept separate from [`Geometry`] so the integrals can be evaluated in
/// limits (e.g. `s = 0`) that a physical geometry rejects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optics {
    pub alpha: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
}

/// Geometry plus every derived parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedGeometry {
    pub geometry: Geometry,
    /// Pump wavenumber.
    pub k_p: f64,
    /// Wavenumber of each degenerate down-converted photon.
    pub k_dc: f64,
    /// Free-propagation parameter `(z - z_a) / k_dc`, in m².
    pub alpha: f64,
    /// Quarter-phase detection position.
    pub x1: f64,
    /// Effective diffraction-pattern width.
    pub l: f64,
    /// Diffraction-loss factor `L / 2b`.
    pub chi: f64,
}

impl Geometry {
    /// Builds a geometry from the millimetre/nanometre units used in config files.
    pub fn from_lab_units(
        lambda_pump_nm: f64,
        z_a_mm: f64,
        z_minus_za_mm: f64,
        s_mm: f64,
        a_mm: f64,
        b_mm: f64,
        l_mm: Option<f64>,
    ) -> Self {
        Self {
            lambda_pump: lambda_pump_nm * 1e-9,
            z_a: z_a_mm * 1e-3,
            z: (z_a_mm + z_minus_za_mm) * 1e-3,
            s: s_mm * 1e-3,
            a: a_mm * 1e-3,
            b: b_mm * 1e-3,
            l_override: l_mm.map(|l| l * 1e-3),
        }
    }

    /// The reference setup: 413.1 nm pump, slits 200 mm from the crystal,
    /// detection 600 mm further on, `s = 0.25 mm`, `a = b = 0.05 mm`.
    pub fn reference() -> Self {
        Self::from_lab_units(413.1, 200.0, 600.0, 0.25, 0.05, 0.05, None)
    }

    pub fn propagation_distance(&self) -> f64 {
        self.z - self.z_a
    }

    fn check(&self) -> Vec<(&'static str, std::result::Result<(), String>)> {
        let positive = |v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("must be finite and > 0, got {v:e}"))
            }
        };
        let mut checks = vec![
            ("lambda_pump", positive(self.lambda_pump)),
            ("z_a", positive(self.z_a)),
            ("s", positive(self.s)),
            ("a", positive(self.a)),
            ("b", positive(self.b)),
            (
                "z",
                if self.z.is_finite() && self.z > self.z_a {
                    Ok(())
                } else {
                    Err(format!("z ({:e}) must exceed z_a ({:e})", self.z, self.z_a))
                },
            ),
            (
                "s",
                if self.s >= self.a {
                    Ok(())
                } else {
                    Err(format!("s ≥ a violated ({:e} < {:e})", self.s, self.a))
                },
            ),
            (
                "b",
                if self.b <= self.s {
                    Ok(())
                } else {
                    Err(format!("b ≤ s violated ({:e} > {:e})", self.b, self.s))
                },
            ),
        ];
        if let Some(l) = self.l_override {
            checks.push(("l_override", positive(l)));
        }
        checks
    }

    /// Computes every derived optical parameter.
    pub fn derive(&self) -> Result<DerivedGeometry> {
        if let Some((field, Err(reason))) = self.check().into_iter().find(|(_, r)| r.is_err()) {
            return Err(Error::Geometry { field, reason });
        }
        let k_p = 2.0 * PI / self.lambda_pump;
        let k_dc = 0.5 * k_p;
        let alpha = self.propagation_distance() / k_dc;
        let x1 = alpha * PI / (2.0 * self.s);
        let l = self.l_override.unwrap_or(4.0 * PI * alpha / self.a);
        let chi = l / (2.0 * self.b);
        if chi < 1.0 {
            return Err(Error::Geometry {
                field: "l_override",
                reason: format!("L/(2b) = {chi} < 1: pattern narrower than a detection slit"),
            });
        }
        Ok(DerivedGeometry { geometry: *self, k_p, k_dc, alpha, x1, l, chi })
    }

    /// Reports every invariant without failing.
    pub fn validate(&self) -> ValidationReport {
        let checks = self
            .check()
            .into_iter()
            .map(|(field, r)| Check {
                name: field.to_string(),
                passed: r.is_ok(),
                detail: r.err().unwrap_or_default(),
            })
            .collect();
        let mut warnings = Vec::new();
        let (fraunhofer, overlap) = match self.derive() {
            Ok(d) => {
                let f = d.fraunhofer_figure();
                if f > 0.1 {
                    warnings.push(format!(
                        "Fraunhofer figure b²/(4α) = {f:.3} rad; closed-form propagation may be inaccurate"
                    ));
                }
                (Some(f), Some(crate::states::slit_basis_overlap(self)))
            }
            Err(_) => (None, (self.a > 0.0).then(|| crate::states::slit_basis_overlap(self))),
        };
        if let Some(o) = overlap {
            if o > 0.0 {
                warnings.push(format!("slit basis states overlap: ⟨+|−⟩ = {o:.3}"));
            }
        }
        ValidationReport { checks, fraunhofer_figure: fraunhofer, basis_overlap: overlap, warnings }
    }
}

impl DerivedGeometry {
    pub fn optics(&self) -> Optics {
        Optics { alpha: self.alpha, s: self.geometry.s, a: self.geometry.a, b: self.geometry.b }
    }

    /// `b² / (4α)`: the detection-slit Fresnel phase, small in the far field.
    pub fn fraunhofer_figure(&self) -> f64 {
        self.geometry.b.powi(2) / (4.0 * self.alpha)
    }

    /// Per-arm efficiency `2b/L` of a detection-plane measurement.
    pub fn detection_efficiency(&self) -> f64 {
        1.0 / self.chi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub fraunhofer_figure: Option<f64>,
    pub basis_overlap: Option<f64>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
