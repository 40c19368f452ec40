//! File formats. Lengths are millimetres and wavelengths nanometres, with
//! the unit in each key name; times are seconds and rates hertz.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::Mat4;
use crate::measurement::{Arm, CountEntry, CountRecord, MeasurementSetting};
use crate::propagation::Sign;
use crate::states::{DensityMatrix, PumpProfile, PumpSample};
use crate::tomography::{Method, ReconstructionResult};

const MM: f64 = 1e-3;

/// Parses JSON, reporting the path of the offending field on failure.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Format(format!("at `{path}`: {}", e.into_inner()))
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize infallibly");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub lambda_pump_nm: f64,
    pub z_a_mm: f64,
    pub z_minus_za_mm: f64,
    pub s_mm: f64,
    pub a_mm: f64,
    pub b_mm: f64,
    #[serde(rename = "L_mm", default, skip_serializing_if = "Option::is_none")]
    pub l_mm: Option<f64>,
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> Geometry {
        Geometry::from_lab_units(
            self.lambda_pump_nm,
            self.z_a_mm,
            self.z_minus_za_mm,
            self.s_mm,
            self.a_mm,
            self.b_mm,
            self.l_mm,
        )
    }
}

impl From<&Geometry> for GeometryConfig {
    fn from(g: &Geometry) -> Self {
        Self {
            lambda_pump_nm: g.lambda_pump * 1e9,
            z_a_mm: g.z_a / MM,
            z_minus_za_mm: g.propagation_distance() / MM,
            s_mm: g.s / MM,
            a_mm: g.a / MM,
            b_mm: g.b / MM,
            l_mm: g.l_override.map(|l| l / MM),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSampleConfig {
    pub x_mm: f64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum PumpConfig {
    PlaneWave,
    Gaussian {
        waist_mm: f64,
        #[serde(default)]
        center_mm: f64,
    },
    OddMode {
        waist_mm: f64,
    },
    Tabulated {
        samples: Vec<PumpSampleConfig>,
    },
}

impl PumpConfig {
    pub fn to_profile(&self) -> PumpProfile {
        match self {
            PumpConfig::PlaneWave => PumpProfile::PlaneWave,
            PumpConfig::Gaussian { waist_mm, center_mm } => {
                PumpProfile::Gaussian { waist: waist_mm * MM, center: center_mm * MM }
            }
            PumpConfig::OddMode { waist_mm } => PumpProfile::OddMode { waist: waist_mm * MM },
            PumpConfig::Tabulated { samples } => PumpProfile::Tabulated {
                samples: samples.iter().map(|s| PumpSample { x: s.x_mm * MM, re: s.re, im: s.im }).collect(),
            },
        }
    }
}

/// 4×4 matrix as rows of `[re, im]` pairs.
pub type MatrixJson = [[[f64; 2]; 4]; 4];

pub fn matrix_to_json(m: &Mat4) -> MatrixJson {
    std::array::from_fn(|r| std::array::from_fn(|c| [m[(r, c)].re, m[(r, c)].im]))
}

pub fn matrix_from_json(j: &MatrixJson) -> Mat4 {
    Mat4::from_fn(|r, c| Complex64::new(j[r][c][0], j[r][c][1]))
}

/// A state file: either a bare matrix or any object with a `rho` field
/// (such as a reconstruction result).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Bare(MatrixJson),
    Wrapped { rho: MatrixJson },
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let m = match from_json::<StateFile>(text)? {
        StateFile::Bare(m) | StateFile::Wrapped { rho: m } => m,
    };
    DensityMatrix::new(matrix_from_json(&m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArmJson {
    Slit { slit: SlitLabel },
    Detection { x_mm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlitLabel {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl From<Arm> for ArmJson {
    fn from(a: Arm) -> Self {
        match a {
            Arm::Slit(Sign::Plus) => ArmJson::Slit { slit: SlitLabel::Plus },
            Arm::Slit(Sign::Minus) => ArmJson::Slit { slit: SlitLabel::Minus },
            Arm::Detection(x) => ArmJson::Detection { x_mm: x / MM },
        }
    }
}

impl From<ArmJson> for Arm {
    fn from(a: ArmJson) -> Self {
        match a {
            ArmJson::Slit { slit: SlitLabel::Plus } => Arm::Slit(Sign::Plus),
            ArmJson::Slit { slit: SlitLabel::Minus } => Arm::Slit(Sign::Minus),
            ArmJson::Detection { x_mm } => Arm::Detection(x_mm * MM),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingJson {
    pub id: usize,
    pub arm_s: ArmJson,
    pub arm_i: ArmJson,
}

/// Count record on disk; arrays are parallel to `settings`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRecordJson {
    pub settings: Vec<SettingJson>,
    pub counts: Vec<u64>,
    pub time_s: Vec<f64>,
    #[serde(rename = "R0_hz")]
    pub r0_hz: f64,
    pub chi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_rates: Option<Vec<f64>>,
}

impl From<&CountRecord> for CountRecordJson {
    fn from(r: &CountRecord) -> Self {
        let exact = r.has_exact_rates();
        Self {
            settings: r
                .entries
                .iter()
                .map(|e| SettingJson { id: e.setting.id, arm_s: e.setting.arm_s.into(), arm_i: e.setting.arm_i.into() })
                .collect(),
            counts: r.entries.iter().map(|e| e.counts).collect(),
            time_s: r.entries.iter().map(|e| e.time_s).collect(),
            r0_hz: r.r0_hz,
            chi: r.chi,
            seed: r.seed,
            exact_rates: exact.then(|| r.entries.iter().map(|e| e.exact_rate.unwrap_or_default()).collect()),
        }
    }
}

impl CountRecordJson {
    pub fn to_record(&self) -> Result<CountRecord> {
        let n = self.settings.len();
        let mismatch = |field: &str, len: usize| {
            Error::Format(format!("`{field}` has {len} entries but `settings` has {n}"))
        };
        if self.counts.len() != n {
            return Err(mismatch("counts", self.counts.len()));
        }
        if self.time_s.len() != n {
            return Err(mismatch("time_s", self.time_s.len()));
        }
        if let Some(r) = &self.exact_rates {
            if r.len() != n {
                return Err(mismatch("exact_rates", r.len()));
            }
        }
        let entries = (0..n)
            .map(|k| CountEntry {
                setting: MeasurementSetting {
                    id: self.settings[k].id,
                    arm_s: self.settings[k].arm_s.into(),
                    arm_i: self.settings[k].arm_i.into(),
                },
                counts: self.counts[k],
                time_s: self.time_s[k],
                exact_rate: self.exact_rates.as_ref().map(|r| r[k]),
            })
            .collect();
        let record = CountRecord { entries, r0_hz: self.r0_hz, chi: self.chi, seed: self.seed };
        record.validate()?;
        Ok(record)
    }
}

pub fn parse_count_record(text: &str) -> Result<CountRecord> {
    from_json::<CountRecordJson>(text)?.to_record()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionJson {
    pub method: Method,
    pub rho: MatrixJson,
    pub residual: f64,
    /// Whether the estimate is positive semidefinite.
    pub physical: bool,
    pub projection_applied: bool,
    /// `null` when the settings are degenerate.
    pub condition_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
}

impl From<&ReconstructionResult> for ReconstructionJson {
    fn from(r: &ReconstructionResult) -> Self {
        Self {
            method: r.method,
            rho: matrix_to_json(r.rho_hat.matrix()),
            residual: r.residual,
            physical: r.rho_hat.is_physical(),
            projection_applied: r.physical_projection_applied,
            condition_number: r.condition_number.is_finite().then_some(r.condition_number),
            log_likelihood: r.log_likelihood,
            converged: r.converged,
            iterations: r.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{simulate_counts, standard_settings};
    use crate::states::{build_state, PumpProfile};

    #[test]
    fn geometry_round_trip() {
        let g = Geometry::reference();
        let cfg = GeometryConfig::from(&g);
        let back: GeometryConfig = from_json(&to_json_pretty(&cfg)).unwrap();
        let g2 = back.to_geometry();
        assert!((g2.s - g.s).abs() < 1e-18 && (g2.z - g.z).abs() < 1e-15);
        assert!(!to_json_pretty(&cfg).contains("L_mm"));
    }

    #[test]
    fn unknown_field_reports_path() {
        let text = r#"{"lambda_pump_nm": 413.1, "z_a_mm": 200, "z_minus_za_mm": 600,
                       "s_mm": 0.25, "a_mm": 0.05, "b_mm": 0.05, "s_m": 1}"#;
        let err = from_json::<GeometryConfig>(text).unwrap_err().to_string();
        assert!(err.contains("s_m"), "{err}");
    }

    #[test]
    fn pump_variants_parse() {
        let p: PumpConfig = from_json(r#"{"variant": "odd_mode", "waist_mm": 1.0}"#).unwrap();
        assert_eq!(p.to_profile(), PumpProfile::OddMode { waist: 1e-3 });
        let p: PumpConfig = from_json(r#"{"variant": "gaussian", "waist_mm": 0.5}"#).unwrap();
        assert_eq!(p.to_profile(), PumpProfile::Gaussian { waist: 0.5e-3, center: 0.0 });
    }

    #[test]
    fn count_record_round_trip_is_lossless() {
        let g = Geometry::reference().derive().unwrap();
        let rho = build_state(&PumpProfile::PlaneWave, &g).unwrap().to_density();
        let rec = simulate_counts(&rho, &standard_settings(&g), &g, 1e3, 3.0, 0, true).unwrap();
        let text = to_json_pretty(&CountRecordJson::from(&rec));
        assert!(text.contains(r#""slit": "+""#) && text.contains("x_mm") && text.contains("R0_hz"));
        let back = parse_count_record(&text).unwrap();
        assert_eq!(back.entries.len(), 16);
        for (a, b) in rec.entries.iter().zip(&back.entries) {
            assert_eq!(a.counts, b.counts);
            assert_eq!(a.time_s, b.time_s);
            assert_eq!(a.exact_rate, b.exact_rate);
            match (a.setting.arm_i, b.setting.arm_i) {
                (Arm::Detection(x), Arm::Detection(y)) => assert!((x - y).abs() <= 1e-15 * x.abs().max(1e-3)),
                (x, y) => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn mismatched_arrays_rejected() {
        let g = Geometry::reference().derive().unwrap();
        let rec =
            simulate_counts(&DensityMatrix::maximally_mixed(), &standard_settings(&g), &g, 1.0, 1.0, 0, true).unwrap();
        let mut j = CountRecordJson::from(&rec);
        j.counts.pop();
        assert!(matches!(j.to_record(), Err(Error::Format(_))));
    }

    #[test]
    fn state_files_bare_or_wrapped() {
        let rho = DensityMatrix::maximally_mixed();
        let bare = serde_json::to_string(&matrix_to_json(rho.matrix())).unwrap();
        assert_eq!(parse_state(&bare).unwrap(), rho);
        let wrapped = format!(r#"{{"method": "mle", "rho": {bare}}}"#);
        assert_eq!(parse_state(&wrapped).unwrap(), rho);
        assert!(parse_state("[1, 2]").is_err());
    }
}
