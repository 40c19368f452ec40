//! The sixteen coincidence settings, their operators and count simulation.
//!
//! Each arm either detects its photon directly behind a source slit, which
//! projects onto `|±⟩`, or lets it propagate to a detection slit at `x`,
//! which projects onto the superposition fixed by `(r₊(x), r₋(x))`. A
//! propagated arm only collects a fraction `1/χ` of the light, so its
//! operator carries that factor and the simulated integration time is
//! stretched by `χ` to keep count levels comparable.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::DerivedGeometry;
use crate::linalg::{kron2, trace_product, Mat2, Mat4};
use crate::propagation::{DetectionVector, Sign};
use crate::states::DensityMatrix;

pub use crate::propagation::SincModel;


#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arm {
    /// Detector directly behind source slit `±s`.
    Slit(Sign),
    /// Detection slit centred at `x` in the far plane.
    Detection(f64),
}

impl Arm {
    pub fn is_detection(&self) -> bool {
        matches!(self, Arm::Detection(_))
    }

    /// Single-arm operator and its scale factor.
    pub fn operator(&self, geom: &DerivedGeometry, model: SincModel) -> (Mat2, f64) {
        match *self {
            Arm::Slit(l) => {
                let mut m = Mat2::zeros();
                m[(l.index(), l.index())] = Complex64::new(1.0, 0.0);
                (m, 1.0)
            }
            Arm::Detection(x) => {
                let v = DetectionVector::new(x, &geom.optics(), model);
                let h = [v.r_plus.conj(), v.r_minus.conj()];
                let scale = 1.0 / geom.chi;
                let m = Mat2::from_fn(|r, c| h[r] * h[c].conj() * (0.5 * scale));
                (m, scale)
            }
        }
    }
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arm::Slit(l) => write!(f, "slit {}", l.symbol()),
            Arm::Detection(x) => write!(f, "x = {:.4} mm", x * 1e3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub id: usize,
    pub arm_s: Arm,
    pub arm_i: Arm,
}

impl MeasurementSetting {
    /// Number of arms detected in the far plane (0, 1 or 2).
    pub fn propagated_arms(&self) -> i32 {
        self.arm_s.is_detection() as i32 + self.arm_i.is_detection() as i32
    }

    pub fn is_slit_pair(&self) -> bool {
        self.propagated_arms() == 0
    }
}

/// The sixteen standard settings with detection slits at `0` and `x1`.
///
/// Order: the four slit pairs; signal slit × idler detection; signal
/// detection × idler slit `+`; both at `x0` then `(x0, x1)`; signal
/// detection × idler slit `−`; both detection with signal at `x1`.
pub fn standard_settings(geom: &DerivedGeometry) -> Vec<MeasurementSetting> {
    settings_at(0.0, geom.x1)
}

/// Standard layout with arbitrary detection positions.
pub fn settings_at(x0: f64, x1: f64) -> Vec<MeasurementSetting> {
    use Arm::{Detection as D, Slit as S};
    use Sign::{Minus as M, Plus as P};
    let pairs = [
        (S(P), S(P)),
        (S(P), S(M)),
        (S(M), S(P)),
        (S(M), S(M)),
        (S(P), D(x0)),
        (S(P), D(x1)),
        (S(M), D(x0)),
        (S(M), D(x1)),
        (D(x0), S(P)),
        (D(x1), S(P)),
        (D(x0), D(x0)),
        (D(x0), D(x1)),
        (D(x0), S(M)),
        (D(x1), S(M)),
        (D(x1), D(x0)),
        (D(x1), D(x1)),
    ];
    pairs
        .into_iter()
        .enumerate()
        .map(|(k, (arm_s, arm_i))| MeasurementSetting { id: k + 1, arm_s, arm_i })
        .collect()
}

/// Scaled operator `E` with `rate = R0·Tr(ρE)`, and its scale factor.
pub fn povm_element(setting: &MeasurementSetting, geom: &DerivedGeometry) -> (Mat4, f64) {
    povm_element_with(setting, geom, SincModel::Exact)
}

pub fn povm_element_with(setting: &MeasurementSetting, geom: &DerivedGeometry, model: SincModel) -> (Mat4, f64) {
    let (es, ks) = setting.arm_s.operator(geom, model);
    let (ei, ki) = setting.arm_i.operator(geom, model);
    (kron2(&es, &ei), ks * ki)
}

pub fn expected_rates(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    geom: &DerivedGeometry,
    r0: f64,
) -> Result<Vec<f64>> {
    expected_rates_with(rho, settings, geom, r0, SincModel::Exact)
}

pub fn expected_rates_with(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    geom: &DerivedGeometry,
    r0: f64,
    model: SincModel,
) -> Result<Vec<f64>> {
    if !rho.is_physical() {
        return Err(Error::Contract(format!(
            "state is not physical (min eigenvalue {:e})",
            rho.min_eigenvalue()
        )));
    }
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::Contract(format!("R0 must be positive, got {r0}")));
    }
    Ok(settings
        .iter()
        .map(|s| {
            let (e, _) = povm_element_with(s, geom, model);
            // negative values here are round-off on a physical state
            (r0 * trace_product(rho.matrix(), &e).re).max(0.0)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountEntry {
    pub setting: MeasurementSetting,
    pub counts: u64,
    /// Integration time for this setting, s.
    pub time_s: f64,
    /// Expected rate, kept by noiseless simulation.
    pub exact_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub entries: Vec<CountEntry>,
    /// Calibration: pair rate at the slit plane, Hz.
    pub r0_hz: f64,
    pub chi: f64,
    pub seed: Option<u64>,
}

impl CountRecord {
    /// Checks that ids 1..=16 each appear once with valid times.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != 16 {
            return Err(Error::IncompleteRecord(format!("expected 16 settings, found {}", self.entries.len())));
        }
        let mut seen = [false; 16];
        for e in &self.entries {
            let id = e.setting.id;
            if !(1..=16).contains(&id) {
                return Err(Error::IncompleteRecord(format!("setting id {id} out of range 1..16")));
            }
            if std::mem::replace(&mut seen[id - 1], true) {
                return Err(Error::IncompleteRecord(format!("setting id {id} appears twice")));
            }
            if !(e.time_s.is_finite() && e.time_s > 0.0) {
                return Err(Error::IncompleteRecord(format!("setting {id}: integration time must be positive")));
            }
            if let Some(r) = e.exact_rate {
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::IncompleteRecord(format!("setting {id}: invalid exact rate {r}")));
                }
            }
        }
        if self.entries.iter().filter(|e| e.setting.is_slit_pair()).count() != 4 {
            return Err(Error::IncompleteRecord("record needs exactly four slit-pair settings".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> Vec<MeasurementSetting> {
        self.entries.iter().map(|e| e.setting).collect()
    }

    pub fn has_exact_rates(&self) -> bool {
        self.entries.iter().all(|e| e.exact_rate.is_some())
    }

    /// Observed rates: the stored exact rates when every entry has one,
    /// otherwise `counts / time`.
    pub fn rates(&self) -> Vec<f64> {
        let exact = self.has_exact_rates();
        self.entries
            .iter()
            .map(|e| match e.exact_rate {
                Some(r) if exact => r,
                _ => e.counts as f64 / e.time_s,
            })
            .collect()
    }

    /// Pair-rate estimate from the four slit-pair settings.
    pub fn r0_estimate(&self) -> f64 {
        self.entries
            .iter()
            .zip(self.rates())
            .filter(|(e, _)| e.setting.is_slit_pair())
            .map(|(_, r)| r)
            .sum()
    }

    pub fn sorted_by_id(&self) -> CountRecord {
        let mut out = self.clone();
        out.entries.sort_by_key(|e| e.setting.id);
        out
    }
}

/// Simulates one run. Setting `k` integrates for `time_s · χ^n`, `n` the
/// number of propagated arms, so `R0·time_s` is the expected total over the
/// four slit pairs.
#[allow(clippy::too_many_arguments)]
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    geom: &DerivedGeometry,
    r0: f64,
    time_s: f64,
    seed: u64,
    noiseless: bool,
) -> Result<CountRecord> {
    simulate_counts_with(rho, settings, geom, r0, time_s, seed, noiseless, SincModel::Exact)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_counts_with(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    geom: &DerivedGeometry,
    r0: f64,
    time_s: f64,
    seed: u64,
    noiseless: bool,
    model: SincModel,
) -> Result<CountRecord> {
    if !(time_s.is_finite() && time_s > 0.0) {
        return Err(Error::Contract(format!("integration time must be positive, got {time_s}")));
    }
    let rates = expected_rates_with(rho, settings, geom, r0, model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = settings
        .iter()
        .zip(rates)
        .map(|(s, rate)| {
            let time = time_s * geom.chi.powi(s.propagated_arms());
            let mean = rate * time;
            let (counts, exact_rate) = if noiseless {
                (mean.round() as u64, Some(rate))
            } else if mean > 0.0 {
                let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(&mut rng);
                (draw as u64, None)
            } else {
                (0, None)
            };
            CountEntry { setting: *s, counts, time_s: time, exact_rate }
        })
        .collect();
    Ok(CountRecord { entries, r0_hz: r0, chi: geom.chi, seed: (!noiseless).then_some(seed) })
}
