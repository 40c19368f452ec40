//! Two-photon spatial-qubit states behind the source double slits.

mod density;
mod metrics;
mod pump;
mod random;

pub use density::{DensityMatrix, TwoQubitState, BASIS_LABELS, HERMITICITY_TOL, PSD_TOL, TRACE_TOL};
pub use metrics::{concurrence, fidelity, metrics, project_physical, trace_distance, Metrics};
pub use pump::{PumpProfile, PumpSample};
pub use random::{random_mixed_state, random_pure_state};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{DerivedGeometry, Geometry};

/// Builds the post-aperture state from the pump profile.
///
/// Both photons through the same slit sample the pump at that slit;
/// through opposite slits they sample it on the axis, with the extra
/// phase `k_p s² / (2 z_a)` from the pair's path difference.
pub fn build_state(pump: &PumpProfile, geom: &DerivedGeometry) -> Result<TwoQubitState> {
    pump.validate()?;
    let g = &geom.geometry;
    let w_pp = pump.eval(g.s);
    let w_mm = pump.eval(-g.s);
    let cross = pump.eval(0.0) * Complex64::from_polar(1.0, cross_phase(geom));
    if [w_pp, w_mm, cross].iter().all(|z| z.norm() == 0.0) {
        return Err(Error::NullState);
    }
    TwoQubitState::new([[w_pp, cross], [cross, w_mm]])
}

/// `k_p s² / (2 z_a)`.
pub fn cross_phase(geom: &DerivedGeometry) -> f64 {
    geom.k_p * geom.geometry.s.powi(2) / (2.0 * geom.geometry.z_a)
}

/// `⟨+|−⟩` for single-slit states at `±s` of half-width `a`.
///
/// The overlap integral of two sinc² spectra is the triangle function
/// `max(0, 1 − s/a)`; it vanishes whenever the slits do not overlap.
pub fn slit_basis_overlap(geom: &Geometry) -> f64 {
    (1.0 - geom.s / geom.a).max(0.0)
}
