//! Closed-form inversion for the standard settings.
//!
//! With unit-modulus post-selection amplitudes, the detection slit at `0`
//! measures `½(I + X)` and the one at `x1` measures `½(I − Y)`, each scaled
//! by `1/χ`. Writing `c_k = rate_k / R0̂` and `d` for the slit-pair values,
//! the elements follow directly:
//!
//! ```text
//! ρ_{+m;−m} = χ(c_{x0,m} + i c_{x1,m}) − (d_{+m} + d_{−m})(1 + i)/2
//! ρ_{l+;l−} = χ(c_{l,x0} + i c_{l,x1}) − (d_{l+} + d_{l−})(1 + i)/2
//! ```
//!
//! For the two anti-diagonal elements, let `Q_jk = χ² c_{xj,xk}` and
//! `Σs_j = χ(c_{xj,+} + c_{xj,−})`, `Σi_j = χ(c_{+,xj} + c_{−,xj})`:
//!
//! ```text
//! ρ_{++;−−} = Q00 − Q11 − ½(Σs0 + Σi0 − Σs1 − Σi1)
//!           + i[Q01 + Q10 + ½ − ½(Σs0 + Σs1 + Σi0 + Σi1)]
//! ρ_{+−;−+} = Q00 + Q11 + ½ − ½(Σs0 + Σs1 + Σi0 + Σi1)
//!           + i[Q10 − Q01 + ½(Σs0 + Σi1 − Σs1 − Σi0)]
//! ```
//!
//! The two bracketed groups are added; a product of them does not reproduce
//! `ρ`.
//!
//! The true `|r±|` are slightly below one, so on real data these forms carry
//! a small bias that [`super::invert_exact`] does not.

use num_complex::Complex64;

use super::{count_residual, measurement_matrix, prepare, Method, ReconstructionResult};
use crate::error::{Error, Result};
use crate::geometry::DerivedGeometry;
use crate::linalg::Mat4;
use crate::measurement::{settings_at, Arm, CountRecord};
use crate::states::DensityMatrix;

/// Relative tolerance when matching detection positions to `{0, x1}`.
const POSITION_TOL: f64 = 1e-6;

fn check_standard(record: &CountRecord, geom: &DerivedGeometry) -> Result<()> {
    let tol = POSITION_TOL * geom.x1.abs();
    for (entry, expected) in record.entries.iter().zip(settings_at(0.0, geom.x1)) {
        let same_arm = |a: Arm, b: Arm| match (a, b) {
            (Arm::Slit(x), Arm::Slit(y)) => x == y,
            (Arm::Detection(x), Arm::Detection(y)) => (x - y).abs() <= tol,
            _ => false,
        };
        if !(same_arm(entry.setting.arm_s, expected.arm_s) && same_arm(entry.setting.arm_i, expected.arm_i)) {
            return Err(Error::NonStandardSettings(format!(
                "setting {} is ({}, {}), expected ({}, {})",
                entry.setting.id, entry.setting.arm_s, entry.setting.arm_i, expected.arm_s, expected.arm_i
            )));
        }
    }
    Ok(())
}

/// Reconstructs `ρ` from a standard-settings record with the closed forms
/// in the module docs.
pub fn invert_paper(record: &CountRecord, geom: &DerivedGeometry) -> Result<ReconstructionResult> {
    let record = prepare(record)?;
    check_standard(&record, geom)?;
    let r0 = record.r0_estimate();
    let c: Vec<f64> = record.rates().iter().map(|r| r / r0).collect();
    let chi = geom.chi;
    let cx = |re: f64, im: f64| Complex64::new(re, im);
    let half_1i = cx(0.5, 0.5);

    let mut m = Mat4::zeros();
    for k in 0..4 {
        m[(k, k)] = cx(c[k], 0.0);
    }
    // signal propagated, idler at m = + (settings 9, 10) and m = − (13, 14)
    m[(0, 2)] = cx(chi * c[8], chi * c[9]) - half_1i * (c[0] + c[2]);
    m[(1, 3)] = cx(chi * c[12], chi * c[13]) - half_1i * (c[1] + c[3]);
    // idler propagated, signal at l = + (5, 6) and l = − (7, 8)
    m[(0, 1)] = cx(chi * c[4], chi * c[5]) - half_1i * (c[0] + c[1]);
    m[(2, 3)] = cx(chi * c[6], chi * c[7]) - half_1i * (c[2] + c[3]);

    let q = |k: usize| chi * chi * c[k];
    let (q00, q01, q10, q11) = (q(10), q(11), q(14), q(15));
    let s0 = chi * (c[8] + c[12]);
    let s1 = chi * (c[9] + c[13]);
    let i0 = chi * (c[4] + c[6]);
    let i1 = chi * (c[5] + c[7]);
    let all = s0 + s1 + i0 + i1;
    m[(0, 3)] = cx(q00 - q11 - 0.5 * (s0 + i0 - s1 - i1), q01 + q10 + 0.5 - 0.5 * all);
    m[(1, 2)] = cx(q00 + q11 + 0.5 - 0.5 * all, q10 - q01 + 0.5 * (s0 + i1 - s1 - i0));

    for r in 0..4 {
        for col in 0..r {
            m[(r, col)] = m[(col, r)].conj();
        }
    }
    let rho_hat = DensityMatrix::normalized(&m)?;
    let condition_number = measurement_matrix(&record.settings(), geom)?.condition_number;
    Ok(ReconstructionResult {
        residual: count_residual(&rho_hat, &record, geom),
        rho_hat,
        method: Method::PaperForm,
        physical_projection_applied: false,
        condition_number,
        log_likelihood: None,
        converged: None,
        iterations: None,
    })
}
