use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{count_residual, prepare, Method, ReconstructionResult};
use crate::error::{Error, Result};
use crate::geometry::DerivedGeometry;
use crate::linalg::{pauli_basis, trace_product, Mat4};
use crate::measurement::{povm_element, CountRecord, MeasurementSetting};
use crate::states::{project_physical, DensityMatrix};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

/// `M[k, ab] = ¼ Tr(σ_a⊗σ_b · E_k)`, so that `rate_k / R0 = Σ M[k, ab] t_ab`
/// with `ρ = ¼ Σ t_ab σ_a⊗σ_b` and `t_II = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    /// Ratio of extreme singular values of the unscaled matrix.
    pub condition_number: f64,
}

pub fn measurement_matrix(settings: &[MeasurementSetting], geom: &DerivedGeometry) -> Result<MeasurementMatrix> {
    let basis = pauli_basis();
    let ops: Vec<Mat4> = settings.iter().map(|s| povm_element(s, geom).0).collect();
    let matrix = DMatrix::from_fn(settings.len(), 16, |k, j| 0.25 * trace_product(&basis[j], &ops[k]).re);
    let sv = matrix.singular_values();
    let max = sv.max();
    let rank = sv.iter().filter(|&&v| v > RANK_TOL * max).count();
    if rank < 16 {
        return Err(Error::DegenerateSettings { rank });
    }
    Ok(MeasurementMatrix { condition_number: max / sv.min(), matrix, rank })
}

/// Pauli coordinates back to a density matrix.
fn from_pauli(t: &[f64]) -> Mat4 {
    pauli_basis()
        .iter()
        .zip(t)
        .fold(Mat4::zeros(), |acc, (s, &c)| acc + s * Complex64::new(0.25 * c, 0.0))
}

/// Linear inversion by least squares over the 15 free Pauli coordinates.
///
/// Rows are rescaled by `χ^n` (`n` propagated arms) before solving so that
/// every setting carries comparable weight. With `project` set, the estimate
/// is clipped onto the state space afterwards.
pub fn invert_exact(record: &CountRecord, geom: &DerivedGeometry, project: bool) -> Result<ReconstructionResult> {
    let record = prepare(record)?;
    let settings = record.settings();
    let mm = measurement_matrix(&settings, geom)?;
    let r0 = record.r0_estimate();
    let rates = record.rates();
    let n = settings.len();
    let weights: Vec<f64> = settings.iter().map(|s| geom.chi.powi(s.propagated_arms())).collect();
    let a = DMatrix::from_fn(n, 15, |k, j| mm.matrix[(k, j + 1)] * weights[k]);
    let y = DVector::from_fn(n, |k, _| (rates[k] / r0 - mm.matrix[(k, 0)]) * weights[k]);
    // the equilibrated system is well conditioned, so Householder QR is
    // accurate to round-off here
    let qr = a.qr();
    let t = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * y))
        .ok_or_else(|| Error::Contract("least-squares solve hit a zero pivot".into()))?;
    let coords: Vec<f64> = std::iter::once(1.0).chain(t.iter().copied()).collect();
    let raw = DensityMatrix::normalized(&from_pauli(&coords))?;
    let rho_hat = if project { project_physical(raw.matrix())? } else { raw };
    Ok(ReconstructionResult {
        residual: count_residual(&rho_hat, &record, geom),
        rho_hat,
        method: Method::ExactLinear,
        physical_projection_applied: project,
        condition_number: mm.condition_number,
        log_likelihood: None,
        converged: None,
        iterations: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::measurement::{settings_at, simulate_counts, standard_settings};
    use crate::states::{build_state, fidelity, PumpProfile};

    fn reference() -> DerivedGeometry {
        Geometry::reference().derive().unwrap()
    }

    #[test]
    fn standard_settings_are_complete() {
        let g = reference();
        let mm = measurement_matrix(&standard_settings(&g), &g).unwrap();
        assert_eq!(mm.rank, 16);
        assert!(mm.condition_number.is_finite() && mm.condition_number > 1.0);
    }

    #[test]
    fn duplicated_positions_are_degenerate() {
        let g = reference();
        let err = measurement_matrix(&settings_at(0.0, 0.0), &g).unwrap_err();
        assert!(matches!(err, Error::DegenerateSettings { rank } if rank < 16));
    }

    #[test]
    fn permuting_settings_permutes_rows() {
        let g = reference();
        let s = standard_settings(&g);
        let mut p = s.clone();
        p.reverse();
        let (a, b) = (measurement_matrix(&s, &g).unwrap(), measurement_matrix(&p, &g).unwrap());
        for k in 0..16 {
            assert_eq!(a.matrix.row(k), b.matrix.row(15 - k));
        }
    }

    #[test]
    fn noiseless_bell_round_trip() {
        let g = reference();
        let rho = build_state(&PumpProfile::OddMode { waist: 1e-3 }, &g).unwrap().to_density();
        let rec = simulate_counts(&rho, &standard_settings(&g), &g, 1e4, 100.0, 0, true).unwrap();
        let res = invert_exact(&rec, &g, false).unwrap();
        assert!(fidelity(&res.rho_hat, &rho) >= 1.0 - 1e-9);
        assert!(res.residual < 1e-9 * 1e4 * 100.0);
        assert_eq!(res.method, Method::ExactLinear);
    }

    #[test]
    fn noiseless_mixed_round_trip() {
        let g = reference();
        let rho = DensityMatrix::maximally_mixed();
        let rec = simulate_counts(&rho, &standard_settings(&g), &g, 1e4, 100.0, 0, true).unwrap();
        let res = invert_exact(&rec, &g, false).unwrap();
        assert!(res.rho_hat.max_abs_diff(&rho) < 1e-9);
    }

    #[test]
    fn incomplete_record_rejected() {
        let g = reference();
        let mut rec =
            simulate_counts(&DensityMatrix::maximally_mixed(), &standard_settings(&g), &g, 1.0, 1.0, 0, true).unwrap();
        rec.entries.truncate(15);
        assert!(matches!(invert_exact(&rec, &g, true), Err(Error::IncompleteRecord(_))));
    }
}
