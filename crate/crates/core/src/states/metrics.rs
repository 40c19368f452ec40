//! State metrics and the projection back onto the physical state space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, kron2, paulis, Mat4};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub purity: f64,
    pub min_eigenvalue: f64,
    pub concurrence: f64,
    pub fidelity: Option<f64>,
    pub trace_distance: Option<f64>,
}

pub fn metrics(rho: &DensityMatrix, reference: Option<&DensityMatrix>) -> Metrics {
    Metrics {
        purity: rho.purity(),
        min_eigenvalue: rho.min_eigenvalue(),
        concurrence: concurrence(rho),
        fidelity: reference.map(|r| fidelity(rho, r)),
        trace_distance: reference.map(|r| trace_distance(rho, r)),
    }
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
///
/// Negative eigenvalues of either argument are dropped. The square root is
/// taken of the purer argument so that round-off eigenvalues of a pure state
/// do not leak into the result.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let (outer, inner) = if rho.purity() >= sigma.purity() { (rho, sigma) } else { (sigma, rho) };
    let root = linalg::sqrt_psd(outer.matrix());
    let inner_pos = linalg::psd_function(inner.matrix(), |v| v);
    let m = root * inner_pos * root;
    let values = linalg::eigvalsh(&m);
    let cutoff = linalg::EIGEN_CLIP * values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let t: f64 = values.iter().filter(|&&v| v > cutoff).map(|v| v.sqrt()).sum();
    t * t
}

/// `½ Tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let diff = rho.matrix() - sigma.matrix();
    0.5 * linalg::eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>()
}

/// Wootters concurrence from the spin-flipped state `ρ̃ = (Y⊗Y) ρ* (Y⊗Y)`.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let y = paulis()[2];
    let yy = kron2(&y, &y);
    let flipped = yy * rho.matrix().conjugate() * yy;
    let root = linalg::sqrt_psd(rho.matrix());
    let r = root * flipped * root;
    let values = linalg::eigvalsh(&r);
    let cutoff = linalg::EIGEN_CLIP * values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut l: Vec<f64> = values.iter().map(|&v| if v > cutoff { v.sqrt() } else { 0.0 }).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Nearest state by eigenvalue clipping: Hermitian part, negative
/// eigenvalues set to zero, trace renormalized.
pub fn project_physical(m: &Mat4) -> Result<DensityMatrix> {
    let h = linalg::hermitian_part(m);
    if h.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let (values, vectors) = linalg::eigh(&h);
    let clipped = values.map(|v| v.max(0.0));
    let total: f64 = clipped.sum();
    if !(total.is_finite() && total > f64::EPSILON * values.amax()) {
        return Err(Error::ZeroMatrix);
    }
    let diag = clipped.map(|v| Complex64::new(v / total, 0.0));
    let out = vectors * Mat4::from_diagonal(&diag) * vectors.adjoint();
    DensityMatrix::normalized(&out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::states::TwoQubitState;
    use proptest::prelude::*;

    fn pure(v: [Complex64; 4]) -> TwoQubitState {
        TwoQubitState::new([[v[0], v[1]], [v[2], v[3]]]).unwrap()
    }

    fn bell() -> DensityMatrix {
        pure([ONE, ZERO, ZERO, -ONE]).to_density()
    }

    #[test]
    fn self_fidelity_and_zero_distance() {
        for rho in [bell(), DensityMatrix::maximally_mixed()] {
            let m = metrics(&rho, Some(&rho));
            assert!((m.fidelity.unwrap() - 1.0).abs() < 1e-12);
            assert!(m.trace_distance.unwrap() < 1e-12);
        }
    }

    #[test]
    fn bell_is_maximally_entangled() {
        assert!((concurrence(&bell()) - 1.0).abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::maximally_mixed()) < 1e-12);
    }

    #[test]
    fn plane_wave_phase_concurrence_matches_pure_formula() {
        let phi: f64 = 2.376;
        let e = Complex64::from_polar(1.0, phi);
        let psi = pure([ONE, e, e, ONE]);
        let c = concurrence(&psi.to_density());
        assert!((c - phi.sin().abs()).abs() < 1e-10);
        assert!((c - psi.concurrence()).abs() < 1e-10);
    }

    #[test]
    fn bell_against_mixed_and_orthogonal() {
        let f = fidelity(&bell(), &DensityMatrix::maximally_mixed());
        assert!((f - 0.25).abs() < 1e-12);
        let orth = pure([ONE, ZERO, ZERO, ONE]).to_density();
        assert!(fidelity(&bell(), &orth) < 1e-12);
        assert!((trace_distance(&bell(), &orth) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent_on_states() {
        let rho = bell();
        let p = project_physical(rho.matrix()).unwrap();
        assert!((fidelity(&rho, &p) - 1.0).abs() < 1e-12);
        assert!(rho.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn projection_clips_and_renormalizes() {
        let mut m = Mat4::zeros();
        m[(0, 0)] = Complex64::new(1.1, 0.0);
        m[(1, 1)] = Complex64::new(-0.1, 0.0);
        let p = project_physical(&m).unwrap();
        assert!(p.max_abs_diff(&DensityMatrix::diagonal([1.0, 0.0, 0.0, 0.0]).unwrap()) < 1e-12);
    }

    #[test]
    fn projection_of_zero_fails() {
        assert_eq!(project_physical(&Mat4::zeros()), Err(Error::ZeroMatrix));
        let neg = -Mat4::identity();
        assert_eq!(project_physical(&neg), Err(Error::ZeroMatrix));
    }

    #[test]
    fn projection_of_perturbed_pure_state() {
        // pure state plus a Hermitian perturbation that drives one eigenvalue to −0.05
        let rho = pure([ONE, Complex64::new(0.3, 0.2), ZERO, -ONE]).to_density();
        let (_, vecs) = linalg::eigh(rho.matrix());
        let v = vecs.column(0).into_owned();
        let m = rho.matrix() - (v * v.adjoint()) * Complex64::new(0.05, 0.0)
            + (vecs.column(1) * vecs.column(1).adjoint()) * Complex64::new(0.05, 0.0);
        assert!(linalg::eigvalsh(&m)[0] < -0.049);
        let p = project_physical(&m).unwrap();
        assert!(p.min_eigenvalue() >= -1e-12);
        assert!((p.trace() - 1.0).abs() < 1e-12);
    }

    fn unit_vector() -> impl Strategy<Value = [Complex64; 4]> {
        prop::array::uniform8(-1.0f64..1.0).prop_filter_map("nonzero", |v| {
            let z = [
                Complex64::new(v[0], v[1]),
                Complex64::new(v[2], v[3]),
                Complex64::new(v[4], v[5]),
                Complex64::new(v[6], v[7]),
            ];
            let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            (n > 1e-3).then(|| z.map(|c| c / n))
        })
    }

    proptest! {
        #[test]
        fn pure_fidelity_is_overlap_and_symmetric(a in unit_vector(), b in unit_vector()) {
            let ra = pure(a).to_density();
            let rb = pure(b).to_density();
            let overlap: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            let f_ab = fidelity(&ra, &rb);
            prop_assert!((f_ab - fidelity(&rb, &ra)).abs() < 1e-10);
            prop_assert!((f_ab - overlap.norm_sqr()).abs() < 1e-10);
        }

        #[test]
        fn pure_concurrence_matches_closed_form(a in unit_vector()) {
            let psi = pure(a);
            prop_assert!((concurrence(&psi.to_density()) - psi.concurrence()).abs() < 1e-7);
        }

        #[test]
        fn mixed_fidelity_symmetric(a in unit_vector(), b in unit_vector(), p in 0.05f64..0.95) {
            let mix = |x: &DensityMatrix, y: &DensityMatrix| {
                DensityMatrix::new(x.matrix() * Complex64::new(p, 0.0)
                    + y.matrix() * Complex64::new(1.0 - p, 0.0)).unwrap()
            };
            let r1 = mix(&pure(a).to_density(), &DensityMatrix::maximally_mixed());
            let r2 = mix(&DensityMatrix::maximally_mixed(), &pure(b).to_density());
            prop_assert!((fidelity(&r1, &r2) - fidelity(&r2, &r1)).abs() < 1e-10);
        }
    }
}
