use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;
use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use super::{DensityMatrix, TwoQubitState};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state(rng: &mut impl Rng) -> TwoQubitState {
    loop {
        let w = [[gaussian(rng), gaussian(rng)], [gaussian(rng), gaussian(rng)]];
        if let Ok(psi) = TwoQubitState::new(w) {
            return psi;
        }
    }
}

/// Ginibre-ensemble mixed state `G G† / Tr(G G†)`; full rank with
/// probability one.
pub fn random_mixed_state(rng: &mut impl Rng) -> DensityMatrix {
    let g: Matrix4<Complex64> = SMatrix::from_fn(|_, _| gaussian(rng));
    DensityMatrix::normalized(&(g * g.adjoint())).expect("Ginibre matrix is nonzero")
}
