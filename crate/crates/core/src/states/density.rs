use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};

/// Basis labels in storage order.
pub const BASIS_LABELS: [&str; 4] = ["++", "+-", "-+", "--"];

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;

/// Pure two-qubit state: coefficients `w[u][v]`, index 0 is `+` and 1 is `−`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    pub w: [[Complex64; 2]; 2],
}

impl TwoQubitState {
    /// Normalizes the given amplitudes.
    pub fn new(w: [[Complex64; 2]; 2]) -> Result<Self> {
        let norm = w.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NullState);
        }
        let inv = 1.0 / norm;
        Ok(Self { w: w.map(|row| row.map(|z| z * inv)) })
    }

    /// Amplitudes in (++, +−, −+, −−) order.
    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.w[0][0], self.w[0][1], self.w[1][0], self.w[1][1]]
    }

    /// `2|w₊₊w₋₋ − w₊₋w₋₊|`.
    pub fn concurrence(&self) -> f64 {
        2.0 * (self.w[0][0] * self.w[1][1] - self.w[0][1] * self.w[1][0]).norm()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = self.amplitudes();
        DensityMatrix(Mat4::from_fn(|r, c| v[r] * v[c].conj()))
    }
}

/// Hermitian, unit-trace 4×4 matrix in the (++, +−, −+, −−) basis.
///
/// Positivity is not enforced; reconstructions may legitimately leave the
/// state space. Use [`DensityMatrix::is_physical`] to check.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    pub fn new(m: Mat4) -> Result<Self> {
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Contract("density matrix has non-finite entries".into()));
        }
        let skew = linalg::max_antihermitian(&m);
        if skew > HERMITICITY_TOL {
            return Err(Error::Contract(format!("matrix is not Hermitian (max |ρ−ρ†| = {skew:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Contract(format!("trace is {tr}, expected 1")));
        }
        Ok(Self(linalg::hermitian_part(&m)))
    }

    /// Hermitian part of `m` rescaled to unit trace.
    pub fn normalized(m: &Mat4) -> Result<Self> {
        let h = linalg::hermitian_part(m);
        let tr = h.trace().re;
        if !(tr.is_finite() && tr.abs() > f64::EPSILON) {
            return Err(Error::ZeroMatrix);
        }
        Ok(Self(h / Complex64::new(tr, 0.0)))
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat4::identity() * Complex64::new(0.25, 0.0))
    }

    pub fn diagonal(p: [f64; 4]) -> Result<Self> {
        let mut m = Mat4::zeros();
        for (i, v) in p.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let v = linalg::eigvalsh(&self.0);
        [v[0], v[1], v[2], v[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.0, &self.0).re
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Largest element-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
