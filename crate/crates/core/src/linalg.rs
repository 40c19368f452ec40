//! Small dense helpers over 4×4 complex matrices.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues below this fraction of the largest are treated as round-off.
pub const EIGEN_CLIP: f64 = 1e-14;

pub fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn max_antihermitian(m: &Mat4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &Mat4) -> (Vector4<f64>, Mat4) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = Vector4::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let vectors = Mat4::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigvalsh(m: &Mat4) -> Vector4<f64> {
    eigh(m).0
}

/// Rebuilds `V·diag(f(λ))·V†` after clipping negative and round-off eigenvalues.
pub fn psd_function(m: &Mat4, f: impl Fn(f64) -> f64) -> Mat4 {
    let (values, vectors) = eigh(m);
    let cutoff = EIGEN_CLIP * values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let diag = Vector4::from_fn(|i, _| {
        let v = values[i];
        Complex64::new(if v > cutoff { f(v) } else { 0.0 }, 0.0)
    });
    vectors * Mat4::from_diagonal(&diag) * vectors.adjoint()
}

pub fn sqrt_psd(m: &Mat4) -> Mat4 {
    psd_function(m, f64::sqrt)
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

pub fn trace_product(a: &Mat4, b: &Mat4) -> Complex64 {
    let mut t = ZERO;
    for i in 0..4 {
        for k in 0..4 {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [Mat2; 4] {
    [
        Mat2::new(ONE, ZERO, ZERO, ONE),
        Mat2::new(ZERO, ONE, ONE, ZERO),
        Mat2::new(ZERO, -I, I, ZERO),
        Mat2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// Two-qubit Pauli products `σ_a ⊗ σ_b` in row-major `(a, b)` order.
pub fn pauli_basis() -> Vec<Mat4> {
    let p = paulis();
    let mut out = Vec::with_capacity(16);
    for a in &p {
        for b in &p {
            out.push(kron2(a, b));
        }
    }
    out
}
