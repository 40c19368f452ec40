//! Far-field propagation and post-selection by detection slits.
//!
//! A photon leaving the slit at `±s` reaches a detection slit centred at `x`
//! with amplitude
//!
//! ```text
//! r±(x) = sinc((x ∓ s)·a / 2α) · exp(i (x ∓ s)² / 4α)
//! ```
//!
//! so a detection slit projects onto the (unnormalized) qubit direction
//! `(r₊, r₋)`. These amplitudes are the stationary-phase limit of the
//! momentum-space overlap integral `I±`; [`i_integral_quadrature`] evaluates
//! that integral directly and serves as the independent check of the
//! closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{DerivedGeometry, Optics};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::states::TwoQubitState;

/// Which source slit: `+` is the slit at `+s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Position in the (+, −) basis.
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// How the diffraction envelope enters the post-selection amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SincModel {
    /// Full `sinc` magnitudes.
    #[default]
    Exact,
    /// Magnitudes forced to 1, keeping only the Fresnel phases.
    UnitModulus,
}

/// Unnormalized `sin(u)/u`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

pub fn r_coeff(x: f64, sign: Sign, geom: &DerivedGeometry) -> Complex64 {
    r_coeff_with(x, sign, &geom.optics(), SincModel::Exact)
}

pub fn r_coeff_with(x: f64, sign: Sign, optics: &Optics, model: SincModel) -> Complex64 {
    let d = x - sign.value() * optics.s;
    let modulus = match model {
        SincModel::Exact => sinc(d * optics.a / (2.0 * optics.alpha)),
        SincModel::UnitModulus => 1.0,
    };
    Complex64::from_polar(modulus, d * d / (4.0 * optics.alpha))
}

/// Post-selection amplitudes of one detection slit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionVector {
    pub x: f64,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    /// `(|r₊|² + |r₋|²) / 2`.
    pub weight: f64,
}

impl DetectionVector {
    pub fn new(x: f64, optics: &Optics, model: SincModel) -> Self {
        let r_plus = r_coeff_with(x, Sign::Plus, optics, model);
        let r_minus = r_coeff_with(x, Sign::Minus, optics, model);
        let weight = 0.5 * (r_plus.norm_sqr() + r_minus.norm_sqr());
        Self { x, r_plus, r_minus, weight }
    }

    pub fn get(&self, sign: Sign) -> Complex64 {
        match sign {
            Sign::Plus => self.r_plus,
            Sign::Minus => self.r_minus,
        }
    }

    /// `arg(r₊ r₋*)`.
    pub fn relative_phase(&self) -> f64 {
        (self.r_plus * self.r_minus.conj()).arg()
    }
}

pub fn detection_vector(x: f64, geom: &DerivedGeometry) -> DetectionVector {
    DetectionVector::new(x, &geom.optics(), SincModel::Exact)
}

/// Coefficient of `|f(x_s)⟩|f(x_i)⟩` after both photons pass detection slits.
pub fn b_coeffs(psi: &TwoQubitState, x_s: f64, x_i: f64, geom: &DerivedGeometry) -> Complex64 {
    let (vs, vi) = (detection_vector(x_s, geom), detection_vector(x_i, geom));
    let mut b = Complex64::new(0.0, 0.0);
    for u in Sign::BOTH {
        for v in Sign::BOTH {
            b += vs.get(u) * vi.get(v) * psi.w[u.index()][v.index()];
        }
    }
    b
}

/// Stationary-phase closed form of `I±(x, q)`, without the Gaussian
/// prefactor [`stationary_phase_scale`]:
///
/// `e^{−iqx} · e^{i(x±s)²/4α} · sinc((x±s)a/2α) · sinc((x/2α − q)·b)`.
///
/// The last factor is the detection-slit envelope centred on the local
/// wavevector `x/2α`; the `±s` shift inside it is dropped, which costs
/// accuracy of order `s·b/2α`.
pub fn i_integral_closed(x: f64, sign: Sign, q: f64, optics: &Optics) -> Complex64 {
    let d = x + sign.value() * optics.s;
    let alpha = optics.alpha;
    Complex64::from_polar(1.0, -q * x)
        * Complex64::from_polar(sinc(d * optics.a / (2.0 * alpha)), d * d / (4.0 * alpha))
        * sinc((x / (2.0 * alpha) - q) * optics.b)
}

/// `√(π/α)·e^{−iπ/4}`, the value of `∫ e^{−iαq²} dq`.
pub fn stationary_phase_scale(optics: &Optics) -> Complex64 {
    Complex64::from_polar((PI / optics.alpha).sqrt(), -PI / 4.0)
}

/// Rigorous bound on `|∫_Q^∞ g e^{iφ}|` for the `I±` integrand, from one
/// integration by parts. Valid for `Q ≥ max(2|q|, |x ± s|/α)`.
fn i_tail_bound(optics: &Optics, q_max: f64) -> f64 {
    let Optics { alpha, a, b, .. } = *optics;
    let by_parts = (1.0 / a + 1.0 / b) / (alpha * q_max * q_max) + (16.0 / 3.0) / (a * b * alpha * q_max.powi(3));
    let plain = 2.0 / (a * b * q_max);
    by_parts.min(plain)
}

/// Evaluates
///
/// `I±(x, q) = ∫ e^{−iαq'²} e^{±iq's} e^{i(q'−q)x} sinc(q'a) sinc((q'−q)b) dq'`
///
/// numerically. `tol` is relative to [`stationary_phase_scale`]; half of it
/// is spent on truncating the tails and half on the interior.
pub fn i_integral_quadrature(x: f64, sign: Sign, q: f64, optics: &Optics, tol: f64) -> Result<Complex64> {
    i_integral_quadrature_budget(x, sign, q, optics, tol, 50_000_000)
}

pub fn i_integral_quadrature_budget(
    x: f64,
    sign: Sign,
    q: f64,
    optics: &Optics,
    tol: f64,
    max_nodes: usize,
) -> Result<Complex64> {
    let Optics { alpha, s, a, b } = *optics;
    let shift = x + sign.value() * s;
    let abs_tol = tol * stationary_phase_scale(optics).norm();
    let mut q_max = (2.0 * q.abs()).max(shift.abs() / alpha).max(1.0 / a.min(b));
    while 2.0 * i_tail_bound(optics, q_max) > 0.5 * abs_tol {
        q_max *= 1.25;
    }
    let integrand = |qp: f64| {
        let phase = -alpha * qp * qp + qp * shift - q * x;
        Complex64::from_polar(sinc(qp * a) * sinc((qp - q) * b), phase)
    };
    let frequency = |qp: f64| (2.0 * alpha * qp - shift).abs() + a + b;
    let opts = QuadratureOptions { abs_tol: 0.5 * abs_tol, max_nodes };
    integrate(integrand, -q_max, q_max, frequency, &opts)
}

/// `⟨f(x)|f(x')⟩` for the post-selected single-photon states
///
/// `|f(x)⟩ = √(b/π) ∫ e^{−iqx} sinc((q − x/2α)·b) |q⟩ dq`,
///
/// computed by quadrature to absolute accuracy `tol`.
pub fn f_state_overlap(x: f64, x_prime: f64, optics: &Optics, tol: f64) -> Result<Complex64> {
    let Optics { alpha, b, .. } = *optics;
    let (c1, c2) = (x / (2.0 * alpha), x_prime / (2.0 * alpha));
    let dx = (x - x_prime).abs();
    let norm = b / PI;
    // per-side tail bounds, valid for Q ≥ 2·max(|c1|, |c2|)
    let tail = |q_max: f64| {
        let plain = 4.0 / (b * b * q_max);
        if dx > 0.0 {
            let by_parts = (4.0 / (b * b * q_max * q_max) + 8.0 / (b * q_max) + 8.0 / (b * b * q_max * q_max)) / dx;
            plain.min(by_parts)
        } else {
            plain
        }
    };
    let mut q_max = 2.0 * c1.abs().max(c2.abs()) + 1.0 / b;
    while 2.0 * norm * tail(q_max) > 0.5 * tol {
        q_max *= 1.25;
    }
    let integrand = |q: f64| {
        Complex64::from_polar(sinc((q - c1) * b) * sinc((q - c2) * b), q * (x - x_prime))
    };
    let opts = QuadratureOptions { abs_tol: 0.5 * tol / norm, max_nodes: 50_000_000 };
    Ok(integrate(integrand, -q_max, q_max, |_| dx + 2.0 * b, &opts)? * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::states::{build_state, PumpProfile};
    use proptest::prelude::*;

    fn reference() -> DerivedGeometry {
        Geometry::reference().derive().unwrap()
    }

    #[test]
    fn r_at_origin_by_hand() {
        // sa/2α = 0.0792 → sinc = 0.99895; s²/4α = 0.19804 rad
        let g = reference();
        let (rp, rm) = (r_coeff(0.0, Sign::Plus, &g), r_coeff(0.0, Sign::Minus, &g));
        assert_eq!(rp, rm);
        assert!((rp.norm() - 0.9990).abs() < 1e-3);
        assert!((rp.arg() - 0.1980).abs() < 1e-3);
    }

    #[test]
    fn quarter_phase_at_x1() {
        let g = reference();
        let v = detection_vector(g.x1, &g);
        assert!((v.relative_phase() + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_modulus_at_own_slit() {
        let g = reference();
        let s = g.geometry.s;
        assert_eq!(r_coeff(s, Sign::Plus, &g).norm(), 1.0);
        assert_eq!(r_coeff(-s, Sign::Minus, &g).norm(), 1.0);
    }

    #[test]
    fn balanced_at_origin_and_decays_far_out() {
        let g = reference();
        let v = detection_vector(0.0, &g);
        assert_eq!(v.r_plus, v.r_minus);
        let far = g.geometry.s + 2.0 * g.alpha * PI / g.geometry.a;
        let w: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|k| detection_vector(k * far, &g).weight).collect();
        assert!(w[0] < 0.05 && w[1] < 1e-3 && w[2] < 1e-5, "{w:?}");
    }

    #[test]
    fn single_term_b_coefficient() {
        let g = reference();
        let psi = TwoQubitState::new([[0.0.into(), 1.0.into()], [0.0.into(), 0.0.into()]]).unwrap();
        let (xs, xi) = (0.1e-3, -0.3e-3);
        let expected = r_coeff(xs, Sign::Plus, &g) * r_coeff(xi, Sign::Minus, &g);
        assert!((b_coeffs(&psi, xs, xi, &g) - expected).norm() < 1e-15);
    }

    #[test]
    fn bell_b_vanishes_at_origin() {
        let g = reference();
        let psi = build_state(&PumpProfile::OddMode { waist: 1e-3 }, &g).unwrap();
        assert!(b_coeffs(&psi, 0.0, 0.0, &g).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_b_against_quadrature() {
        // B(0,0) via the I± oracle: r_u(x) ↔ I_{−u}(x, 0)/scale, and the
        // detection envelope sinc(x·b/2α) is 1 at x = 0.
        let g = reference();
        let o = g.optics();
        let psi = build_state(&PumpProfile::PlaneWave, &g).unwrap();
        let scale = stationary_phase_scale(&o);
        let tilde = |u: Sign| {
            let opposite = if u == Sign::Plus { Sign::Minus } else { Sign::Plus };
            i_integral_quadrature(0.0, opposite, 0.0, &o, 1e-4).unwrap() / scale
        };
        let mut b_quad = Complex64::new(0.0, 0.0);
        for u in Sign::BOTH {
            for v in Sign::BOTH {
                b_quad += tilde(u) * tilde(v) * psi.w[u.index()][v.index()];
            }
        }
        let direct = b_coeffs(&psi, 0.0, 0.0, &g).norm_sqr();
        let rel = (b_quad.norm_sqr() - direct).abs() / direct;
        assert!(rel < 0.01, "|B|² direct {direct}, quadrature {}", b_quad.norm_sqr());
    }

    #[test]
    fn closed_form_reduces_to_r_at_origin() {
        let o = reference().optics();
        for sign in Sign::BOTH {
            let expected = Complex64::from_polar(sinc(o.s * o.a / (2.0 * o.alpha)), o.s * o.s / (4.0 * o.alpha));
            assert!((i_integral_closed(0.0, sign, 0.0, &o) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_zero_of_detection_envelope() {
        let o = reference().optics();
        assert!(i_integral_closed(0.0, Sign::Plus, PI / o.b, &o).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature_at_x1() {
        let g = reference();
        let o = g.optics();
        for sign in Sign::BOTH {
            let quad = i_integral_quadrature(g.x1, sign, 0.0, &o, 1e-4).unwrap();
            let closed = i_integral_closed(g.x1, sign, 0.0, &o) * stationary_phase_scale(&o);
            assert!((closed - quad).norm() / quad.norm() < 0.05);
        }
    }

    #[test]
    fn symmetric_integrand_without_offset() {
        // s = 0, x = 0, q = 0, a = b: both signs coincide, and once the chirp
        // is negligible over the sinc² window the value is real, ≈ π/a.
        let o = Optics { alpha: 7.9e-8, s: 0.0, a: 5e-5, b: 5e-5 };
        let p = i_integral_quadrature(0.0, Sign::Plus, 0.0, &o, 1e-4).unwrap();
        let m = i_integral_quadrature(0.0, Sign::Minus, 0.0, &o, 1e-4).unwrap();
        assert!((p - m).norm() < 1e-9 * p.norm());
        // the chirp shifts the value by roughly √α/a relative
        let flat = Optics { alpha: 1e-16, ..o };
        let v = i_integral_quadrature(0.0, Sign::Plus, 0.0, &flat, 1e-9).unwrap();
        let expected = PI / o.a;
        assert!((v - expected).norm() < 1e-3 * expected, "{v} vs {expected}");
    }

    #[test]
    fn tiny_budget_reports_non_convergence() {
        let o = reference().optics();
        let err = i_integral_quadrature_budget(0.0, Sign::Plus, 0.0, &o, 1e-4, 1000).unwrap_err();
        assert!(matches!(err, crate::Error::Quadrature { .. }));
    }

    #[test]
    fn f_states_normalized_and_orthogonal() {
        let g = reference();
        let o = g.optics();
        let n0 = f_state_overlap(0.0, 0.0, &o, 1e-4).unwrap();
        assert!((n0 - 1.0).norm() < 1e-3, "{n0}");
        let n1 = f_state_overlap(g.x1, g.x1, &o, 1e-4).unwrap();
        assert!((n1 - 1.0).norm() < 1e-3, "{n1}");
        let ov = f_state_overlap(0.0, g.x1, &o, 1e-4).unwrap();
        assert!(ov.norm() <= 1e-3, "{ov}");
    }

    proptest! {
        #[test]
        fn quarter_phase_for_any_geometry(
            s_mm in 0.1f64..1.0, a_frac in 0.05f64..1.0, dz in 100.0f64..2000.0, lambda in 300.0f64..900.0
        ) {
            let geom = Geometry::from_lab_units(lambda, 200.0, dz, s_mm, s_mm * a_frac, s_mm * a_frac, None);
            let d = geom.derive();
            prop_assume!(d.is_ok());
            let d = d.unwrap();
            let ideal = DetectionVector::new(d.x1, &d.optics(), SincModel::UnitModulus);
            prop_assert!((ideal.relative_phase() + PI / 2.0).abs() < 1e-12);
            // a negative sinc lobe flips the sign, so only mod π in general
            let v = detection_vector(d.x1, &d);
            let folded = (v.relative_phase() + PI / 2.0).rem_euclid(PI);
            prop_assert!(folded.min(PI - folded) < 1e-12);
        }

        #[test]
        fn mirrored_offset_swaps_signs(x in -2e-3f64..2e-3) {
            let o = reference().optics();
            let mirrored = Optics { s: -o.s, ..o };
            for model in [SincModel::Exact, SincModel::UnitModulus] {
                prop_assert_eq!(
                    r_coeff_with(x, Sign::Plus, &mirrored, model),
                    r_coeff_with(x, Sign::Minus, &o, model)
                );
            }
        }
    }
}
