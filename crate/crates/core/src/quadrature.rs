//! Adaptive Gauss–Kronrod integration of oscillatory complex integrands.
//!
//! The interval is first cut into panels no wider than half a local period
//! of the integrand, then each panel is integrated with the 7/15-point
//! Gauss–Kronrod pair and bisected until its error estimate fits its share
//! of the tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute error target for the whole interval.
    pub abs_tol: f64,
    /// Integrand evaluation budget.
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_nodes: 20_000_000 }
    }
}

fn gauss_kronrod<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> (Complex64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

struct Adaptive<'a, F> {
    f: &'a F,
    nodes: usize,
    budget: usize,
    total: Complex64,
}

impl<F: Fn(f64) -> Complex64> Adaptive<'_, F> {
    fn panel(&mut self, lo: f64, hi: f64, tol: f64, depth: u32) -> bool {
        if self.nodes + 15 > self.budget {
            return false;
        }
        self.nodes += 15;
        let (value, err) = gauss_kronrod(self.f, lo, hi);
        if err <= tol || depth >= MAX_DEPTH {
            self.total += value;
            return true;
        }
        let mid = 0.5 * (lo + hi);
        self.panel(lo, mid, 0.5 * tol, depth + 1) && self.panel(mid, hi, 0.5 * tol, depth + 1)
    }
}

/// Integrates `f` over `[lo, hi]`.
///
/// `frequency(q)` bounds the local angular frequency of `f` near `q` and
/// sets the initial panel width to `π / frequency`.
pub fn integrate<F, W>(f: F, lo: f64, hi: f64, frequency: W, opts: &QuadratureOptions) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    W: Fn(f64) -> f64,
{
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let span = hi - lo;
    let mut state = Adaptive { f: &f, nodes: 0, budget: opts.max_nodes, total: Complex64::new(0.0, 0.0) };
    let mut q = lo;
    while q < hi {
        let guess = std::f64::consts::PI / frequency(q).max(f64::MIN_POSITIVE);
        let w = frequency(q).max(frequency((q + guess).min(hi)));
        let step = (std::f64::consts::PI / w.max(f64::MIN_POSITIVE)).min(hi - q);
        let next = if hi - (q + step) < 1e-12 * span { hi } else { q + step };
        let tol = opts.abs_tol * (next - q) / span;
        if !state.panel(q, next, tol, 0) {
            return Err(Error::Quadrature { re: state.total.re, im: state.total.im, nodes: state.nodes });
        }
        q = next;
    }
    Ok(state.total)
}
