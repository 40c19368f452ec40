use std::cell::RefCell;
use std::rc::Rc;

use argmin::core::{CostFunction, Executor, Gradient, State, TerminationReason};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{count_residual, invert_exact, measurement_matrix, prepare, Method, ReconstructionResult};
use crate::error::{Error, Result};
use crate::geometry::DerivedGeometry;
use crate::linalg::{trace_product, Mat4};
use crate::measurement::{povm_element, CountRecord};
use crate::states::DensityMatrix;

/// Lower bound on expected counts, keeping the log-likelihood finite when a
/// candidate state predicts zero where counts were seen.
pub const LAMBDA_FLOOR: f64 = 1e-9;

/// Weight of `I/4` mixed into the initial state so its Cholesky factor exists.
const INIT_MIXING: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LikelihoodModel {
    #[default]
    Poisson,
    GaussianApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initializer {
    /// Projected linear inversion.
    #[default]
    LinearInversion,
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MleConfig {
    pub max_iterations: u64,
    /// Stopping threshold on the gradient norm of the negative
    /// log-likelihood divided by the total count.
    pub parameter_tolerance: f64,
    pub model: LikelihoodModel,
    pub initializer: Initializer,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            parameter_tolerance: 1e-8,
            model: LikelihoodModel::Poisson,
            initializer: Initializer::LinearInversion,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.parameter_tolerance.is_finite() && self.parameter_tolerance > 0.0) {
            return Err(Error::Contract("mle.parameter_tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Contract("mle.max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Per-setting data for the likelihood: operator, observed counts and the
/// expected-count scale `R0̂·time`.
struct Data {
    ops: Vec<Mat4>,
    observed: Vec<f64>,
    exposure: Vec<f64>,
    model: LikelihoodModel,
}

impl Data {
    fn new(record: &CountRecord, geom: &DerivedGeometry, model: LikelihoodModel) -> Self {
        let r0 = record.r0_estimate();
        let rates = record.rates();
        Self {
            ops: record.entries.iter().map(|e| povm_element(&e.setting, geom).0).collect(),
            observed: record.entries.iter().zip(&rates).map(|(e, r)| r * e.time_s).collect(),
            exposure: record.entries.iter().map(|e| r0 * e.time_s).collect(),
            model,
        }
    }

    /// Expected counts before the floor.
    fn expected(&self, rho: &Mat4) -> impl Iterator<Item = f64> + '_ {
        let rho = *rho;
        self.ops.iter().zip(&self.exposure).map(move |(e, n)| n * trace_product(&rho, e).re)
    }

    fn value(&self, rho: &Mat4) -> f64 {
        self.expected(rho)
            .zip(&self.observed)
            .map(|(raw, &n)| {
                let lambda = raw.max(LAMBDA_FLOOR);
                match self.model {
                    LikelihoodModel::Poisson => n * lambda.ln() - lambda,
                    LikelihoodModel::GaussianApprox => -(lambda - n).powi(2) / (2.0 * lambda),
                }
            })
            .sum()
    }

    /// `∂LL/∂ρ` as a Hermitian matrix.
    fn gradient(&self, rho: &Mat4) -> Mat4 {
        let mut g = Mat4::zeros();
        for ((raw, &n), (e, &scale)) in self.expected(rho).zip(&self.observed).zip(self.ops.iter().zip(&self.exposure))
        {
            if raw <= LAMBDA_FLOOR {
                continue;
            }
            let d = match self.model {
                LikelihoodModel::Poisson => n / raw - 1.0,
                LikelihoodModel::GaussianApprox => (n * n - raw * raw) / (2.0 * raw * raw),
            };
            g += e * Complex64::new(d * scale, 0.0);
        }
        g
    }
}

/// Log-likelihood of `rho` given the record, with `R0̂` from the slit pairs.
pub fn log_likelihood(
    rho: &DensityMatrix,
    record: &CountRecord,
    geom: &DerivedGeometry,
    model: LikelihoodModel,
) -> Result<f64> {
    let record = prepare(record)?;
    Ok(Data::new(&record, geom, model).value(rho.matrix()))
}

/// Lower-triangular `T` from 16 reals: four diagonal entries, then
/// `(re, im)` pairs for `i > j` in row order.
fn t_from_params(p: &[f64]) -> Mat4 {
    let mut t = Mat4::zeros();
    for i in 0..4 {
        t[(i, i)] = Complex64::new(p[i], 0.0);
    }
    let mut k = 4;
    for i in 1..4 {
        for j in 0..i {
            t[(i, j)] = Complex64::new(p[k], p[k + 1]);
            k += 2;
        }
    }
    t
}

fn params_from_t(t: &Mat4) -> Vec<f64> {
    let mut p: Vec<f64> = (0..4).map(|i| t[(i, i)].re).collect();
    for i in 1..4 {
        for j in 0..i {
            p.extend([t[(i, j)].re, t[(i, j)].im]);
        }
    }
    p
}

/// `ρ = T†T / Tr(T†T)` and the trace.
fn rho_from_t(t: &Mat4) -> (Mat4, f64) {
    let a = t.adjoint() * t;
    let tau = a.trace().re;
    (a / Complex64::new(tau, 0.0), tau)
}

/// Lower-triangular `T` with `T†T = ρ`, for positive-definite `ρ`.
fn t_from_rho(rho: &Mat4) -> Option<Mat4> {
    // Cholesky gives ρ = C C† with C lower; reversing the basis turns that
    // into ρ = U U† with U upper, and T = U†.
    let j = Mat4::from_fn(|r, c| if r + c == 3 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let c = (j * rho * j).cholesky()?.l();
    Some((j * c * j).adjoint())
}

#[derive(Default)]
struct Best {
    cost: f64,
    params: Vec<f64>,
    gradient_evaluations: u64,
}

struct NegLogLikelihood {
    data: Data,
    norm: f64,
    best: Rc<RefCell<Best>>,
}

impl NegLogLikelihood {
    fn cost_at(&self, p: &[f64]) -> f64 {
        let (rho, _) = rho_from_t(&t_from_params(p));
        -self.data.value(&rho) / self.norm
    }
}

impl CostFunction for NegLogLikelihood {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let c = self.cost_at(p);
        let mut best = self.best.borrow_mut();
        if c.is_finite() && (c < best.cost || best.params.is_empty()) {
            best.cost = c;
            best.params.clone_from(p);
        }
        Ok(if c.is_finite() { c } else { f64::MAX })
    }
}

impl Gradient for NegLogLikelihood {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Self::Param) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        self.best.borrow_mut().gradient_evaluations += 1;
        let t = t_from_params(p);
        let (rho, tau) = rho_from_t(&t);
        let g = self.data.gradient(&rho);
        let h = (g - Mat4::identity() * trace_product(&g, &rho)) / Complex64::new(tau, 0.0);
        let m = h * t.adjoint();
        let mut out: Vec<f64> = (0..4).map(|i| 2.0 * m[(i, i)].re).collect();
        for i in 1..4 {
            for j in 0..i {
                out.extend([2.0 * m[(j, i)].re, -2.0 * m[(j, i)].im]);
            }
        }
        Ok(out.into_iter().map(|v| -v / self.norm).collect())
    }
}

/// Maximum-likelihood reconstruction over `ρ = T†T / Tr(T†T)`.
///
/// Uses BFGS with a Moré–Thuente line search. If the optimizer stops early
/// or fails, the best state seen is returned with `converged = false`.
pub fn mle(record: &CountRecord, geom: &DerivedGeometry, cfg: &MleConfig) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let record = prepare(record)?;
    let start = match cfg.initializer {
        Initializer::LinearInversion => invert_exact(&record, geom, true)?.rho_hat,
        Initializer::MaximallyMixed => DensityMatrix::maximally_mixed(),
    };
    let mixed = start.matrix() * Complex64::new(1.0 - INIT_MIXING, 0.0)
        + Mat4::identity() * Complex64::new(0.25 * INIT_MIXING, 0.0);
    let t0 = t_from_rho(&mixed).ok_or_else(|| Error::Contract("initial state is not positive definite".into()))?;
    let p0 = params_from_t(&t0);

    let data = Data::new(&record, geom, cfg.model);
    let norm = data.observed.iter().sum::<f64>().max(1.0);
    let best = Rc::new(RefCell::new(Best::default()));
    let problem = NegLogLikelihood { data, norm, best: Rc::clone(&best) };
    let start_cost = problem.cost_at(&p0);
    *best.borrow_mut() = Best { cost: start_cost, params: p0.clone(), gradient_evaluations: 0 };

    let identity: Vec<Vec<f64>> = (0..16).map(|i| (0..16).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let solver = BFGS::new(MoreThuenteLineSearch::new())
        .with_tolerance_grad(cfg.parameter_tolerance)
        .and_then(|s| s.with_tolerance_cost(0.0))
        .map_err(|e| Error::Contract(e.to_string()))?;
    let outcome = Executor::new(problem, solver)
        .configure(|s| s.param(p0).inv_hessian(identity).max_iters(cfg.max_iterations))
        .run();

    let (params, converged, iterations) = match outcome {
        Ok(res) => {
            let state = res.state();
            let converged = matches!(state.get_termination_reason(), Some(TerminationReason::SolverConverged));
            let params = state.get_best_param().cloned().unwrap_or_else(|| best.borrow().params.clone());
            (params, converged, state.get_iter())
        }
        Err(_) => {
            let b = best.borrow();
            (b.params.clone(), false, b.gradient_evaluations)
        }
    };

    let (rho, _) = rho_from_t(&t_from_params(&params));
    let rho_hat = DensityMatrix::normalized(&rho)?;
    let full = Data::new(&record, geom, cfg.model);
    Ok(ReconstructionResult {
        log_likelihood: Some(full.value(rho_hat.matrix())),
        residual: count_residual(&rho_hat, &record, geom),
        rho_hat,
        method: Method::Mle,
        physical_projection_applied: false,
        condition_number: measurement_matrix(&record.settings(), geom)
            .map(|m| m.condition_number)
            .unwrap_or(f64::INFINITY),
        converged: Some(converged),
        iterations: Some(iterations),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::measurement::{simulate_counts, standard_settings};
    use crate::states::{build_state, fidelity, random_mixed_state, trace_distance, PumpProfile};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> DerivedGeometry {
        Geometry::reference().derive().unwrap()
    }

    fn bell(g: &DerivedGeometry) -> DensityMatrix {
        build_state(&PumpProfile::OddMode { waist: 1e-3 }, g).unwrap().to_density()
    }

    #[test]
    fn parameter_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_mixed_state(&mut rng);
        let t = t_from_rho(rho.matrix()).unwrap();
        assert!((0..4).all(|i| (0..4).all(|j| j <= i || t[(i, j)].norm() == 0.0)));
        let (back, _) = rho_from_t(&t_from_params(&params_from_t(&t)));
        assert!((back - rho.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let g = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let truth = random_mixed_state(&mut rng);
        let rec = simulate_counts(&truth, &standard_settings(&g), &g, 1e3, 10.0, 5, false).unwrap();
        let rec = prepare(&rec).unwrap();
        for model in [LikelihoodModel::Poisson, LikelihoodModel::GaussianApprox] {
            let problem = NegLogLikelihood {
                data: Data::new(&rec, &g, model),
                norm: 1.0,
                best: Rc::default(),
            };
            let p = params_from_t(&t_from_rho(random_mixed_state(&mut rng).matrix()).unwrap());
            let grad = problem.gradient(&p).unwrap();
            for k in 0..16 {
                let h = 1e-6;
                let (mut up, mut down) = (p.clone(), p.clone());
                up[k] += h;
                down[k] -= h;
                let fd = (problem.cost_at(&up) - problem.cost_at(&down)) / (2.0 * h);
                assert!((fd - grad[k]).abs() < 1e-4 * (1.0 + fd.abs()), "{model:?} param {k}: {fd} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn truth_beats_alternatives_on_its_own_record() {
        let g = reference();
        let truth = bell(&g);
        let rec = simulate_counts(&truth, &standard_settings(&g), &g, 1e3, 10.0, 0, true).unwrap();
        let orthogonal = DensityMatrix::diagonal([0.0, 1.0, 0.0, 0.0]).unwrap();
        let ll = |rho: &DensityMatrix| log_likelihood(rho, &rec, &g, LikelihoodModel::Poisson).unwrap();
        assert!(ll(&truth) > ll(&DensityMatrix::maximally_mixed()));
        assert!(ll(&truth) > ll(&orthogonal));
        assert!(ll(&orthogonal).is_finite());
    }

    #[test]
    fn rescaling_times_leaves_likelihood_unchanged() {
        let g = reference();
        let truth = bell(&g);
        let rec = simulate_counts(&truth, &standard_settings(&g), &g, 1e3, 10.0, 9, false).unwrap();
        let mut slow = rec.clone();
        for e in &mut slow.entries {
            e.time_s *= 3.5;
        }
        let rho = DensityMatrix::maximally_mixed();
        let (a, b) = (
            log_likelihood(&rho, &rec, &g, LikelihoodModel::Poisson).unwrap(),
            log_likelihood(&rho, &slow, &g, LikelihoodModel::Poisson).unwrap(),
        );
        assert!((a - b).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn noiseless_bell_converges() {
        let g = reference();
        let truth = bell(&g);
        let rec = simulate_counts(&truth, &standard_settings(&g), &g, 1e4, 10.0, 0, true).unwrap();
        let res = mle(&rec, &g, &MleConfig::default()).unwrap();
        assert!(fidelity(&res.rho_hat, &truth) >= 0.999, "{}", fidelity(&res.rho_hat, &truth));
        assert!(res.rho_hat.is_physical());
        assert_eq!(res.method, Method::Mle);
    }

    #[test]
    fn mixed_record_from_uniform_start() {
        let g = reference();
        let truth = DensityMatrix::maximally_mixed();
        // 10⁵ expected counts per setting: R0·time = 4·10⁵
        let rec = simulate_counts(&truth, &standard_settings(&g), &g, 4e4, 10.0, 11, false).unwrap();
        let cfg = MleConfig { initializer: Initializer::MaximallyMixed, ..Default::default() };
        let res = mle(&rec, &g, &cfg).unwrap();
        assert!(trace_distance(&res.rho_hat, &truth) <= 0.05);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = MleConfig { parameter_tolerance: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn row_order_does_not_matter(seed in any::<u64>(), shift in 1usize..16) {
            let g = reference();
            let truth = bell(&g);
            let rec = simulate_counts(&truth, &standard_settings(&g), &g, 1e3, 10.0, seed, false).unwrap();
            let mut rotated = rec.clone();
            rotated.entries.rotate_left(shift);
            let cfg = MleConfig::default();
            let (a, b) = (mle(&rec, &g, &cfg).unwrap(), mle(&rotated, &g, &cfg).unwrap());
            prop_assert_eq!(a.rho_hat, b.rho_hat);
        }
    }
}
