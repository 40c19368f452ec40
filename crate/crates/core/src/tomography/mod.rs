//! Reconstruction of the two-qubit density matrix from coincidence counts.
//!
//! Three estimators share one forward model ([`crate::measurement`]):
//!
//! * [`invert_exact`]: least squares on the Pauli coordinates of `ρ`,
//!   using the exact post-selection amplitudes;
//! * [`invert_paper`]: closed-form expressions valid when `|r±| = 1`;
//! * [`mle`]: Poisson (or Gaussian) maximum likelihood over physical states.
//!
//! Every estimator sorts the record by setting id first, so results do not
//! depend on the order of the rows.

mod closed_form;
mod linear;
mod mle;

pub use closed_form::invert_paper;
pub use linear::{invert_exact, measurement_matrix, MeasurementMatrix};
pub use mle::{log_likelihood, mle, Initializer, LikelihoodModel, MleConfig, LAMBDA_FLOOR};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::DerivedGeometry;
use crate::linalg::trace_product;
use crate::measurement::{povm_element, CountRecord};
use crate::states::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactLinear,
    PaperForm,
    Mle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactLinear => "exact-linear",
            Method::PaperForm => "paper-form",
            Method::Mle => "mle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "exact-linear" => Ok(Method::ExactLinear),
            "paper" | "paper-form" => Ok(Method::PaperForm),
            "mle" => Ok(Method::Mle),
            other => Err(format!("unknown method '{other}' (expected exact, paper or mle)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho_hat: DensityMatrix,
    pub method: Method,
    /// Euclidean norm of predicted minus observed counts.
    pub residual: f64,
    pub physical_projection_applied: bool,
    /// Condition number of the measurement matrix for the record's settings.
    pub condition_number: f64,
    pub log_likelihood: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: Option<u64>,
}

/// Observed and predicted counts per entry, using `R0̂` from the record.
pub(crate) fn count_residual(rho: &DensityMatrix, record: &CountRecord, geom: &DerivedGeometry) -> f64 {
    let r0 = record.r0_estimate();
    record
        .entries
        .iter()
        .zip(record.rates())
        .map(|(e, rate)| {
            let (op, _) = povm_element(&e.setting, geom);
            let predicted = r0 * e.time_s * trace_product(rho.matrix(), &op).re;
            (predicted - rate * e.time_s).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Validates and sorts by id.
pub(crate) fn prepare(record: &CountRecord) -> crate::Result<CountRecord> {
    record.validate()?;
    let sorted = record.sorted_by_id();
    let r0 = sorted.r0_estimate();
    if r0.is_nan() || r0 <= 0.0 {
        return Err(crate::Error::IncompleteRecord("no counts in the slit-pair settings".into()));
    }
    Ok(sorted)
}
