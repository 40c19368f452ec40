//! Simulation and tomographic reconstruction of two-photon spatial qubits.
//!
//! Twin photons from down-conversion pass a pair of double slits; which slit
//! each photon crosses is a qubit. This crate builds that two-qubit state from
//! the pump profile, models the sixteen coincidence measurements obtained by
//! detecting the photons either at the slits or behind detection slits in the
//! far field, and reconstructs the density matrix by linear inversion, by
//! closed-form relations, or by maximum likelihood.
//!
//! Modules, bottom up:
//!
//! * [`geometry`] for lengths and derived optical parameters
//! * [`states`] for pump profiles, pure states, density matrices, metrics
//! * [`propagation`] for far-field post-selection amplitudes and their integral oracle
//! * [`measurement`] for the sixteen settings, their operators, and count simulation
//! * [`tomography`] for reconstruction
//! * [`io`] for JSON/CSV file formats

pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod propagation;
pub mod quadrature;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use geometry::{DerivedGeometry, Geometry, Optics};
pub use measurement::{Arm, CountRecord, MeasurementSetting, SincModel};
pub use states::{DensityMatrix, PumpProfile, TwoQubitState};
pub use tomography::{Method, MleConfig, ReconstructionResult};
