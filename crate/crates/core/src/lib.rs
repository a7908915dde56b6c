//! Simulation and verification toolkit for a one-step collective entangling
//! protocol between two atomic ensembles held in fiber-coupled cavities.
//!
//! The crate is organized around the pipeline of the protocol:
//!
//! * [`hilbert`] — tensor-product layouts, Dicke/boson operators, sparse
//!   operator algebra;
//! * [`model`] — physical parameters, Hamiltonian builders at every level of
//!   the approximation chain, derived constants and regime diagnostics;
//! * [`propagator`] — coherent dynamics: direct integration, the closed-form
//!   displaced-phase propagator, the ideal entangling gate and protocol
//!   timing;
//! * [`dissipative`] — open-system dynamics: density-matrix integration and
//!   seeded quantum-jump trajectory ensembles;
//! * [`analysis`] — partial trace, fidelity, target states and the standard
//!   observable set.
//!
//! All numerics are generic over the real scalar type through
//! [`scalar::Scalar`]; `f64` aliases for the main types live at the crate
//! root.

pub mod analysis;
pub mod dissipative;
pub mod hilbert;
pub mod model;
pub mod numeric;
pub mod propagator;
pub mod scalar;

pub use scalar::{Scalar, C};

/// `f64` aliases for the main types.
pub type StateVector64 = hilbert::StateVector<f64>;
pub type DensityMatrix64 = hilbert::DensityMatrix<f64>;
pub type SparseOperator64 = hilbert::SparseOperator<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type DerivedConstants64 = model::DerivedConstants<f64>;
