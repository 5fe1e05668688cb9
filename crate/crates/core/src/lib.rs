//! Quantum solution of linear differential equations `dx/dt = Mx + b`.
//!
//! The solution is the truncated Taylor series
//! `x(t) ≈ Σ_{m≤k} (Mt)^m x(0)/m! + Σ_{n≤k} M^{n-1} tⁿ b/n!`, realized as a
//! linear combination of unitaries and checked by exact state-vector
//! simulation against classical references.
//!
//! - [`linalg`]: dense complex matrices, eigen/Schur, exponentials.
//! - [`reference`]: classical and truncated solutions, error bounds, order selection.
//! - [`lcu`]: unitary decompositions, coefficient schedules, preparation unitaries.
//! - [`simulator`]: mixed-radix state vectors, controlled gates, postselection.
//! - [`circuits`]: Case I, Case II and 4-qubit experiment circuits.
//! - [`solver`]: method dispatch, reports, fidelity and similarity.
//! - [`io`]: problem files and report output.
//!
//! Numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuits;
pub mod error;
pub mod io;
pub mod lcu;
pub mod linalg;
pub mod reference;
pub mod scalar;
pub mod simulator;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::{Real, C};
pub use solver::{solve, DecompositionChoice, Method, SolveReport};

pub type CMatrix = linalg::ComplexMatrix<f64>;
pub type CVector = linalg::ComplexVector<f64>;
pub type Problem = reference::LdeProblem<f64>;
pub type Decomposition = lcu::LcuDecomposition<f64>;
pub type Schedule = lcu::CoefficientSchedule<f64>;
pub type State = simulator::QuantumState<f64>;
pub type Gate = simulator::GateOp<f64>;
pub type Circuit = circuits::Circuit<f64>;

pub type CMatrix32 = linalg::ComplexMatrix<f32>;
pub type CVector32 = linalg::ComplexVector<f32>;
pub type Problem32 = reference::LdeProblem<f32>;
pub type Circuit32 = circuits::Circuit<f32>;
