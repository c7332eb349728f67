//! Trapped-ion noise characterization and coherent-error mitigation at desk
//! scale.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`], [`pauli`], [`density`]: dense complex matrices and a 1–2
//!   qubit density-matrix simulator.
//! - [`gates`]: ideal and noisy native trapped-ion gates, the Mølmer–Sørensen
//!   noise channel, and hidden-inverse decompositions of H and CNOT.
//! - [`circuit`]: circuit IR, simulation, and Pauli-twirl frames for
//!   randomized compiling.
//! - [`charfit`]: phase-space sweep protocol, Levenberg–Marquardt fitting of
//!   single-qubit noise parameters, and drift tracking.
//! - [`vqe`]: the tapered H2 Hamiltonian, its one-parameter ansatz, energy
//!   estimation, randomized compiling and purification.

pub mod channel;
pub mod charfit;
pub mod circuit;
pub mod density;
mod error;
pub mod gates;
pub mod linalg;
pub mod pauli;
pub mod rng;
pub mod vqe;

pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix};
pub use pauli::PauliString;
pub use density::DensityMatrix;
