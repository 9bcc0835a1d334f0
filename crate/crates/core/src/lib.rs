//! Truncated-Taylor-series simulation of second-quantized molecular
//! Hamiltonians written as linear combinations of unitaries.
//!
//! Layers, bottom up:
//! - [`pauli`] / [`state`]: phased Pauli strings acting on dense statevectors.
//! - [`jordan_wigner`]: unitarized ladder operators and the Pauli-sum Hamiltonian.
//! - [`integrals`]: Gaussian orbitals, Riemann-sum integrals, sign decomposition.
//! - [`taylor`]: segment planning, truncated series, oblivious amplitude
//!   amplification, and an explicit ancilla-register emulation.
//! - [`oracle`]: dense reference machinery sharing no code with the above.

pub mod error;
pub mod integrals;
pub mod jordan_wigner;
pub mod oracle;
pub mod pauli;
pub mod reduce;
pub mod state;
pub mod tables;
pub mod taylor;

pub use error::{Error, Result};
pub use jordan_wigner::{build_lcu, ladder_unitary, LcuHamiltonian, LcuTerm, TermIndex};
pub use pauli::{Pauli, PauliString, Phase};
pub use state::StateVector;
pub use tables::IntegralTable;
