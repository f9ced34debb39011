//! Simulation and estimation for generalized measurements on two copies of an
//! `n`-qubit state.
//!
//! Every two-copy POVM outcome probability is the fidelity `Tr(ρ C_μ(ρ))` of a
//! completely co-positive map, and the maps of one measurement add up to the
//! fully depolarizing map ([`channels`]). Joint Bell measurements on the
//! paired qubits ([`bellmeas`]) make squared Pauli coefficients, purities and
//! pure-state concurrence available with an `n`-independent number of shots
//! ([`estimators`]), in contrast with an ancilla-based detector ([`detector`]).

pub mod bellmeas;
pub mod channels;
pub mod detector;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod linalg;
pub mod pauli;
pub mod states;

pub use error::{Error, Result};
pub use pauli::{PauliLabel, QubitMask, WeightProfile, QUBIT_CAP};
pub use states::{BlochVector, DensityMatrix, PauliCoefficients};
