//! Ground-state quantum computation (GSQC) toolkit.
//!
//! Circuits are compiled into a two-body Hamiltonian `H(λ)` whose zero-energy ground
//! state at λ = 1 is the history state of the computation. The crate computes those
//! ground states and spectral gaps at small scale, applies the identity and swap
//! gauge transforms, certifies graph-Laplacian gap bounds with explicit path
//! families, and integrates the adiabatic evolution.

pub mod adiabatic;
pub mod basis;
pub mod circuit;
pub mod error;
pub mod gauge;
pub mod groundstate;
pub mod hamiltonian;
pub mod numfmt;
pub mod pathcert;
pub mod sparse;
pub mod spectra;

pub use basis::{enumerate_basis, penalty_free_basis, penalty_free_vertices, sector, Basis, BasisState, Pin, Space};
pub use circuit::{
    build_1d_circuit, build_all_to_all_circuit, build_random_circuit, validate_circuit, CMatrix, Circuit, Gate, Layout,
    ValidationReport, Window, C64,
};
pub use error::{Error, Result};
pub use groundstate::{history_ground_state, occupation, StateVector};
pub use hamiltonian::{assemble, schedule_eval, AssemblyOptions, Convention, EnergyScale, Schedule, Skeleton};
pub use sparse::SparseOperator;
