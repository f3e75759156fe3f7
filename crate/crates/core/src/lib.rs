//! Variational simulation of a ferromagnetic Heisenberg chain with
//! Dzyaloshinskii-Moriya interaction in a transverse field.
//!
//! The crate is organised bottom-up:
//!
//! * [`pauli`] – weighted Pauli strings and the chain Hamiltonian.
//! * [`state`] – dense statevector with in-place rotation kernels.
//! * [`ansatz`] – the layered hardware-efficient circuit.
//! * [`exact`] – dense and Lanczos ground-truth eigensolvers.
//! * [`optimize`] – BFGS with a strong-Wolfe line search.
//! * [`vqe`] – objectives, gradients and the multi-restart driver.
//! * [`entanglement`] – Wootters concurrence and magnetization textures.
//! * [`soliton`] – elliptic functions and the chiral soliton lattice.
//! * [`experiment`] – reproducible runs writing CSV/JSON/SVG artifacts.
//!
//! Qubit `j` is bit `j` of a basis-state index (little-endian) everywhere.

pub mod ansatz;
pub mod entanglement;
mod clock;
mod error;
pub mod exact;
pub mod experiment;
mod linalg;
pub mod optimize;
pub mod pauli;
pub mod plot;
pub mod soliton;
pub mod state;
pub mod vqe;

pub use error::{Error, Result};

pub use ansatz::{AnsatzSpec, EntanglerTopology, ParameterVector};
pub use entanglement::{ConcurrenceMatrix, TextureRow};
pub use exact::Spectrum;
pub use pauli::{Boundary, ChainParams, Hamiltonian, Pauli, PauliTerm};
pub use soliton::{ContinuumParams, SolitonSolution};
pub use state::{DensityMatrix2Q, StateVector};
pub use vqe::{GradientMode, ObjectiveKind, OptimizerConfig, VqeResult};

pub use num_complex::Complex64;
