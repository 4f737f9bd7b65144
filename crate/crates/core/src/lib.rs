//! Divide-and-conquer variational eigensolver.
//!
//! Subsystems are solved with a hardware-efficient VQE, each local ground
//! state is expanded into a small basis of boundary excitations, and the
//! couplings between subsystems are restored in an effective Hamiltonian on
//! that reduced basis. The effective problem is encoded on `⌈log₂K⌉` qubits
//! per site and solved by a second VQE; the construction can be repeated on
//! groups of sites.

pub mod effective;
pub mod error;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod pauli;
pub mod pipeline;
pub mod simulator;
pub mod vqe;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
