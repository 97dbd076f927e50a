//! Exact reduced dynamics of a qubit coupled to a Drude-Lorentz boson bath.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numerical
//! piece of the simulator:
//!
//! * [`operator`], [`thermal`] and [`pointer`]: 2x2 operator algebra, Bloch
//!   vectors, Gibbs states, entropy and pointer-basis dephasing.
//! * [`bath`]: spectral density, Matsubara correlation function and the
//!   two-exponential-plus-delta kernel expansion.
//! * [`heom`]: the two-index hierarchy of auxiliary operators and its RK4
//!   integration.
//! * [`oracles`]: a weak-coupling master equation and an exact few-mode bath,
//!   used to cross-check the hierarchy.
//! * [`analysis`]: steady-state geometry (pointer limit, projection line,
//!   entropy curves).
//!
//! Units: hbar = k_B = 1, energies in units of the qubit splitting.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod bath;
mod error;
pub mod heom;
pub mod operator;
pub mod oracles;
pub mod pointer;
pub mod thermal;
pub mod trajectory;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use operator::{bloch_from_density, density_from_bloch, BlochVector, Operator2};
pub use pointer::{pointer_basis, pointer_matrix_elements, pointer_project, PointerBasis, PointerElements};
pub use thermal::{entropy_from_radius, gibbs_state, von_neumann_entropy};
pub use trajectory::{InvariantStats, RunMetadata, TrajectoryRecord, TrajectorySample};
