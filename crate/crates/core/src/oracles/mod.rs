//! Independent solvers used to bound-check the hierarchy.

mod finite_bath;
mod lindblad;
mod naive;

pub use finite_bath::{finite_bath_evolve, BathMode, FiniteBathModel, FiniteBathRun, MAX_DIMENSION};
pub use lindblad::{bose_occupation, lindblad_evolve, uniform_grid, LindbladModel, WEAK_COUPLING_LIMIT};
pub use naive::naive_derivative;
