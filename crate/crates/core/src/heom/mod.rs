//! Hierarchical equations of motion for a qubit in a Drude-Lorentz bath.

mod hierarchy;
mod integrate;
mod layout;
mod superop;

pub use hierarchy::{init_hierarchy, HierarchyState, NORM_GUARD};
pub use integrate::{
    bloch_series, convergence_check, detect_steady, evolve, stability_bound, EvolveFailure, IntegratorConfig,
    DEFAULT_RECORD_INTERVAL, MAX_DEFAULT_DT, STABILITY_SAFETY,
};
pub use layout::HierarchyLayout;
pub use superop::{apply_g, apply_s_minus, apply_s_plus};

use crate::bath::{fit_kernel, BathParams, KernelExpansion};
use crate::pointer::coupling_operator;
use crate::{Operator2, Result};

/// Qubit `H = omega0 / 2 sigma_z` coupled through `X = a . sigma` to a bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeomModel {
    pub bath: BathParams,
    pub omega0: f64,
    pub coupling: [f64; 3],
}

impl HeomModel {
    pub fn new(bath: BathParams, omega0: f64, coupling: [f64; 3]) -> Self {
        HeomModel { bath, omega0, coupling }
    }

    pub fn hamiltonian(&self) -> Operator2 {
        Operator2::sigma_z() * (0.5 * self.omega0)
    }

    pub fn coupling_operator(&self) -> Operator2 {
        coupling_operator(self.coupling)
    }

    pub fn kernel(&self) -> Result<KernelExpansion> {
        fit_kernel(&self.bath)
    }

    /// Factorized hierarchy of the given depth starting from `rho0`.
    pub fn hierarchy(&self, rho0: &Operator2, depth: usize) -> Result<HierarchyState> {
        crate::pointer::pointer_basis(self.coupling[0], self.coupling[1], self.coupling[2])?;
        init_hierarchy(rho0, depth, &self.kernel()?, &self.coupling_operator(), &self.hamiltonian())
    }
}
