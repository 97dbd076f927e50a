//! Weak-coupling Born-Markov master equation in secular form.
//!
//! In the energy basis `X = az sz + (ax - i ay) s+ + (ax + i ay) s-`, so the
//! transitions carry weight `w = ax^2 + ay^2` and pure dephasing `az^2`.
//! With the bath spectrum `S(w) = 2 J(w) (n(w) + 1)` the rates are
//!
//! ```text
//! down = 2 J(w0) (n + 1) w,   up = 2 J(w0) n w,   dephasing = S(0) az^2 = 4 lambda az^2 / (beta gamma)
//! ```
//!
//! The Lamb shift `w (Im G(w0) - Im G(-w0))` of the qubit splitting uses the
//! half-sided transform `G(w) = int_0^inf C(t) e^{i w t} dt` of the fitted
//! kernel, the same kernel the hierarchy is built from.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bath::{fit_kernel, spectral_density, BathParams};
use crate::pointer::coupling_operator;
use crate::trajectory::{RunMetadata, TrajectoryRecord};
use crate::{Error, Operator2, PointerBasis, Result, C64};

/// Above this coupling the Born-Markov picture is not trustworthy.
pub const WEAK_COUPLING_LIMIT: f64 = 0.1;
/// Largest RK4 substep used between grid points.
const MAX_SUBSTEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladModel {
    pub bath: BathParams,
    pub omega0: f64,
    pub coupling: [f64; 3],
    /// Relaxation rate `|e> -> |g>`.
    pub rate_down: f64,
    /// Excitation rate `|g> -> |e>`.
    pub rate_up: f64,
    /// Rate multiplying the `sz` dissipator.
    pub rate_dephasing: f64,
    /// Shift of the qubit splitting.
    pub lamb_shift: f64,
}

/// Bose occupation `1 / (e^{beta w} - 1)`.
pub fn bose_occupation(omega: f64, beta: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

impl LindbladModel {
    pub fn new(bath: BathParams, omega0: f64, coupling: [f64; 3]) -> Result<Self> {
        bath.validate()?;
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::param("omega0", format!("must be positive, got {omega0}")));
        }
        let [ax, ay, az] = coupling;
        let w = ax * ax + ay * ay;
        let n = bose_occupation(omega0, bath.beta);
        let j = spectral_density(omega0, &bath);
        let rate_down = 2.0 * j * (n + 1.0) * w;
        let rate_up = 2.0 * j * n * w;
        let rate_dephasing = 4.0 * bath.lambda / (bath.beta * bath.gamma) * az * az;
        for (name, r) in [("rate_down", rate_down), ("rate_up", rate_up), ("rate_dephasing", rate_dephasing)] {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::param(name, format!("rate must be non-negative, got {r}")));
            }
        }
        let e = fit_kernel(&bath)?;
        let im_half_transform = |omega: f64| -> f64 {
            let terms = [(e.c1, e.gamma1), (C64::from(e.c2), e.gamma2)];
            bath.lambda * terms.iter().map(|(c, g)| (c / C64::new(*g, -omega)).im).sum::<f64>()
        };
        let lamb_shift = w * (im_half_transform(omega0) - im_half_transform(-omega0));
        Ok(LindbladModel { bath, omega0, coupling, rate_down, rate_up, rate_dephasing, lamb_shift })
    }

    pub fn is_weak_coupling(&self) -> bool {
        self.bath.lambda <= WEAK_COUPLING_LIMIT
    }

    /// `(w0 + shift) / 2 sz`.
    pub fn hamiltonian(&self) -> Operator2 {
        Operator2::sigma_z() * (0.5 * (self.omega0 + self.lamb_shift))
    }

    /// Right-hand side of the master equation.
    pub fn generator(&self, rho: &Operator2) -> Operator2 {
        let minus_i = C64::new(0.0, -1.0);
        let lower = Operator2::from_pauli([C64::from(0.0), C64::from(0.5), C64::new(0.0, -0.5), C64::from(0.0)]);
        let raise = lower.dagger();
        let dissipator = |l: &Operator2| {
            let ld = l.dagger();
            *l * *rho * ld - (ld * *l * *rho + *rho * ld * *l) * 0.5
        };
        self.hamiltonian().commutator(rho) * minus_i
            + dissipator(&lower) * self.rate_down
            + dissipator(&raise) * self.rate_up
            + dissipator(&Operator2::sigma_z()) * self.rate_dephasing
    }
}

/// Integrates the master equation from `rho0` at `t = 0` and samples it at
/// every point of `t_grid` (non-decreasing, non-negative).
pub fn lindblad_evolve(rho0: &Operator2, model: &LindbladModel, t_grid: &[f64]) -> Result<TrajectoryRecord> {
    rho0.validate_density()?;
    check_grid(t_grid)?;
    let basis = PointerBasis::from_operator(&coupling_operator(model.coupling))?;
    let mut record = TrajectoryRecord::new(RunMetadata {
        lambda: model.bath.lambda,
        gamma: model.bath.gamma,
        beta: model.bath.beta,
        omega0: model.omega0,
        coupling: model.coupling,
        depth: 0,
        dt: MAX_SUBSTEP,
    });
    let mut rho = *rho0;
    let mut t = 0.0;
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / MAX_SUBSTEP).ceil() as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rho = rk4_step(model, &rho, h);
            }
        }
        t = target;
        record.observe(t, &rho, &basis);
    }
    record.final_state = rho;
    Ok(record)
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::param("t_grid", "empty time grid"));
    }
    let mut prev = 0.0;
    for &t in t_grid {
        if !(t >= prev && t.is_finite()) {
            return Err(Error::param("t_grid", format!("must be non-negative and non-decreasing, got {t} after {prev}")));
        }
        prev = t;
    }
    Ok(())
}

fn rk4_step(model: &LindbladModel, rho: &Operator2, h: f64) -> Operator2 {
    let k1 = model.generator(rho);
    let k2 = model.generator(&(*rho + k1 * (0.5 * h)));
    let k3 = model.generator(&(*rho + k2 * (0.5 * h)));
    let k4 = model.generator(&(*rho + k3 * h));
    *rho + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// Uniform grid `0, dt, 2 dt, ..` up to and including `t_max`.
pub fn uniform_grid(dt: f64, t_max: f64) -> Vec<f64> {
    let n = (t_max / dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}
