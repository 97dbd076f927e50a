//! Qubit plus a few discretized bath modes, propagated exactly.
//!
//! ```text
//! H = w0 / 2 sz + sum_j w_j a_j^+ a_j + X (x) sum_j nu_j (a_j + a_j^+)
//! ```
//!
//! The modes split `[0, w_cut]` into bins carrying equal shares of
//! `int J(w) dw`. Each mode takes `nu_j^2 = (1/pi) int_bin J(w) dw` and sits at
//! `w_j = int_bin J / int_bin (J / w)`, so both the total weight and the
//! reorganization energy of the window are reproduced exactly. Each mode
//! starts in its thermal state truncated to `n_max` quanta. The initial
//! product state is a mixture of `|phi_k> (x) |n_1 .. n_M>` with `phi_k` the
//! eigenvectors of `rho0`; every member of the mixture is a pure state
//! propagated by a Taylor series of the Hamiltonian, a few at a time.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::lindblad::check_grid;
use crate::bath::BathParams;
use crate::pointer::coupling_operator;
use crate::trajectory::{RunMetadata, TrajectoryRecord};
use crate::{Error, Operator2, PointerBasis, Result, C64};

/// Ceiling on the composite Hilbert-space dimension `2 (n_max + 1)^M`.
pub const MAX_DIMENSION: usize = 1 << 14;
/// Bound on `dt ||H - c||` for one Taylor step.
const TAYLOR_RADIUS: f64 = 2.0;
const TAYLOR_TOL: f64 = 1e-13;
const MAX_TAYLOR_TERMS: usize = 200;
/// Pure states propagated side by side.
const LANES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBathModel {
    pub omega0: f64,
    pub coupling: [f64; 3],
    pub beta: f64,
    pub modes: Vec<BathMode>,
    pub n_max: usize,
    /// Upper edge of the discretized window, zero for hand-built modes.
    pub omega_cut: f64,
    /// The continuum parameters the modes were drawn from, if any.
    pub bath: Option<BathParams>,
}

impl FiniteBathModel {
    /// Equal-weight discretization of the Drude-Lorentz density on `[0, 4 gamma]`.
    pub fn discretize(bath: BathParams, omega0: f64, coupling: [f64; 3], n_modes: usize, n_max: usize) -> Result<Self> {
        bath.validate()?;
        if n_modes == 0 {
            return Err(Error::param("n_modes", "need at least one mode"));
        }
        let g = bath.gamma;
        let omega_cut = 4.0 * g;
        // int_0^w J = lambda g ln(1 + w^2 / g^2); int_0^w J / w = 2 lambda atan(w / g)
        let weight = |w: f64| bath.lambda * g * (w * w / (g * g)).ln_1p();
        let moment = |w: f64| 2.0 * bath.lambda * (w / g).atan();
        let total = (omega_cut * omega_cut / (g * g)).ln_1p();
        let edge = |k: usize| g * (total * k as f64 / n_modes as f64).exp_m1().sqrt();
        let modes = (0..n_modes)
            .map(|k| {
                let (lo, hi) = (edge(k), edge(k + 1));
                let w = weight(hi) - weight(lo);
                let omega = if w > 0.0 { w / (moment(hi) - moment(lo)) } else { 0.5 * (lo + hi) };
                BathMode { omega, nu: (w / PI).sqrt() }
            })
            .collect();
        let mut m = Self::from_modes(omega0, coupling, bath.beta, modes, n_max)?;
        m.omega_cut = omega_cut;
        m.bath = Some(bath);
        Ok(m)
    }

    pub fn from_modes(omega0: f64, coupling: [f64; 3], beta: f64, modes: Vec<BathMode>, n_max: usize) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::param("omega0", format!("must be positive, got {omega0}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", format!("must be positive, got {beta}")));
        }
        if n_max == 0 {
            return Err(Error::param("n_max", "need at least one quantum per mode"));
        }
        if let Some(m) = modes.iter().find(|m| !(m.omega > 0.0 && m.nu.is_finite())) {
            return Err(Error::param("modes", format!("mode frequencies must be positive, got {m:?}")));
        }
        let model = FiniteBathModel { omega0, coupling, beta, modes, n_max, omega_cut: 0.0, bath: None };
        model.dimension()?;
        Ok(model)
    }

    /// `2 (n_max + 1)^M`, or a parameter error above [`MAX_DIMENSION`].
    pub fn dimension(&self) -> Result<usize> {
        let mut dim = 2usize;
        for _ in &self.modes {
            dim = dim.checked_mul(self.n_max + 1).filter(|d| *d <= MAX_DIMENSION).ok_or_else(|| {
                Error::param(
                    "n_modes",
                    format!("2 ({} + 1)^{} exceeds the dimension bound {MAX_DIMENSION}", self.n_max, self.modes.len()),
                )
            })?;
        }
        Ok(dim)
    }

    /// Relative error of the discrete reorganization energy `sum nu^2 / w`
    /// against `(1/pi) int_0^cut J(w) / w dw = (2 lambda / pi) atan(cut / gamma)`.
    pub fn sum_rule_error(&self) -> Option<f64> {
        let bath = self.bath?;
        let exact = 2.0 * bath.lambda / PI * (self.omega_cut / bath.gamma).atan();
        let discrete: f64 = self.modes.iter().map(|m| m.nu * m.nu / m.omega).sum();
        Some((discrete - exact).abs() / exact)
    }

    /// Truncated thermal populations of one mode.
    pub fn thermal_populations(&self, omega: f64) -> Vec<f64> {
        let raw: Vec<f64> = (0..=self.n_max).map(|n| (-self.beta * omega * n as f64).exp()).collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / z).collect()
    }

    fn bath_dim(&self) -> usize {
        (self.n_max + 1).pow(self.modes.len() as u32)
    }
}

/// Reduced trajectory plus the composite energy expectation at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBathRun {
    pub record: TrajectoryRecord,
    pub energy: Vec<f64>,
}

impl FiniteBathRun {
    /// Largest deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

/// Sparse action of the composite Hamiltonian on vectors laid out as
/// `psi[2 b + q]` (bath index `b`, qubit index `q`).
struct Propagator {
    h_sys: Operator2,
    x: Operator2,
    /// Bath energies `sum_j w_j n_j` per bath index.
    bath_energy: Vec<f64>,
    /// `(stride, block)` per mode and the ladder amplitudes `sqrt(n + 1) nu`.
    strides: Vec<(usize, usize)>,
    ladders: Vec<Vec<f64>>,
    shift: f64,
    step_cap: f64,
    /// `(X (x) 1) psi`.
    chi: Vec<C64>,
}

impl Propagator {
    fn new(model: &FiniteBathModel, lanes: usize) -> Self {
        let nb = model.bath_dim();
        let levels = model.n_max + 1;
        let strides: Vec<(usize, usize)> =
            (0..model.modes.len()).map(|j| (levels.pow(j as u32), levels.pow(j as u32 + 1))).collect();
        let bath_energy = (0..nb)
            .map(|b| model.modes.iter().zip(&strides).map(|(m, (s, _))| m.omega * ((b / s) % levels) as f64).sum())
            .collect::<Vec<f64>>();
        let ladders = model
            .modes
            .iter()
            .map(|m| (0..model.n_max).map(|n| m.nu * ((n + 1) as f64).sqrt()).collect())
            .collect::<Vec<Vec<f64>>>();
        let h_sys = Operator2::sigma_z() * (0.5 * model.omega0);
        let x = coupling_operator(model.coupling);
        // Gershgorin-style bound on the spectrum, centered
        let e_max = bath_energy.iter().copied().fold(0.0, f64::max);
        let [x_hi, x_lo] = x.hermitian_eigenvalues();
        let x_norm = x_hi.abs().max(x_lo.abs());
        let coupling: f64 = ladders.iter().map(|l| 2.0 * l.iter().copied().fold(0.0, f64::max)).sum();
        let radius = 0.5 * e_max + 0.5 * model.omega0 + x_norm * coupling;
        Propagator {
            h_sys,
            x,
            bath_energy,
            strides,
            ladders,
            shift: 0.5 * e_max,
            step_cap: TAYLOR_RADIUS / radius.max(1e-300),
            chi: vec![C64::new(0.0, 0.0); 2 * nb * lanes],
        }
    }

    /// `out = (H - shift) psi` for a batch of `lanes` vectors stored as
    /// `psi[(2 b + q) lanes + r]`.
    fn apply(&mut self, psi: &[C64], out: &mut [C64], lanes: usize) {
        let (h0, h1) = (self.h_sys[(0, 0)].re, self.h_sys[(1, 1)].re);
        let (x00, x01, x11) = (self.x[(0, 0)].re, self.x[(0, 1)], self.x[(1, 1)].re);
        let x10 = x01.conj();
        let chi = &mut self.chi[..psi.len()];
        let site = 2 * lanes;
        for (b, ((o, c), p)) in out.chunks_exact_mut(site).zip(chi.chunks_exact_mut(site)).zip(psi.chunks_exact(site)).enumerate() {
            let e = self.bath_energy[b] - self.shift;
            let (o0, o1) = o.split_at_mut(lanes);
            let (c0, c1) = c.split_at_mut(lanes);
            let (p0, p1) = p.split_at(lanes);
            for r in 0..lanes {
                o0[r] = p0[r] * (h0 + e);
                o1[r] = p1[r] * (h1 + e);
                c0[r] = p0[r] * x00 + p1[r] * x01;
                c1[r] = p0[r] * x10 + p1[r] * x11;
            }
        }
        let chi = &self.chi[..psi.len()];
        for (&(stride, block), ladder) in self.strides.iter().zip(&self.ladders) {
            let width = site * stride;
            for base in (0..out.len()).step_by(site * block) {
                for (n, &amp) in ladder.iter().enumerate() {
                    let lo = base + n * width;
                    let (head, tail) = out[lo..lo + 2 * width].split_at_mut(width);
                    let (c_lo, c_hi) = chi[lo..lo + 2 * width].split_at(width);
                    for ((o_lo, o_hi), (a, b)) in head.iter_mut().zip(tail.iter_mut()).zip(c_lo.iter().zip(c_hi)) {
                        *o_lo += b * amp;
                        *o_hi += a * amp;
                    }
                }
            }
        }
    }

    /// Advances the batch `psi` by `span` (phases from the shift are
    /// irrelevant for reduced states and energies).
    fn advance(&mut self, psi: &mut [C64], span: f64, lanes: usize, term: &mut [C64], next: &mut [C64]) {
        if span <= 0.0 {
            return;
        }
        let steps = (span / self.step_cap).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            term.copy_from_slice(psi);
            for k in 1..MAX_TAYLOR_TERMS {
                self.apply(term, next, lanes);
                let factor = C64::new(0.0, -dt / k as f64);
                let mut norm = 0.0;
                for ((t, n), p) in term.iter_mut().zip(next.iter()).zip(psi.iter_mut()) {
                    *t = n * factor;
                    *p += *t;
                    norm += t.norm_sqr();
                }
                if norm < TAYLOR_TOL * TAYLOR_TOL {
                    break;
                }
            }
        }
    }

    /// `sum_r w_r tr_B |psi_r><psi_r|`.
    fn reduced(psi: &[C64], weights: &[f64]) -> Operator2 {
        let lanes = weights.len();
        let mut rho = Operator2::zero();
        for p in psi.chunks_exact(2 * lanes) {
            let (p0, p1) = p.split_at(lanes);
            for (r, w) in weights.iter().enumerate() {
                rho[(0, 0)] += p0[r].norm_sqr() * w;
                rho[(0, 1)] += p0[r] * p1[r].conj() * w;
                rho[(1, 1)] += p1[r].norm_sqr() * w;
            }
        }
        rho[(1, 0)] = rho[(0, 1)].conj();
        rho
    }

    /// `sum_r w_r <psi_r|H|psi_r>`.
    fn energy(&mut self, psi: &[C64], buf: &mut [C64], weights: &[f64]) -> f64 {
        let lanes = weights.len();
        self.apply(psi, buf, lanes);
        let mut total = 0.0;
        for (k, (p, h)) in psi.iter().zip(buf.iter()).enumerate() {
            total += weights[k % lanes] * ((p.conj() * h).re + self.shift * p.norm_sqr());
        }
        total
    }
}

/// Exact evolution of `rho0 (x) thermal` sampled on `t_grid`.
pub fn finite_bath_evolve(rho0: &Operator2, model: &FiniteBathModel, t_grid: &[f64]) -> Result<FiniteBathRun> {
    rho0.validate_density()?;
    check_grid(t_grid)?;
    let dim = model.dimension()?;
    let basis = PointerBasis::from_operator(&coupling_operator(model.coupling))?;
    let nb = dim / 2;

    // eigen-decomposition of the initial qubit state
    let components: Vec<(f64, [C64; 2])> = if rho0.max_abs_diff(&(Operator2::identity() * 0.5)) < 1e-15 {
        vec![(0.5, [C64::from(1.0), C64::from(0.0)]), (0.5, [C64::from(0.0), C64::from(1.0)])]
    } else {
        let eig = PointerBasis::from_operator(rho0)?;
        (0..2).map(|k| (eig.eigenvalues[k], eig.kets[k])).filter(|(p, _)| *p > 1e-15).collect()
    };
    let levels = model.n_max + 1;
    let populations: Vec<Vec<f64>> = model.modes.iter().map(|m| model.thermal_populations(m.omega)).collect();
    let mut members = Vec::new();
    for config in 0..nb {
        let mut weight = 1.0;
        let mut rest = config;
        for pops in &populations {
            weight *= pops[rest % levels];
            rest /= levels;
        }
        for (p, ket) in &components {
            if weight * p > 0.0 {
                members.push((weight * p, config, *ket));
            }
        }
    }

    let mut prop = Propagator::new(model, LANES);
    let mut rho_t = vec![Operator2::zero(); t_grid.len()];
    let mut energy = vec![0.0; t_grid.len()];
    let len = dim * LANES;
    let (mut psi, mut term, mut next) = (vec![C64::new(0.0, 0.0); len], vec![C64::new(0.0, 0.0); len], vec![C64::new(0.0, 0.0); len]);
    for batch in members.chunks(LANES) {
        let lanes = batch.len();
        let len = dim * lanes;
        let (psi, term, next) = (&mut psi[..len], &mut term[..len], &mut next[..len]);
        psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        let weights: Vec<f64> = batch.iter().map(|m| m.0).collect();
        for (r, (_, config, ket)) in batch.iter().enumerate() {
            psi[2 * config * lanes + r] = ket[0];
            psi[(2 * config + 1) * lanes + r] = ket[1];
        }
        let mut t = 0.0;
        for (k, &target) in t_grid.iter().enumerate() {
            prop.advance(psi, target - t, lanes, term, next);
            t = target;
            rho_t[k] += Propagator::reduced(psi, &weights);
            energy[k] += prop.energy(psi, next, &weights);
        }
    }

    let mut record = TrajectoryRecord::new(RunMetadata {
        lambda: model.bath.map_or(0.0, |b| b.lambda),
        gamma: model.bath.map_or(0.0, |b| b.gamma),
        beta: model.beta,
        omega0: model.omega0,
        coupling: model.coupling,
        depth: 0,
        dt: prop.step_cap,
    });
    for (t, rho) in t_grid.iter().zip(&rho_t) {
        record.observe(*t, rho, &basis);
    }
    record.final_state = *rho_t.last().unwrap_or(rho0);
    Ok(FiniteBathRun { record, energy })
}
