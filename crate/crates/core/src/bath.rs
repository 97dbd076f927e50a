//! Drude-Lorentz bath: spectral density, Matsubara correlation function and
//! the high-temperature kernel expansion consumed by the hierarchy.
//!
//! The bath correlation function is
//!
//! ```text
//! C(t) = (1/pi) int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw
//!      = lambda gamma [cot(beta gamma / 2) - i] e^{-gamma t}
//!        + (4 lambda gamma / beta) sum_k nu_k e^{-nu_k t} / (nu_k^2 - gamma^2)
//! ```
//!
//! with Matsubara frequencies `nu_k = 2 pi k / beta`. The expansion keeps the
//! Drude term and the first Matsubara term as exponentials and folds the rest
//! into a delta function of matching integrated weight.

use alloc::format;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Distance from a Matsubara pole below which parameters are rejected.
const POLE_TOL: f64 = 1e-9;
/// Denominator floor in [`validate_fit`].
pub const EPS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Overall coupling strength.
    pub lambda: f64,
    /// Drude relaxation rate.
    pub gamma: f64,
    /// Inverse temperature.
    pub beta: f64,
}

impl BathParams {
    pub fn new(lambda: f64, gamma: f64, beta: f64) -> Result<Self> {
        let p = BathParams { lambda, gamma, beta };
        p.validate()?;
        Ok(p)
    }

    /// `gamma` and `beta` must be positive; `lambda = 0` is the uncoupled limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be non-negative and finite, got {}", self.lambda)));
        }
        for (name, v) in [("gamma", self.gamma), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        let ratio = self.beta * self.gamma / TAU;
        let k = ratio.round();
        if k >= 1.0 && (self.beta * self.gamma - TAU * k).abs() < POLE_TOL {
            return Err(Error::param(
                "gamma",
                format!("beta * gamma = {} sits on the Matsubara pole 2 pi {k}", self.beta * self.gamma),
            ));
        }
        Ok(())
    }

    /// `nu_k = 2 pi k / beta`.
    pub fn matsubara(&self, k: usize) -> f64 {
        TAU * k as f64 / self.beta
    }

    /// The expansion assumes `beta gamma < pi`.
    pub fn is_high_temperature(&self) -> bool {
        self.beta * self.gamma < PI
    }
}

/// `J(w) = 2 lambda gamma w / (w^2 + gamma^2)`.
pub fn spectral_density(omega: f64, p: &BathParams) -> f64 {
    2.0 * p.lambda * p.gamma * omega / (omega * omega + p.gamma * p.gamma)
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// Correlation function truncated after `k_terms` Matsubara terms.
pub fn exact_correlation(tau: f64, p: &BathParams, k_terms: usize) -> Result<C64> {
    p.validate()?;
    if !(tau >= 0.0) {
        return Err(Error::param("tau", format!("must be non-negative, got {tau}")));
    }
    if k_terms < 1 {
        return Err(Error::param("k_terms", "need at least one Matsubara term"));
    }
    Ok(correlation_series(tau, p, k_terms))
}

fn correlation_series(tau: f64, p: &BathParams, k_terms: usize) -> C64 {
    let BathParams { lambda, gamma, beta } = *p;
    let drude = C64::new(cot(0.5 * beta * gamma), -1.0) * (lambda * gamma * (-gamma * tau).exp());
    let pref = 4.0 * lambda * gamma / beta;
    let matsubara: f64 = (1..=k_terms)
        .map(|k| {
            let nu = p.matsubara(k);
            pref * nu * (-nu * tau).exp() / (nu * nu - gamma * gamma)
        })
        .sum();
    drude + matsubara
}

/// `kappa_r - i kappa_i = lambda (c1 e^{-g1 t} + c2 e^{-g2 t} + 2 c0 delta(t))`.
///
/// Coefficients carry no factor of `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelExpansion {
    pub c0: f64,
    pub c1: C64,
    pub c2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub params: BathParams,
}

impl KernelExpansion {
    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    /// `c_j` for `j` in `{1, 2}` as a complex number.
    pub fn coefficient(&self, j: usize) -> C64 {
        match j {
            1 => self.c1,
            2 => C64::from(self.c2),
            _ => panic!("kernel has exponents 1 and 2, got {j}"),
        }
    }

    /// Regular (non-delta) part of the fitted kernel at `tau > 0`.
    pub fn correlation(&self, tau: f64) -> C64 {
        (self.c1 * (-self.gamma1 * tau).exp() + self.c2 * (-self.gamma2 * tau).exp()) * self.lambda()
    }

    /// `int_0^inf Re kernel = lambda (Re c1 / g1 + c2 / g2 + c0)`, counting half the delta.
    pub fn zero_frequency_weight(&self) -> f64 {
        self.lambda() * (self.c1.re / self.gamma1 + self.c2 / self.gamma2 + self.c0)
    }
}

/// Closed-form high-temperature expansion: Drude exponent, first Matsubara
/// exponent, and a delta terminator carrying the weight of all `k >= 2` terms.
pub fn fit_kernel(p: &BathParams) -> Result<KernelExpansion> {
    p.validate()?;
    let BathParams { gamma, beta, .. } = *p;
    let nu1 = p.matsubara(1);
    let cot_half = cot(0.5 * beta * gamma);
    let first = (4.0 * gamma / beta) / (nu1 * nu1 - gamma * gamma);
    // partial fractions: 2/(beta gamma) - cot(beta gamma/2) = sum_k (4 gamma/beta)/(nu_k^2 - gamma^2)
    let c0 = (2.0 / (beta * gamma) - cot_half) - first;
    Ok(KernelExpansion {
        c0,
        c1: C64::new(gamma * cot_half, -gamma),
        c2: first * nu1,
        gamma1: gamma,
        gamma2: nu1,
        params: *p,
    })
}

/// `int_0^inf Re C(tau) d tau` summed over the Drude term and `k_terms`
/// Matsubara terms, plus the asymptotic estimate of the remaining tail.
pub fn series_zero_frequency_weight(p: &BathParams, k_terms: usize) -> f64 {
    let BathParams { lambda, gamma, beta } = *p;
    let a = 4.0 * lambda * gamma / beta;
    let mut sum = 0.0;
    for k in (1..=k_terms).rev() {
        let nu = p.matsubara(k);
        sum += a / (nu * nu - gamma * gamma);
    }
    // sum_{k > K} a / (b k^2) ~ a / (b (K + 1/2))
    let b = (TAU / beta).powi(2);
    lambda * cot(0.5 * beta * gamma) + sum + a / (b * (k_terms as f64 + 0.5))
}

/// Largest relative deviation of the fitted kernel from the `k_terms`
/// Matsubara series over a grid of strictly positive times.
pub fn validate_fit(e: &KernelExpansion, tau_grid: &[f64], k_terms: usize) -> Result<f64> {
    if tau_grid.is_empty() {
        return Err(Error::param("tau_grid", "empty grid"));
    }
    if let Some(bad) = tau_grid.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::param("tau_grid", format!("times must be strictly positive, got {bad}")));
    }
    if k_terms < 10 {
        return Err(Error::param("k_terms", format!("need at least 10 Matsubara terms, got {k_terms}")));
    }
    e.params.validate()?;
    Ok(tau_grid
        .iter()
        .map(|&tau| {
            let exact = correlation_series(tau, &e.params, k_terms);
            (e.correlation(tau) - exact).norm() / exact.norm().max(EPS_FLOOR)
        })
        .fold(0.0, f64::max))
}
