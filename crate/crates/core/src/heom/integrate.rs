//! Fixed-step integration of the hierarchy and steady-state detection.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::hierarchy::HierarchyState;
use super::HeomModel;
use crate::trajectory::{RunMetadata, TrajectoryRecord};
use crate::{BlochVector, Error, Operator2, PointerBasis, Result};

/// Numerator of the step-size bound; see [`stability_bound`].
pub const STABILITY_SAFETY: f64 = 2.0;
/// Upper limit on the default step.
pub const MAX_DEFAULT_DT: f64 = 5e-3;
/// Default spacing of recorded samples, in time units.
pub const DEFAULT_RECORD_INTERVAL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Record every this many steps.
    pub record_every: usize,
    /// Steady when all Bloch vectors in the window lie within this distance.
    pub steady_tol: f64,
    /// Number of recorded samples the steady test looks at.
    pub steady_window: usize,
    /// Stop integrating once the steady test passes.
    pub stop_at_steady: bool,
}

impl IntegratorConfig {
    /// Defaults for `state`: the largest step not above `min(5e-3, dt_stab)`
    /// that divides the 0.05 sampling interval, horizon 500, tolerance 1e-6
    /// over a 2000-sample window.
    pub fn auto(state: &HierarchyState) -> Self {
        let limit = MAX_DEFAULT_DT.min(stability_bound(state));
        let per_sample = (DEFAULT_RECORD_INTERVAL / limit).ceil().max(1.0);
        Self::with_dt(DEFAULT_RECORD_INTERVAL / per_sample)
    }

    pub fn with_dt(dt: f64) -> Self {
        IntegratorConfig {
            dt,
            t_max: 500.0,
            record_every: ((DEFAULT_RECORD_INTERVAL / dt).round() as usize).max(1),
            steady_tol: 1e-6,
            steady_window: 2000,
            stop_at_steady: true,
        }
    }

    pub fn validate(&self, state: &HierarchyState) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        let bound = stability_bound(state);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::param("dt", format!("{} exceeds the stability bound {bound}", self.dt)));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::param("t_max", format!("must be positive, got {}", self.t_max)));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be at least 1"));
        }
        if self.steady_window < 2 {
            return Err(Error::param("steady_window", "must be at least 2"));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::param("steady_tol", "must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }
}

/// `STABILITY_SAFETY / (max(g1, g2) d + lambda (|c1| + c2 + 4 c0) ||X||^2 + w0)`.
///
/// The damping of the deepest tier dominates; classical RK4 is stable on the
/// negative real axis up to `h ~ 2.79`, so a numerator of 2 keeps a margin.
pub fn stability_bound(state: &HierarchyState) -> f64 {
    let e = state.kernel();
    let rate = e.gamma1.max(e.gamma2) * state.depth() as f64;
    let [hi, lo] = state.coupling().hermitian_eigenvalues();
    let x_norm = hi.abs().max(lo.abs());
    let [h_hi, h_lo] = state.hamiltonian().hermitian_eigenvalues();
    let coupling = e.lambda() * (e.c1.norm() + e.c2.abs() + 4.0 * e.c0.abs()) * x_norm * x_norm;
    STABILITY_SAFETY / (rate + coupling + (h_hi - h_lo))
}

/// True iff every pair of vectors in `window` is closer than `tol`.
pub fn detect_steady(window: &[BlochVector], tol: f64) -> bool {
    if window.len() < 2 {
        return false;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for r in window {
        for (k, v) in r.to_array().into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    let side = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    if side.iter().any(|s| !(*s < tol)) {
        return false;
    }
    if (side[0] * side[0] + side[1] * side[1] + side[2] * side[2]).sqrt() < tol {
        return true;
    }
    window
        .iter()
        .enumerate()
        .all(|(i, a)| window[i + 1..].iter().all(|b| a.distance(b) < tol))
}

/// A run that stopped on a numerical error, with what was recorded so far.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error} (after {} recorded samples)", partial.samples.len())]
pub struct EvolveFailure {
    pub error: Error,
    pub partial: TrajectoryRecord,
}

impl From<EvolveFailure> for Error {
    fn from(f: EvolveFailure) -> Self {
        f.error
    }
}

pub(crate) fn metadata(state: &HierarchyState, dt: f64) -> RunMetadata {
    let p = state.kernel().params;
    let a = state.coupling().real_pauli_coords();
    let [h_hi, h_lo] = state.hamiltonian().hermitian_eigenvalues();
    RunMetadata {
        lambda: p.lambda,
        gamma: p.gamma,
        beta: p.beta,
        omega0: h_hi - h_lo,
        coupling: [a[1], a[2], a[3]],
        depth: state.depth(),
        dt,
    }
}

/// Integrates `state` to `cfg.t_max`, or until the steady test passes when
/// `cfg.stop_at_steady` is set. `state` is left at the last integrated time.
pub fn evolve(state: &mut HierarchyState, cfg: &IntegratorConfig) -> core::result::Result<TrajectoryRecord, EvolveFailure> {
    let mut record = TrajectoryRecord::new(metadata(state, cfg.dt));
    let fail = |error: Error, mut partial: TrajectoryRecord, state: &HierarchyState| {
        partial.final_state = state.density();
        EvolveFailure { error, partial }
    };
    if let Err(e) = cfg.validate(state) {
        return Err(fail(e, record, state));
    }
    let basis = match PointerBasis::from_operator(state.coupling()) {
        Ok(b) => b,
        Err(e) => return Err(fail(e, record, state)),
    };
    let mut window: VecDeque<BlochVector> = VecDeque::with_capacity(cfg.steady_window);
    let mut observe = |state: &HierarchyState, record: &mut TrajectoryRecord| {
        let sample = record.observe(state.time(), &state.density(), &basis);
        if window.len() == cfg.steady_window {
            window.pop_front();
        }
        window.push_back(sample.bloch);
        if !record.steady && window.len() == cfg.steady_window && detect_steady(window.make_contiguous(), cfg.steady_tol) {
            record.steady = true;
            record.steady_time = Some(state.time());
        }
    };

    observe(state, &mut record);
    let steps = cfg.steps();
    for step in 1..=steps {
        if let Err(e) = state.step_rk4(cfg.dt) {
            return Err(fail(e, record, state));
        }
        if step % cfg.record_every == 0 || step == steps {
            observe(state, &mut record);
            if record.steady && cfg.stop_at_steady {
                break;
            }
        }
    }
    record.final_state = state.density();
    Ok(record)
}

/// Largest Bloch distance between runs at depths `depth` and `deeper`,
/// integrated with the same step (the deeper hierarchy's bound) over the
/// full horizon of `cfg`.
pub fn convergence_check(
    rho0: &Operator2,
    model: &HeomModel,
    depth: usize,
    deeper: usize,
    cfg: Option<IntegratorConfig>,
) -> Result<f64> {
    if deeper <= depth {
        return Err(Error::param("deeper", format!("must exceed {depth}, got {deeper}")));
    }
    let mut shallow = model.hierarchy(rho0, depth)?;
    let mut deep = model.hierarchy(rho0, deeper)?;
    let mut cfg = cfg.unwrap_or_else(|| IntegratorConfig::auto(&deep));
    cfg.stop_at_steady = false;
    let a = evolve(&mut shallow, &cfg)?;
    let b = evolve(&mut deep, &cfg)?;
    Ok(a.max_bloch_distance(&b))
}

/// Bloch vectors of a record, for windows and comparisons.
pub fn bloch_series(record: &TrajectoryRecord) -> Vec<BlochVector> {
    record.samples.iter().map(|s| s.bloch).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathParams;
    use crate::{density_from_bloch, gibbs_state};

    fn model(lambda: f64) -> HeomModel {
        HeomModel::new(BathParams::new(lambda, 1.0, 2.0 / 3.0).unwrap(), 1.0, [1.0, 0.0, 0.0])
    }

    fn off_axis() -> Operator2 {
        density_from_bloch(BlochVector::new(0.6, 0.0, 0.3)).unwrap()
    }

    #[test]
    fn steady_window_examples() {
        let r = BlochVector::new(0.1, -0.2, 0.3);
        assert!(detect_steady(&[r; 10], 1e-6));
        assert!(!detect_steady(&[r], 1e-6));
        assert!(!detect_steady(&[], 1e-6));

        let precessing: Vec<_> = (0..200)
            .map(|k| {
                let t = 0.05 * k as f64;
                BlochVector::new(0.8 * t.cos(), 0.8 * t.sin(), 0.1)
            })
            .collect();
        assert!(!detect_steady(&precessing, 1e-6));
    }

    #[test]
    fn steady_onset_for_exponential_relaxation() {
        // r(t) = span e^{-t/10}; a 50-sample window at spacing dt spans
        // span e^{-t/10} (e^{50 dt/10} - 1) at its right edge
        let (span, dt, width, tol) = (0.5, 0.1, 50, 1e-6);
        let at = |k: usize| BlochVector::new(span * (-(k as f64) * dt / 10.0).exp(), 0.0, 0.0);
        let first = (width - 1..20_000)
            .find(|&k| detect_steady(&(k + 1 - width..=k).map(at).collect::<Vec<_>>(), tol))
            .unwrap();
        let spread = ((width - 1) as f64 * dt / 10.0).exp() - 1.0;
        let predicted = 10.0 * (span * spread / tol).ln();
        assert!((first as f64 * dt - predicted).abs() <= dt, "{} vs {predicted}", first as f64 * dt);
    }

    #[test]
    fn auto_config_divides_sampling_interval() {
        for (lambda, depth) in [(0.01, 10), (5.0, 60), (1.0, 3)] {
            let s = model(lambda).hierarchy(&off_axis(), depth).unwrap();
            let cfg = IntegratorConfig::auto(&s);
            assert!(cfg.dt <= stability_bound(&s) && cfg.dt <= MAX_DEFAULT_DT);
            assert!((cfg.dt * cfg.record_every as f64 - DEFAULT_RECORD_INTERVAL).abs() < 1e-15);
            assert!(cfg.validate(&s).is_ok());
            assert_eq!((cfg.t_max, cfg.steady_tol, cfg.steady_window), (500.0, 1e-6, 2000));
        }
    }

    #[test]
    fn config_validation() {
        let s = model(1.0).hierarchy(&off_axis(), 4).unwrap();
        let ok = IntegratorConfig::auto(&s);
        let bad = [
            IntegratorConfig { dt: 0.0, ..ok },
            IntegratorConfig { dt: 2.0 * stability_bound(&s), ..ok },
            IntegratorConfig { t_max: -1.0, ..ok },
            IntegratorConfig { record_every: 0, ..ok },
            IntegratorConfig { steady_window: 1, ..ok },
            IntegratorConfig { steady_tol: 0.0, ..ok },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(&s), Err(Error::Parameter { .. })), "{cfg:?}");
        }
    }

    #[test]
    fn uncoupled_run_precesses_forever() {
        let mut s = model(0.0).hierarchy(&off_axis(), 3).unwrap();
        let cfg = IntegratorConfig { t_max: 200.0, steady_window: 200, ..IntegratorConfig::auto(&s) };
        let rec = evolve(&mut s, &cfg).unwrap();
        assert!(!rec.steady && rec.steady_time.is_none());
        assert_eq!(rec.samples.len(), 4001);
        assert!((rec.last().unwrap().t - 200.0).abs() < 1e-9);
        let r0 = rec.samples[0].bloch.norm();
        assert!(rec.samples.iter().all(|x| (x.bloch.norm() - r0).abs() < 1e-10));
        assert_eq!(rec.meta.depth, 3);
        assert_eq!(rec.meta.coupling, [1.0, 0.0, 0.0]);
        assert_eq!(rec.final_state, s.density());
    }

    #[test]
    fn gibbs_start_under_commuting_coupling_is_steady() {
        // X = sigma_z commutes with H and with the Gibbs state: nothing moves
        let m = HeomModel::new(BathParams::new(1.0, 1.0, 2.0 / 3.0).unwrap(), 1.0, [0.0, 0.0, 1.0]);
        let g = gibbs_state(2.0 / 3.0, 1.0).unwrap();
        let mut s = m.hierarchy(&g, 4).unwrap();
        let cfg = IntegratorConfig { steady_window: 20, ..IntegratorConfig::auto(&s) };
        let rec = evolve(&mut s, &cfg).unwrap();
        assert!(rec.steady);
        assert!((rec.steady_time.unwrap() - 19.0 * DEFAULT_RECORD_INTERVAL).abs() < 1e-9);
        assert!(rec.final_state.max_abs_diff(&g) < 1e-14);
    }

    #[test]
    fn invalid_config_reports_empty_partial() {
        let mut s = model(1.0).hierarchy(&off_axis(), 4).unwrap();
        let cfg = IntegratorConfig { dt: 1.0, ..IntegratorConfig::auto(&s) };
        let fail = evolve(&mut s, &cfg).unwrap_err();
        assert!(fail.partial.samples.is_empty());
        assert_eq!(fail.partial.final_state, off_axis());
        assert!(matches!(Error::from(fail), Error::Parameter { name: "dt", .. }));
    }

    #[test]
    fn default_step_matches_a_finer_one() {
        let m = model(3.0);
        let mut coarse = m.hierarchy(&off_axis(), 12).unwrap();
        let cfg = IntegratorConfig { t_max: 5.0, stop_at_steady: false, ..IntegratorConfig::auto(&coarse) };
        let fine_cfg = IntegratorConfig { dt: cfg.dt / 4.0, record_every: cfg.record_every * 4, ..cfg };
        let mut fine = m.hierarchy(&off_axis(), 12).unwrap();
        let a = evolve(&mut coarse, &cfg).unwrap();
        let b = evolve(&mut fine, &fine_cfg).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        assert!(a.max_bloch_distance(&b) < 1e-8, "{}", a.max_bloch_distance(&b));
    }

    #[test]
    fn convergence_check_cases() {
        let rho = off_axis();
        let cfg = |t_max| {
            let s = model(0.0).hierarchy(&rho, 10).unwrap();
            Some(IntegratorConfig { t_max, ..IntegratorConfig::auto(&s) })
        };
        assert!(convergence_check(&rho, &model(0.0), 2, 6, cfg(20.0)).unwrap() < 1e-14);
        assert!(convergence_check(&rho, &model(0.01), 5, 10, cfg(20.0)).unwrap() < 1e-6);
        assert!(convergence_check(&rho, &model(0.01), 5, 5, None).is_err());
    }

    #[test]
    fn bloch_series_follows_samples() {
        let mut s = model(0.5).hierarchy(&off_axis(), 3).unwrap();
        let cfg = IntegratorConfig { t_max: 1.0, ..IntegratorConfig::auto(&s) };
        let rec = evolve(&mut s, &cfg).unwrap();
        let series = bloch_series(&rec);
        assert_eq!(series.len(), rec.samples.len());
        assert!(series[0].distance(&BlochVector::new(0.6, 0.0, 0.3)) < 1e-15);
        assert_eq!(series.last(), Some(&rec.last().unwrap().bloch));
    }
}
