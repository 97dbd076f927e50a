//! Time series of qubit observables produced by every solver in the crate.

use alloc::vec::Vec;

use crate::operator::bloch_unchecked;
use crate::pointer::elements_unchecked;
use crate::{entropy_from_radius, BlochVector, Operator2, PointerBasis, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub bloch: BlochVector,
    pub entropy: f64,
    pub p1_diag: f64,
    pub p2_diag: f64,
    pub offdiag: C64,
}

impl TrajectorySample {
    /// Observables of `rho` at time `t`. No validation: solvers may produce
    /// states a hair outside the Bloch ball, and the entropy clamps `|r|`.
    pub fn from_density(t: f64, rho: &Operator2, basis: &PointerBasis) -> Self {
        let bloch = bloch_unchecked(rho);
        let el = elements_unchecked(rho, basis);
        TrajectorySample {
            t,
            bloch,
            entropy: entropy_from_radius(bloch.norm()),
            p1_diag: el.d1,
            p2_diag: el.d2,
            offdiag: el.offdiag,
        }
    }
}

/// Parameters a trajectory was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMetadata {
    pub lambda: f64,
    pub gamma: f64,
    pub beta: f64,
    pub omega0: f64,
    pub coupling: [f64; 3],
    /// Hierarchy depth; zero for solvers without a hierarchy.
    pub depth: usize,
    pub dt: f64,
}

/// Worst structural violations seen over every recorded sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantStats {
    /// Largest `|tr rho - 1|`.
    pub trace: f64,
    /// Largest `max |rho - rho^dagger|`.
    pub hermiticity: f64,
    /// Largest `|r| - 1`, floored at zero.
    pub bloch_excess: f64,
    /// Largest `|d1 + d2 - 1|`.
    pub populations: f64,
}

impl InvariantStats {
    pub fn update(&mut self, rho: &Operator2, sample: &TrajectorySample) {
        self.trace = self.trace.max((rho.trace() - C64::new(1.0, 0.0)).norm());
        self.hermiticity = self.hermiticity.max(rho.hermiticity_error());
        self.bloch_excess = self.bloch_excess.max(sample.bloch.norm() - 1.0);
        self.populations = self.populations.max((sample.p1_diag + sample.p2_diag - 1.0).abs());
    }

    pub fn merge(&mut self, other: &InvariantStats) {
        self.trace = self.trace.max(other.trace);
        self.hermiticity = self.hermiticity.max(other.hermiticity);
        self.bloch_excess = self.bloch_excess.max(other.bloch_excess);
        self.populations = self.populations.max(other.populations);
    }

    /// True when every entry is within `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.trace <= tol && self.hermiticity <= tol && self.bloch_excess <= tol && self.populations <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub meta: RunMetadata,
    pub samples: Vec<TrajectorySample>,
    /// Whether the steady-state detector fired before the horizon.
    pub steady: bool,
    pub steady_time: Option<f64>,
    /// Reduced density at the last integrated time.
    pub final_state: Operator2,
    pub invariants: InvariantStats,
}

impl TrajectoryRecord {
    pub fn new(meta: RunMetadata) -> Self {
        TrajectoryRecord {
            meta,
            samples: Vec::new(),
            steady: false,
            steady_time: None,
            final_state: Operator2::zero(),
            invariants: InvariantStats::default(),
        }
    }

    /// Appends the observables of `rho` at `t` and folds it into the
    /// invariant statistics.
    pub fn observe(&mut self, t: f64, rho: &Operator2, basis: &PointerBasis) -> TrajectorySample {
        let sample = TrajectorySample::from_density(t, rho, basis);
        self.invariants.update(rho, &sample);
        self.samples.push(sample);
        sample
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn final_bloch(&self) -> BlochVector {
        bloch_unchecked(&self.final_state)
    }

    /// Largest Bloch distance between two records sampled on the same time
    /// grid, over their common prefix.
    pub fn max_bloch_distance(&self, other: &TrajectoryRecord) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.bloch.distance(&b.bloch))
            .fold(0.0, f64::max)
    }
}
