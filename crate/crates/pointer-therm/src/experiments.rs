//! Single runs and coupling-strength sweeps over a roster of initial states.

use pointer_therm_core::analysis::{Geometry, SweepPoint, SweepResult};
use pointer_therm_core::bath::BathParams;
use pointer_therm_core::heom::{evolve, EvolveFailure, HeomModel, HierarchyState, IntegratorConfig};
use pointer_therm_core::{BlochVector, InvariantStats, Operator2, TrajectoryRecord};
use rayon::prelude::*;

use crate::config::{InitialState, RunConfig, DEFAULT_T_MAX};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "POINTER_THERM_THREADS";

/// Horizon for sweeps when none is configured; the slowest strong-coupling
/// relaxation needs close to 2000 time units to pass the steady test.
pub const SWEEP_T_MAX: f64 = 4000.0;

/// Initial states every sweep point is started from.
pub const ROSTER: [InitialState; 5] = [
    InitialState::Psi1,
    InitialState::Psi2,
    InitialState::Bloch(BlochVector::new(0.3, 0.3, 0.3)),
    InitialState::Bloch(BlochVector::new(-0.5, 0.0, 0.0)),
    InitialState::Bloch(BlochVector::new(0.0, 0.7, -0.2)),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub omega0: f64,
    pub temperature: f64,
    pub gamma: f64,
    pub coupling: [f64; 3],
}

impl Physics {
    pub fn from_config(c: &RunConfig) -> Self {
        Physics { omega0: c.omega0, temperature: c.temperature, gamma: c.gamma_drude, coupling: c.coupling }
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn bath(&self, lambda: f64) -> pointer_therm_core::Result<BathParams> {
        BathParams::new(lambda, self.gamma, self.beta())
    }

    pub fn model(&self, lambda: f64) -> pointer_therm_core::Result<HeomModel> {
        Ok(HeomModel::new(self.bath(lambda)?, self.omega0, self.coupling))
    }

    pub fn geometry(&self) -> pointer_therm_core::Result<Geometry> {
        Geometry::new(self.coupling, self.beta(), self.omega0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub depth: usize,
    /// `None` picks the step from the stability bound.
    pub dt: Option<f64>,
    pub t_max: f64,
    pub steady_tol: f64,
    pub stop_at_steady: bool,
}

impl EngineConfig {
    pub fn from_config(c: &RunConfig, default_t_max: f64) -> Self {
        EngineConfig {
            depth: c.depth,
            dt: c.dt,
            t_max: c.t_max_or(default_t_max),
            steady_tol: c.steady_tol,
            stop_at_steady: true,
        }
    }

    pub fn integrator(&self, state: &HierarchyState) -> IntegratorConfig {
        let mut cfg = match self.dt {
            Some(dt) => IntegratorConfig::with_dt(dt),
            None => IntegratorConfig::auto(state),
        };
        cfg.t_max = self.t_max;
        cfg.steady_tol = self.steady_tol;
        cfg.stop_at_steady = self.stop_at_steady;
        cfg
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { depth: 60, dt: None, t_max: DEFAULT_T_MAX, steady_tol: 1e-6, stop_at_steady: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] pointer_therm_core::Error),

    #[error("lambda = {lambda}, initial state {label}: {failure}")]
    Numerical { lambda: f64, label: String, failure: Box<EvolveFailure> },

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    /// The trajectory recorded before a numerical failure, if any.
    pub fn partial(&self) -> Option<&TrajectoryRecord> {
        match self {
            RunError::Numerical { failure, .. } => Some(&failure.partial),
            _ => None,
        }
    }
}

/// One hierarchy run from `initial` at coupling strength `lambda`.
pub fn simulate(
    physics: &Physics,
    lambda: f64,
    initial: &InitialState,
    engine: &EngineConfig,
) -> Result<TrajectoryRecord, RunError> {
    let rho0 = initial.density(physics.beta(), physics.omega0)?;
    simulate_from(physics, lambda, &rho0, &initial.label(), engine)
}

pub fn simulate_from(
    physics: &Physics,
    lambda: f64,
    rho0: &Operator2,
    label: &str,
    engine: &EngineConfig,
) -> Result<TrajectoryRecord, RunError> {
    let mut state = physics.model(lambda)?.hierarchy(rho0, engine.depth)?;
    let cfg = engine.integrator(&state);
    evolve(&mut state, &cfg).map_err(|failure| match failure.error {
        pointer_therm_core::Error::Blowup { .. } => {
            RunError::Numerical { lambda, label: label.to_string(), failure: Box::new(failure) }
        }
        other => RunError::Core(other),
    })
}

/// What a sweep keeps of each run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub lambda: f64,
    pub label: String,
    pub steady: bool,
    pub steady_time: Option<f64>,
    pub final_state: Operator2,
    pub final_time: f64,
    pub invariants: InvariantStats,
    pub dt: f64,
}

impl RunSummary {
    pub fn from_record(label: String, record: &TrajectoryRecord) -> Self {
        RunSummary {
            lambda: record.meta.lambda,
            label,
            steady: record.steady,
            steady_time: record.steady_time,
            final_state: record.final_state,
            final_time: record.last().map_or(0.0, |s| s.t),
            invariants: record.invariants,
            dt: record.meta.dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub sweep: SweepResult,
    /// Every run, ordered by `lambda` and then by roster position.
    pub runs: Vec<RunSummary>,
    /// Full trajectory of the first roster state at each `lambda`.
    pub trajectories: Vec<TrajectoryRecord>,
}

impl CaseResult {
    pub fn unsteady(&self) -> Vec<&RunSummary> {
        self.runs.iter().filter(|r| !r.steady).collect()
    }

    pub fn invariants(&self) -> InvariantStats {
        let mut total = InvariantStats::default();
        for r in &self.runs {
            total.merge(&r.invariants);
        }
        total
    }

    /// Largest distance between final Bloch vectors at a common `lambda`.
    pub fn max_spread(&self) -> f64 {
        self.sweep.points.iter().map(|p| p.spread).fold(0.0, f64::max)
    }
}

/// Thread count for sweeps: the value of [`THREADS_ENV`] when it parses as
/// a positive integer, otherwise the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every roster state at every `lambda`. Runs that never pass the
/// steady test are kept and show up in [`CaseResult::unsteady`].
pub fn run_case(
    physics: &Physics,
    lambdas: &[f64],
    roster: &[InitialState],
    engine: &EngineConfig,
    threads: usize,
) -> Result<CaseResult, RunError> {
    if roster.is_empty() {
        return Err(pointer_therm_core::Error::Parameter { name: "roster", reason: "no initial states".into() }.into());
    }
    let geometry = physics.geometry()?;
    for &lambda in lambdas {
        physics.bath(lambda)?;
    }
    let tasks: Vec<(f64, usize)> = lambdas.iter().flat_map(|&l| (0..roster.len()).map(move |i| (l, i))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let outcomes: Vec<Result<(RunSummary, Option<TrajectoryRecord>), RunError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(lambda, i)| {
                let record = simulate(physics, lambda, &roster[i], engine)?;
                let summary = RunSummary::from_record(roster[i].label(), &record);
                Ok((summary, (i == 0).then_some(record)))
            })
            .collect()
    });

    let mut runs = Vec::with_capacity(tasks.len());
    let mut trajectories = Vec::with_capacity(lambdas.len());
    for outcome in outcomes {
        let (summary, record) = outcome?;
        runs.push(summary);
        trajectories.extend(record);
    }
    let points = runs
        .chunks(roster.len())
        .map(|chunk| {
            let finals: Vec<Operator2> = chunk.iter().map(|r| r.final_state).collect();
            SweepPoint::from_finals(chunk[0].lambda, &finals, chunk.iter().all(|r| r.steady), &geometry)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CaseResult { sweep: SweepResult::new(geometry, points)?, runs, trajectories })
}
