//! Steady-state geometry.
//!
//! The Gibbs state `G` and its pointer limit `P` (the Gibbs state dephased in
//! the pointer basis) span the projection line. Every state on it has the
//! Gibbs populations in the pointer basis.

use alloc::format;
use alloc::vec::Vec;

use crate::pointer::{elements_unchecked, project_unchecked};
use crate::thermal::gibbs_bloch;
use crate::{
    bloch_from_density, entropy_from_radius, gibbs_state, pointer_basis, BlochVector, Error, Operator2,
    PointerElements, Result,
};

/// Qubit splitting, temperature and coupling shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub coupling: [f64; 3],
    pub beta: f64,
    pub omega0: f64,
}

impl Geometry {
    pub fn new(coupling: [f64; 3], beta: f64, omega0: f64) -> Result<Self> {
        pointer_basis(coupling[0], coupling[1], coupling[2])?;
        gibbs_state(beta, omega0)?;
        Ok(Geometry { coupling, beta, omega0 })
    }

    pub fn gibbs(&self) -> BlochVector {
        gibbs_bloch(self.beta, self.omega0)
    }

    /// `P = sum_i |p_i><p_i| G |p_i><p_i|` as a density.
    pub fn pointer_limit_state(&self) -> Operator2 {
        let basis = pointer_basis(self.coupling[0], self.coupling[1], self.coupling[2]).expect("validated coupling");
        let g = gibbs_state(self.beta, self.omega0).expect("validated temperature");
        project_unchecked(&g, &basis)
    }

    pub fn pointer_limit(&self) -> BlochVector {
        crate::operator::bloch_unchecked(&self.pointer_limit_state())
    }

    /// Gibbs populations `<p_i| G |p_i>`.
    pub fn gibbs_diagonals(&self) -> [f64; 2] {
        let basis = pointer_basis(self.coupling[0], self.coupling[1], self.coupling[2]).expect("validated coupling");
        let g = gibbs_state(self.beta, self.omega0).expect("validated temperature");
        let el = elements_unchecked(&g, &basis);
        [el.d1, el.d2]
    }

    /// Entropy of the pointer limit, the upper bound of the entropy curve.
    pub fn pointer_limit_entropy(&self) -> f64 {
        entropy_from_radius(self.pointer_limit().norm())
    }
}

/// Bloch distance from `steady` to the pointer limit.
pub fn postulate1_deviation(steady: &Operator2, geometry: &Geometry) -> Result<f64> {
    let r = bloch_from_density(steady)?;
    Ok(r.distance(&geometry.pointer_limit()))
}

/// Distance from `r` to the segment `G -> P`.
pub fn projection_line_distance(r: BlochVector, geometry: &Geometry) -> Result<f64> {
    let g = geometry.gibbs();
    let p = geometry.pointer_limit();
    let axis = p - g;
    let len2 = axis.dot(&axis);
    if len2 < 1e-24 {
        return Err(Error::param(
            "coupling",
            format!("pointer limit coincides with the Gibbs state for {:?}", geometry.coupling),
        ));
    }
    let s = ((r - g).dot(&axis) / len2).clamp(0.0, 1.0);
    Ok(r.distance(&(g + axis.scaled(s))))
}

/// Steady state at one coupling strength, aggregated over initial states.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    /// Mean of the final states of all runs.
    pub steady: Operator2,
    pub bloch: BlochVector,
    pub elements: PointerElements,
    pub entropy: f64,
    /// Largest Bloch distance between the final states of two runs.
    pub spread: f64,
    /// Whether every run met the steady-state criterion.
    pub all_steady: bool,
}

impl SweepPoint {
    /// Aggregates the final states of the runs at one coupling strength.
    pub fn from_finals(lambda: f64, finals: &[Operator2], all_steady: bool, geometry: &Geometry) -> Result<Self> {
        if finals.is_empty() {
            return Err(Error::param("finals", "no runs to aggregate"));
        }
        let blochs = finals.iter().map(crate::operator::bloch_unchecked).collect::<Vec<_>>();
        let mut spread: f64 = 0.0;
        for (i, a) in blochs.iter().enumerate() {
            for b in &blochs[i + 1..] {
                spread = spread.max(a.distance(b));
            }
        }
        let mut steady = Operator2::zero();
        for f in finals {
            steady += *f * (1.0 / finals.len() as f64);
        }
        let basis = pointer_basis(geometry.coupling[0], geometry.coupling[1], geometry.coupling[2])?;
        let bloch = crate::operator::bloch_unchecked(&steady);
        Ok(SweepPoint {
            lambda,
            steady,
            bloch,
            elements: elements_unchecked(&steady, &basis),
            entropy: entropy_from_radius(bloch.norm()),
            spread,
            all_steady,
        })
    }
}

/// Steady states across a coupling-strength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub geometry: Geometry,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Requires strictly increasing `lambda`.
    pub fn new(geometry: Geometry, points: Vec<SweepPoint>) -> Result<Self> {
        if let Some(w) = points.windows(2).find(|w| !(w[1].lambda > w[0].lambda)) {
            return Err(Error::param(
                "lambda",
                format!("sweep values must be strictly increasing, got {} then {}", w[0].lambda, w[1].lambda),
            ));
        }
        Ok(SweepResult { geometry, points })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }
}

/// Largest deviation of a steady pointer population from its Gibbs value.
pub fn postulate2_deviation(sweep: &SweepResult) -> Result<f64> {
    if sweep.points.is_empty() {
        return Err(Error::param("sweep", "empty sweep"));
    }
    let [g1, g2] = sweep.geometry.gibbs_diagonals();
    Ok(sweep
        .points
        .iter()
        .map(|p| (p.elements.d1 - g1).abs().max((p.elements.d2 - g2).abs()))
        .fold(0.0, f64::max))
}

/// `(lambda, S)` per steady state.
pub fn entropy_curve(sweep: &SweepResult) -> Vec<(f64, f64)> {
    sweep.points.iter().map(|p| (p.lambda, p.entropy)).collect()
}

/// Whether `values` never drops by more than `slack` from one entry to the next.
pub fn is_non_decreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - slack)
}

/// Whether `values` never rises by more than `slack` from one entry to the next.
pub fn is_non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_from_bloch;
    use core::f64::consts::{FRAC_1_SQRT_2, LN_2};

    const BETA: f64 = 2.0 / 3.0;

    fn case_one() -> Geometry {
        Geometry::new([1.0, 0.0, 0.0], BETA, 1.0).unwrap()
    }

    fn case_two() -> Geometry {
        Geometry::new([0.5, 0.0, 0.5], BETA, 1.0).unwrap()
    }

    fn point(lambda: f64, r: BlochVector, g: &Geometry) -> SweepPoint {
        SweepPoint::from_finals(lambda, &[density_from_bloch(r).unwrap()], true, g).unwrap()
    }

    #[test]
    fn pointer_limits() {
        let th = (1.0f64 / 3.0).tanh();
        assert!(case_one().pointer_limit().norm() < 1e-15);
        let p = case_two().pointer_limit();
        assert!(p.distance(&BlochVector::new(-0.5 * th, 0.0, -0.5 * th)) < 1e-15);
        assert!((p.x + 0.160_756_368_765_817).abs() < 1e-12);
        let [d1, d2] = case_two().gibbs_diagonals();
        assert!((d1 - 0.5 * (1.0 - th * FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((d1 - 0.386_328_081_526_765).abs() < 1e-12 && (d1 + d2 - 1.0).abs() < 1e-15);
        assert!((case_one().pointer_limit_entropy() - LN_2).abs() < 1e-15);
        assert!((case_two().pointer_limit_entropy() - 0.667_077_2).abs() < 1e-7);
    }

    #[test]
    fn postulate1_examples() {
        let g1 = case_one();
        let gibbs = gibbs_state(BETA, 1.0).unwrap();
        assert!((postulate1_deviation(&gibbs, &g1).unwrap() - (1.0f64 / 3.0).tanh()).abs() < 1e-15);
        assert!(postulate1_deviation(&g1.pointer_limit_state(), &g1).unwrap() < 1e-15);
        let g2 = case_two();
        assert!(postulate1_deviation(&g2.pointer_limit_state(), &g2).unwrap() < 1e-15);
        assert!(postulate1_deviation(&Operator2::sigma_x(), &g1).is_err());
    }

    #[test]
    fn projection_line_examples() {
        let g = case_two();
        let (a, b) = (g.gibbs(), g.pointer_limit());
        assert!(projection_line_distance(a, &g).unwrap() < 1e-15);
        assert!(projection_line_distance((a + b).scaled(0.5), &g).unwrap() < 1e-15);
        // beyond the endpoints the distance is to the nearest endpoint
        let past = b + (b - a).scaled(0.5);
        assert!((projection_line_distance(past, &g).unwrap() - past.distance(&b)).abs() < 1e-15);
        // perpendicular offset from the midpoint
        let off = (a + b).scaled(0.5) + BlochVector::new(0.0, 0.03, 0.0);
        assert!((projection_line_distance(off, &g).unwrap() - 0.03).abs() < 1e-15);
        let energy_basis = Geometry::new([0.0, 0.0, 1.0], BETA, 1.0).unwrap();
        assert!(projection_line_distance(a, &energy_basis).is_err());
    }

    #[test]
    fn postulate2_on_the_projection_line() {
        let g = case_two();
        let (a, b) = (g.gibbs(), g.pointer_limit());
        let points = [0.0, 0.3, 0.7, 1.0]
            .iter()
            .enumerate()
            .map(|(k, s)| point(k as f64 + 1.0, a + (b - a).scaled(*s), &g))
            .collect();
        let sweep = SweepResult::new(g, points).unwrap();
        assert!(postulate2_deviation(&sweep).unwrap() < 1e-15);
        let curve = entropy_curve(&sweep);
        assert!(is_non_decreasing(&curve.iter().map(|c| c.1).collect::<Vec<_>>(), 0.0));
        assert!(curve.last().unwrap().1 <= g.pointer_limit_entropy() + 1e-15);
        assert!(postulate2_deviation(&SweepResult::new(g, Vec::new()).unwrap()).is_err());
    }

    #[test]
    fn sweep_points_aggregate_runs() {
        let g = case_one();
        let finals = [
            density_from_bloch(BlochVector::new(0.0, 0.0, -0.3)).unwrap(),
            density_from_bloch(BlochVector::new(0.0, 0.0, -0.2)).unwrap(),
        ];
        let p = SweepPoint::from_finals(1.0, &finals, false, &g).unwrap();
        assert!((p.spread - 0.1).abs() < 1e-15);
        assert!(p.bloch.distance(&BlochVector::new(0.0, 0.0, -0.25)) < 1e-15);
        assert!((p.elements.d1 - 0.5).abs() < 1e-15);
        assert!(!p.all_steady);
        assert!(SweepPoint::from_finals(1.0, &[], true, &g).is_err());
        let twice = [point(1.0, BlochVector::ORIGIN, &g), point(1.0, BlochVector::ORIGIN, &g)];
        assert!(SweepResult::new(g, twice.to_vec()).is_err());
    }

    #[test]
    fn monotonicity_helpers() {
        assert!(is_non_decreasing(&[0.1, 0.2, 0.1995], 1e-3));
        assert!(!is_non_decreasing(&[0.1, 0.2, 0.19], 1e-3));
        assert!(is_non_increasing(&[0.3, 0.2, 0.2005], 1e-3));
        assert!(!is_non_increasing(&[0.3, 0.2, 0.21], 1e-3));
        assert!(is_non_decreasing(&[], 0.0));
    }
}
