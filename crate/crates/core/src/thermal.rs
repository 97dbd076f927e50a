//! Gibbs states and von Neumann entropy of a qubit.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::operator::EIGEN_TOL;
use crate::{density_from_bloch, BlochVector, Error, Operator2, Result};

/// Gibbs state of `H = omega0 / 2 sigma_z` at inverse temperature `beta`.
pub fn gibbs_state(beta: f64, omega0: f64) -> Result<Operator2> {
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("must be positive, got {beta}")));
    }
    if !(omega0 > 0.0) {
        return Err(Error::param("omega0", format!("must be positive, got {omega0}")));
    }
    density_from_bloch(gibbs_bloch(beta, omega0))
}

/// `-tanh(beta omega0 / 2) e_z`.
pub fn gibbs_bloch(beta: f64, omega0: f64) -> BlochVector {
    BlochVector::new(0.0, 0.0, -(0.5 * beta * omega0).tanh())
}

/// Entropy of a valid density, from its eigenvalues.
pub fn von_neumann_entropy(rho: &Operator2) -> Result<f64> {
    rho.validate_density()?;
    let eig = rho.hermitian_eigenvalues();
    if let Some(bad) = eig.iter().find(|&&p| p < -EIGEN_TOL) {
        return Err(Error::state(format!("negative eigenvalue {bad:e}")));
    }
    Ok(eig.iter().map(|&p| -xlnx(p.max(0.0))).sum())
}

/// `ln 2 - [(1+r) ln(1+r) + (1-r) ln(1-r)] / 2`, with `r` clamped to `[0, 1]`.
pub fn entropy_from_radius(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    core::f64::consts::LN_2 - 0.5 * (xlnx(1.0 + r) + xlnx(1.0 - r))
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

#[cfg(test)]
pub(crate) use tests::bloch_strategy;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch_from_density;
    use core::f64::consts::LN_2;
    use proptest::prelude::*;

    #[test]
    fn gibbs_limits() {
        let hot = gibbs_state(1e-9, 1.0).unwrap();
        assert!(hot.max_abs_diff(&(Operator2::identity() * 0.5)) < 1e-8);
        let r = bloch_from_density(&gibbs_state(2.0 / 3.0, 1.0).unwrap()).unwrap();
        assert!((r.z + 0.321513).abs() < 1e-6);
        assert_eq!((r.x, r.y), (0.0, 0.0));
        let cold = bloch_from_density(&gibbs_state(100.0, 1.0).unwrap()).unwrap();
        assert!((cold.z + 1.0).abs() < 1e-10);
    }

    #[test]
    fn gibbs_rejects_bad_parameters() {
        assert!(matches!(gibbs_state(0.0, 1.0), Err(Error::Parameter { name: "beta", .. })));
        assert!(matches!(gibbs_state(-1.0, 1.0), Err(Error::Parameter { name: "beta", .. })));
        assert!(matches!(gibbs_state(1.0, 0.0), Err(Error::Parameter { name: "omega0", .. })));
    }

    #[test]
    fn entropy_reference_values() {
        let mixed = Operator2::identity() * 0.5;
        assert!((von_neumann_entropy(&mixed).unwrap() - LN_2).abs() < 1e-15);
        let pure = density_from_bloch(BlochVector::new(0.6, 0.0, 0.8)).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-10);
        let g = gibbs_state(2.0 / 3.0, 1.0).unwrap();
        let s = von_neumann_entropy(&g).unwrap();
        // eigenvalues (1 -+ tanh(1/3)) / 2 by hand
        let t = (1.0f64 / 3.0).tanh();
        let (p, q) = (0.5 * (1.0 - t), 0.5 * (1.0 + t));
        let brute = -(p * p.ln() + q * q.ln());
        assert!((s - brute).abs() < 1e-14);
        assert!((s - 0.640_532_507_674_861).abs() < 1e-12);
        assert!((entropy_from_radius(t) - s).abs() < 1e-10);
    }

    #[test]
    fn entropy_rejects_non_positive_operator() {
        let bad = Operator2::from_real_pauli([0.5, 0.0, 0.0, 0.6]);
        assert!(von_neumann_entropy(&bad).is_err());
    }

    pub(crate) fn random_bloch() -> impl Strategy<Value = BlochVector> {
        (0.0f64..=1.0, -1.0f64..=1.0, 0.0f64..core::f64::consts::TAU).prop_map(|(u, cz, phi)| {
            let r = u.cbrt();
            let sz = (1.0 - cz * cz).sqrt();
            BlochVector::new(r * sz * phi.cos(), r * sz * phi.sin(), r * cz)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn entropy_eigen_route_matches_closed_form(r in random_bloch()) {
            let rho = density_from_bloch(r).unwrap();
            let s = von_neumann_entropy(&rho).unwrap();
            prop_assert!((s - entropy_from_radius(r.norm())).abs() < 1e-10);
            prop_assert!((0.0..=LN_2 + 1e-15).contains(&s));
        }

        #[test]
        fn bloch_round_trip(r in random_bloch()) {
            let back = bloch_from_density(&density_from_bloch(r).unwrap()).unwrap();
            prop_assert!(back.distance(&r) < 1e-12);
        }
    }

    pub(crate) use random_bloch as bloch_strategy;
}
