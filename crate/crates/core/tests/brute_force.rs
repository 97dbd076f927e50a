//! The index-naive right-hand side against the production generator.

use pointer_therm_core::bath::BathParams;
use pointer_therm_core::heom::HeomModel;
use pointer_therm_core::oracles::naive_derivative;
use pointer_therm_core::{Operator2, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(rng: &mut ChaCha8Rng) -> Operator2 {
    let a = rng.gen_range(-1.0..1.0);
    let d = rng.gen_range(-1.0..1.0);
    let off = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Operator2::new(C64::from(a), off, off.conj(), C64::from(d))
}

fn random_density(rng: &mut ChaCha8Rng) -> Operator2 {
    let r: [f64; 3] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    let (sx, sy, sz) = (Operator2::sigma_x(), Operator2::sigma_y(), Operator2::sigma_z());
    (Operator2::identity() + sx * r[0] + sy * r[1] + sz * r[2]) * 0.5
}

#[test]
fn production_derivative_matches_nested_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..40 {
        let depth = 1 + trial % 3;
        let lambda = [0.01, 0.7, 2.0, 5.0][trial % 4];
        let coupling = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let model = HeomModel::new(BathParams::new(lambda, rng.gen_range(0.3..2.0), 2.0 / 3.0).unwrap(), 1.0, coupling);
        let rho = random_density(&mut rng);
        let mut state = model.hierarchy(&rho, depth).unwrap();
        let mut ados = state.ados();
        for a in ados.iter_mut().skip(1) {
            *a = random_hermitian(&mut rng);
        }
        state.set_ados(&ados).unwrap();

        let layout = state.layout();
        let reference = naive_derivative(&state);
        let production = state.derivative().unwrap();
        assert_eq!(reference.len(), production.len());
        for (k, d) in production.iter().enumerate() {
            let diff = d.max_abs_diff(&reference[k]);
            assert!(diff < 1e-13, "trial {trial}, member {:?}: {diff:e}", layout.indices(k));
        }
    }
}

#[test]
fn ado_round_trip_through_storage() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = HeomModel::new(BathParams::new(3.0, 1.0, 2.0 / 3.0).unwrap(), 1.0, [0.5, 0.0, 0.5]);
    let mut state = model.hierarchy(&random_density(&mut rng), 6).unwrap();
    let mut ados = state.ados();
    for a in ados.iter_mut().skip(1) {
        *a = random_hermitian(&mut rng);
    }
    state.set_ados(&ados).unwrap();
    for (a, b) in state.ados().iter().zip(&ados) {
        assert!(a.max_abs_diff(b) < 1e-12 * (1.0 + b.frobenius_norm()));
    }
}
