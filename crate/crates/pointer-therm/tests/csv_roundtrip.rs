use pointer_therm::table::{read_rows, read_sweep, read_trajectory, write_rows, write_sweep, write_trajectory, SWEEP_COLUMNS, TRAJECTORY_COLUMNS};
use pointer_therm_core::analysis::{Geometry, SweepPoint, SweepResult};
use pointer_therm_core::{density_from_bloch, BlochVector, PointerBasis, RunMetadata, TrajectoryRecord};
use proptest::prelude::*;
use std::path::Path;

fn bloch() -> impl Strategy<Value = BlochVector> {
    (-0.57f64..0.57, -0.57f64..0.57, -0.57f64..0.57).prop_map(|(x, y, z)| BlochVector::new(x, y, z))
}

proptest! {
    #[test]
    fn raw_rows_round_trip(rows in prop::collection::vec(prop::array::uniform9(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL), 0..20)) {
        let mut buf = Vec::new();
        write_rows(&mut buf, Path::new("mem"), &TRAJECTORY_COLUMNS, &rows).unwrap();
        let back = read_rows(buf.as_slice(), Path::new("mem"), &TRAJECTORY_COLUMNS).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn trajectory_file_round_trip(states in prop::collection::vec(bloch(), 0..12), t0 in 0.0f64..10.0) {
        let basis = PointerBasis::from_operator(&pointer_therm_core::Operator2::sigma_x()).unwrap();
        let mut record = TrajectoryRecord::new(RunMetadata::default());
        for (k, r) in states.iter().enumerate() {
            record.observe(t0 + 0.05 * k as f64, &density_from_bloch(*r).unwrap(), &basis);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("traj.csv");
        write_trajectory(&path, &record).unwrap();
        let back = read_trajectory(&path).unwrap();
        prop_assert_eq!(back.len(), states.len());
        for (row, s) in back.iter().zip(&record.samples) {
            prop_assert_eq!(*row, [s.t, s.bloch.x, s.bloch.y, s.bloch.z, s.entropy, s.p1_diag, s.p2_diag, s.offdiag.re, s.offdiag.im]);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        prop_assert_eq!(text.lines().count(), states.len() + 1);
    }

    #[test]
    fn sweep_file_round_trip(states in prop::collection::vec(bloch(), 1..6)) {
        let geometry = Geometry::new([0.5, 0.0, 0.5], 2.0 / 3.0, 1.0).unwrap();
        let points: Vec<SweepPoint> = states
            .iter()
            .enumerate()
            .map(|(k, r)| SweepPoint::from_finals(k as f64 + 0.5, &[density_from_bloch(*r).unwrap()], true, &geometry).unwrap())
            .collect();
        let sweep = SweepResult::new(geometry, points).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep(&path, &sweep).unwrap();
        let back = read_sweep(&path).unwrap();
        prop_assert_eq!(back.len(), sweep.points.len());
        for (row, p) in back.iter().zip(&sweep.points) {
            prop_assert_eq!(row[0], p.lambda);
            prop_assert_eq!([row[1], row[2], row[3]], p.bloch.to_array());
            prop_assert_eq!(row[7], p.elements.offdiag.norm());
        }
        let header = std::fs::read_to_string(&path).unwrap().lines().next().unwrap().to_string();
        prop_assert_eq!(header, SWEEP_COLUMNS.join(","));
    }
}
