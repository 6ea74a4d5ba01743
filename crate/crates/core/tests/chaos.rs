use proptest::prelude::*;
use qfgcpe::chaos::{entropy_sweep, orbit, orbit_values, OrbitConfig, SweepSpec};
use qfgcpe::estimator::estimate;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orbit_stays_in_unit_interval(c in 0.0f64..=4.0, x0 in 0.001f64..0.999) {
        let cfg = OrbitConfig { c, x0, burn_in: 100, length: 500 };
        prop_assert!(orbit_values(&cfg).unwrap().iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

#[test]
fn fixed_point_orbits_have_zero_entropy() {
    for c in [0.0, 0.5, 1.5, 2.0, 2.5] {
        let s = orbit(&OrbitConfig::default().with_c(c)).unwrap();
        for eta in [0.25, 0.5, 0.75] {
            assert!(estimate(&s, eta).unwrap() < 1e-6, "c = {c}");
        }
    }
}

#[test]
fn chaotic_beats_periodic() {
    let spec = SweepSpec {
        c_grid: vec![3.2, 3.7],
        eta_grid: vec![0.25, 0.5, 0.75],
        orbit: OrbitConfig::default(),
    };
    let rows = entropy_sweep(&spec).unwrap();
    for k in 0..3 {
        assert!(rows[3 + k].qfgcpe > rows[k].qfgcpe);
    }
}
