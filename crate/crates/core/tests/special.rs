use proptest::prelude::*;
use qfgcpe::special::{gamma, lerch_phi, ln_gamma, polylog, riemann_zeta, tricomi_u, SeriesControl};

fn ctl() -> SeriesControl {
    SeriesControl::precise()
}

#[test]
fn zeta_values_and_tail() {
    let z2 = riemann_zeta(2.0, &ctl()).unwrap();
    assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
    let z20 = riemann_zeta(20.0, &ctl()).unwrap();
    assert!(z20 > 1.0 && z20 < 1.0 + 2e-6);
    let vals: Vec<f64> = (0..40).map(|k| riemann_zeta(1.05 + 0.25 * k as f64, &ctl()).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(riemann_zeta(1.0, &ctl()).is_err());
}

#[test]
fn gamma_recurrence() {
    for x in [0.3, 0.7, 1.5, 3.2] {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs());
        assert!((ln_gamma(x).unwrap() - gamma(x).unwrap().ln()).abs() < 1e-12);
    }
    assert!((gamma(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-14);
}

#[test]
fn dilog_at_half() {
    let want = std::f64::consts::PI.powi(2) / 12.0 - std::f64::consts::LN_2.powi(2) / 2.0;
    assert!((polylog(2.0, 0.5, &ctl()).unwrap() - want).abs() < 1e-12);
}

#[test]
fn tricomi_elementary_case() {
    // U(1, 1, z) = e^z E1(z); U(a, a+1, z) = z^{-a}.
    for z in [0.3, 1.0, 4.0] {
        let u = tricomi_u(1.5, 2.5, z).unwrap();
        assert!((u - z.powf(-1.5)).abs() < 1e-10 * u);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn polylog_bounded_and_increasing(s in 1.1f64..6.0, z in 0.0f64..0.98, dz in 0.001f64..0.02) {
        let zeta = riemann_zeta(s, &ctl()).unwrap();
        let a = polylog(s, z, &ctl()).unwrap();
        let b = polylog(s, z + dz, &ctl()).unwrap();
        prop_assert!(a <= zeta);
        prop_assert!(b <= zeta);
        prop_assert!(b > a || z == 0.0 && a == 0.0);
    }

    #[test]
    fn lerch_first_index_is_polylog(s in 1.1f64..6.0, z in 0.01f64..0.99) {
        let phi = lerch_phi(z, s, 1.0, &ctl()).unwrap();
        let li = polylog(s, z, &ctl()).unwrap();
        prop_assert!((phi * z - li).abs() <= 1e-12 * li.abs());
    }

    #[test]
    fn lerch_shift(s in 1.1f64..4.0, z in 0.01f64..0.95, a in 0.5f64..5.0) {
        // Φ(z, s, a) = a^{-s} + z Φ(z, s, a + 1)
        let lhs = lerch_phi(z, s, a, &ctl()).unwrap();
        let rhs = a.powf(-s) + z * lerch_phi(z, s, a + 1.0, &ctl()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
    }
}
