mod common;

use common::{catalog, model, rel_close};
use proptest::prelude::*;
use qfgcpe::models::{affine, prhm, sample};
use qfgcpe::{ModelParams, QuantileModel};

fn grid() -> impl Iterator<Item = f64> {
    (1..200).map(|k| k as f64 / 200.0)
}

#[test]
fn reversed_hazard_identity() {
    for m in catalog() {
        for v in grid() {
            let r = m.reversed_hazard_quantile(v).unwrap();
            assert!((r * v * m.density(v) - 1.0).abs() < 1e-12, "{m} at {v}");
        }
    }
}

#[test]
fn davies_quantile_differentiates_to_density() {
    for (k, a, b) in [(1.0, -1.0, 0.0), (2.0, 0.5, -0.5), (1.0, -1.0, 2.0), (0.5, 1.0, 0.3)] {
        let m = model(ModelParams::Davies { k, a, b });
        let h = 1e-6;
        for j in 1..50 {
            let v = j as f64 / 50.0;
            let num = (m.quantile(v + h) - m.quantile(v - h)) / (2.0 * h);
            assert!(rel_close(num, m.density(v), 1e-3), "K={k} a={a} b={b} v={v}");
        }
    }
}

#[test]
fn draws_replay() {
    for m in catalog() {
        let a = sample(&m, 257, 7).unwrap();
        let b = sample(&m, 257, 7).unwrap();
        let bits = |s: &qfgcpe::Sample| s.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = sample(&m, 257, 8).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }
}

fn params() -> impl Strategy<Value = ModelParams> {
    prop_oneof![
        (0.1f64..10.0).prop_map(|b| ModelParams::Uniform { b }),
        (0.1f64..10.0).prop_map(|lambda| ModelParams::Exponential { lambda }),
        (0.1f64..5.0, 0.2f64..5.0).prop_map(|(a, b)| ModelParams::Power { a, b }),
        (0.1f64..5.0).prop_map(|k| ModelParams::HalfLogistic { k }),
        (0.5f64..6.0, 0.2f64..4.0).prop_map(|(a, b)| ModelParams::Frechet { a, b }),
        (-2.0f64..2.0, 0.1f64..3.0, 0.5f64..3.0).prop_map(|(alpha, beta, gamma)| ModelParams::Govindarajalu {
            alpha,
            beta,
            gamma
        }),
    ]
}

fn same_on_grid(x: &QuantileModel, y: &QuantileModel) -> bool {
    (1..100).all(|k| {
        let v = k as f64 / 100.0;
        rel_close(x.quantile(v), y.quantile(v), 1e-12) && rel_close(x.density(v), y.density(v), 1e-12)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rhq_identity(p in params(), v in 0.001f64..0.999) {
        let m = model(p);
        let r = m.reversed_hazard_quantile(v).unwrap();
        prop_assert!((r * v * m.density(v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prhm_commutes_with_scale(p in params(), a in 0.1f64..10.0, theta in 0.2f64..5.0) {
        let m = model(p);
        let left = prhm(&affine(&m, a, 0.0).unwrap(), theta).unwrap();
        let right = affine(&prhm(&m, theta).unwrap(), a, 0.0).unwrap();
        prop_assert!(same_on_grid(&left, &right));
        for k in 1..20 {
            let v = k as f64 / 20.0;
            prop_assert!(rel_close(left.quantile(v), a * m.quantile(v.powf(1.0 / theta)), 1e-12));
        }
    }

    #[test]
    fn quantile_is_nondecreasing(p in params()) {
        let m = model(p);
        let qs: Vec<f64> = grid().map(|v| m.quantile(v)).collect();
        prop_assert!(qs.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn transforms_parse_by_name() {
    use qfgcpe::models::Curvature;
    use qfgcpe::Transform;
    let t: Transform = "power:2.5".parse().unwrap();
    assert_eq!(t.curvature(), Curvature::Convex);
    assert!((t.apply(2.0) - 2f64.powf(2.5)).abs() < 1e-15);
    let s: Transform = "SQRT".parse().unwrap();
    assert_eq!(s.curvature(), Curvature::Concave);
    assert_eq!("log1p".parse::<Transform>().unwrap().name(), "ln(1+x)");
    assert_eq!("linear:3".parse::<Transform>().unwrap().curvature(), Curvature::Linear);
    for bad in ["cube", "power", "power:-1", "linear:x", "square:2"] {
        assert!(bad.parse::<Transform>().is_err(), "{bad}");
    }
}
