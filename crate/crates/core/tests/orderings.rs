mod common;

use common::{catalog, model};
use proptest::prelude::*;
use qfgcpe::entropy::{qfgcpe, EntropyQuery};
use qfgcpe::models::affine;
use qfgcpe::orderings::{
    check_order, check_theorem_implication, classify_dqfgcpe_monotonicity, curated_suite, default_v_grid, OrderKind,
    OrderOptions, Relation, Theorem, TheoremInputs,
};
use qfgcpe::quadrature::QuadratureControl;
use qfgcpe::{ModelParams, Transform};

const KINDS: [OrderKind; 5] = [OrderKind::Hq, OrderKind::Rhq, OrderKind::Disp, OrderKind::Qfgcpe, OrderKind::Dqfgcpe];

#[test]
fn every_order_is_reflexive() {
    let opts = OrderOptions::with_eta(0.75);
    for m in catalog() {
        for k in KINDS {
            let v = check_order(k, &m, &m, &opts).unwrap();
            assert_eq!(v.relation, Relation::Holds, "{m} {k}");
            assert!(v.witness.is_none());
        }
    }
}

#[test]
fn exponential_pair() {
    let x = model(ModelParams::Exponential { lambda: 2.0 });
    let y = model(ModelParams::Exponential { lambda: 1.0 });
    let opts = OrderOptions::with_eta(0.5);
    assert!(check_order(OrderKind::Disp, &x, &y, &opts).unwrap().holds());
    assert!(check_order(OrderKind::Qfgcpe, &x, &y, &opts).unwrap().holds());
    let cx = qfgcpe(&EntropyQuery::new(x.clone(), 0.5)).unwrap().value;
    let cy = qfgcpe(&EntropyQuery::new(y.clone(), 0.5)).unwrap().value;
    assert!((cx - 0.8062).abs() < 1e-4 && (cy - 1.6124).abs() < 1e-4);
    let fails = check_order(OrderKind::Qfgcpe, &y, &x, &opts).unwrap();
    assert_eq!(fails.relation, Relation::Fails);
    let w = fails.witness.unwrap();
    assert!(w.v.is_none() && w.lhs > w.rhs);

    // The larger rate gives the smaller dynamic entropy.
    assert!(check_order(OrderKind::Dqfgcpe, &x, &y, &opts).unwrap().holds());
    assert_eq!(check_order(OrderKind::Dqfgcpe, &y, &x, &opts).unwrap().relation, Relation::Fails);
    let r = check_theorem_implication(Theorem::T2_2, &TheoremInputs::new(x, y, 0.5)).unwrap();
    assert!(r.hypothesis_holds && r.conclusion_holds && r.consistent);
}

#[test]
fn uniform_scale_pair() {
    let x = model(ModelParams::Uniform { b: 1.0 });
    let y = model(ModelParams::Uniform { b: 2.0 });
    let mut inputs = TheoremInputs::new(x.clone(), y.clone(), 1.0);
    inputs.options.v_grid = Some(vec![0.25, 0.5, 0.75]);
    let r = check_theorem_implication(Theorem::T3_3, &inputs).unwrap();
    assert!(r.hypothesis_holds && r.conclusion_holds && !r.falsified);
    let r = check_theorem_implication(Theorem::T3_2, &inputs.clone().with_psi(Transform::square())).unwrap();
    assert!(r.hypothesis_holds && r.conclusion_holds, "{}", r.detail);
}

#[test]
fn classification_ignores_shift() {
    let grid = default_v_grid(60);
    let q = QuadratureControl::default();
    for m in catalog() {
        let a = classify_dqfgcpe_monotonicity(&m, 0.75, &grid, &q).unwrap();
        let b = classify_dqfgcpe_monotonicity(&affine(&m, 1.0, 3.0).unwrap(), 0.75, &grid, &q).unwrap();
        assert_eq!(a, b, "{m}");
    }
}

#[test]
fn entropy_orders_need_eta() {
    let u = model(ModelParams::Uniform { b: 1.0 });
    assert!(check_order(OrderKind::Qfgcpe, &u, &u, &OrderOptions::default()).is_err());
    assert!(check_order(OrderKind::Dqfgcpe, &u, &u, &OrderOptions::default()).is_err());
    assert!(check_order(OrderKind::Hq, &u, &u, &OrderOptions::default()).unwrap().holds());
}

#[test]
fn suite_covers_the_catalog() {
    let suite = curated_suite().unwrap();
    assert_eq!(suite.len(), 10);
    for kind in ModelParams::KINDS {
        assert!(suite.iter().any(|p| p.x.name().contains(kind) || p.y.name().contains(kind)), "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn qfgcpe_verdicts_never_contradict(l1 in 0.2f64..5.0, l2 in 0.2f64..5.0, eta in 0.2f64..2.0) {
        let x = model(ModelParams::Exponential { lambda: l1 });
        let y = model(ModelParams::Exponential { lambda: l2 });
        let opts = OrderOptions::with_eta(eta);
        let xy = check_order(OrderKind::Qfgcpe, &x, &y, &opts).unwrap();
        let yx = check_order(OrderKind::Qfgcpe, &y, &x, &opts).unwrap();
        prop_assert!(xy.not_refuted() || yx.not_refuted());
        if xy.relation == Relation::Fails && yx.relation == Relation::Fails {
            prop_assert!(false, "both directions fail");
        }
        if let Some(w) = xy.witness.filter(|_| xy.relation == Relation::Fails) {
            prop_assert!((w.lhs - w.rhs).abs() > 2e-10);
        }
    }

    #[test]
    fn disp_matches_scale(b1 in 0.1f64..5.0, b2 in 0.1f64..5.0) {
        let x = model(ModelParams::Uniform { b: b1 });
        let y = model(ModelParams::Uniform { b: b2 });
        let v = check_order(OrderKind::Disp, &x, &y, &OrderOptions::default()).unwrap();
        prop_assert_eq!(v.holds(), b1 <= b2);
    }
}
