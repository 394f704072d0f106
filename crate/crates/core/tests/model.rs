use lolight3::model::{check_invariance, metric_coords, lattice_action, parse_word, LatticeSpec, MetricSpec};
use lolight3::periodic::{PeriodicFn2D, ThetaSpec};
use lolight3::corpus::CORPUS;
use proptest::prelude::*;

#[test]
fn corpus_json_round_trips() {
    for e in CORPUS.iter() {
        let spec = e.spec().unwrap();
        assert_eq!(MetricSpec::from_json(&spec.to_json()).unwrap(), spec, "{}", e.name);
    }
}

#[test]
fn rejects_nonpositive_l2() {
    let mut spec = MetricSpec::flat(1, ThetaSpec::golden(), 1.0);
    spec.l2 = PeriodicFn2D::mode(0, 1, 2.0, 0.0).add_const(1.0);
    assert!(MetricSpec::from_json(&spec.to_json()).is_err());
}

#[test]
fn rejects_unknown_fields_and_zero_lambda() {
    let spec = MetricSpec::flat(0, ThetaSpec::rational(0, 1), 1.0);
    let mut v: serde_json::Value = serde_json::from_str(&spec.to_json()).unwrap();
    v["extra"] = 1.into();
    assert!(MetricSpec::from_json(&v.to_string()).is_err());
    v.as_object_mut().unwrap().remove("extra");
    v["Lambda"] = 0.0.into();
    assert!(MetricSpec::from_json(&v.to_string()).is_err());
}

#[test]
fn corpus_metrics_are_lattice_invariant() {
    for e in CORPUS.iter() {
        let spec = e.spec().unwrap();
        assert!(check_invariance(&metric_coords(&spec), &spec.lattice) < 1e-10, "{}", e.name);
    }
}

#[test]
fn word_action_on_heisenberg_lattice() {
    let lat = LatticeSpec::gamma(2);
    let w = parse_word(&lat, "tz").unwrap();
    let p = lattice_action(&lat, &w, [0.0, 0.5, 0.0]);
    assert!((p[0] - 1.0).abs() < 1e-15 && (p[2] - 1.0).abs() < 1e-15);
    assert!(parse_word(&lat, "tq").is_err());
}

proptest! {
    #[test]
    fn random_gamma_metrics_are_invariant(n in 0u32..4, j in -2i64..3, k in 0i64..3, a in -0.4f64..0.4, b in -0.4f64..0.4) {
        let mut spec = MetricSpec::flat(n, ThetaSpec::golden(), 1.3);
        spec.l2 = PeriodicFn2D::mode(j, k, a, 0.0).add_const(1.5);
        spec.nu = PeriodicFn2D::mode(k, j.abs(), b, a);
        spec.mu = PeriodicFn2D::mode(j, k, a, b);
        let spec = spec.validated().unwrap();
        prop_assert!(check_invariance(&metric_coords(&spec), &spec.lattice) < 1e-10);
    }
}
