use lolight3::corpus;
use lolight3::normalform::{
    act_gl2, act_z, are_isometric, reduce_closed, reduce_diophantine, IsometryDecision, NormalForm, SearchBounds,
};
use lolight3::model::MetricSpec;
use lolight3::periodic::{PeriodicFn2D, ThetaSpec};
use lolight3::transforms::pullback;
use lolight3::model::metric_coords;
use proptest::prelude::*;

fn closed_spec(n: u32, a: f64, b: f64, j: i64, k0: f64) -> MetricSpec {
    let mut s = MetricSpec::flat(n, ThetaSpec::rational(0, 1), 1.3);
    s.l2 = PeriodicFn2D::mode(0, 1, a, 0.0).add_const(1.6);
    s.nu = PeriodicFn2D::mode(0, 1, b, 0.1).add_const(k0);
    s.mu = PeriodicFn2D::mode(j, 1, b, a).add_const(0.2);
    s.validated().unwrap()
}

fn dio_spec(n: u32, b: f64, j: i64) -> MetricSpec {
    let mut s = MetricSpec::flat(n, ThetaSpec::golden(), 1.1);
    s.l2 = PeriodicFn2D::constant(1.4);
    s.nu = PeriodicFn2D::mode(j, 1, b, 0.0).add_const(0.3);
    s.mu = PeriodicFn2D::mode(1, j, b, -b).add_const(0.1);
    s.validated().unwrap()
}

#[test]
fn closed_reduction_is_idempotent() {
    let r = reduce_closed(&closed_spec(1, 0.3, 0.2, 1, 0.4)).unwrap();
    let again = reduce_closed(&r.nf.to_spec()).unwrap();
    assert!((again.nf.k - r.nf.k).abs() < 1e-10);
    assert!(again.nf.mu.sub(&r.nf.mu).max_abs_coeff() < 1e-9);
}

fn pullback_gap(spec: &MetricSpec, change: &lolight3::map::AffineMapSpec, nf_spec: &MetricSpec) -> f64 {
    let (g, h) = (metric_coords(spec), metric_coords(nf_spec));
    let mut worst = 0.0f64;
    for p in [[0.0, 0.1, 0.2], [0.4, 0.75, 0.55], [0.9, 0.3, 0.95]] {
        let (a, b) = (pullback(&g, change, &p), h.eval(&p));
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((a[i][j] - b[i][j]).abs());
            }
        }
    }
    worst
}

#[test]
fn change_of_coordinates_is_an_isometry() {
    let spec = closed_spec(1, 0.3, 0.2, 1, 0.4);
    let r = reduce_closed(&spec).unwrap();
    assert!(pullback_gap(&spec, &r.change, &r.nf.to_spec()) < 1e-8);
    let spec = dio_spec(1, 0.2, 1);
    let r = reduce_diophantine(&spec).unwrap();
    assert!(pullback_gap(&spec, &r.change, &r.nf.to_spec()) < 1e-8);
}

#[test]
fn diophantine_reduction_kills_nu() {
    let r = reduce_diophantine(&dio_spec(1, 0.2, 1)).unwrap();
    let s = r.nf.to_spec();
    assert!(s.nu.is_constant(1e-10));
    assert!(s.mu.fiber_mean().is_constant(1e-9));
}

#[test]
fn nonconstant_l_rejected_for_dense_leaves() {
    let mut s = dio_spec(1, 0.2, 1);
    s.l2 = PeriodicFn2D::mode(1, 1, 0.2, 0.0).add_const(1.5);
    assert!(reduce_diophantine(&s).is_err());
}

#[test]
fn isometric_pair_found() {
    let nf = reduce_closed(&corpus::get("case4").unwrap().spec().unwrap()).unwrap().nf;
    let moved = act_z(&nf, 1).unwrap().nf;
    let rep = are_isometric(&NormalForm::Closed(nf), &NormalForm::Closed(moved), SearchBounds::default()).unwrap();
    assert_eq!(rep.decision, IsometryDecision::Isometric);
}

#[test]
fn different_volumes_are_not_isometric() {
    let a = reduce_closed(&closed_spec(0, 0.3, 0.2, 1, 0.4)).unwrap().nf;
    let mut b = a.clone();
    b.lambda *= 1.5;
    let rep = are_isometric(&NormalForm::Closed(a), &NormalForm::Closed(b), SearchBounds::default()).unwrap();
    assert_eq!(rep.decision, IsometryDecision::NotIsometric);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_ranges_hold(n in 0u32..3, a in -0.4f64..0.4, b in -0.4f64..0.4, j in -1i64..2, k0 in -3.0f64..3.0) {
        let nf = reduce_closed(&closed_spec(n, a, b, j, k0)).unwrap().nf;
        prop_assert!(nf.lambda > 0.0);
        if n == 0 {
            prop_assert!(nf.k >= 0.0 && nf.k < nf.lambda + 1e-12);
        } else {
            prop_assert!(nf.k.abs() < 1e-12);
        }
    }

    #[test]
    fn z_action_composes(a in -0.4f64..0.4, b in -0.4f64..0.4, e1 in -2i64..3, e2 in -2i64..3) {
        let nf = reduce_closed(&closed_spec(0, a, b, 0, 0.7)).unwrap().nf;
        let two = act_z(&act_z(&nf, e1).unwrap().nf, e2).unwrap().nf;
        let one = act_z(&nf, e1 + e2).unwrap().nf;
        prop_assert!((two.k - one.k).abs() < 1e-9);
        prop_assert!(two.mu.sub(&one.mu).max_abs_coeff() < 1e-9);
    }

    #[test]
    fn gl2_round_trip(b in -0.3f64..0.3, which in 0usize..3) {
        let nf = reduce_diophantine(&dio_spec(0, b, 1)).unwrap().nf;
        let (m, inv) = [([[0, -1], [1, 0]], [[0, 1], [-1, 0]]), ([[1, 1], [0, 1]], [[1, -1], [0, 1]]), ([[1, 0], [1, 1]], [[1, 0], [-1, 1]])][which];
        let back = act_gl2(&act_gl2(&nf, m).unwrap().nf, inv).unwrap().nf;
        prop_assert!(back.theta.same_as(&nf.theta));
        prop_assert!((back.k - nf.k).abs() < 1e-9);
        prop_assert!(back.mu.sub(&nf.mu).max_abs_coeff() < 1e-9);
    }
}
