use lolight3::curvature::{
    check_parallel_x, curvature_r, curvature_r_closed_form, gauss_bonnet, leaf_holonomy_alpha, metric_compatibility_residual,
    parallel_transport_loop, LeafLoop,
};
use lolight3::model::{metric_coords, MetricSpec};
use lolight3::periodic::{PeriodicFn2D, ThetaSpec};
use proptest::prelude::*;
use std::f64::consts::PI;

fn closed(n: u32, l2: PeriodicFn2D, mu: PeriodicFn2D) -> MetricSpec {
    let mut s = MetricSpec::flat(n, ThetaSpec::rational(0, 1), 1.0);
    s.l2 = l2;
    s.mu = mu;
    s.validated().unwrap()
}

#[test]
fn flat_metric_has_zero_curvature() {
    let s = MetricSpec::flat(2, ThetaSpec::golden(), 1.7);
    for p in [[0.0, 0.1, 0.2], [0.3, 0.7, 0.9]] {
        assert!(curvature_r(&s, p).abs() < 1e-14);
    }
}

#[test]
fn pure_y_profile_curvature() {
    let s = closed(0, PeriodicFn2D::constant(1.0), PeriodicFn2D::mode(1, 0, 1.0, 0.0));
    for y in [0.0, 0.2, 0.45] {
        let r = curvature_r(&s, [0.0, y, 0.3]);
        assert!((r + 2.0 * PI * PI * (2.0 * PI * y).cos()).abs() < 1e-9);
    }
}

#[test]
fn levi_civita_is_metric_compatible() {
    let s = closed(1, PeriodicFn2D::mode(0, 1, 0.0, 0.5).add_const(2.0), PeriodicFn2D::mode(1, 1, 0.2, 0.1));
    let r = metric_compatibility_residual(&metric_coords(&s), &[0.1, 0.3, 0.6], 1e-4);
    assert!(r < 1e-6, "{r}");
}

#[test]
fn holonomy_alpha_matches_transport() {
    let s = closed(0, PeriodicFn2D::mode(0, 1, 0.0, 1.0).add_const(2.0), PeriodicFn2D::constant(0.0));
    for z in [0.1, 0.6] {
        let alpha = leaf_holonomy_alpha(&s, z).unwrap();
        let m = parallel_transport_loop(&s, z, LeafLoop::Gamma2, 4096).unwrap();
        assert!((m[0][1] - alpha).abs() < 1e-6);
        assert!((m[0][0] - 1.0).abs() < 1e-8 && m[1][0].abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_form_matches_tensor(n in 0u32..3, a in -0.5f64..0.5, b in -0.5f64..0.5, j in 0i64..3, k in 0i64..3) {
        let s = closed(n, PeriodicFn2D::mode(0, k, a, 0.0).add_const(1.5), PeriodicFn2D::mode(j, k, b, a));
        let cf = curvature_r_closed_form(&s).unwrap();
        for &(y, z) in &[(0.1, 0.2), (0.55, 0.8), (0.9, 0.35)] {
            prop_assert!((cf.eval(y, z) - curvature_r(&s, [0.2, y, z])).abs() < 1e-6);
        }
    }

    #[test]
    fn gauss_bonnet_vanishes(n in 0u32..3, a in -0.5f64..0.5, b in -0.5f64..0.5, j in -2i64..3, k in 0i64..3) {
        let s = closed(n, PeriodicFn2D::mode(0, k, a, 0.0).add_const(1.5), PeriodicFn2D::mode(j, k, b, a));
        prop_assert!(gauss_bonnet(&s, 64).abs() < 1e-6);
    }

    #[test]
    fn x_is_parallel(n in 0u32..3, a in -0.5f64..0.5, b in -0.5f64..0.5, j in -2i64..3, k in 0i64..3) {
        let mut s = MetricSpec::flat(n, ThetaSpec::golden(), 0.8);
        s.l2 = PeriodicFn2D::mode(j, k, a, 0.0).add_const(1.5);
        s.nu = PeriodicFn2D::mode(k, j, b, 0.0);
        s.mu = PeriodicFn2D::mode(j, k, b, a);
        prop_assert!(check_parallel_x(&metric_coords(&s), 8) < 1e-9);
    }
}
