use lolight3::periodic::{
    cohomological_residual, ext_gcd, solve_cohomological, solve_directional, PeriodicFn1D, PeriodicFn2D, ThetaSpec,
};
use lolight3::Error;
use proptest::prelude::*;

fn fn1d(coeffs: &[(f64, f64)]) -> PeriodicFn1D {
    let mut cs = vec![[0.0, 0.0]];
    cs.extend(coeffs.iter().map(|&(a, b)| [a, b]));
    PeriodicFn1D::new(cs).unwrap()
}

#[test]
fn resonance_is_reported() {
    let h = PeriodicFn1D::mode(2, 1.0, 0.0);
    assert_eq!(solve_cohomological(&h, &ThetaSpec::rational(1, 2)), Err(Error::ResonantFrequency(2)));
}

#[test]
fn nonzero_mean_is_resonant_at_zero() {
    let h = PeriodicFn1D::mode(1, 1.0, 0.0).add_const(0.5);
    assert_eq!(solve_cohomological(&h, &ThetaSpec::golden()), Err(Error::ResonantFrequency(0)));
}

#[test]
fn rational_slope_without_resonance_solves() {
    let h = PeriodicFn1D::mode(1, 1.0, 0.0);
    let f = solve_cohomological(&h, &ThetaSpec::rational(1, 3)).unwrap();
    assert!(cohomological_residual(&f, &h, 1.0 / 3.0, 256) < 1e-12);
}

#[test]
fn ext_gcd_identity() {
    for (a, b) in [(4, 6), (3, 1), (12, 18), (7, 5)] {
        let (g, u, v) = ext_gcd(a, b);
        assert_eq!(a * u + b * v, g);
        assert_eq!(a % g, 0);
        assert_eq!(b % g, 0);
    }
}

#[test]
fn mobius_round_trip() {
    let t = ThetaSpec::golden();
    let m = [[2, 1], [1, 1]];
    let back = t.mobius(m).unwrap().mobius([[1, -1], [-1, 2]]).unwrap();
    assert!((back.value() - t.value()).abs() < 1e-12);
}

#[test]
fn directional_solver_removes_oscillation() {
    let nu = PeriodicFn2D::mode(1, 1, 0.3, -0.2).add(&PeriodicFn2D::mode(0, 2, 0.1, 0.0)).add_const(0.4);
    let theta = ThetaSpec::golden();
    let (w, mean) = solve_directional(&nu, &theta).unwrap();
    assert!((mean + 0.4).abs() < 1e-12);
    let th = theta.value();
    let lhs = w.differentiate(0, 1).add(&w.differentiate(1, 1).scale(th));
    assert!(lhs.sub(&nu.add_const(-0.4)).max_abs_coeff() < 1e-12);
}

proptest! {
    #[test]
    fn cohomological_residual_is_small(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)) {
        let h = fn1d(&c);
        let theta = ThetaSpec::golden();
        let f = solve_cohomological(&h, &theta).unwrap();
        prop_assert!(cohomological_residual(&f, &h, theta.value(), 512) < 1e-9);
        prop_assert!(f.mean().abs() < 1e-14);
    }

    #[test]
    fn derivative_inverts_antiderivative(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)) {
        let f = fn1d(&c);
        prop_assert!(f.antiderivative().derivative(1).sub(&f).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn product_matches_pointwise(a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
                                 b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
                                 z in 0.0f64..1.0) {
        let (f, g) = (fn1d(&a).add_const(0.3), fn1d(&b));
        prop_assert!((f.mul(&g).eval(z) - f.eval(z) * g.eval(z)).abs() < 1e-12);
    }

    #[test]
    fn projection_recovers_coefficients(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
        let f = fn1d(&c).add_const(0.7);
        let g = PeriodicFn1D::project(|z| f.eval(z), 64, 16);
        prop_assert!(g.sub(&f).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn shift_2d_matches_eval(j in -3i64..4, k in 0i64..4, a in -1.0f64..1.0, y0 in 0.0f64..1.0, z0 in 0.0f64..1.0,
                             y in 0.0f64..1.0, z in 0.0f64..1.0) {
        let f = PeriodicFn2D::mode(j, k, a, 0.5).add_const(1.0);
        prop_assert!((f.shift(y0, z0).eval(y, z) - f.eval(y + y0, z + z0)).abs() < 1e-12);
    }
}
