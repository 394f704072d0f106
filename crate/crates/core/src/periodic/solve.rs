//! Small-divisor solvers on the circle and the torus.

use super::fn1d::PeriodicFn1D;
use super::fn2d::PeriodicFn2D;
use super::theta::ThetaSpec;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Coefficients below this magnitude count as absent when testing resonance.
pub const RESONANCE_EPS: f64 = 1e-13;

/// Solves `f(z + θ) - f(z) = h(z)` for mean-free `f`.
///
/// A nonzero mean of `h` is itself an obstruction (mode 0 is always
/// resonant). Rational `θ = p/q` is resonant on every `j ≡ 0 mod q`.
pub fn solve_cohomological(h: &PeriodicFn1D, theta: &ThetaSpec) -> Result<PeriodicFn1D> {
    let theta = theta.normalized()?;
    if h.mean().abs() > RESONANCE_EPS {
        return Err(Error::ResonantFrequency(0));
    }
    let t = theta.value();
    let mut cs = vec![Complex64::new(0.0, 0.0); h.max_freq() + 1];
    for (j, c) in cs.iter_mut().enumerate().skip(1) {
        let hj = h.c(j as i64);
        let ok = theta.divisor_ok_1d(j as i64)?;
        if !ok {
            if hj.norm() > RESONANCE_EPS {
                return Err(Error::ResonantFrequency(j as i64));
            }
            continue;
        }
        let div = Complex64::from_polar(1.0, 2.0 * PI * j as f64 * t) - 1.0;
        *c = hj / div;
    }
    Ok(PeriodicFn1D::from_complex(&cs))
}

/// Sup-norm residual of the cohomological equation on `n` uniform points.
pub fn cohomological_residual(f: &PeriodicFn1D, h: &PeriodicFn1D, theta: f64, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let z = i as f64 / n as f64;
            (f.eval(z + theta) - f.eval(z) - h.eval(z)).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves `(∂_y + θ ∂_z) N = ν + k` with `k = -mean(ν)` and mean-free `N`.
pub fn solve_directional(nu: &PeriodicFn2D, theta: &ThetaSpec) -> Result<(PeriodicFn2D, f64)> {
    let theta = theta.normalized()?;
    let t = theta.value();
    let k0 = -nu.mean();
    let mut modes = Vec::new();
    for (j, k) in nu.modes() {
        if (j, k) == (0, 0) {
            continue;
        }
        let c = nu.c(j, k);
        let ok = theta.divisor_ok_2d(j, k)?;
        if !ok {
            if c.norm() > RESONANCE_EPS {
                return Err(Error::ResonantFrequency(j));
            }
            continue;
        }
        let sol = c / Complex64::new(0.0, 2.0 * PI * (j as f64 + k as f64 * t));
        modes.push((j, k, sol));
        modes.push((-j, -k, sol.conj()));
    }
    Ok((PeriodicFn2D::from_full_modes(&modes), k0))
}

/// Solves `∂_w ν - ½ (∂_v + θ ∂_w) μ = κ` for mean-zero `κ`.
///
/// The system is underdetermined; the minimal-L2 solution is returned, so
/// `ν` and `μ` are mean-free and share the modes of `κ`.
pub fn solve_exterior(kappa: &PeriodicFn2D, theta: f64) -> Result<(PeriodicFn2D, PeriodicFn2D)> {
    if kappa.mean().abs() > RESONANCE_EPS {
        return Err(Error::NonzeroMean(kappa.mean()));
    }
    let mut nu = Vec::new();
    let mut mu = Vec::new();
    for (j, k) in kappa.modes() {
        if (j, k) == (0, 0) {
            continue;
        }
        let c = kappa.c(j, k);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let a = Complex64::new(0.0, 2.0 * PI * k as f64);
        let b = Complex64::new(0.0, -PI * (j as f64 + theta * k as f64));
        let den = a.norm_sqr() + b.norm_sqr();
        let (nv, mv) = (a.conj() * c / den, b.conj() * c / den);
        nu.push((j, k, nv));
        nu.push((-j, -k, nv.conj()));
        mu.push((j, k, mv));
        mu.push((-j, -k, mv.conj()));
    }
    Ok((PeriodicFn2D::from_full_modes(&nu), PeriodicFn2D::from_full_modes(&mu)))
}
