//! Coordinate changes acting on frame data.
//!
//! Each function returns the transformed spec together with the map `Φ`
//! from new to old coordinates, so that the new metric is `Φ*g`.

use crate::error::{Error, Result};
use crate::map::{AffineMapSpec, Elem, PolyMap, ShearMap};
use crate::model::{metric_coords, pullback_at, MetricSpec};
use crate::periodic::{PeriodicFn2D, PolyPeriodic, ThetaSpec};

/// Projection tolerance for composed data.
pub const PROJ_TOL: f64 = 1e-15;

fn poly_map(kind: &str, params: &[(&str, f64)], m: PolyMap) -> AffineMapSpec {
    AffineMapSpec::poly(kind, params, m)
}

/// `Φ = (x + N(y, z), y, z)`: `ν += Λ ỸN`, `μ += 2Λ ∂_z N`.
pub fn shear_x(spec: &MetricSpec, n_fn: &PeriodicFn2D) -> (MetricSpec, AffineMapSpec) {
    let th = spec.theta_value();
    let la = spec.lambda;
    let yn = n_fn.differentiate(0, 1).add(&n_fn.differentiate(1, 1).scale(th));
    let mut out = spec.clone();
    out.nu = spec.nu.add(&yn.scale(la));
    out.mu = spec.mu.add(&n_fn.differentiate(1, 1).scale(2.0 * la));
    let map = AffineMapSpec::new(
        "shear_x",
        &[],
        vec![Elem::Shear(ShearMap { fx: PolyPeriodic::periodic(n_fn.clone()), fy: PolyPeriodic::constant(0.0) })],
    );
    (out, map)
}

/// `Φ = (x + py + qz, y, z)`: `ν += (p + θq)Λ`, `μ += 2qΛ`.
pub fn lift_x(spec: &MetricSpec, p: i64, q: i64) -> (MetricSpec, AffineMapSpec) {
    let la = spec.lambda;
    let mut out = spec.clone();
    out.nu = spec.nu.add_const((p as f64 + spec.theta_value() * q as f64) * la);
    out.mu = spec.mu.add_const(2.0 * q as f64 * la);
    let m = PolyMap { q: [0.0, p as f64, q as f64, 0.0, 0.0, 0.0], ..PolyMap::identity() };
    (out, poly_map("lift_x", &[("p", p as f64), ("q", q as f64)], m))
}

/// Flow of `U = ∂y + nz∂x` at time `s`: `Φ = (x + snz, y + s, z)`.
pub fn flow_u(spec: &MetricSpec, s: f64) -> (MetricSpec, AffineMapSpec) {
    let n = spec.n() as f64;
    let la = spec.lambda;
    let mut out = spec.clone();
    out.l2 = spec.l2.shift(s, 0.0);
    out.nu = spec.nu.shift(s, 0.0).add_const(spec.theta_value() * n * s * la);
    out.mu = spec.mu.shift(s, 0.0).add_const(2.0 * n * s * la);
    let m = PolyMap { q: [0.0, 0.0, s * n, 0.0, 0.0, 0.0], c: [s, 0.0], ..PolyMap::identity() };
    (out, poly_map("flow_u", &[("s", s)], m))
}

/// Translation `Φ = (x, y, z + t)`: `ν -= ntΛ`.
pub fn flow_z(spec: &MetricSpec, t: f64) -> (MetricSpec, AffineMapSpec) {
    let n = spec.n() as f64;
    let la = spec.lambda;
    let mut out = spec.clone();
    out.l2 = spec.l2.shift(0.0, t);
    out.nu = spec.nu.shift(0.0, t).add_const(-n * t * la);
    out.mu = spec.mu.shift(0.0, t);
    (out, poly_map("flow_z", &[("t", t)], PolyMap::translation([0.0, 0.0, t])))
}

/// Translation `Φ = (x + x0, y + y0, z + z0)` restricted to deck-compatible shifts.
pub fn translate(spec: &MetricSpec, x0: f64, y0: f64, z0: f64) -> (MetricSpec, AffineMapSpec) {
    let n = spec.n() as f64;
    let mut out = spec.clone();
    out.l2 = spec.l2.shift(y0, z0);
    out.nu = spec.nu.shift(y0, z0).add_const(-n * z0 * spec.lambda);
    out.mu = spec.mu.shift(y0, z0);
    (out, AffineMapSpec::translation([x0, y0, z0]))
}

/// `Φ = (ε1 x, ε2 y, ε3 z)`; needs `ε1 = ε2 ε3` when `n != 0`.
pub fn flip(spec: &MetricSpec, e: [i64; 3]) -> Result<(MetricSpec, AffineMapSpec)> {
    if spec.n() != 0 && e[0] != e[1] * e[2] {
        return Err(Error::NotLatticeNormalizing(format!("sign change {e:?} with n != 0")));
    }
    let (e1, e2, e3) = (e[0] as f64, e[1] as f64, e[2] as f64);
    let a = [[e[1], 0], [0, e[2]]];
    let mut out = spec.clone();
    out.theta = if e[1] * e[2] < 0 { spec.theta.neg() } else { spec.theta.clone() };
    out.lambda = e1 * e3 * spec.lambda;
    out.l2 = spec.l2.compose_linear(a);
    out.nu = spec.nu.compose_linear(a).scale(e2 * e3);
    out.mu = spec.mu.compose_linear(a);
    let m = PolyMap { e1, q: [0.0; 6], m: [[e2, 0.0], [0.0, e3]], c: [0.0; 2] };
    Ok((out, poly_map("flip", &[("e1", e1), ("e2", e2), ("e3", e3)], m)))
}

/// `F(x, y, z) = (x + n(bcyz + ½ac(y²-y) + ½bd(z²-z)), ay + bz, cy + dz)`.
pub fn gl2_forward_map(n: u32, m: [[i64; 2]; 2]) -> PolyMap {
    let [[a, b], [c, d]] = m.map(|r| r.map(|v| v as f64));
    let n = n as f64;
    PolyMap {
        e1: 1.0,
        q: [0.0, -0.5 * n * a * c, -0.5 * n * b * d, 0.5 * n * a * c, n * b * c, 0.5 * n * b * d],
        m: [[a, b], [c, d]],
        c: [0.0, 0.0],
    }
}

/// New coordinates `(x', u, v) = F(x, y, z)` for `M = [[a,b],[c,d]]`.
///
/// With `ρ = a + bθ`, `δ = det M`: `θ' = (c + dθ)/ρ`, `Λ' = ρΛ/δ`,
/// `L'² = L²/ρ²`, `ν' = (ν - bL²/ρ + (n/2)Λ(ac + θbd))/δ`,
/// `μ' = (ρ²μ - 2ρbν + b²L² + nΛab(d - c)ρ)/δ²`, all composed with `M⁻¹`.
pub fn gl2(spec: &MetricSpec, m: [[i64; 2]; 2]) -> Result<(MetricSpec, AffineMapSpec)> {
    let [[a, b], [c, d]] = m;
    let det = a * d - b * c;
    if det.abs() != 1 {
        return Err(Error::NonUnimodular(format!("det = {det}")));
    }
    if spec.n() != 0 && det != 1 {
        return Err(Error::NonUnimodular("n != 0 needs det = +1".into()));
    }
    let theta_new = spec.theta.mobius(m)?;
    let th = spec.theta_value();
    let (af, bf, cf, df) = (a as f64, b as f64, c as f64, d as f64);
    let rho = af + bf * th;
    let delta = det as f64;
    let n = spec.n() as f64;
    let la = spec.lambda;
    // M⁻¹ for det ±1 is an integer matrix
    let minv = [[d * det, -b * det], [-c * det, a * det]];
    let l2 = spec.l2.compose_linear(minv);
    let nu = spec.nu.compose_linear(minv);
    let mu = spec.mu.compose_linear(minv);
    let mut out = spec.clone();
    out.theta = theta_new;
    out.lambda = rho * la / delta;
    out.l2 = l2.scale(1.0 / (rho * rho));
    out.nu = nu.sub(&l2.scale(bf / rho)).add_const(0.5 * n * la * (af * cf + th * bf * df)).scale(1.0 / delta);
    out.mu = mu
        .scale(rho * rho)
        .sub(&nu.scale(2.0 * rho * bf))
        .add(&l2.scale(bf * bf))
        .add_const(n * la * af * bf * (df - cf) * rho)
        .scale(1.0 / (delta * delta));
    let fwd = gl2_forward_map(spec.n(), m);
    let map = poly_map("gl2", &[("a", af), ("b", bf), ("c", cf), ("d", df)], fwd.inverse());
    Ok((out, map))
}

/// Frame data of `Φ*g` read off pointwise and projected.
///
/// `Φ` must normalize the deck group and preserve `X`; the new slope is
/// given. Errors when the pulled-back metric is not of frame form.
pub fn pullback_spec(spec: &MetricSpec, map: &AffineMapSpec, theta_new: ThetaSpec) -> Result<MetricSpec> {
    let metric = metric_coords(spec);
    let n = spec.n() as f64;
    let th = theta_new.value();
    let entry = |y: f64, z: f64| {
        let p = [0.0, y, z];
        let (q, j) = map.eval_jac(&p);
        pullback_at(&metric.eval(&q), &j)
    };
    let g0 = entry(0.3, 0.6);
    let la = g0[0][2];
    let yt = |z: f64| [n * z, 1.0, th];
    let quad = |g: &[[f64; 3]; 3], u: &[f64; 3], v: &[f64; 3]| -> f64 {
        (0..3).map(|i| (0..3).map(|k| u[i] * g[i][k] * v[k]).sum::<f64>()).sum()
    };
    // Structure check on a coarse grid.
    for a in 0..8 {
        for b in 0..8 {
            let g = entry(a as f64 / 8.0, b as f64 / 8.0);
            let bad = g[0][0].abs() + (g[0][1] + th * la).abs() + (g[0][2] - la).abs();
            if bad > 1e-9 * (1.0 + la.abs()) {
                return Err(Error::NotInNormalForm(format!("pulled-back metric is not of frame form (defect {bad:.2e})")));
            }
        }
    }
    let ez = [0.0, 0.0, 1.0];
    let [l2, nu, mu] = PeriodicFn2D::project_adaptive_many(
        |y, z| {
            let g = entry(y, z);
            [quad(&g, &yt(z), &yt(z)), quad(&g, &yt(z), &ez), g[2][2]]
        },
        PROJ_TOL,
    );
    Ok(MetricSpec { lattice: spec.lattice.clone(), theta: theta_new, lambda: la, l2, nu, mu, arith: spec.arith.clone() })
}

/// `Φ = (x + nz w(y,z), y + w(y,z), z)`, computed by pullback.
pub fn shear_y(spec: &MetricSpec, w: &PeriodicFn2D) -> Result<(MetricSpec, AffineMapSpec)> {
    let n = spec.n() as f64;
    let fx = PolyPeriodic::new(vec![PeriodicFn2D::constant(0.0), w.scale(n)])?;
    let map = AffineMapSpec::new(
        "shear_y",
        &[],
        vec![Elem::Shear(ShearMap { fx, fy: PolyPeriodic::periodic(w.clone()) })],
    );
    let out = pullback_spec(spec, &map, spec.theta.clone())?;
    Ok((out, map))
}
