//! Normal forms of the frame data and the residual group actions on them.
//!
//! Two families are handled. For a Diophantine slope the leaves of `X^⊥`
//! are dense and the normal form has constant `L`; for a rational slope the
//! leaves are closed and `L` may depend on `z`. Every reduction records the
//! coordinate change `Φ` (new to old) so that the new metric is `Φ*g`.

mod isometry;
pub mod ops;

pub use isometry::{are_isometric, IsometryDecision, IsometryReport, SearchBounds, Witness};

use crate::error::{Error, Result};
use crate::map::AffineMapSpec;
use crate::model::{ArithCertificates, LatticeSpec, MetricSpec};
use crate::periodic::{ext_gcd, solve_cohomological, solve_directional, PeriodicFn1D, PeriodicFn2D, ThetaSpec};
use crate::transforms::phi_lab;
use num_complex::Complex64;
use ops::PROJ_TOL;
use serde::Serialize;
use std::f64::consts::PI;

/// Below this size a correction step is skipped; keeps reductions idempotent.
pub const SKIP_TOL: f64 = 1e-13;
/// Allowed deviation when a projected quantity is snapped to its exact shape.
pub const SNAP_TOL: f64 = 1e-9;

/// Normal form for a Diophantine slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormDio {
    pub n: u32,
    pub theta: ThetaSpec,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub k: f64,
    pub mu: PeriodicFn2D,
}

/// Normal form for closed leaves (slope 0 chart).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormClosed {
    pub n: u32,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub k: f64,
    /// `L²` as a function of `z`.
    #[serde(rename = "L2")]
    pub l2: PeriodicFn1D,
    pub mu: PeriodicFn2D,
}

/// Either normal-form family.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family")]
pub enum NormalForm {
    #[serde(rename = "diophantine")]
    Dio(NormalFormDio),
    #[serde(rename = "closed")]
    Closed(NormalFormClosed),
}

/// A normal form together with the map `Φ` from its coordinates to the input's.
#[derive(Clone, Debug)]
pub struct Reduced<T> {
    pub nf: T,
    pub change: AffineMapSpec,
}

impl NormalFormDio {
    pub fn to_spec(&self) -> MetricSpec {
        MetricSpec {
            lattice: LatticeSpec::gamma(self.n),
            theta: self.theta.clone(),
            lambda: self.lambda,
            l2: PeriodicFn2D::constant(self.l * self.l),
            nu: PeriodicFn2D::constant(self.k),
            mu: self.mu.clone(),
            arith: ArithCertificates::default(),
        }
    }
}

impl NormalFormClosed {
    pub fn to_spec(&self) -> MetricSpec {
        MetricSpec {
            lattice: LatticeSpec::gamma(self.n),
            theta: ThetaSpec::rational(0, 1),
            lambda: self.lambda,
            l2: PeriodicFn2D::from_z(&self.l2),
            nu: PeriodicFn2D::constant(self.k),
            mu: self.mu.clone(),
            arith: ArithCertificates::default(),
        }
    }

    /// `1/L²` as a Fourier series.
    pub fn inv_l2(&self) -> PeriodicFn1D {
        if self.l2.is_constant(0.0) {
            return PeriodicFn1D::constant(1.0 / self.l2.mean());
        }
        let l2 = &self.l2;
        PeriodicFn1D::project_adaptive(|z| 1.0 / l2.eval(z), PROJ_TOL)
    }

    /// Harmonic mean `𝓛 = 1/∫ L⁻²`.
    pub fn lcal(&self) -> f64 {
        1.0 / self.inv_l2().mean()
    }

    /// `h = H' = 𝓛/L²`.
    pub fn h(&self) -> PeriodicFn1D {
        let inv = self.inv_l2();
        inv.scale(1.0 / inv.mean())
    }

    /// Periodic part of `H(z) = 𝓛∫₀^z L⁻²`, so `H(z) = z + hp(z)` and `H(0) = 0`.
    pub fn hp(&self) -> PeriodicFn1D {
        let a = self.h().antiderivative();
        a.add_const(-a.eval(0.0))
    }

    pub fn big_h(&self, z: f64) -> f64 {
        z + self.hp().eval(z)
    }
}

impl NormalForm {
    pub fn to_spec(&self) -> MetricSpec {
        match self {
            NormalForm::Dio(nf) => nf.to_spec(),
            NormalForm::Closed(nf) => nf.to_spec(),
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            NormalForm::Dio(nf) => nf.n,
            NormalForm::Closed(nf) => nf.n,
        }
    }
}

/// Accumulates coordinate changes: after `apply(Φ₁)`, `apply(Φ₂)` the total
/// change is `Φ₁∘Φ₂`.
struct Chain {
    spec: MetricSpec,
    map: AffineMapSpec,
}

impl Chain {
    fn new(spec: MetricSpec) -> Self {
        Self { spec, map: AffineMapSpec::identity() }
    }

    fn apply(&mut self, step: (MetricSpec, AffineMapSpec)) {
        self.spec = step.0;
        self.map = self.map.compose(&step.1);
    }

    fn try_apply(&mut self, step: Result<(MetricSpec, AffineMapSpec)>) -> Result<()> {
        self.apply(step?);
        Ok(())
    }
}

/// `∫ f dy` with the `y`-mean dropped.
pub fn antiderivative_y(f: &PeriodicFn2D) -> PeriodicFn2D {
    let modes: Vec<(i64, i64, Complex64)> = f
        .full_modes()
        .into_iter()
        .filter(|&(j, _, _)| j != 0)
        .map(|(j, k, c)| (j, k, c / Complex64::new(0.0, 2.0 * PI * j as f64)))
        .collect();
    if modes.is_empty() {
        return PeriodicFn2D::constant(0.0);
    }
    PeriodicFn2D::from_full_modes(&modes)
}

fn snap_constant(f: &PeriodicFn2D, what: &str) -> Result<PeriodicFn2D> {
    let m = f.mean();
    let dev = f.add_const(-m).sup_norm();
    if dev > SNAP_TOL * (1.0 + m.abs()) {
        return Err(Error::NotInNormalForm(format!("{what} not constant after reduction (deviation {dev:.2e})")));
    }
    Ok(PeriodicFn2D::constant(m))
}

fn snap_y_independent(f: &PeriodicFn2D, what: &str) -> Result<PeriodicFn2D> {
    let dev = f.fiber_oscillation().sup_norm();
    if dev > SNAP_TOL * (1.0 + f.sup_norm()) {
        return Err(Error::NotInNormalForm(format!("{what} depends on y after reduction (deviation {dev:.2e})")));
    }
    Ok(PeriodicFn2D::from_z(&f.fiber_mean()))
}

fn require_plain_gamma(spec: &MetricSpec) -> Result<()> {
    match spec.lattice {
        LatticeSpec::Gamma { c1, c2, .. } if c1 == 0.0 && c2 == 0.0 => Ok(()),
        LatticeSpec::Gamma { .. } => Err(Error::InvalidSpec("reductions need c1 = c2 = 0".into())),
        _ => Err(Error::InvalidSpec("reductions apply to Heisenberg-type lattices".into())),
    }
}

/// Conjugates a rotation with a positive ceiling function to constant return time.
///
/// Returns `(mean(ceiling), ψ)` with `ψ(z + θ) - ψ(z) = ceiling(z) - mean`.
pub fn straighten_slope(ceiling: &PeriodicFn1D, theta: &ThetaSpec) -> Result<(f64, PeriodicFn1D)> {
    let m = ceiling.mean();
    let psi = solve_cohomological(&ceiling.add_const(-m), theta)?;
    Ok((m, psi))
}

/// Flips the sign of `Λ` with `(x, -y, -z)`, which keeps the slope.
fn fix_sign(chain: &mut Chain) -> Result<()> {
    if chain.spec.lambda < 0.0 {
        chain.try_apply(ops::flip(&chain.spec, [1, -1, -1]))?;
    }
    Ok(())
}

/// `floor(v)`, rounding instead when `v` is within roundoff of an integer.
fn range_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-12 * (1.0 + v.abs()) {
        r
    } else {
        v.floor()
    }
}

/// Integer lifts (`n = 0`) or flows (`n ≠ 0`) putting `k` and the mean of `μ`
/// into range. Expects constant `ν` and `Λ > 0`.
fn normalize_constants(chain: &mut Chain) -> Result<()> {
    let la = chain.spec.lambda;
    let n = chain.spec.n();
    let th = chain.spec.theta_value();
    if n == 0 {
        let mean = chain.spec.mu.mean();
        let q = -range_floor(mean / (2.0 * la)) as i64;
        let k = chain.spec.nu.mean() + th * q as f64 * la;
        let p = -range_floor(k / la) as i64;
        if p != 0 || q != 0 {
            chain.apply(ops::lift_x(&chain.spec, p, q));
        }
        chain.spec.nu = snap_constant(&chain.spec.nu, "nu")?;
        // values landing just below 0 through roundoff belong to 0
        let eps = 1e-12 * la;
        if (-eps..0.0).contains(&chain.spec.nu.mean()) {
            chain.spec.nu = PeriodicFn2D::constant(0.0);
        }
        let mean = chain.spec.mu.mean();
        if (-eps..0.0).contains(&mean) {
            chain.spec.mu = chain.spec.mu.add_const(-mean);
        }
    } else {
        let nf = n as f64;
        let s0 = -chain.spec.mu.mean() / (2.0 * nf * la);
        if s0 != 0.0 {
            chain.apply(ops::flow_u(&chain.spec, s0));
        }
        let t0 = chain.spec.nu.mean() / (nf * la);
        if t0 != 0.0 {
            chain.apply(ops::flow_z(&chain.spec, t0));
        }
        chain.spec.mu = chain.spec.mu.add_const(-chain.spec.mu.mean());
        snap_constant(&chain.spec.nu, "nu")?;
        chain.spec.nu = PeriodicFn2D::constant(0.0);
    }
    Ok(())
}

/// Reduces a spec with Diophantine slope and constant `L²`.
///
/// `ν` is made constant by an `x`-shear solving `ỸN = (k - ν)/Λ`, then `k`
/// and the mean of `μ` are brought into range. An `x`-shear by a function of
/// `z` would change `ν` by `θΛf'`, so the `y`-mean of `μ` is left as is.
pub fn reduce_diophantine(spec: &MetricSpec) -> Result<Reduced<NormalFormDio>> {
    let spec = spec.clone().validated()?;
    require_plain_gamma(&spec)?;
    if spec.theta.is_rational() || !spec.theta.is_diophantine() {
        return Err(Error::NonDiophantineSlope(format!("{:?}", spec.theta)));
    }
    if !spec.l2.is_constant(crate::model::STRUCT_TOL) {
        return Err(Error::NonConstantL);
    }
    let mut chain = Chain::new(spec);
    chain.spec.l2 = PeriodicFn2D::constant(chain.spec.l2.mean());
    reduce_dio_chain(&mut chain)?;
    Ok(finish_dio(chain, "reduce_diophantine"))
}

fn reduce_dio_chain(chain: &mut Chain) -> Result<()> {
    fix_sign(chain)?;
    let nu = &chain.spec.nu;
    if nu.add_const(-nu.mean()).max_abs_coeff() > SKIP_TOL {
        let (nfn, _) = solve_directional(&nu.scale(-1.0 / chain.spec.lambda), &chain.spec.theta)?;
        chain.apply(ops::shear_x(&chain.spec, &nfn));
    }
    chain.spec.nu = snap_constant(&chain.spec.nu, "nu")?;
    normalize_constants(chain)
}

fn finish_dio(chain: Chain, label: &str) -> Reduced<NormalFormDio> {
    let s = chain.spec;
    let nf = NormalFormDio { n: s.n(), theta: s.theta, lambda: s.lambda, l: s.l2.mean().sqrt(), k: s.nu.mean(), mu: s.mu };
    Reduced { nf, change: chain.map.with_label(label, &[]) }
}

/// Reduces a spec with rational slope to the closed-leaf normal form.
///
/// Steps: integer change of frame to slope 0; reparametrization of each
/// leaf by arc length ratio when `L²` depends on `y`; `x + P(y,z)` making `ν`
/// depend on `z` only; `(x + nzG, y + G, z)` making `ν` constant;
/// `x + f(z)` flattening the `y`-mean of `μ`; range normalization.
pub fn reduce_closed(spec: &MetricSpec) -> Result<Reduced<NormalFormClosed>> {
    let spec = spec.clone().validated()?;
    require_plain_gamma(&spec)?;
    let ThetaSpec::Rational { p, q } = spec.theta else {
        return Err(Error::InvalidSpec("reduce_closed needs a rational slope".into()));
    };
    let mut chain = Chain::new(spec);
    fix_sign(&mut chain)?;
    if p != 0 {
        let (_, u, v) = ext_gcd(q, p);
        chain.try_apply(ops::gl2(&chain.spec, [[u, v], [-p, q]]))?;
        fix_sign(&mut chain)?;
    }
    reduce_closed_chain(&mut chain)?;
    Ok(finish_closed(chain, "reduce_closed"))
}

fn reduce_closed_chain(chain: &mut Chain) -> Result<()> {
    let la = chain.spec.lambda;
    // Leaf reparametrization making L² independent of y.
    if chain.spec.l2.fiber_oscillation().max_abs_coeff() > SKIP_TOL {
        let w = leaf_reparam(&chain.spec.l2);
        chain.try_apply(ops::shear_y(&chain.spec, &w))?;
    }
    chain.spec.l2 = snap_y_independent(&chain.spec.l2, "L2")?;
    // (i) ν → N(z).
    let osc = chain.spec.nu.fiber_oscillation();
    if osc.max_abs_coeff() > SKIP_TOL {
        let pfn = antiderivative_y(&osc.scale(-1.0 / la));
        chain.apply(ops::shear_x(&chain.spec, &pfn));
    }
    chain.spec.nu = snap_y_independent(&chain.spec.nu, "nu")?;
    // (ii) N(z) → constant.
    let nz = chain.spec.nu.fiber_mean();
    if nz.add_const(-nz.mean()).max_abs_coeff() > SKIP_TOL {
        let l2 = chain.spec.l2.fiber_mean();
        let inv = PeriodicFn1D::project_adaptive(|z| 1.0 / l2.eval(z), PROJ_TOL);
        let lcal = 1.0 / inv.mean();
        let c = lcal * nz.mul(&inv).mean();
        let gp = nz.scale(-1.0).add_const(c).mul(&inv);
        let g = gp.antiderivative();
        chain.try_apply(ops::shear_y(&chain.spec, &PeriodicFn2D::from_z(&g)))?;
        chain.spec.l2 = snap_y_independent(&chain.spec.l2, "L2")?;
    }
    chain.spec.nu = snap_constant(&chain.spec.nu, "nu")?;
    // (iii) y-mean of μ → constant.
    let fm = chain.spec.mu.fiber_mean();
    if fm.add_const(-fm.mean()).max_abs_coeff() > SKIP_TOL {
        let f = fm.add_const(-fm.mean()).scale(-1.0 / (2.0 * la)).antiderivative();
        chain.apply(ops::shear_x(&chain.spec, &PeriodicFn2D::from_z(&f)));
        chain.spec.mu = flatten_fiber_mean(&chain.spec.mu);
    }
    normalize_constants(chain)
}

/// Drops the nonconstant `y`-mean modes left over from roundoff.
fn flatten_fiber_mean(mu: &PeriodicFn2D) -> PeriodicFn2D {
    mu.fiber_oscillation().add_const(mu.mean())
}

fn finish_closed(chain: Chain, label: &str) -> Reduced<NormalFormClosed> {
    let s = chain.spec;
    let nf = NormalFormClosed { n: s.n(), lambda: s.lambda, k: s.nu.mean(), l2: s.l2.fiber_mean(), mu: s.mu };
    Reduced { nf, change: chain.map.with_label(label, &[]) }
}

/// `w(y', z)` with `y = y' + w` the point at which the arc length from `y = 0`
/// along the leaf equals `y'` times the leaf length.
fn leaf_reparam(l2: &PeriodicFn2D) -> PeriodicFn2D {
    let l = PeriodicFn2D::project_adaptive(|y, z| l2.eval(y, z).sqrt(), PROJ_TOL);
    let ell = l.fiber_mean();
    let fp = antiderivative_y(&l.fiber_oscillation());
    let solve = |yp: f64, z: f64| {
        let e = ell.eval(z);
        let mut w = 0.0;
        for _ in 0..60 {
            let y = yp + w;
            let g = w + (fp.eval(y, z) - fp.eval(0.0, z)) / e;
            let d = l.eval(y, z) / e;
            let step = g / d;
            w -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        w
    };
    PeriodicFn2D::project_adaptive(solve, PROJ_TOL)
}

/// `Φ*g` for `Φ` an element of `GL₂(ℤ)` acting on the torus, followed by
/// renormalization.
pub fn act_gl2(nf: &NormalFormDio, m: [[i64; 2]; 2]) -> Result<Reduced<NormalFormDio>> {
    let mut chain = Chain::new(nf.to_spec());
    chain.try_apply(ops::gl2(&chain.spec, m))?;
    chain.spec.l2 = PeriodicFn2D::constant(chain.spec.l2.mean());
    reduce_dio_chain(&mut chain)?;
    let [[a, b], [c, d]] = m.map(|r| r.map(|v| v as f64));
    let mut out = finish_dio(chain, "act_gl2");
    out.change = out.change.with_label("act_gl2", &[("a", a), ("b", b), ("c", c), ("d", d)]);
    Ok(out)
}

/// The `ℤ`-action through `φ_{ℓ,A,B}` with `A`, `B` chosen for the ranges.
///
/// For `n = 0`: `k ↦ {k + ℓ𝓛}_Λ` and `μ ↦ μ(y + ℓH(z), z) + ℓ(2k + ℓ𝓛)`
/// reduced mod `2Λ`. For `n ≠ 0` the flows of the reduction restore `k = 0`
/// and zero mean.
pub fn act_z(nf: &NormalFormClosed, ell: i64) -> Result<Reduced<NormalFormClosed>> {
    if ell == 0 {
        return Ok(Reduced { nf: nf.clone(), change: AffineMapSpec::identity().with_label("act_Z", &[("ell", 0.0)]) });
    }
    let la = nf.lambda;
    let lcal = nf.lcal();
    let ellf = ell as f64;
    let (a, b) = if nf.n == 0 {
        let kk = nf.k + ellf * lcal;
        let a = -range_floor(kk / la) as i64;
        let c_ell = ellf * (ellf * lcal + 2.0 * nf.k);
        let b = -range_floor((nf.mu.mean() + c_ell) / (2.0 * la)) as i64;
        (a, b)
    } else {
        (0, 0)
    };
    let phi = phi_lab(nf, ell, a, b);
    let hp = nf.hp();
    let mu_shift = if nf.mu.is_y_independent(0.0) {
        nf.mu.clone()
    } else {
        let mu = &nf.mu;
        PeriodicFn2D::project_adaptive(|y, z| mu.eval(y + ellf * (z + hp.eval(z)), z), PROJ_TOL)
    };
    let mut spec = nf.to_spec();
    spec.nu = PeriodicFn2D::constant(nf.k + la * a as f64 + ellf * lcal);
    spec.mu = mu_shift.add_const(2.0 * la * b as f64 + phi.c_ell);
    let mut chain = Chain { spec, map: phi.map.clone() };
    normalize_constants(&mut chain)?;
    let mut out = finish_closed(chain, "act_Z");
    out.change = out.change.with_label("act_Z", &[("ell", ellf)]);
    Ok(out)
}
