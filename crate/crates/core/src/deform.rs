//! Paths of metrics from a flat metric to a given one along which an affine
//! map stays affine.
//!
//! The linear path interpolates `L²` towards 1 and `μ` towards 0 in the
//! normal-form frame. It keeps `σ`, the flows and `ψ` affine. Maps
//! `φ_{ℓ,A,B}` depend on `L²` through `H`, so they need the equivariant path:
//! with `F = (x - n(½ - z)f(z), y + f(z), H(z))` the conjugate
//! `φ₀ = FφF⁻¹ = (x + Ay + Bw - (nℓ/2)(w - w²), y + ℓw, w)` is polynomial,
//! and the metrics `h = 2a(dx - nw dy)dw + b dy² + 2c dy dw + d dw²` with
//! `a = -ℓb/A`, `2ℓc = Ca² - 2a(B - nℓ/2) - ℓ²b` are exactly those on which
//! `φ₀` is affine with defect `C`. The path is `g_t = F*h_t` with
//! `b_t = tb + 1 - t`, `d_t = td`.

use crate::curvature::r_grid;
use crate::error::{Error, Result};
use crate::map::AffineMapSpec;
use crate::model::{metric_coords, ArithCertificates, CoordMetric, LatticeSpec, MetricSpec};
use crate::normalform::{NormalForm, NormalFormClosed};
use crate::periodic::{PeriodicFn1D, PeriodicFn2D, PolyPeriodic};
use crate::transforms::{affine_defect, lcal_ratio, phi_lab, AffineDefect};

/// Defect residual allowed along a path.
pub const PATH_TOL: f64 = 1e-8;
const PROJ_TOL: f64 = 1e-15;
const GRID: usize = 8;

/// The linear path at `t`: `L²_t = (1 - t) + tL²`, `ν_t = k`, `μ_t = tμ`.
pub fn deform_path(nf: &NormalForm, t: f64) -> Result<MetricSpec> {
    deform_spec(&nf.to_spec(), t)
}

/// The linear path for any spec whose `ν` is constant.
pub fn deform_spec(spec: &MetricSpec, t: f64) -> Result<MetricSpec> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidSpec(format!("t = {t} outside [0, 1]")));
    }
    if !spec.nu.is_constant(1e-12) {
        return Err(Error::NotInNormalForm("the linear path needs constant nu".into()));
    }
    let mut spec = spec.clone();
    spec.l2 = spec.l2.scale(t).add_const(1.0 - t);
    spec.mu = spec.mu.scale(t);
    let min = (0..256).map(|i| spec.l2.eval(0.0, i as f64 / 256.0)).fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::SingularMetric(format!("L2 lost positivity at t = {t}")));
    }
    Ok(spec)
}

/// Data of the equivariant path for `φ_{ℓ,A,B}`.
#[derive(Clone, Debug)]
pub struct EquivariantPath {
    pub n: u32,
    pub ell: i64,
    pub a: i64,
    pub b: i64,
    /// Defect of the map, kept along the path.
    pub c: f64,
    pub map: AffineMapSpec,
    l2: PeriodicFn1D,
    h: PeriodicFn1D,
    hp: PeriodicFn1D,
    f: PeriodicFn1D,
    fp: PeriodicFn1D,
    d1: PeriodicFn1D,
}

/// Builds the equivariant path for `φ_{ℓ,A,B}` with `A = -ℓ𝓛/Λ`.
///
/// Needs constant `μ` and a rational `𝓛/Λ` certificate that makes `A` an integer.
pub fn equivariant_path(nf: &NormalFormClosed, certs: &ArithCertificates, ell: i64, big_b: i64) -> Result<EquivariantPath> {
    let (p, q) = lcal_ratio(nf, certs)?;
    if ell == 0 || (ell * p) % q != 0 {
        return Err(Error::IncompatibleNormalForm(format!("ell = {ell} does not make A = -ell Lcal/Lambda an integer")));
    }
    if !nf.mu.is_constant(1e-12) {
        return Err(Error::IncompatibleNormalForm("phi_lAB is affine only for constant mu".into()));
    }
    let a = -ell * p / q;
    if a == 0 {
        return Err(Error::IncompatibleNormalForm("A = 0".into()));
    }
    let ph = phi_lab(nf, ell, a, big_b);
    let (n, l, af, bf) = (nf.n as f64, ell as f64, a as f64, big_b as f64);
    let hp = nf.hp();
    let h = nf.h();
    let f = hp.mul(&hp).scale(-0.5 * n * l).sub(&ph.eta).sub(&hp.scale(bf)).scale(1.0 / af);
    let fp = f.derivative(1);
    let mut path = EquivariantPath {
        n: nf.n,
        ell,
        a,
        b: big_b,
        c: ph.c_const_mu,
        map: ph.map,
        l2: nf.l2.clone(),
        h,
        hp,
        f,
        fp,
        d1: PeriodicFn1D::zero(),
    };
    let mu = nf.mu.mean();
    let d1 = {
        let pth = &path;
        PeriodicFn1D::project_adaptive(
            |z| {
                let v = pth.values(1.0, z);
                (mu - 2.0 * v.s0 * v.hd * v.a - v.fp * v.fp * v.b - 2.0 * v.fp * v.hd * v.e0) / (v.hd * v.hd)
            },
            PROJ_TOL,
        )
    };
    path.d1 = d1;
    Ok(path)
}

struct PathValues {
    a: f64,
    b: f64,
    e0: f64,
    e1: f64,
    s0: f64,
    s1: f64,
    fp: f64,
    hd: f64,
    d: f64,
}

impl EquivariantPath {
    /// Pointwise ingredients of `F*h_t` at height `z`.
    fn values(&self, t: f64, z: f64) -> PathValues {
        let (n, l, af) = (self.n as f64, self.ell as f64, self.a as f64);
        let b = t * self.l2.eval(z) + 1.0 - t;
        let a = -l * b / af;
        let c = (self.c * a * a - 2.0 * a * (self.b as f64 - 0.5 * n * l) - l * l * b) / (2.0 * l);
        let fp = self.fp.eval(z);
        PathValues {
            a,
            b,
            e0: c - n * self.hp.eval(z) * a,
            e1: -n * a,
            s0: n * (self.f.eval(z) - 0.5 * fp),
            s1: n * fp,
            fp,
            hd: self.h.eval(z),
            d: t * self.d1.eval(z),
        }
    }

    /// `g_t` in the original coordinates.
    pub fn metric(&self, t: f64) -> Result<CoordMetric> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidSpec(format!("t = {t} outside [0, 1]")));
        }
        let proj = |f: &dyn Fn(&PathValues) -> f64| {
            PeriodicFn2D::from_z(&PeriodicFn1D::project_adaptive(|z| f(&self.values(t, z)), PROJ_TOL))
        };
        let lin = |p0: PeriodicFn2D, p1: PeriodicFn2D| PolyPeriodic::new(vec![p0, p1]).expect("degree 1");
        let zero = PolyPeriodic::constant(0.0);
        let xz = PolyPeriodic::periodic(proj(&|v| v.a * v.hd));
        let yy = PolyPeriodic::periodic(proj(&|v| v.b));
        let yz = lin(proj(&|v| v.fp * v.b + v.hd * v.e0), proj(&|v| v.hd * v.e1));
        let zz = lin(
            proj(&|v| 2.0 * v.s0 * v.hd * v.a + v.fp * v.fp * v.b + 2.0 * v.fp * v.hd * v.e0 + v.hd * v.hd * v.d),
            proj(&|v| 2.0 * v.s1 * v.hd * v.a + 2.0 * v.fp * v.hd * v.e1),
        );
        Ok(CoordMetric::from_entries([
            [zero.clone(), zero.clone(), xz.clone()],
            [zero, yy, yz.clone()],
            [xz, yz, zz],
        ]))
    }
}

/// A path of metrics on `ℝ³/Γ_n` indexed by `t ∈ [0, 1]`, flat at `t = 0`.
#[derive(Clone, Debug)]
pub enum DeformPath {
    Linear(Box<MetricSpec>),
    Equivariant(Box<EquivariantPath>),
}

impl DeformPath {
    pub fn linear(spec: MetricSpec) -> Self {
        Self::Linear(Box::new(spec))
    }

    pub fn metric(&self, t: f64) -> Result<CoordMetric> {
        match self {
            Self::Linear(spec) => Ok(metric_coords(&deform_spec(spec, t)?)),
            Self::Equivariant(p) => p.metric(t),
        }
    }

    pub fn lattice(&self) -> LatticeSpec {
        match self {
            Self::Linear(spec) => spec.lattice.clone(),
            Self::Equivariant(p) => LatticeSpec::gamma(p.n),
        }
    }
}

/// Sup of `|r|` on a `32²` grid of `g_t`.
pub fn r_sup(path: &DeformPath, t: f64) -> Result<f64> {
    Ok(r_grid(&path.metric(t)?, 32).iter().fold(0.0, |m, r| m.max(r.abs())))
}

/// Checks that `map` is affine for `g_t` at every sample.
pub fn verify_along_path(path: &DeformPath, map: &AffineMapSpec, t_samples: &[f64]) -> Result<Vec<AffineDefect>> {
    let lattice = path.lattice();
    let mut out = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let d = affine_defect(&path.metric(t)?, &lattice, map, GRID).map_err(|e| Error::VerificationFailed { t, reason: e.to_string() })?;
        if !d.is_affine(PATH_TOL) {
            return Err(Error::VerificationFailed {
                t,
                reason: format!("defect residual {:.3e}, spread {:.3e}", d.residual, d.spread),
            });
        }
        out.push(d);
    }
    Ok(out)
}

/// Largest deviation of the points `(t, C)` from the line through the first and last.
pub fn collinearity(ts: &[f64], cs: &[f64]) -> f64 {
    let (Some((&t0, &c0)), Some((&t1, &c1))) = (ts.first().zip(cs.first()), ts.last().zip(cs.last())) else {
        return 0.0;
    };
    if t1 == t0 {
        return 0.0;
    }
    ts.iter()
        .zip(cs)
        .map(|(t, c)| (c - (c0 + (c1 - c0) * (t - t0) / (t1 - t0))).abs())
        .fold(0.0, f64::max)
}

/// The path along which `map` stays affine: the equivariant path for maps of
/// kind `chi` or `phi_lAB` (needs the `𝓛/Λ` certificate), the linear path otherwise.
pub fn path_for_generator(nf: &NormalForm, certs: &ArithCertificates, map: &AffineMapSpec) -> Result<DeformPath> {
    match (nf, map.kind.as_str()) {
        (NormalForm::Closed(c), "chi" | "phi_lAB") => {
            let get = |k: &str| map.param(k).map(|v| v as i64).ok_or_else(|| Error::InvalidSpec(format!("map lacks parameter {k}")));
            let path = equivariant_path(c, certs, get("ell")?, get("B")?)?;
            if path.a != get("A")? {
                return Err(Error::IncompatibleNormalForm("A differs from -ell Lcal/Lambda".into()));
            }
            Ok(DeformPath::Equivariant(Box::new(path)))
        }
        _ => Ok(DeformPath::linear(nf.to_spec())),
    }
}
