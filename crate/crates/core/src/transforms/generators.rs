//! Named affine generators built from normal-form data.

use crate::error::{Error, Result};
use crate::map::{AffineMapSpec, Elem, PolyMap, ShearMap};
use crate::model::{ArithCertificates, ArithClaim};
use crate::normalform::{NormalForm, NormalFormClosed};
use crate::periodic::{gcd, PeriodicFn1D, PeriodicFn2D, PolyPeriodic};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Relative tolerance when matching certificates against the data.
const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorKind {
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "chi")]
    Chi,
    #[serde(rename = "chi_prime")]
    ChiPrime,
    #[serde(rename = "psi")]
    Psi,
    #[serde(rename = "phi0")]
    Phi0,
    #[serde(rename = "flowY")]
    FlowY,
    #[serde(rename = "flowZ")]
    FlowZ,
    #[serde(rename = "phi_lAB")]
    PhiLab,
    #[serde(rename = "translation")]
    Translation,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 9] = [
        Self::Sigma,
        Self::Chi,
        Self::ChiPrime,
        Self::Psi,
        Self::Phi0,
        Self::FlowY,
        Self::FlowZ,
        Self::PhiLab,
        Self::Translation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sigma => "sigma",
            Self::Chi => "chi",
            Self::ChiPrime => "chi_prime",
            Self::Psi => "psi",
            Self::Phi0 => "phi0",
            Self::FlowY => "flowY",
            Self::FlowZ => "flowZ",
            Self::PhiLab => "phi_lAB",
            Self::Translation => "translation",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown map kind {s:?}")))
    }
}

/// `φ_{ℓ,A,B}` on a closed-leaf normal form.
#[derive(Clone, Debug)]
pub struct PhiLab {
    pub ell: i64,
    pub a: i64,
    pub b: i64,
    /// Mean-free `η` from the constancy condition.
    pub eta: PeriodicFn1D,
    /// `2Λnℓ·mean(H - z) - Λnℓ + ℓ(ℓ𝓛 + 2k)`.
    pub c_ell: f64,
    /// `C` of the map when `μ` is constant and `A = -ℓ𝓛/Λ`.
    pub c_const_mu: f64,
    pub map: AffineMapSpec,
}

/// `φ_{ℓ,A,B}(x,y,z) = (x + Q(z) + Ay + Bz, y + ℓH(z), z)` with
/// `Q = -nℓ((½ - z)H + z²/2) - η`.
///
/// `η` solves `2Λη' = 2Λnℓ(H - z) - Λnℓh + ℓ(ℓ𝓛 + 2k)h - c_ℓ`, which makes
/// the pulled-back `ν` constant.
pub fn phi_lab(nf: &NormalFormClosed, ell: i64, a: i64, b: i64) -> PhiLab {
    let la = nf.lambda;
    let n = nf.n as f64;
    let l = ell as f64;
    let lcal = nf.lcal();
    let h = nf.h();
    let hp = nf.hp();
    let rhs = hp.scale(2.0 * la * n * l).add(&h.scale(-la * n * l + l * (l * lcal + 2.0 * nf.k)));
    let c_ell = rhs.mean();
    let eta = rhs.add_const(-c_ell).scale(1.0 / (2.0 * la)).antiderivative();
    let poly = PolyMap {
        e1: 1.0,
        q: [0.0, a as f64, b as f64 - 0.5 * n * l, 0.0, 0.0, 0.5 * n * l],
        m: [[1.0, l], [0.0, 1.0]],
        c: [0.0, 0.0],
    };
    let fx0 = hp.scale(-0.5 * n * l).sub(&eta);
    let fx = PolyPeriodic::new(vec![PeriodicFn2D::from_z(&fx0), PeriodicFn2D::from_z(&hp.scale(n * l))])
        .expect("degree 1");
    let shear = ShearMap { fx, fy: PolyPeriodic::periodic(PeriodicFn2D::from_z(&hp.scale(l))) };
    let map = AffineMapSpec::new(
        "phi_lAB",
        &[("ell", l), ("A", a as f64), ("B", b as f64)],
        vec![Elem::Poly(poly), Elem::Shear(shear)],
    );
    let c_const_mu = (2.0 * la * b as f64 + c_ell) / (la * la);
    PhiLab { ell, a, b, eta, c_ell, c_const_mu, map }
}

fn param(params: &[(&str, f64)], name: &str, default: f64) -> f64 {
    params.iter().find(|(k, _)| *k == name).map(|(_, v)| *v).unwrap_or(default)
}

fn int_param(params: &[(&str, f64)], name: &str, default: i64) -> Result<i64> {
    let v = param(params, name, default as f64);
    if v.fract() != 0.0 {
        return Err(Error::InvalidSpec(format!("parameter {name} must be an integer")));
    }
    Ok(v as i64)
}

/// `σ = (x + z, y, z)`.
pub fn sigma() -> AffineMapSpec {
    AffineMapSpec::poly("sigma", &[], PolyMap { q: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0], ..PolyMap::identity() })
}

/// Flow of `Ỹ = ∂y + nz∂x + θ∂z`: `(x + n(sz + θs²/2), y + s, z + θs)`.
pub fn flow_y(n: u32, theta: f64, s: f64) -> AffineMapSpec {
    let n = n as f64;
    let m = PolyMap { q: [0.5 * n * theta * s * s, 0.0, n * s, 0.0, 0.0, 0.0], c: [s, theta * s], ..PolyMap::identity() };
    AffineMapSpec::poly("flowY", &[("s", s)], m)
}

/// `(x, y, z + t)`.
pub fn flow_z(t: f64) -> AffineMapSpec {
    AffineMapSpec::poly("flowZ", &[("t", t)], PolyMap::translation([0.0, 0.0, t]))
}

fn closed(nf: &NormalForm, what: &str) -> Result<NormalFormClosed> {
    match nf {
        NormalForm::Closed(c) => Ok(c.clone()),
        NormalForm::Dio(_) => Err(Error::IncompatibleNormalForm(format!("{what} needs closed leaves"))),
    }
}

/// `𝓛/Λ = p/q` from the certificate, checked against the data.
pub(crate) fn lcal_ratio(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<(i64, i64)> {
    match &certs.lcal_over_lambda {
        None => Err(Error::CertificateMissing("Lcal_over_Lambda".into())),
        Some(ArithClaim::Irrational) => Err(Error::IncompatibleNormalForm("Lcal/Lambda certified irrational".into())),
        Some(ArithClaim::Rational { p, q }) => {
            let r = nf.lcal() / nf.lambda;
            if (r - *p as f64 / *q as f64).abs() > CERT_TOL * (1.0 + r.abs()) {
                return Err(Error::IncompatibleNormalForm(format!("Lcal/Lambda = {r} disagrees with certificate {p}/{q}")));
            }
            let g = gcd(*p as i128, *q as i128) as i64;
            let (p, q) = (p / g, q / g);
            Ok(if q < 0 { (-p, -q) } else { (p, q) })
        }
    }
}

/// `k/Λ = r/s` from the certificate.
pub(crate) fn k_ratio(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<Option<(i64, i64)>> {
    match &certs.k_over_lambda {
        None if nf.k == 0.0 => Ok(Some((0, 1))),
        None => Err(Error::CertificateMissing("k_over_Lambda".into())),
        Some(ArithClaim::Irrational) => Ok(None),
        Some(ArithClaim::Rational { p, q }) => {
            let r = nf.k / nf.lambda;
            if (r - *p as f64 / *q as f64).abs() > CERT_TOL * (1.0 + r.abs()) {
                return Err(Error::IncompatibleNormalForm(format!("k/Lambda = {r} disagrees with certificate {p}/{q}")));
            }
            Ok(Some(if *q < 0 { (-p, -q) } else { (*p, *q) }))
        }
    }
}

/// `χ = φ_{q,-p,0}` for `𝓛 = (p/q)Λ`.
pub fn chi(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<PhiLab> {
    let (p, q) = lcal_ratio(nf, certs)?;
    let mut out = phi_lab(nf, q, -p, 0);
    out.map = out.map.with_label("chi", &[("ell", q as f64), ("A", -p as f64), ("B", 0.0)]);
    Ok(out)
}

/// Data of `χ′`: `(b, B)` with `χ′ = χ^b σ^{-B}` when `n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChiPrimeData {
    pub b: i64,
    #[serde(rename = "B")]
    pub big_b: i64,
}

/// Smallest `b > 0` with `B = b·C(χ)/C(σ)` an integer, from the certificates.
///
/// `C(χ)/C(σ) = q(ps + 2r)/(2s)` for `𝓛/Λ = p/q`, `k/Λ = r/s`.
pub fn chi_prime_data(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<ChiPrimeData> {
    let (p, q) = lcal_ratio(nf, certs)?;
    let (r, s) = k_ratio(nf, certs)?
        .ok_or_else(|| Error::IncompatibleNormalForm("chi_prime needs k/Lambda rational".into()))?;
    let num = q as i128 * (p as i128 * s as i128 + 2 * r as i128);
    let den = 2 * s as i128;
    let g = gcd(num, den).max(1);
    let b = den / g;
    Ok(ChiPrimeData { b: b as i64, big_b: (num / g) as i64 })
}

/// An isometry lying over `χ`: `χ^b σ^{-B}` for `n = 0`, `χ Φ_Y^s` with
/// `s = -C(χ)Λ/(2n)` for `n ≠ 0`.
pub fn chi_prime(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<AffineMapSpec> {
    let ch = chi(nf, certs)?;
    if nf.n == 0 {
        let d = chi_prime_data(nf, certs)?;
        let map = ch.map.pow(d.b).compose(&sigma().pow(-d.big_b));
        Ok(map.with_label("chi_prime", &[("b", d.b as f64), ("B", d.big_b as f64)]))
    } else {
        if !nf.mu.is_constant(1e-12) {
            return Err(Error::IncompatibleNormalForm("chi_prime needs constant mu".into()));
        }
        let s = -ch.c_const_mu * nf.lambda / (2.0 * nf.n as f64);
        let map = ch.map.compose(&flow_y(nf.n, 0.0, s));
        Ok(map.with_label("chi_prime", &[("s", s)]))
    }
}

/// `ψ = (x + P′y + (n/P)z, y + 1/P, z + P′/n)` for a declared period.
pub fn psi(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<AffineMapSpec> {
    let decl = certs.period_decl.as_ref().ok_or_else(|| Error::CertificateMissing("period_decl".into()))?;
    if nf.n == 0 {
        return Err(Error::IncompatibleNormalForm("psi needs n != 0".into()));
    }
    if decl.p <= 0 {
        return Err(Error::InvalidSpec("period P must be positive".into()));
    }
    let n = nf.n as f64;
    let (pp, pq) = (decl.p as f64, decl.p_prime as f64);
    let (dy, dz) = (1.0 / pp, pq / n);
    let shifted_mu = nf.mu.shift(dy, dz);
    let shifted_l2 = nf.l2.shift(dz);
    if shifted_mu.sub(&nf.mu).max_abs_coeff() > 1e-12 || shifted_l2.sub(&nf.l2).max_abs_coeff() > 1e-12 {
        return Err(Error::IncompatibleNormalForm(format!(
            "data not invariant under the declared period (1/{}, {}/{})",
            decl.p, decl.p_prime, nf.n
        )));
    }
    let m = PolyMap { q: [0.0, pq, n / pp, 0.0, 0.0, 0.0], c: [dy, dz], ..PolyMap::identity() };
    Ok(AffineMapSpec::poly("psi", &[("P", pp), ("P_prime", pq)], m))
}

/// `φ₀ = (x + z, y, z + θ/n)` on a Diophantine form with `μ = μ(y)`.
pub fn phi0(nf: &NormalForm) -> Result<AffineMapSpec> {
    let NormalForm::Dio(d) = nf else {
        return Err(Error::IncompatibleNormalForm("phi0 needs an irrational slope".into()));
    };
    if d.n == 0 {
        return Err(Error::IncompatibleNormalForm("phi0 needs n != 0".into()));
    }
    if !d.mu.is_z_independent(1e-12) {
        return Err(Error::IncompatibleNormalForm("phi0 needs mu depending on y only".into()));
    }
    let t = d.theta.value() / d.n as f64;
    let m = PolyMap { q: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0], c: [0.0, t], ..PolyMap::identity() };
    Ok(AffineMapSpec::poly("phi0", &[], m))
}

/// Builds a named generator for a normal form.
pub fn make_generator(
    kind: GeneratorKind,
    params: &[(&str, f64)],
    nf: &NormalForm,
    certs: &ArithCertificates,
) -> Result<AffineMapSpec> {
    let (n, theta) = match nf {
        NormalForm::Dio(d) => (d.n, d.theta.value()),
        NormalForm::Closed(c) => (c.n, 0.0),
    };
    match kind {
        GeneratorKind::Sigma => {
            closed(nf, "sigma")?;
            Ok(sigma())
        }
        GeneratorKind::FlowY => Ok(flow_y(n, theta, param(params, "s", 1.0))),
        GeneratorKind::FlowZ => Ok(flow_z(param(params, "t", 1.0))),
        GeneratorKind::Translation => Ok(AffineMapSpec::translation([
            param(params, "x", 0.0),
            param(params, "y", 0.0),
            param(params, "z", 0.0),
        ])),
        GeneratorKind::Phi0 => phi0(nf),
        GeneratorKind::PhiLab => {
            let c = closed(nf, "phi_lAB")?;
            let ell = int_param(params, "ell", 1)?;
            let a = int_param(params, "A", 0)?;
            let b = int_param(params, "B", 0)?;
            Ok(phi_lab(&c, ell, a, b).map)
        }
        GeneratorKind::Chi => Ok(chi(&closed(nf, "chi")?, certs)?.map),
        GeneratorKind::ChiPrime => chi_prime(&closed(nf, "chi_prime")?, certs),
        GeneratorKind::Psi => psi(&closed(nf, "psi")?, certs),
    }
}
