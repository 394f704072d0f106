//! Affine classification: family row, case, the quotient `Aff(g)/Isom(g)`
//! with generators, compactness of `Isom(g)` and the image of `C`.

use crate::curvature::r_grid;
use crate::error::{Error, Result};
use crate::map::{AffineMapSpec, MapDescriptor};
use crate::model::{metric_coords, ArithCertificates, ArithClaim, LatticeSpec, MetricSpec, PeriodDecl};
use crate::normalform::{reduce_closed, reduce_diophantine, NormalForm, NormalFormClosed, NormalFormDio};
use crate::periodic::ext_gcd;
use crate::transforms::{
    affine_defect_unchecked, check_generator, chi, chi_prime, chi_prime_data, flow_y, k_ratio, lcal_ratio, phi0, phi_lab, psi, sigma,
    GeneratorCheck,
};
use serde::{Serialize, Serializer};

/// Sup of `|r|` below which a metric counts as flat.
pub const FLAT_TOL: f64 = 1e-8;
/// Coefficient tolerance for structural tests on normal-form data.
const SHAPE_TOL: f64 = 1e-10;
/// Grid used for generator checks.
const CHECK_GRID: usize = 8;

/// What `classify` accepts.
#[derive(Clone, Debug)]
pub enum ClassInput {
    Normal(NormalForm),
    /// A spec on a `torusA`/`torusB` lattice.
    Torus(MetricSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table1Row {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table2Case {
    Case(u8),
    FlatTorus,
    Undecided,
}

impl Serialize for Table2Case {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Case(c) => s.serialize_u8(*c),
            Self::FlatTorus => s.serialize_str("flat_torus"),
            Self::Undecided => s.serialize_str("undecided"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GroupType {
    #[serde(rename = "trivial")]
    Trivial,
    Z,
    Z2,
    R,
    #[serde(rename = "unclassified")]
    Unclassified,
    #[serde(rename = "undecided")]
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compactness {
    Compact,
    NonCompact,
    Undecided,
}

impl Serialize for Compactness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Compact => s.serialize_bool(true),
            Self::NonCompact => s.serialize_bool(false),
            Self::Undecided => s.serialize_str("undecided"),
        }
    }
}

/// An isometry covering a non-isometric affine map, showing `Isom(g)` is not compact.
#[derive(Clone, Debug, Serialize)]
pub struct IsomWitness {
    pub map: MapDescriptor,
    #[serde(rename = "C")]
    pub c: f64,
    pub residual: f64,
    #[serde(skip)]
    pub full_map: AffineMapSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompactnessReport {
    pub value: Compactness,
    pub witness: Option<IsomWitness>,
    pub missing: Vec<String>,
    pub reason: String,
}

/// Least-squares line through `(t, C(Φ^t))`.
#[derive(Clone, Debug, Serialize)]
pub struct FlowFit {
    pub ts: Vec<f64>,
    pub cs: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// `C(σ)` from the pullback oracle next to the two other normalizations in use.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SigmaConstants {
    pub oracle: f64,
    pub formula: f64,
    pub alt_one_over_lambda: f64,
    pub alt_two_lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImC {
    pub description: String,
    /// The same subgroup in the `2Λ` normalization.
    pub alt_description: String,
    pub generator_c: Vec<f64>,
    pub expected_c: Vec<f64>,
    pub mismatch: f64,
    pub sigma: Option<SigmaConstants>,
    pub flow: Option<FlowFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub table1_row: Table1Row,
    pub table2_case: Table2Case,
    pub group: GroupType,
    pub generators: Vec<MapDescriptor>,
    pub generator_checks: Vec<GeneratorCheck>,
    pub isom_compact: Compactness,
    pub isom_witness: Option<IsomWitness>,
    #[serde(rename = "imC")]
    pub imc: ImC,
    pub caveats: Vec<String>,
    pub missing_certificates: Vec<String>,
    /// Metric in the coordinates where the generators act.
    #[serde(skip)]
    pub spec: MetricSpec,
    #[serde(skip)]
    pub generator_maps: Vec<AffineMapSpec>,
    #[serde(skip)]
    expected: Expected,
}

impl ClassReport {
    pub fn is_undecided(&self) -> bool {
        !self.missing_certificates.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
enum Expected {
    #[default]
    Trivial,
    /// Expected `C` of each generator and the two descriptions.
    Discrete(Vec<f64>, String, String),
    /// Expected slope of `C` along the flow.
    Flow(f64),
}

fn is_flat(spec: &MetricSpec) -> bool {
    r_grid(&metric_coords(spec), 32).iter().all(|r| r.abs() < FLAT_TOL)
}

struct Draft {
    row: Table1Row,
    case: Table2Case,
    group: GroupType,
    maps: Vec<AffineMapSpec>,
    expected: Expected,
    caveats: Vec<String>,
    missing: Vec<String>,
}

impl Draft {
    fn new(row: Table1Row, case: Table2Case, group: GroupType) -> Self {
        Self { row, case, group, maps: vec![], expected: Expected::Trivial, caveats: vec![], missing: vec![] }
    }
}

/// Classifies a normal form or a torus spec.
///
/// Rationality branches use `certs` only; a missing certificate yields
/// `Undecided` with the certificate named in `missing_certificates`.
pub fn classify(input: &ClassInput, certs: &ArithCertificates) -> Result<ClassReport> {
    let (spec, draft) = match input {
        ClassInput::Torus(spec) => (spec.clone(), classify_torus(spec)?),
        ClassInput::Normal(NormalForm::Dio(nf)) => (nf.to_spec(), classify_dio(nf)?),
        ClassInput::Normal(NormalForm::Closed(nf)) => (nf.to_spec(), classify_closed(nf, certs)?),
    };
    let comp = if draft.case == Table2Case::FlatTorus {
        CompactnessReport {
            value: Compactness::Undecided,
            witness: None,
            missing: vec![],
            reason: "flat torus not classified".into(),
        }
    } else {
        isom_compactness(input, certs)?
    };
    let metric = metric_coords(&spec);
    let generator_checks = draft.maps.iter().map(|m| check_generator(&metric, &spec.lattice, m, CHECK_GRID)).collect();
    let mut missing = draft.missing;
    for m in comp.missing {
        if !missing.contains(&m) {
            missing.push(m);
        }
    }
    let mut caveats = draft.caveats;
    if comp.value == Compactness::Undecided && draft.case != Table2Case::FlatTorus {
        caveats.push(format!("isom compactness undecided: {}", comp.reason));
    }
    let mut report = ClassReport {
        table1_row: draft.row,
        table2_case: draft.case,
        group: draft.group,
        generators: draft.maps.iter().map(|m| m.descriptor()).collect(),
        generator_checks,
        isom_compact: comp.value,
        isom_witness: comp.witness,
        imc: ImC {
            description: String::new(),
            alt_description: String::new(),
            generator_c: vec![],
            expected_c: vec![],
            mismatch: 0.0,
            sigma: None,
            flow: None,
        },
        caveats,
        missing_certificates: missing,
        spec,
        generator_maps: draft.maps,
        expected: draft.expected,
    };
    report.imc = imc_description(&report);
    Ok(report)
}

/// Normalizes a spec and classifies it with the certificates it carries.
///
/// The certificates refer to the normal form: `𝓛/Λ` and `k/Λ` are checked
/// against the reduced data.
pub fn classify_spec(spec: &MetricSpec) -> Result<ClassReport> {
    let input = normalize_for_classification(spec)?;
    classify(&input, &spec.arith)
}

/// The input `classify` needs for `spec`: torus specs as given, otherwise the normal form.
pub fn normalize_for_classification(spec: &MetricSpec) -> Result<ClassInput> {
    Ok(match spec.lattice {
        LatticeSpec::TorusA { .. } | LatticeSpec::TorusB { .. } => ClassInput::Torus(spec.clone()),
        LatticeSpec::Gamma { .. } if spec.theta.is_rational() => ClassInput::Normal(NormalForm::Closed(reduce_closed(spec)?.nf)),
        LatticeSpec::Gamma { .. } => ClassInput::Normal(NormalForm::Dio(reduce_diophantine(spec)?.nf)),
    })
}

fn classify_torus(spec: &MetricSpec) -> Result<Draft> {
    let row = match spec.lattice {
        LatticeSpec::TorusA { .. } => Table1Row::A,
        LatticeSpec::TorusB { .. } => Table1Row::B,
        LatticeSpec::Gamma { .. } => return Err(Error::InvalidSpec("torus input on a Gamma lattice".into())),
    };
    let mut d = Draft::new(row, Table2Case::Case(1), GroupType::Trivial);
    d.caveats.push("Aff(g) = Isom(g): translations preserving the data".into());
    Ok(d)
}

fn classify_dio(nf: &NormalFormDio) -> Result<Draft> {
    let spec = nf.to_spec();
    let la = nf.lambda;
    if is_flat(&spec) {
        if nf.n == 0 {
            let mut d = Draft::new(Table1Row::C, Table2Case::FlatTorus, GroupType::Unclassified);
            d.caveats.push("flat 3-torus: decomposable, affine group of GL3(Z) type; not classified further".into());
            return Ok(d);
        }
        let mut d = Draft::new(Table1Row::C, Table2Case::Case(8), GroupType::R);
        d.maps.push(flow_y(nf.n, nf.theta.value(), 1.0));
        d.expected = Expected::Flow(2.0 * nf.n as f64 / la);
        return Ok(d);
    }
    if nf.n != 0 && nf.mu.is_z_independent(SHAPE_TOL) && !nf.mu.is_constant(SHAPE_TOL) {
        let mut d = Draft::new(Table1Row::C, Table2Case::Case(3), GroupType::Z);
        d.maps.push(phi0(&NormalForm::Dio(nf.clone()))?);
        d.expected = Expected::Discrete(vec![2.0 / la], "(2/Lambda) Z".into(), "2 Lambda Z".into());
        return Ok(d);
    }
    Ok(Draft::new(Table1Row::C, Table2Case::Case(2), GroupType::Trivial))
}

/// Largest `P` (then smallest `P′`) with the data invariant under `(y + 1/P, z + P′/n)`.
pub fn find_period(nf: &NormalFormClosed) -> Option<PeriodDecl> {
    if nf.n == 0 {
        return None;
    }
    let n = nf.n as i64;
    let max_p = nf.mu.max_freq().0.max(1) as i64;
    for p in (1..=max_p).rev() {
        for pp in 0..n {
            if p == 1 && pp == 0 {
                continue;
            }
            let (dy, dz) = (1.0 / p as f64, pp as f64 / n as f64);
            let mu_ok = nf.mu.shift(dy, dz).sub(&nf.mu).max_abs_coeff() < SHAPE_TOL;
            let l2_ok = nf.l2.shift(dz).sub(&nf.l2).max_abs_coeff() < SHAPE_TOL;
            if mu_ok && l2_ok {
                return Some(PeriodDecl { p, p_prime: pp });
            }
        }
    }
    None
}

fn classify_closed(nf: &NormalFormClosed, certs: &ArithCertificates) -> Result<Draft> {
    let spec = nf.to_spec();
    let la = nf.lambda;
    let c_sigma = 2.0 / la;
    let flat = is_flat(&spec);
    let case4 = || {
        let mut d = Draft::new(Table1Row::D, Table2Case::Case(4), GroupType::Z);
        d.maps.push(sigma());
        d.expected = Expected::Discrete(vec![c_sigma], "(2/Lambda) Z".into(), "2 Lambda Z".into());
        d
    };
    if nf.n != 0 {
        if nf.mu.max_abs_coeff() < SHAPE_TOL {
            let mut d = Draft::new(Table1Row::D, Table2Case::Case(9), GroupType::R);
            d.maps.push(flow_y(nf.n, 0.0, 1.0));
            d.expected = Expected::Flow(2.0 * nf.n as f64 / la);
            return Ok(d);
        }
        if nf.mu.is_y_independent(SHAPE_TOL) {
            return Ok(case4());
        }
        let (decl, searched) = match &certs.period_decl {
            Some(decl) => (Some(decl.clone()), false),
            None => (find_period(nf), true),
        };
        let Some(decl) = decl else { return Ok(case4()) };
        let local = ArithCertificates { period_decl: Some(decl.clone()), ..certs.clone() };
        let ps = psi(nf, &local)?;
        let (g, u, v) = ext_gcd(nf.n as i64, decl.p);
        let gen = sigma()
            .pow(v)
            .compose(&ps.pow(u))
            .with_label("sigma^v psi^u", &[("u", u as f64), ("v", v as f64), ("P", decl.p as f64), ("P_prime", decl.p_prime as f64)]);
        let mut d = Draft::new(Table1Row::D, Table2Case::Case(5), GroupType::Z);
        d.maps.push(gen);
        d.expected = Expected::Discrete(
            vec![2.0 * g as f64 / (decl.p as f64 * la)],
            format!("(2 gcd(n,P)/(P Lambda)) Z with n = {}, P = {}", nf.n, decl.p),
            "(2 Lambda n/P) gcd(n,P) Z".into(),
        );
        if searched {
            d.caveats.push(format!("period (1/{}, {}/{}) found by search, not declared", decl.p, decl.p_prime, nf.n));
        }
        return Ok(d);
    }
    let mut out = if !nf.mu.is_constant(SHAPE_TOL) {
        case4()
    } else {
        classify_closed_const_mu(nf, certs, c_sigma)?
    };
    if flat {
        out.caveats.push("metric is flat; the case refers to the maps preserving X".into());
    }
    Ok(out)
}

/// `n = 0`, `μ` constant: the branches on `𝓛/Λ` and `k/Λ`.
fn classify_closed_const_mu(nf: &NormalFormClosed, certs: &ArithCertificates, c_sigma: f64) -> Result<Draft> {
    let undecided = |name: &str, branches: &str| {
        let mut d = Draft::new(Table1Row::D, Table2Case::Undecided, GroupType::Undecided);
        d.missing.push(name.to_string());
        d.caveats.push(format!("certificate {name} missing: {branches}"));
        d
    };
    match &certs.lcal_over_lambda {
        None => return Ok(undecided("Lcal_over_Lambda", "case 4 if Lcal/Lambda is irrational, case 6 or 7 if rational")),
        Some(ArithClaim::Irrational) => {
            let mut d = Draft::new(Table1Row::D, Table2Case::Case(4), GroupType::Z);
            d.maps.push(sigma());
            d.expected = Expected::Discrete(vec![c_sigma], "(2/Lambda) Z".into(), "2 Lambda Z".into());
            return Ok(d);
        }
        Some(ArithClaim::Rational { .. }) => {
            lcal_ratio(nf, certs)?;
        }
    }
    let ch = chi(nf, certs)?;
    match k_ratio(nf, certs) {
        Err(Error::CertificateMissing(_)) => {
            Ok(undecided("k_over_Lambda", "case 6 if k/Lambda is rational, case 7 if irrational"))
        }
        Err(e) => Err(e),
        Ok(None) => {
            let mut d = Draft::new(Table1Row::D, Table2Case::Case(7), GroupType::Z2);
            d.maps.push(sigma());
            d.maps.push(ch.map.clone());
            d.expected = Expected::Discrete(
                vec![c_sigma, ch.c_const_mu],
                format!("(2/Lambda)(Z + alpha Z), alpha = {:.12e}", ch.c_const_mu / c_sigma),
                "2 Lambda (Z + alpha Z)".into(),
            );
            Ok(d)
        }
        Ok(Some((r, s))) => {
            let cp = chi_prime_data(nf, certs)?;
            let (p, q) = lcal_ratio(nf, certs)?;
            let gen = match case6_generator(nf, (p, q), (r, s), cp.b) {
                Some(m) => m,
                None => {
                    // C(χ) = (B/b) C(σ) with gcd(B, b) = 1, so χ^y σ^x with yB + xb = 1 generates.
                    let (_, y, x) = ext_gcd(cp.big_b, cp.b);
                    ch.map.pow(y).compose(&sigma().pow(x)).with_label(
                        "chi^y sigma^x",
                        &[("y", y as f64), ("x", x as f64), ("b", cp.b as f64), ("B", cp.big_b as f64)],
                    )
                }
            };
            let mut d = Draft::new(Table1Row::D, Table2Case::Case(6), GroupType::Z);
            d.maps.push(gen);
            d.expected = Expected::Discrete(
                vec![c_sigma / cp.b as f64],
                format!("(2/(b Lambda)) Z with b = {}, B = {}", cp.b, cp.big_b),
                "(2 Lambda n/b) gcd(B,b) Z".into(),
            );
            if cp.b == 1 && cp.big_b == 1 {
                d.caveats.push("b = B = 1: the class of sigma generates".into());
            }
            Ok(d)
        }
    }
}

/// A single `φ_{ℓ,A,B}` with `ℓ = mq`, `A = -mp` and `C = C(σ)/b`.
///
/// `C(φ_{ℓ,A,B})/C(σ) = B + mq(mps + 2r)/(2s)` for `𝓛/Λ = p/q`, `k/Λ = r/s`.
fn case6_generator(nf: &NormalFormClosed, (p, q): (i64, i64), (r, s): (i64, i64), b: i64) -> Option<AffineMapSpec> {
    let (p, q, r, s, b) = (p as i128, q as i128, r as i128, s as i128, b as i128);
    for m in 1..=(2 * s * b).min(4096) {
        let num = 2 * s - b * m * q * (m * p * s + 2 * r);
        if num % (2 * s * b) == 0 {
            let big_b = (num / (2 * s * b)) as i64;
            let (ell, a) = ((m * q) as i64, (-m * p) as i64);
            let ph = phi_lab(nf, ell, a, big_b);
            return Some(ph.map.with_label("phi_lAB", &[("ell", ell as f64), ("A", a as f64), ("B", big_b as f64)]));
        }
    }
    None
}

/// Whether `Isom(g)` is compact, with an isometry `χ′` as witness when it is not.
pub fn isom_compactness(input: &ClassInput, certs: &ArithCertificates) -> Result<CompactnessReport> {
    let done = |value, reason: &str| CompactnessReport { value, witness: None, missing: vec![], reason: reason.into() };
    let nf = match input {
        ClassInput::Torus(_) => return Ok(done(Compactness::Compact, "torus lattice")),
        ClassInput::Normal(NormalForm::Dio(_)) => return Ok(done(Compactness::Compact, "dense leaves")),
        ClassInput::Normal(NormalForm::Closed(nf)) => nf,
    };
    if !nf.mu.is_constant(SHAPE_TOL) {
        return Ok(done(Compactness::Compact, "mu is not constant"));
    }
    let undecided = |name: &str| CompactnessReport {
        value: Compactness::Undecided,
        witness: None,
        missing: vec![name.to_string()],
        reason: format!("certificate {name} missing"),
    };
    match &certs.lcal_over_lambda {
        None => return Ok(undecided("Lcal_over_Lambda")),
        Some(ArithClaim::Irrational) => return Ok(done(Compactness::Compact, "Lcal/Lambda irrational")),
        Some(ArithClaim::Rational { .. }) => {}
    }
    match k_ratio(nf, certs) {
        Err(Error::CertificateMissing(_)) => return Ok(undecided("k_over_Lambda")),
        Err(e) => return Err(e),
        Ok(None) => return Ok(done(Compactness::Compact, "k/Lambda irrational")),
        Ok(Some(_)) => {}
    }
    let map = chi_prime(nf, certs)?;
    let d = affine_defect_unchecked(&metric_coords(&nf.to_spec()), &map, CHECK_GRID);
    Ok(CompactnessReport {
        value: Compactness::NonCompact,
        witness: Some(IsomWitness { map: map.descriptor(), c: d.c, residual: d.residual, full_map: map }),
        missing: vec![],
        reason: "Lcal and k in Lambda Q".into(),
    })
}

/// Least-squares line through the points.
pub fn linear_fit(ts: &[f64], cs: &[f64]) -> FlowFit {
    let m = ts.len() as f64;
    let (st, sc) = (ts.iter().sum::<f64>(), cs.iter().sum::<f64>());
    let stt: f64 = ts.iter().map(|t| t * t).sum();
    let stc: f64 = ts.iter().zip(cs).map(|(t, c)| t * c).sum();
    let slope = (m * stc - st * sc) / (m * stt - st * st);
    let intercept = (sc - slope * st) / m;
    let residual = ts.iter().zip(cs).map(|(t, c)| (c - slope * t - intercept).abs()).fold(0.0, f64::max);
    FlowFit { ts: ts.to_vec(), cs: cs.to_vec(), slope, intercept, residual }
}

/// Description of `C(Aff(g))` with the measured defects of the generators.
pub fn imc_description(report: &ClassReport) -> ImC {
    let metric = metric_coords(&report.spec);
    let la = report.spec.lambda;
    let mut out = ImC {
        description: "{0}".into(),
        alt_description: "{0}".into(),
        generator_c: vec![],
        expected_c: vec![],
        mismatch: 0.0,
        sigma: None,
        flow: None,
    };
    match &report.expected {
        Expected::Trivial => {
            if report.table2_case == Table2Case::Undecided {
                out.description = "undecided".into();
                out.alt_description = "undecided".into();
            }
        }
        Expected::Discrete(expected, desc, alt) => {
            out.description = desc.clone();
            out.alt_description = alt.clone();
            out.generator_c = report.generator_maps.iter().map(|m| affine_defect_unchecked(&metric, m, CHECK_GRID).c).collect();
            out.expected_c = expected.clone();
            out.mismatch = out.generator_c.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        }
        Expected::Flow(slope) => {
            let (n, theta) = (report.spec.n(), report.spec.theta_value());
            let ts = [0.1, 0.2, 0.4];
            let cs: Vec<f64> = ts.iter().map(|&t| affine_defect_unchecked(&metric, &flow_y(n, theta, t), CHECK_GRID).c).collect();
            let fit = linear_fit(&ts, &cs);
            out.description = "R".into();
            out.alt_description = "R".into();
            out.generator_c = vec![fit.slope];
            out.expected_c = vec![*slope];
            out.mismatch = (fit.slope - slope).abs();
            out.flow = Some(fit);
        }
    }
    if report.table1_row == Table1Row::D && report.table2_case != Table2Case::FlatTorus {
        out.sigma = Some(SigmaConstants {
            oracle: affine_defect_unchecked(&metric, &sigma(), CHECK_GRID).c,
            formula: 2.0 / la,
            alt_one_over_lambda: 1.0 / la,
            alt_two_lambda: 2.0 * la,
        });
    }
    out
}
