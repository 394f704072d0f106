//! Lattices, metric specifications and their coordinate expressions.
//!
//! A metric is given in the frame `(∂x, ∂y + nz∂x + θ∂z, ∂z)` by the matrix
//! `[[0,0,Λ],[0,L²,ν],[Λ,ν,μ]]`. [`metric_coords`] converts it to the
//! coordinate basis, where entries become [`PolyPeriodic`] because of the
//! `nz` twist.

use crate::error::{Error, Result};
use crate::map::{mat_mul, transpose, Mat3, Point, PolyMap};
use crate::periodic::{solve_exterior, Jet2, PeriodicFn2D, PolyPeriodic, ThetaSpec};
use serde::{Deserialize, Serialize};

/// Deck group of the universal cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum LatticeSpec {
    /// `τ_x = (x+1, y, z)`, `τ_y = (x+c1, y+1, z)`, `τ_z = (x+ny+c2, y, z+1)`.
    #[serde(rename = "gamma")]
    Gamma {
        n: u32,
        #[serde(default)]
        c1: f64,
        #[serde(default)]
        c2: f64,
    },
    /// `(x+1, y+τ, z)`, `(x, y+1, z)`, `(x+r1, y+r2, z+1)`.
    #[serde(rename = "torusA")]
    TorusA { tau: f64, r1: f64, r2: f64 },
    /// `(x+1, y, z+τ)`, `(x+r1, y+1, z+r2)`, `(x, y, z+1)`.
    #[serde(rename = "torusB")]
    TorusB { tau: f64, r1: f64, r2: f64 },
}

impl LatticeSpec {
    pub fn gamma(n: u32) -> Self {
        Self::Gamma { n, c1: 0.0, c2: 0.0 }
    }

    pub fn n(&self) -> u32 {
        match self {
            Self::Gamma { n, .. } => *n,
            _ => 0,
        }
    }

    pub fn is_gamma(&self) -> bool {
        matches!(self, Self::Gamma { .. })
    }

    pub fn generator_names(&self) -> [&'static str; 3] {
        match self {
            Self::Gamma { .. } => ["tx", "ty", "tz"],
            _ => ["t1", "t2", "t3"],
        }
    }

    /// The three generators as polynomial maps.
    pub fn generators(&self) -> [PolyMap; 3] {
        match *self {
            Self::Gamma { n, c1, c2 } => [
                PolyMap::translation([1.0, 0.0, 0.0]),
                PolyMap::translation([c1, 1.0, 0.0]),
                PolyMap { q: [c2, n as f64, 0.0, 0.0, 0.0, 0.0], c: [0.0, 1.0], ..PolyMap::identity() },
            ],
            Self::TorusA { tau, r1, r2 } => [
                PolyMap::translation([1.0, tau, 0.0]),
                PolyMap::translation([0.0, 1.0, 0.0]),
                PolyMap::translation([r1, r2, 1.0]),
            ],
            Self::TorusB { tau, r1, r2 } => [
                PolyMap::translation([1.0, 0.0, tau]),
                PolyMap::translation([r1, 1.0, r2]),
                PolyMap::translation([0.0, 0.0, 1.0]),
            ],
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Gamma { c1, c2, .. } => {
                if !(0.0..1.0).contains(&c1) || !(0.0..1.0).contains(&c2) {
                    return Err(Error::InvalidSpec("c1, c2 must lie in [0, 1)".into()));
                }
            }
            Self::TorusA { tau, r1, r2 } | Self::TorusB { tau, r1, r2 } => {
                if ![tau, r1, r2].iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite torus parameter".into()));
                }
                if (tau - tau.round()).abs() < 1e-12 {
                    return Err(Error::InvalidSpec("tau must be irrational".into()));
                }
            }
        }
        Ok(())
    }
}

/// Parses a word such as `"tz ty^-1 tx^2"`; returns `(generator index, power)` pairs.
pub fn parse_word(lattice: &LatticeSpec, word: &str) -> Result<Vec<(usize, i32)>> {
    let names = lattice.generator_names();
    word.split_whitespace()
        .map(|tok| {
            let (name, pow) = match tok.split_once('^') {
                Some((n, p)) => (n, p.parse::<i32>().map_err(|_| Error::InvalidSpec(format!("bad power in {tok}")))?),
                None => (tok, 1),
            };
            let idx = names
                .iter()
                .position(|g| *g == name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown generator {name}")))?;
            Ok((idx, pow))
        })
        .collect()
}

/// Applies a generator word to a point; the rightmost letter acts first.
pub fn lattice_action(lattice: &LatticeSpec, word: &[(usize, i32)], p: Point) -> Point {
    let gens = lattice.generators();
    let mut q = p;
    for &(g, pow) in word.iter().rev() {
        let m = if pow < 0 { gens[g].inverse() } else { gens[g].clone() };
        for _ in 0..pow.unsigned_abs() {
            q = m.eval(&q);
        }
    }
    q
}

/// Claim about the arithmetic nature of a ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArithClaim {
    Rational { p: i64, q: i64 },
    Irrational,
}

impl ArithClaim {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Rational { p, q } => Some(*p as f64 / *q as f64),
            Self::Irrational => None,
        }
    }
}

/// Declared translation period `(1/P, P′/n)` of `μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodDecl {
    #[serde(rename = "P")]
    pub p: i64,
    #[serde(rename = "P_prime")]
    pub p_prime: i64,
}

/// Trusted arithmetic facts that floats cannot decide.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithCertificates {
    #[serde(rename = "Lcal_over_Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lcal_over_lambda: Option<ArithClaim>,
    #[serde(rename = "k_over_Lambda", default, skip_serializing_if = "Option::is_none")]
    pub k_over_lambda: Option<ArithClaim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_decl: Option<PeriodDecl>,
}

/// Metric data in the frame `(∂x, ∂y + nz∂x + θ∂z, ∂z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    #[serde(rename = "manifold")]
    pub lattice: LatticeSpec,
    pub theta: ThetaSpec,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "L2")]
    pub l2: PeriodicFn2D,
    pub nu: PeriodicFn2D,
    pub mu: PeriodicFn2D,
    #[serde(default)]
    pub arith: ArithCertificates,
}

/// Tolerance for structural checks on Fourier data.
pub const STRUCT_TOL: f64 = 1e-12;

impl MetricSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: MetricSpec = serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Normalizes the slope and checks every structural invariant.
    pub fn validated(mut self) -> Result<Self> {
        self.lattice.validate()?;
        self.theta = self.theta.normalized()?;
        if !(self.lambda.is_finite() && self.lambda != 0.0) {
            return Err(Error::InvalidSpec("Lambda must be a nonzero real".into()));
        }
        let min_l2 = grid_min(&self.l2, 64);
        if min_l2 <= 0.0 {
            return Err(Error::InvalidSpec(format!("L2 must be positive (min {min_l2:.3e})")));
        }
        match self.lattice {
            LatticeSpec::Gamma { .. } => {}
            LatticeSpec::TorusA { .. } => {
                self.require_zero_slope()?;
                if !self.l2.is_y_independent(STRUCT_TOL) || !self.mu.is_y_independent(STRUCT_TOL) {
                    return Err(Error::InvalidSpec("torusA needs L2 and mu depending on z only".into()));
                }
                if self.nu.max_abs_coeff() > STRUCT_TOL {
                    return Err(Error::InvalidSpec("torusA needs nu = 0".into()));
                }
            }
            LatticeSpec::TorusB { .. } => {
                self.require_zero_slope()?;
                if !self.l2.is_constant(STRUCT_TOL) || !self.mu.is_z_independent(STRUCT_TOL) {
                    return Err(Error::InvalidSpec("torusB needs constant L2 and mu depending on y only".into()));
                }
                if self.nu.max_abs_coeff() > STRUCT_TOL {
                    return Err(Error::InvalidSpec("torusB needs nu = 0".into()));
                }
            }
        }
        Ok(self)
    }

    fn require_zero_slope(&self) -> Result<()> {
        if self.theta.value() != 0.0 {
            return Err(Error::InvalidSpec("torus lattices use slope 0".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.lattice.n()
    }

    pub fn theta_value(&self) -> f64 {
        self.theta.value()
    }

    /// Flat metric `2Λ dx dz + dy²` on `ℝ³/Γ_n`.
    pub fn flat(n: u32, theta: ThetaSpec, lambda: f64) -> Self {
        Self {
            lattice: LatticeSpec::gamma(n),
            theta,
            lambda,
            l2: PeriodicFn2D::constant(1.0),
            nu: PeriodicFn2D::constant(0.0),
            mu: PeriodicFn2D::constant(0.0),
            arith: ArithCertificates::default(),
        }
    }
}

fn grid_min(f: &PeriodicFn2D, n: usize) -> f64 {
    let mut m = f64::INFINITY;
    for a in 0..n {
        for b in 0..n {
            m = m.min(f.eval(a as f64 / n as f64, b as f64 / n as f64));
        }
    }
    m
}

/// Frame matrix `[[0,0,Λ],[0,L²,ν],[Λ,ν,μ]]` at a point.
pub fn metric_frame(spec: &MetricSpec, p: Point) -> Mat3 {
    let (y, z) = (p[1], p[2]);
    let (l2, nu, mu) = (spec.l2.eval(y, z), spec.nu.eval(y, z), spec.mu.eval(y, z));
    let la = spec.lambda;
    [[0.0, 0.0, la], [0.0, l2, nu], [la, nu, mu]]
}

/// A metric on ℝ³ independent of `x`, with [`PolyPeriodic`] coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordMetric {
    pub g: [[PolyPeriodic; 3]; 3],
}

/// Values of `g`, `∂g` and `∂∂g` at a point; derivative index 0 is `∂x` (always zero).
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: Mat3,
    pub dg: [Mat3; 3],
    pub ddg: [[Mat3; 3]; 3],
}

impl CoordMetric {
    pub fn from_entries(e: [[PolyPeriodic; 3]; 3]) -> Self {
        Self { g: e }
    }

    pub fn eval(&self, p: &Point) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                m[i][j] = self.g[i][j].eval(p[1], p[2]);
                m[j][i] = m[i][j];
            }
        }
        m
    }

    pub fn jet(&self, p: &Point) -> MetricJet {
        let mut out = MetricJet { g: [[0.0; 3]; 3], dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] };
        for i in 0..3 {
            for j in i..3 {
                let jt: Jet2 = self.g[i][j].jet(p[1], p[2]);
                for (a, b) in [(i, j), (j, i)] {
                    out.g[a][b] = jt.v;
                    out.dg[1][a][b] = jt.d[0];
                    out.dg[2][a][b] = jt.d[1];
                    for u in 0..2 {
                        for v in 0..2 {
                            out.ddg[u + 1][v + 1][a][b] = jt.h[u][v];
                        }
                    }
                }
            }
        }
        out
    }

    /// `g + c ω⊗ω` for a constant covector `ω`.
    pub fn plus_constant_square(&self, c: f64, w: [f64; 3]) -> Self {
        let mut g = self.g.clone();
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = g[i][j].add(&PolyPeriodic::constant(c * w[i] * w[j]));
            }
        }
        Self { g }
    }
}

/// Coordinate expression of the metric.
///
/// With `∂y = Ỹ - nz X - θ ∂z` the entries are
/// `g_xy = -θΛ`, `g_xz = Λ`, `g_yy = L² + θ²μ - 2θν + 2nθΛz`,
/// `g_yz = ν - θμ - nΛz`, `g_zz = μ`.
pub fn metric_coords(spec: &MetricSpec) -> CoordMetric {
    let n = spec.n() as f64;
    let th = spec.theta_value();
    let la = spec.lambda;
    let per = |f: &PeriodicFn2D| PolyPeriodic::periodic(f.clone());
    let zero = PolyPeriodic::constant(0.0);
    let gxy = PolyPeriodic::constant(-th * la);
    let gxz = PolyPeriodic::constant(la);
    let gyy = per(&spec.l2.add(&spec.mu.scale(th * th)).sub(&spec.nu.scale(2.0 * th)))
        .add(&PolyPeriodic::poly([0.0, 2.0 * n * th * la, 0.0]));
    let gyz = per(&spec.nu.sub(&spec.mu.scale(th))).add(&PolyPeriodic::poly([0.0, -n * la, 0.0]));
    let gzz = per(&spec.mu);
    CoordMetric::from_entries([
        [zero, gxy.clone(), gxz.clone()],
        [gxy, gyy, gyz.clone()],
        [gxz, gyz, gzz],
    ])
}

/// Pullback `J^T g(φ(p)) J` of a metric by a map with image `q` and Jacobian `j`.
pub fn pullback_at(g_at_q: &Mat3, j: &Mat3) -> Mat3 {
    mat_mul(&transpose(j), &mat_mul(g_at_q, j))
}

/// Sample points used by invariance checks.
pub fn sample_points(count: usize) -> Vec<Point> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    (0..count).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect()
}

/// Sup over generators, their inverses and sample points of `|γ*g - g|`.
pub fn check_invariance(metric: &CoordMetric, lattice: &LatticeSpec) -> f64 {
    let mut worst = 0.0f64;
    for gen in lattice.generators() {
        for m in [gen.clone(), gen.inverse()] {
            for p in sample_points(32) {
                let q = m.eval(&p);
                let pb = pullback_at(&metric.eval(&q), &m.jacobian(&p));
                let g = metric.eval(&p);
                for i in 0..3 {
                    for j in 0..3 {
                        worst = worst.max((pb[i][j] - g[i][j]).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Data `(a, b)` of the induced connection on the leaf space, with slope `θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionData {
    pub a: PeriodicFn2D,
    pub b: PeriodicFn2D,
    pub theta: ThetaSpec,
}

/// A point with a vector in the coordinate basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub v: [f64; 3],
}

impl TangentVector {
    pub fn inner(&self, metric: &CoordMetric, w: &[f64; 3]) -> f64 {
        let g = metric.eval(&self.base);
        (0..3).map(|i| (0..3).map(|j| self.v[i] * g[i][j] * w[j]).sum::<f64>()).sum()
    }
}

/// Builds a metric whose induced connection has the given `(a, b)`.
///
/// With `C = -mean(b)` the pair must satisfy `nΛ = C`. Without an explicit
/// `(n, Λ)` the smallest positive `n` with `|C|/n <= 1` is used and the sign
/// of `C` goes into `Λ`; `C = 0` gives `n = 0`, `Λ = 1`.
pub fn metric_from_connection(data: &ConnectionData, n_choice: Option<(u32, f64)>) -> Result<MetricSpec> {
    // The induced density carries -nΛ in this frame, so nΛ = -mean(b).
    let c = -data.b.mean();
    let (n, lambda) = match n_choice {
        Some((n, la)) => {
            if ((n as f64) * la - c).abs() > 1e-12 * (1.0 + c.abs()) {
                return Err(Error::InvalidSpec(format!("n Λ = {} does not match -mean(b) = {c}", n as f64 * la)));
            }
            (n, la)
        }
        None if c.abs() < 1e-15 => (0, 1.0),
        None => {
            let n = c.abs().ceil().max(1.0) as u32;
            (n, c / n as f64)
        }
    };
    if lambda == 0.0 {
        return Err(Error::InvalidSpec("Λ = 0".into()));
    }
    let theta = data.theta.normalized()?;
    let kappa = data.b.add_const(c);
    let (nu, mu) = solve_exterior(&kappa, theta.value())?;
    let a = data.a.clone();
    let l2 = PeriodicFn2D::project_adaptive(|y, z| (2.0 * a.eval(y, z)).exp(), 1e-15);
    MetricSpec {
        lattice: LatticeSpec::gamma(n),
        theta,
        lambda,
        l2,
        nu,
        mu,
        arith: ArithCertificates::default(),
    }
    .validated()
}
