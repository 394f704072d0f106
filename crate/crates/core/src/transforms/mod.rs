//! Affine transformations: normalizer test, pullback, the defect constant
//! `C` with `φ*g = g + C X♭⊗X♭`, and the named generators.

mod generators;

pub(crate) use generators::{k_ratio, lcal_ratio};

pub use crate::map::{AffineMapSpec, Elem, MapDescriptor, PolyMap, ShearMap, ZMap};
pub use generators::{
    chi, chi_prime, chi_prime_data, flow_y, flow_z, make_generator, phi0, phi_lab, psi, sigma, ChiPrimeData, GeneratorKind, PhiLab,
};

use crate::curvature::r_at;
use crate::error::{Error, Result};
use crate::map::{inv3, mat_mul, Mat3, Point, IDENTITY};
use crate::model::{pullback_at, CoordMetric, LatticeSpec};
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance for recognizing lattice elements.
pub const LATTICE_TOL: f64 = 1e-8;

fn probe_points() -> Vec<Point> {
    vec![[0.0, 0.0, 0.0], [0.31, 0.17, 0.73], [-0.42, 0.61, 0.29], [0.77, -0.35, 0.58], [0.12, 0.93, -0.41]]
}

fn near_int(v: f64) -> Option<i64> {
    let r = v.round();
    ((v - r).abs() < LATTICE_TOL * (1.0 + v.abs())).then_some(r as i64)
}

/// Identifies `q = γ(p)` as a lattice element from one point pair.
///
/// Returns integer coordinates `(m, b, c)` with `γ = τ_x^m τ_z^c τ_y^b`
/// for `Γ_n`, or the coefficients on the generating translations for tori.
fn lattice_coords(lattice: &LatticeSpec, p: &Point, q: &Point) -> Option<[i64; 3]> {
    match *lattice {
        LatticeSpec::Gamma { n, c1, c2 } => {
            let b = near_int(q[1] - p[1])?;
            let c = near_int(q[2] - p[2])?;
            let (bf, cf) = (b as f64, c as f64);
            let base = p[0] + bf * c1 + cf * (n as f64 * (p[1] + bf) + c2);
            let m = near_int(q[0] - base)?;
            Some([m, b, c])
        }
        LatticeSpec::TorusA { .. } | LatticeSpec::TorusB { .. } => {
            let gens = lattice.generators();
            let origin = [0.0; 3];
            let cols: Vec<Point> = gens.iter().map(|g| g.eval(&origin)).collect();
            let m = [
                [cols[0][0], cols[1][0], cols[2][0]],
                [cols[0][1], cols[1][1], cols[2][1]],
                [cols[0][2], cols[1][2], cols[2][2]],
            ];
            let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
            let coef = crate::map::mat_vec(&inv3(&m), &d);
            Some([near_int(coef[0])?, near_int(coef[1])?, near_int(coef[2])?])
        }
    }
}

/// Checks that `φ γ φ⁻¹` lies in the lattice for every generator `γ`.
///
/// The conjugate is evaluated at several points; it must be the same lattice
/// element at each.
pub fn normalizes_lattice(map: &AffineMapSpec, lattice: &LatticeSpec) -> Result<()> {
    let inv = map.inverse();
    for (gi, gen) in lattice.generators().iter().enumerate() {
        for g in [gen.clone(), gen.inverse()] {
            let mut found: Option<[i64; 3]> = None;
            for p in probe_points() {
                let q = map.eval(&g.eval(&inv.eval(&p)));
                let coords = lattice_coords(lattice, &p, &q).ok_or_else(|| {
                    Error::NotLatticeNormalizing(format!(
                        "conjugate of {} moves {:?} to {:?}, not a lattice element",
                        lattice.generator_names()[gi],
                        p,
                        q
                    ))
                })?;
                match found {
                    None => found = Some(coords),
                    Some(c) if c != coords => {
                        return Err(Error::NotLatticeNormalizing(format!(
                            "conjugate of {} is not a single lattice element",
                            lattice.generator_names()[gi]
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// `(φ*g)(p)` in coordinates.
pub fn pullback(metric: &CoordMetric, map: &AffineMapSpec, p: &Point) -> Mat3 {
    let (q, j) = map.eval_jac(p);
    pullback_at(&metric.eval(&q), &j)
}

/// Result of fitting `φ*g - g = C X♭⊗X♭`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineDefect {
    /// Least-squares constant `C`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Sup of `|φ*g - g - C X♭⊗X♭|` over the sample points.
    pub residual: f64,
    /// `φ_* X = λ X`.
    pub lambda: f64,
    /// Spread of the pointwise `C` read off the `zz` entry.
    pub spread: f64,
}

impl AffineDefect {
    pub fn is_affine(&self, tol: f64) -> bool {
        self.residual < tol && self.spread < tol
    }
}

/// Sample points for defect and invariance checks: `x ∈ {0, 0.37}`, `(y, z)` on a grid.
pub fn defect_points(grid_n: usize) -> Vec<Point> {
    let mut pts = Vec::with_capacity(2 * grid_n * grid_n);
    for &x in &[0.0, 0.37] {
        for a in 0..grid_n {
            for b in 0..grid_n {
                pts.push([x, a as f64 / grid_n as f64, b as f64 / grid_n as f64]);
            }
        }
    }
    pts
}

/// Fits `φ*g = g + C X♭⊗X♭` after checking that `φ` normalizes the lattice.
pub fn affine_defect(metric: &CoordMetric, lattice: &LatticeSpec, map: &AffineMapSpec, grid_n: usize) -> Result<AffineDefect> {
    normalizes_lattice(map, lattice)?;
    Ok(affine_defect_unchecked(metric, map, grid_n))
}

/// The fit of [`affine_defect`] without the normalizer check.
pub fn affine_defect_unchecked(metric: &CoordMetric, map: &AffineMapSpec, grid_n: usize) -> AffineDefect {
    let pts = defect_points(grid_n);
    let data: Vec<(Mat3, Mat3, f64)> = pts
        .par_iter()
        .map(|p| {
            let (q, j) = map.eval_jac(p);
            let pb = pullback_at(&metric.eval(&q), &j);
            let g = metric.eval(p);
            let mut d = [[0.0; 3]; 3];
            let mut b = [[0.0; 3]; 3];
            for i in 0..3 {
                for k in 0..3 {
                    d[i][k] = pb[i][k] - g[i][k];
                    b[i][k] = g[0][i] * g[0][k];
                }
            }
            (d, b, j[0][0])
        })
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (d, b, _) in &data {
        for i in 0..3 {
            for k in 0..3 {
                num += d[i][k] * b[i][k];
                den += b[i][k] * b[i][k];
            }
        }
    }
    let c = if den > 0.0 { num / den } else { 0.0 };
    let mut residual = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (d, b, _) in &data {
        for i in 0..3 {
            for k in 0..3 {
                residual = residual.max((d[i][k] - c * b[i][k]).abs());
            }
        }
        if b[2][2].abs() > 1e-14 {
            let cp = d[2][2] / b[2][2];
            lo = lo.min(cp);
            hi = hi.max(cp);
        }
    }
    let spread = if hi >= lo { hi - lo } else { 0.0 };
    AffineDefect { c, residual, lambda: data[0].2, spread }
}

/// `E = g⁻¹ φ*g = Id + N` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EDecomposition {
    pub e: Mat3,
    pub n: Mat3,
    /// Sup norm of `N²`.
    pub n_squared: f64,
    /// Sup of `|N - C X ⊗ X♭|`.
    pub residual: f64,
}

pub fn decompose_e(metric: &CoordMetric, map: &AffineMapSpec, p: &Point, c: f64) -> EDecomposition {
    let g = metric.eval(p);
    let e = mat_mul(&inv3(&g), &pullback(metric, map, p));
    let mut n = e;
    for i in 0..3 {
        for j in 0..3 {
            n[i][j] -= IDENTITY[i][j];
        }
    }
    let n2 = mat_mul(&n, &n);
    let mut n_squared = 0.0f64;
    let mut residual = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            n_squared = n_squared.max(n2[i][j].abs());
            let model = if i == 0 { c * g[0][j] } else { 0.0 };
            residual = residual.max((n[i][j] - model).abs());
        }
    }
    EDecomposition { e, n, n_squared, residual }
}

/// Sup over a grid of `|r∘φ - λ² r|`.
pub fn check_r_invariance(metric: &CoordMetric, map: &AffineMapSpec, grid_n: usize) -> f64 {
    defect_points(grid_n)
        .par_iter()
        .map(|p| {
            let (q, j) = map.eval_jac(p);
            let lam = j[0][0];
            (r_at(metric, &q) - lam * lam * r_at(metric, p)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Outcome of the generator invariant suite.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratorCheck {
    pub kind: String,
    pub normalizes_lattice: bool,
    pub defect: AffineDefect,
    /// Sup of `|N²|` over the sample points.
    pub n_squared: f64,
    /// Sup of `|N - C X ⊗ X♭|`.
    pub e_residual: f64,
    pub r_invariance: f64,
}

impl GeneratorCheck {
    pub fn passes(&self, defect_tol: f64, r_tol: f64) -> bool {
        self.normalizes_lattice
            && self.defect.is_affine(defect_tol)
            && self.n_squared < defect_tol
            && self.e_residual < defect_tol
            && self.r_invariance < r_tol
    }
}

/// Normalizer test, defect fit, `N² = 0` and `r`-invariance for one map.
pub fn check_generator(metric: &CoordMetric, lattice: &LatticeSpec, map: &AffineMapSpec, grid_n: usize) -> GeneratorCheck {
    let normalizes = normalizes_lattice(map, lattice).is_ok();
    let defect = affine_defect_unchecked(metric, map, grid_n);
    let (n_squared, e_residual) = defect_points(grid_n.min(6))
        .par_iter()
        .map(|p| {
            let d = decompose_e(metric, map, p, defect.c);
            (d.n_squared, d.residual)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    GeneratorCheck {
        kind: map.kind.clone(),
        normalizes_lattice: normalizes,
        defect,
        n_squared,
        e_residual,
        r_invariance: check_r_invariance(metric, map, grid_n.min(8)),
    }
}
