//! Levi-Civita connection, the curvature invariant `r`, Gauss–Bonnet and
//! leaf holonomy.
//!
//! Everything here works from the coordinate jets of a [`CoordMetric`], so
//! the same code serves specs in normal form, raw specs and the
//! deformation families.

use crate::error::{Error, Result};
use crate::map::{inv3, Mat3, Point};
use crate::model::{metric_coords, CoordMetric, MetricSpec};
use crate::periodic::{PeriodicFn1D, PeriodicFn2D};
use rayon::prelude::*;

/// `Γ^i_{jk}` indexed `[i][j][k]`.
pub type Christoffel = [[[f64; 3]; 3]; 3];

/// Tolerance for the parallel-field check.
pub const PARALLEL_TOL: f64 = 1e-9;
/// Default number of RK4 steps for parallel transport.
pub const TRANSPORT_STEPS: usize = 1 << 14;

fn christoffel_from(ginv: &Mat3, dg: &[Mat3; 3]) -> Christoffel {
    let mut gam = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in j..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += ginv[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
                }
                gam[i][j][k] = 0.5 * s;
                gam[i][k][j] = 0.5 * s;
            }
        }
    }
    gam
}

/// Christoffel symbols of the coordinate metric at `p`.
pub fn christoffels_of(metric: &CoordMetric, p: &Point) -> Christoffel {
    let jet = metric.jet(p);
    christoffel_from(&inv3(&jet.g), &jet.dg)
}

/// Christoffel symbols of a spec in coordinates at `p`.
pub fn christoffels(spec: &MetricSpec, p: Point) -> Christoffel {
    christoffels_of(&metric_coords(spec), &p)
}

/// `R^i_{jkl}` with `R(∂_k, ∂_l)∂_j = R^i_{jkl} ∂_i`.
pub fn riemann(metric: &CoordMetric, p: &Point) -> [[[[f64; 3]; 3]; 3]; 3] {
    let jet = metric.jet(p);
    let ginv = inv3(&jet.g);
    let gam = christoffel_from(&ginv, &jet.dg);
    // ∂_m g^{-1} = -g^{-1} (∂_m g) g^{-1}
    let mut dginv = [[[0.0; 3]; 3]; 3];
    for m in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                let mut s = 0.0;
                for c in 0..3 {
                    for d in 0..3 {
                        s -= ginv[a][c] * jet.dg[m][c][d] * ginv[d][b];
                    }
                }
                dginv[m][a][b] = s;
            }
        }
    }
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3]; // [m][i][j][k]
    for m in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut s = 0.0;
                    for l in 0..3 {
                        let sv = jet.dg[j][l][k] + jet.dg[k][l][j] - jet.dg[l][j][k];
                        let dsv = jet.ddg[m][j][l][k] + jet.ddg[m][k][l][j] - jet.ddg[m][l][j][k];
                        s += dginv[m][i][l] * sv + ginv[i][l] * dsv;
                    }
                    dgam[m][i][j][k] = 0.5 * s;
                }
            }
        }
    }
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut s = dgam[k][i][l][j] - dgam[l][i][k][j];
                    for m in 0..3 {
                        s += gam[i][k][m] * gam[m][l][j] - gam[i][l][m] * gam[m][k][j];
                    }
                    r[i][j][k][l] = s;
                }
            }
        }
    }
    r
}

/// `g(R(U,V)W, T)` at `p`.
pub fn curvature_form(metric: &CoordMetric, p: &Point, u: &[f64; 3], v: &[f64; 3], w: &[f64; 3], t: &[f64; 3]) -> f64 {
    let r = riemann(metric, p);
    let g = metric.eval(p);
    let mut out = 0.0;
    for i in 0..3 {
        let mut ri = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    ri += r[i][j][k][l] * w[j] * u[k] * v[l];
                }
            }
        }
        for a in 0..3 {
            out += g[i][a] * ri * t[a];
        }
    }
    out
}

/// An admissible pair `(Y, Z)` at `p`: `Y` unit and orthogonal to `X = ∂x`,
/// `Z ∝ ∂z` with `vol(X, Y, Z) = 1`.
pub fn admissible_pair(metric: &CoordMetric, p: &Point) -> ([f64; 3], [f64; 3]) {
    let g = metric.eval(p);
    let v = [0.0, g[0][2], -g[0][1]];
    let nv = (0..3).map(|i| (0..3).map(|j| v[i] * g[i][j] * v[j]).sum::<f64>()).sum::<f64>().sqrt();
    let y = v.map(|c| c / nv);
    let vol = crate::map::det3(&g).abs().sqrt();
    let z = [0.0, 0.0, 1.0 / (vol * y[1])];
    (y, z)
}

/// The invariant `r = g(R(Z,Y)Z, Y)` at `p`.
pub fn r_at(metric: &CoordMetric, p: &Point) -> f64 {
    let (y, z) = admissible_pair(metric, p);
    curvature_form(metric, p, &z, &y, &z, &y)
}

/// `r` of a spec at `p`.
pub fn curvature_r(spec: &MetricSpec, p: Point) -> f64 {
    r_at(&metric_coords(spec), &p)
}

/// Values of `r` on the `n x n` grid of `(y, z)` at `x = 0`, row-major in `y`.
pub fn r_grid(metric: &CoordMetric, n: usize) -> Vec<f64> {
    (0..n * n)
        .into_par_iter()
        .map(|i| r_at(metric, &[0.0, (i / n) as f64 / n as f64, (i % n) as f64 / n as f64]))
        .collect()
}

/// Sup of `|∇_{∂_j} ∂x|` over an `n³` grid.
pub fn check_parallel_x(metric: &CoordMetric, n: usize) -> f64 {
    (0..n * n * n)
        .into_par_iter()
        .map(|i| {
            let p = [(i / (n * n)) as f64 / n as f64, ((i / n) % n) as f64 / n as f64, (i % n) as f64 / n as f64];
            let gam = christoffels_of(metric, &p);
            let mut w = 0.0f64;
            for a in 0..3 {
                for j in 0..3 {
                    w = w.max(gam[a][j][0].abs());
                }
            }
            w
        })
        .reduce(|| 0.0, f64::max)
}

/// Residual of `∇g = 0` using central differences of step `h` for `∂g`.
pub fn metric_compatibility_residual(metric: &CoordMetric, p: &Point, h: f64) -> f64 {
    let gam = christoffels_of(metric, p);
    let g = metric.eval(p);
    let mut worst = 0.0f64;
    for k in 0..3 {
        let (mut pp, mut pm) = (*p, *p);
        pp[k] += h;
        pm[k] -= h;
        let (gp, gm) = (metric.eval(&pp), metric.eval(&pm));
        for i in 0..3 {
            for j in 0..3 {
                let dg = (gp[i][j] - gm[i][j]) / (2.0 * h);
                let mut s = dg;
                for l in 0..3 {
                    s -= gam[l][k][i] * g[l][j] + gam[l][k][j] * g[i][l];
                }
                worst = worst.max(s.abs());
            }
        }
    }
    worst
}

/// Checks the closed-leaf normal shape: slope 0, `L²` depending on `z` only, `ν` constant.
fn closed_leaf_shape(spec: &MetricSpec) -> Result<PeriodicFn1D> {
    if spec.theta_value() != 0.0 {
        return Err(Error::NotInNormalForm("slope must be 0".into()));
    }
    if !spec.l2.is_y_independent(1e-12) {
        return Err(Error::NotInNormalForm("L2 must depend on z only".into()));
    }
    if !spec.nu.is_constant(1e-12) {
        return Err(Error::NotInNormalForm("nu must be constant".into()));
    }
    Ok(spec.l2.fiber_mean())
}

/// `r = Λ^{-2} (∂²_y μ / (2L²) + L''/L)` for a spec in closed-leaf normal shape.
pub fn curvature_r_closed_form(spec: &MetricSpec) -> Result<PeriodicFn2D> {
    let l2 = closed_leaf_shape(spec)?;
    let inv_l2 = PeriodicFn1D::project_adaptive(|z| 1.0 / l2.eval(z), 1e-16);
    let l = PeriodicFn1D::project_adaptive(|z| l2.eval(z).sqrt(), 1e-16);
    let lpp = l.derivative(2);
    let ratio = PeriodicFn1D::project_adaptive(|z| lpp.eval(z) / l.eval(z), 1e-16);
    let muyy = spec.mu.differentiate(0, 2);
    let first = muyy.mul(&PeriodicFn2D::from_z(&inv_l2)).scale(0.5);
    let la2 = spec.lambda * spec.lambda;
    Ok(first.add(&PeriodicFn2D::from_z(&ratio)).scale(1.0 / la2))
}

/// Trapezoid value of `∫ r ω̄` with `ω̄ = ι_X vol` on an `n x n` grid.
pub fn gauss_bonnet_metric(metric: &CoordMetric, n: usize) -> f64 {
    let vals: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let p = [0.0, (i / n) as f64 / n as f64, (i % n) as f64 / n as f64];
            let vol = crate::map::det3(&metric.eval(&p)).abs().sqrt();
            r_at(metric, &p) * vol
        })
        .collect();
    vals.iter().sum::<f64>() / (n * n) as f64
}

pub fn gauss_bonnet(spec: &MetricSpec, grid_n: usize) -> f64 {
    gauss_bonnet_metric(&metric_coords(spec), grid_n)
}

/// Linear holonomy `α(z) = -∂_z L²(z) / (2Λ)` of the leaf at height `z`.
pub fn leaf_holonomy_alpha(spec: &MetricSpec, z: f64) -> Result<f64> {
    let l2 = closed_leaf_shape(spec)?;
    Ok(-l2.jet(z)[1] / (2.0 * spec.lambda))
}

/// Parallel-transport matrix along `s -> start + s·dir`, `s ∈ [0, 1]` (RK4).
///
/// Column `j` is the transport of `∂_j`.
pub fn parallel_transport(metric: &CoordMetric, start: Point, dir: [f64; 3], steps: usize) -> Mat3 {
    let rhs = |s: f64, v: &Mat3| -> Mat3 {
        let p = [start[0] + s * dir[0], start[1] + s * dir[1], start[2] + s * dir[2]];
        let gam = christoffels_of(metric, &p);
        let mut out = [[0.0; 3]; 3];
        for col in 0..3 {
            for i in 0..3 {
                let mut acc = 0.0;
                for j in 0..3 {
                    for k in 0..3 {
                        acc -= gam[i][j][k] * dir[j] * v[k][col];
                    }
                }
                out[i][col] = acc;
            }
        }
        out
    };
    let axpy = |a: &Mat3, h: f64, b: &Mat3| -> Mat3 {
        let mut o = *a;
        for i in 0..3 {
            for j in 0..3 {
                o[i][j] += h * b[i][j];
            }
        }
        o
    };
    let h = 1.0 / steps as f64;
    let mut v = crate::map::IDENTITY;
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = rhs(t, &v);
        let k2 = rhs(t + h / 2.0, &axpy(&v, h / 2.0, &k1));
        let k3 = rhs(t + h / 2.0, &axpy(&v, h / 2.0, &k2));
        let k4 = rhs(t + h, &axpy(&v, h, &k3));
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
    v
}

/// Loop generating the leaf fundamental group at height `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafLoop {
    /// The closed orbit of `X`.
    Gamma1,
    /// The loop `y -> y + 1`.
    Gamma2,
}

/// Linear holonomy of the leaf's flat connection along a loop, in the basis `(∂x, ∂y)`.
///
/// This is the linear part of the developing-map holonomy, the inverse of
/// the parallel-transport matrix.
pub fn parallel_transport_loop(spec: &MetricSpec, z: f64, direction: LeafLoop, steps: usize) -> Result<[[f64; 2]; 2]> {
    closed_leaf_shape(spec)?;
    let metric = metric_coords(spec);
    let dir = match direction {
        LeafLoop::Gamma1 => [1.0, 0.0, 0.0],
        LeafLoop::Gamma2 => [0.0, 1.0, 0.0],
    };
    let t = parallel_transport(&metric, [0.0, 0.0, z], dir, steps);
    let blk = [[t[0][0], t[0][1]], [t[1][0], t[1][1]]];
    let det = blk[0][0] * blk[1][1] - blk[0][1] * blk[1][0];
    Ok([[blk[1][1] / det, -blk[0][1] / det], [-blk[1][0] / det, blk[0][0] / det]])
}

/// Pointwise data of the connection induced on the leaf space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InducedConnection {
    /// `log L`.
    pub a: f64,
    /// Density `b` in `D̄_Z̄ Z̄ = (b / L²) Ȳ`.
    pub b: f64,
    /// Component of `D̄_Z̄ Z̄` along `Z̄` (zero for a well-formed spec).
    pub z_residual: f64,
}

/// Extracts `(a, b)` at `(y, z)` from the 3D Levi-Civita connection.
pub fn induced_connection(spec: &MetricSpec, y: f64, z: f64) -> InducedConnection {
    let metric = metric_coords(spec);
    let p = [0.0, y, z];
    let gam = christoffels_of(&metric, &p);
    // ∇_{∂z} ∂z in coordinates, then in the frame (X, Ỹ, ∂z)
    let w = [gam[0][2][2], gam[1][2][2], gam[2][2][2]];
    let th = spec.theta_value();
    let beta = w[1];
    let gamma = w[2] - th * w[1];
    let l2 = spec.l2.eval(y, z);
    InducedConnection { a: 0.5 * l2.ln(), b: l2 * beta, z_residual: gamma }
}
