//! Diffeomorphisms of ℝ³ built as words of elementary maps.
//!
//! Every map used by the library (lattice generators, coordinate changes,
//! affine transformations) is a composition of three elementary shapes with
//! exact evaluation and Jacobian. Inverses are exact for the polynomial shape
//! and Newton-solved for the others.

use crate::periodic::{PeriodicFn1D, PolyPeriodic};
use serde::Serialize;

pub type Point = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn inv3(a: &Mat3) -> Mat3 {
    let d = det3(a);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / d;
        }
    }
    inv
}

pub fn mat_vec(a: &Mat3, v: &Point) -> Point {
    [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

/// `x' = e1 x + q(y, z)`, `(y', z') = M (y, z) + c` with `q` quadratic.
///
/// `q = [1, y, z, y², yz, z²]` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    pub e1: f64,
    pub q: [f64; 6],
    pub m: [[f64; 2]; 2],
    pub c: [f64; 2],
}

impl PolyMap {
    pub fn identity() -> Self {
        Self { e1: 1.0, q: [0.0; 6], m: [[1.0, 0.0], [0.0, 1.0]], c: [0.0; 2] }
    }

    pub fn translation(t: Point) -> Self {
        Self { q: [t[0], 0.0, 0.0, 0.0, 0.0, 0.0], c: [t[1], t[2]], ..Self::identity() }
    }

    fn q_at(&self, y: f64, z: f64) -> (f64, f64, f64) {
        let q = &self.q;
        let v = q[0] + q[1] * y + q[2] * z + q[3] * y * y + q[4] * y * z + q[5] * z * z;
        let qy = q[1] + 2.0 * q[3] * y + q[4] * z;
        let qz = q[2] + q[4] * y + 2.0 * q[5] * z;
        (v, qy, qz)
    }

    pub fn eval(&self, p: &Point) -> Point {
        let (v, _, _) = self.q_at(p[1], p[2]);
        [
            self.e1 * p[0] + v,
            self.m[0][0] * p[1] + self.m[0][1] * p[2] + self.c[0],
            self.m[1][0] * p[1] + self.m[1][1] * p[2] + self.c[1],
        ]
    }

    pub fn jacobian(&self, p: &Point) -> Mat3 {
        let (_, qy, qz) = self.q_at(p[1], p[2]);
        [[self.e1, qy, qz], [0.0, self.m[0][0], self.m[0][1]], [0.0, self.m[1][0], self.m[1][1]]]
    }

    /// Exact inverse (again of this shape).
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        let mi = [[d / det, -b / det], [-c / det, a / det]];
        // (y, z) = mi ((y', z') - c) = mi (y', z') + s
        let s = [-(mi[0][0] * self.c[0] + mi[0][1] * self.c[1]), -(mi[1][0] * self.c[0] + mi[1][1] * self.c[1])];
        // x = (x' - q(y, z)) / e1 with y = r0 . (y', z') + s0, z = r1 . (y', z') + s1
        let q = &self.q;
        let (r0, r1) = (mi[0], mi[1]);
        let lin = |r: [f64; 2], s: f64| [s, r[0], r[1]];
        let (ly, lz) = (lin(r0, s[0]), lin(r1, s[1]));
        let mut out = [0.0; 6];
        let add_prod = |out: &mut [f64; 6], u: [f64; 3], v: [f64; 3], w: f64| {
            out[0] += w * u[0] * v[0];
            out[1] += w * (u[0] * v[1] + u[1] * v[0]);
            out[2] += w * (u[0] * v[2] + u[2] * v[0]);
            out[3] += w * u[1] * v[1];
            out[4] += w * (u[1] * v[2] + u[2] * v[1]);
            out[5] += w * u[2] * v[2];
        };
        let one = [1.0, 0.0, 0.0];
        add_prod(&mut out, one, one, q[0]);
        add_prod(&mut out, one, ly, q[1]);
        add_prod(&mut out, one, lz, q[2]);
        add_prod(&mut out, ly, ly, q[3]);
        add_prod(&mut out, ly, lz, q[4]);
        add_prod(&mut out, lz, lz, q[5]);
        let e = 1.0 / self.e1;
        Self { e1: e, q: out.map(|v| -v * e), m: mi, c: s }
    }
}

/// `x' = x + fx(y, z)`, `y' = y + fy(y, z)`, `z' = z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShearMap {
    pub fx: PolyPeriodic,
    pub fy: PolyPeriodic,
}

/// `z' = z + p(z)` with periodic `p`, `1 + p' > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZMap {
    pub p: PeriodicFn1D,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Elem {
    Poly(PolyMap),
    Shear(ShearMap),
    Z(ZMap),
    /// Inverse of a non-polynomial elementary map.
    Inv(Box<Elem>),
}

impl Elem {
    pub fn eval(&self, p: &Point) -> Point {
        match self {
            Elem::Poly(m) => m.eval(p),
            Elem::Shear(s) => [p[0] + s.fx.eval(p[1], p[2]), p[1] + s.fy.eval(p[1], p[2]), p[2]],
            Elem::Z(zm) => [p[0], p[1], p[2] + zm.p.eval(p[2])],
            Elem::Inv(e) => e.solve(p),
        }
    }

    pub fn jacobian(&self, p: &Point) -> Mat3 {
        match self {
            Elem::Poly(m) => m.jacobian(p),
            Elem::Shear(s) => {
                let jx = s.fx.jet(p[1], p[2]);
                let jy = s.fy.jet(p[1], p[2]);
                [[1.0, jx.d[0], jx.d[1]], [0.0, 1.0 + jy.d[0], jy.d[1]], [0.0, 0.0, 1.0]]
            }
            Elem::Z(zm) => {
                let d = zm.p.jet(p[2])[1];
                [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0 + d]]
            }
            Elem::Inv(e) => inv3(&e.jacobian(&e.solve(p))),
        }
    }

    pub fn inverse(&self) -> Elem {
        match self {
            Elem::Poly(m) => Elem::Poly(m.inverse()),
            Elem::Inv(e) => (**e).clone(),
            other => Elem::Inv(Box::new(other.clone())),
        }
    }

    /// Preimage of `q` under this map.
    fn solve(&self, q: &Point) -> Point {
        match self {
            Elem::Poly(m) => m.inverse().eval(q),
            Elem::Inv(e) => e.eval(q),
            Elem::Z(zm) => {
                let mut z = q[2] - zm.p.eval(q[2]);
                for _ in 0..60 {
                    let [v, d, _] = zm.p.jet(z);
                    let step = (z + v - q[2]) / (1.0 + d);
                    z -= step;
                    if step.abs() < 1e-16 * (1.0 + z.abs()) {
                        break;
                    }
                }
                [q[0], q[1], z]
            }
            Elem::Shear(s) => {
                let z = q[2];
                let mut y = q[1] - s.fy.eval(q[1], z);
                for _ in 0..60 {
                    let j = s.fy.jet(y, z);
                    let step = (y + j.v - q[1]) / (1.0 + j.d[0]);
                    y -= step;
                    if step.abs() < 1e-16 * (1.0 + y.abs()) {
                        break;
                    }
                }
                [q[0] - s.fx.eval(y, z), y, z]
            }
        }
    }
}

/// A word of elementary maps applied left to right, with a descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMapSpec {
    pub kind: String,
    pub params: Vec<(String, f64)>,
    pub elems: Vec<Elem>,
}

/// Serializable summary of a map.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MapDescriptor {
    pub kind: String,
    pub params: Vec<(String, f64)>,
}

impl AffineMapSpec {
    pub fn new(kind: &str, params: &[(&str, f64)], elems: Vec<Elem>) -> Self {
        Self {
            kind: kind.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            elems,
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", &[], vec![])
    }

    pub fn poly(kind: &str, params: &[(&str, f64)], m: PolyMap) -> Self {
        Self::new(kind, params, vec![Elem::Poly(m)])
    }

    pub fn translation(t: Point) -> Self {
        Self::poly("translation", &[("x", t[0]), ("y", t[1]), ("z", t[2])], PolyMap::translation(t))
    }

    pub fn descriptor(&self) -> MapDescriptor {
        MapDescriptor { kind: self.kind.clone(), params: self.params.clone() }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn eval(&self, p: &Point) -> Point {
        self.elems.iter().fold(*p, |q, e| e.eval(&q))
    }

    /// Image point and Jacobian at `p`.
    pub fn eval_jac(&self, p: &Point) -> (Point, Mat3) {
        let mut q = *p;
        let mut j = IDENTITY;
        for e in &self.elems {
            j = mat_mul(&e.jacobian(&q), &j);
            q = e.eval(&q);
        }
        (q, j)
    }

    pub fn inverse(&self) -> Self {
        let elems = self.elems.iter().rev().map(|e| e.inverse()).collect();
        let params = self.params.clone();
        Self { kind: format!("{}^-1", self.kind), params, elems }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut elems = other.elems.clone();
        elems.extend(self.elems.iter().cloned());
        Self { kind: format!("{}∘{}", self.kind, other.kind), params: vec![], elems }
    }

    /// `self^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut elems = Vec::new();
        for _ in 0..k.unsigned_abs() {
            elems.extend(base.elems.iter().cloned());
        }
        Self { kind: format!("({})^{}", self.kind, k), params: self.params.clone(), elems }
    }

    pub fn with_label(mut self, kind: &str, params: &[(&str, f64)]) -> Self {
        self.kind = kind.to_string();
        self.params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }
}
