use super::fft;
use super::fn1d::PeriodicFn1D;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Value, gradient and Hessian of a function of `(y, z)` at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, ..Default::default() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut h = self.h;
        for a in 0..2 {
            for b in 0..2 {
                h[a][b] += o.h[a][b];
            }
        }
        Self { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]], h }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            v: self.v * s,
            d: [self.d[0] * s, self.d[1] * s],
            h: [[self.h[0][0] * s, self.h[0][1] * s], [self.h[1][0] * s, self.h[1][1] * s]],
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut h = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                h[a][b] = self.h[a][b] * o.v
                    + self.d[a] * o.d[b]
                    + self.d[b] * o.d[a]
                    + self.v * o.h[a][b];
            }
        }
        Self {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
            h,
        }
    }
}

/// Real trigonometric polynomial on the unit torus in `(y, z)`.
///
/// Canonical mode order: `(0, k)` for `k = 0..=N`, then `(j, k)` for
/// `j = 1..=M`, `k = -N..=N`. Each entry `[a, b]` contributes
/// `a cos(2π(jy + kz)) + b sin(2π(jy + kz))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFn2D {
    m: usize,
    n: usize,
    coeffs: Vec<[f64; 2]>,
}

fn count(m: usize, n: usize) -> usize {
    (n + 1) + m * (2 * n + 1)
}

impl PeriodicFn2D {
    pub fn new(max_freq: (usize, usize), coeffs: Vec<[f64; 2]>) -> Result<Self> {
        let (m, n) = max_freq;
        if coeffs.len() != count(m, n) {
            return Err(Error::InvalidSpec(format!(
                "expected {} coefficients for max_freq [{m}, {n}], got {}",
                count(m, n),
                coeffs.len()
            )));
        }
        if coeffs[0][1] != 0.0 {
            return Err(Error::InvalidSpec("sine coefficient of mode (0,0) must be 0".into()));
        }
        if coeffs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        Ok(Self { m, n, coeffs })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, coeffs: vec![[0.0; 2]; count(m, n)] }
    }

    pub fn constant(c: f64) -> Self {
        Self { m: 0, n: 0, coeffs: vec![[c, 0.0]] }
    }

    /// `a cos(2π(jy + kz)) + b sin(2π(jy + kz))`; `(j, k)` may be any nonzero pair.
    pub fn mode(j: i64, k: i64, a: f64, b: f64) -> Self {
        let (j, k, b) = if j < 0 || (j == 0 && k < 0) { (-j, -k, -b) } else { (j, k, b) };
        let mut f = Self::zeros(j as usize, k.unsigned_abs() as usize);
        let i = f.index(j, k).unwrap();
        f.coeffs[i] = if j == 0 && k == 0 { [a, 0.0] } else { [a, b] };
        f
    }

    pub fn max_freq(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn coeffs(&self) -> &[[f64; 2]] {
        &self.coeffs
    }

    fn index(&self, j: i64, k: i64) -> Option<usize> {
        let (m, n) = (self.m as i64, self.n as i64);
        if j == 0 && (0..=n).contains(&k) {
            Some(k as usize)
        } else if (1..=m).contains(&j) && (-n..=n).contains(&k) {
            Some((n + 1 + (j - 1) * (2 * n + 1) + k + n) as usize)
        } else {
            None
        }
    }

    /// Half-plane modes in canonical order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (m, n) = (self.m as i64, self.n as i64);
        (0..=n).map(|k| (0, k)).chain((1..=m).flat_map(move |j| (-n..=n).map(move |k| (j, k))))
    }

    /// Complex coefficient of `e^{2πi(jy + kz)}` for any signed pair.
    pub fn c(&self, j: i64, k: i64) -> Complex64 {
        let (jj, kk, flip) = if j < 0 || (j == 0 && k < 0) { (-j, -k, true) } else { (j, k, false) };
        match self.index(jj, kk) {
            None => Complex64::new(0.0, 0.0),
            Some(i) => {
                let [a, b] = self.coeffs[i];
                if jj == 0 && kk == 0 {
                    Complex64::new(a, 0.0)
                } else if flip {
                    Complex64::new(a / 2.0, b / 2.0)
                } else {
                    Complex64::new(a / 2.0, -b / 2.0)
                }
            }
        }
    }

    /// Nonzero modes over the full plane as `(j, k, c_jk)`.
    pub fn full_modes(&self) -> Vec<(i64, i64, Complex64)> {
        let mut out = Vec::new();
        for (j, k) in self.modes() {
            let c = self.c(j, k);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            out.push((j, k, c));
            if j != 0 || k != 0 {
                out.push((-j, -k, c.conj()));
            }
        }
        out
    }

    /// Builds from full-plane complex modes; entries outside the half plane are
    /// folded by conjugate symmetry (the real part of the input is kept).
    pub fn from_full_modes(modes: &[(i64, i64, Complex64)]) -> Self {
        let m = modes.iter().map(|t| t.0.unsigned_abs()).max().unwrap_or(0) as usize;
        let n = modes.iter().map(|t| t.1.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut acc = vec![Complex64::new(0.0, 0.0); count(m, n)];
        let mut f = Self::zeros(m, n);
        for &(j, k, c) in modes {
            let (jj, kk, cc) = if j < 0 || (j == 0 && k < 0) { (-j, -k, c.conj()) } else { (j, k, c) };
            let i = f.index(jj, kk).unwrap();
            if jj == 0 && kk == 0 {
                acc[i] += Complex64::new(c.re, 0.0) * 2.0;
            } else {
                acc[i] += cc;
            }
        }
        // Each real pair contributes twice, once from each half.
        for (idx, (j, k)) in f.modes().collect::<Vec<_>>().into_iter().enumerate() {
            let c = acc[idx] * 0.5;
            f.coeffs[idx] = if j == 0 && k == 0 { [c.re, 0.0] } else { [2.0 * c.re, -2.0 * c.im] };
        }
        f
    }

    fn from_half_complex(m: usize, n: usize, get: impl Fn(i64, i64) -> Complex64) -> Self {
        let mut f = Self::zeros(m, n);
        let modes: Vec<_> = f.modes().collect();
        for (idx, (j, k)) in modes.into_iter().enumerate() {
            let c = get(j, k);
            f.coeffs[idx] = if j == 0 && k == 0 { [c.re, 0.0] } else { [2.0 * c.re, -2.0 * c.im] };
        }
        f
    }

    pub fn from_z(f: &PeriodicFn1D) -> Self {
        Self::from_half_complex(0, f.max_freq(), |_, k| f.c(k))
    }

    pub fn from_y(f: &PeriodicFn1D) -> Self {
        Self::from_half_complex(f.max_freq(), 0, |j, _| f.c(j))
    }

    pub fn eval(&self, y: f64, z: f64) -> f64 {
        let mut s = 0.0;
        let (ey, ez) = (self.phases(y, self.m), self.phases(z, self.n));
        for (idx, (j, k)) in self.modes().enumerate() {
            let [a, b] = self.coeffs[idx];
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let ph = ey[j as usize] * pow_signed(&ez, k);
            s += a * ph.re + b * ph.im;
        }
        s
    }

    fn phases(&self, x: f64, top: usize) -> Vec<Complex64> {
        let step = Complex64::from_polar(1.0, TWO_PI * x);
        let mut out = Vec::with_capacity(top + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for i in 0..=top {
            if i > 0 && i % 64 == 0 {
                p = Complex64::from_polar(1.0, TWO_PI * x * i as f64);
            }
            out.push(p);
            p *= step;
        }
        out
    }

    /// Value, gradient and Hessian at `(y, z)`.
    pub fn jet(&self, y: f64, z: f64) -> Jet2 {
        let mut out = Jet2::default();
        let (ey, ez) = (self.phases(y, self.m), self.phases(z, self.n));
        for (idx, (j, k)) in self.modes().enumerate() {
            let [a, b] = self.coeffs[idx];
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let ph = ey[j as usize] * pow_signed(&ez, k);
            let (cs, sn) = (ph.re, ph.im);
            let w = [TWO_PI * j as f64, TWO_PI * k as f64];
            let val = a * cs + b * sn;
            let der = -a * sn + b * cs;
            out.v += val;
            for p in 0..2 {
                out.d[p] += w[p] * der;
                for q in 0..2 {
                    out.h[p][q] -= w[p] * w[q] * val;
                }
            }
        }
        out
    }

    fn map_complex(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> Self {
        Self::from_half_complex(self.m, self.n, |j, k| f(j, k, self.c(j, k)))
    }

    /// Partial derivative along `axis` (0 = y, 1 = z) of the given order.
    pub fn differentiate(&self, axis: usize, order: u32) -> Self {
        self.map_complex(|j, k, c| {
            let w = if axis == 0 { j } else { k } as f64 * TWO_PI;
            c * Complex64::new(0.0, w).powu(order)
        })
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0][0]
    }

    /// Average over `y` at fixed `z`.
    pub fn fiber_mean(&self) -> PeriodicFn1D {
        PeriodicFn1D::new(self.coeffs[..=self.n].to_vec()).unwrap()
    }

    /// Average over `z` at fixed `y`.
    pub fn z_mean(&self) -> PeriodicFn1D {
        let cs: Vec<Complex64> = (0..=self.m as i64).map(|j| self.c(j, 0)).collect();
        PeriodicFn1D::from_complex(&cs)
    }

    /// `f - fiber_mean(f)`, viewed as a function of `(y, z)`.
    pub fn fiber_oscillation(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs[..=self.n].iter_mut() {
            *c = [0.0, 0.0];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m, n: self.n, coeffs: self.coeffs.iter().map(|&[a, b]| [a * s, b * s]).collect() }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0][0] += c;
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let (m, n) = (self.m.max(o.m), self.n.max(o.n));
        Self::from_half_complex(m, n, |j, k| self.c(j, k) + o.c(j, k))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self.full_modes(), o.full_modes());
        let (m, n) = (self.m + o.m, self.n + o.n);
        let mut out = Self::zeros(m, n);
        let mut acc = vec![Complex64::new(0.0, 0.0); out.coeffs.len()];
        for &(j1, k1, c1) in &a {
            for &(j2, k2, c2) in &b {
                let (j, k) = (j1 + j2, k1 + k2);
                if let Some(i) = out.index(j, k) {
                    acc[i] += c1 * c2;
                }
            }
        }
        let modes: Vec<_> = out.modes().collect();
        for (idx, (j, k)) in modes.into_iter().enumerate() {
            let c = acc[idx];
            out.coeffs[idx] = if j == 0 && k == 0 { [c.re, 0.0] } else { [2.0 * c.re, -2.0 * c.im] };
        }
        out
    }

    /// `(y, z) -> f(y + y0, z + z0)`.
    pub fn shift(&self, y0: f64, z0: f64) -> Self {
        self.map_complex(|j, k, c| c * Complex64::from_polar(1.0, TWO_PI * (j as f64 * y0 + k as f64 * z0)))
    }

    /// `(u, v) -> f(A (u, v))` for an integer matrix `A` (rows act on `(u, v)`).
    pub fn compose_linear(&self, a: [[i64; 2]; 2]) -> Self {
        // (j, k) . A(u, v) = ((j, k) A) . (u, v)
        let modes: Vec<(i64, i64, Complex64)> = self
            .full_modes()
            .into_iter()
            .map(|(j, k, c)| (j * a[0][0] + k * a[1][0], j * a[0][1] + k * a[1][1], c))
            .collect();
        Self::from_full_modes(&modes)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// L2 norm over the unit torus.
    pub fn l2_norm(&self) -> f64 {
        let mut s = self.coeffs[0][0].powi(2);
        for (idx, [a, b]) in self.coeffs.iter().enumerate().skip(1) {
            let _ = idx;
            s += 0.5 * (a * a + b * b);
        }
        s.sqrt()
    }

    /// True when every mode with `j != 0` is below `tol`.
    pub fn is_y_independent(&self, tol: f64) -> bool {
        self.coeffs[self.n + 1..].iter().flatten().all(|v| v.abs() <= tol)
    }

    /// True when every mode with `k != 0` is below `tol`.
    pub fn is_z_independent(&self, tol: f64) -> bool {
        self.modes().zip(self.coeffs.iter()).all(|((_, k), c)| k == 0 || (c[0].abs() <= tol && c[1].abs() <= tol))
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.coeffs.iter().skip(1).flatten().all(|v| v.abs() <= tol)
    }

    /// Zeroes coefficients below `tol` and shrinks the frequency box.
    pub fn trim(&self, tol: f64) -> Self {
        let modes: Vec<(i64, i64, Complex64)> = self
            .modes()
            .zip(self.coeffs.iter())
            .filter(|(_, c)| c[0].abs() > tol || c[1].abs() > tol)
            .map(|((j, k), _)| (j, k, self.c(j, k)))
            .collect();
        let m = modes.iter().map(|t| t.0.unsigned_abs()).max().unwrap_or(0) as usize;
        let n = modes.iter().map(|t| t.1.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut out = Self::zeros(m, n);
        for (j, k, c) in modes {
            let i = out.index(j, k).unwrap();
            out.coeffs[i] = if j == 0 && k == 0 { [c.re, 0.0] } else { [2.0 * c.re, -2.0 * c.im] };
        }
        out
    }

    /// Interpolating projection onto `|j| <= m`, `|k| <= n` from an `ny x nz` grid.
    pub fn project<F: Fn(f64, f64) -> f64 + Sync>(f: F, ny: usize, nz: usize, m: usize, n: usize) -> Self {
        use rayon::prelude::*;
        let samples: Vec<f64> = (0..ny * nz)
            .into_par_iter()
            .map(|i| f((i / nz) as f64 / ny as f64, (i % nz) as f64 / nz as f64))
            .collect();
        let hat = fft::forward_2d(&samples, ny, nz);
        let m = m.min((ny - 1) / 2);
        let n = n.min((nz - 1) / 2);
        Self::from_half_complex(m, n, |j, k| hat[fft::wrap(j, ny) * nz + fft::wrap(k, nz)])
    }

    /// Projection with grid doubling until the outer half of the spectrum is below `tol`.
    pub fn project_adaptive<F: Fn(f64, f64) -> f64 + Sync>(f: F, tol: f64) -> Self {
        let [p] = Self::project_adaptive_many(|y, z| [f(y, z)], tol);
        p
    }

    /// Adaptive projection of several functions sampled together.
    ///
    /// Each axis is refined separately. Refinement also stops once the tail no
    /// longer decreases at roundoff level.
    pub fn project_adaptive_many<const K: usize, F: Fn(f64, f64) -> [f64; K] + Sync>(f: F, tol: f64) -> [Self; K] {
        use rayon::prelude::*;
        const MAX: usize = 512;
        let (mut ny, mut nz) = (16usize, 16usize);
        let mut prev: Option<[f64; 2]> = None;
        loop {
            let samples: Vec<[f64; K]> = (0..ny * nz)
                .into_par_iter()
                .map(|i| f((i / nz) as f64 / ny as f64, (i % nz) as f64 / nz as f64))
                .collect();
            let hats: Vec<Vec<Complex64>> = (0..K)
                .map(|c| {
                    let col: Vec<f64> = samples.iter().map(|v| v[c]).collect();
                    fft::forward_2d(&col, ny, nz)
                })
                .collect();
            let (hy, hz) = ((ny / 4) as i64, (nz / 4) as i64);
            let (my, mz) = (ny as i64 / 2 - 1, nz as i64 / 2 - 1);
            let mut tail = [0.0f64; 2];
            let mut scale = 1.0f64;
            for hat in &hats {
                for j in 0..=my {
                    for k in -mz..=mz {
                        let v = hat[fft::wrap(j, ny) * nz + fft::wrap(k, nz)].norm();
                        scale = scale.max(v);
                        if j >= hy {
                            tail[0] = tail[0].max(v);
                        }
                        if k.abs() >= hz {
                            tail[1] = tail[1].max(v);
                        }
                    }
                }
            }
            let floor = 1e-13 * scale;
            let done = |a: usize, n: usize| {
                let stalled = prev.is_some_and(|p| tail[a] > 0.1 * p[a] && tail[a] < floor);
                tail[a] <= tol * scale || n >= MAX || stalled
            };
            let (dy, dz) = (done(0, ny), done(1, nz));
            if dy && dz {
                let (ty, tz) = (hy as usize - 1, hz as usize - 1);
                return std::array::from_fn(|c| {
                    let hat = &hats[c];
                    Self::from_half_complex(ty, tz, |j, k| hat[fft::wrap(j, ny) * nz + fft::wrap(k, nz)]).trim(tol * 0.1)
                });
            }
            prev = Some(tail);
            if !dy {
                ny *= 2;
            }
            if !dz {
                nz *= 2;
            }
        }
    }

    /// Sup norm estimated on a grid.
    pub fn sup_norm(&self) -> f64 {
        let ny = (4 * self.m + 16).max(16);
        let nz = (4 * self.n + 16).max(16);
        let mut s = 0.0f64;
        for a in 0..ny {
            for b in 0..nz {
                s = s.max(self.eval(a as f64 / ny as f64, b as f64 / nz as f64).abs());
            }
        }
        s
    }
}

fn pow_signed(ez: &[Complex64], k: i64) -> Complex64 {
    if k >= 0 {
        ez[k as usize]
    } else {
        ez[(-k) as usize].conj()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw2D {
    max_freq: [usize; 2],
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for PeriodicFn2D {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Raw2D { max_freq: [self.m, self.n], coeffs: self.coeffs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicFn2D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Raw2D::deserialize(d)?;
        PeriodicFn2D::new((raw.max_freq[0], raw.max_freq[1]), raw.coeffs).map_err(serde::de::Error::custom)
    }
}
