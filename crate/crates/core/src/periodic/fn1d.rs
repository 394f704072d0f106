use super::fft;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Real trigonometric polynomial of period 1,
/// `f(z) = a_0 + Σ_{j=1}^{M} a_j cos(2πjz) + b_j sin(2πjz)`.
///
/// Coefficients are stored as `[a_j, b_j]` with `b_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFn1D {
    coeffs: Vec<[f64; 2]>,
}

impl PeriodicFn1D {
    pub fn new(coeffs: Vec<[f64; 2]>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("empty coefficient list".into()));
        }
        if coeffs[0][1] != 0.0 {
            return Err(Error::InvalidSpec("sine coefficient of mode 0 must be 0".into()));
        }
        if coeffs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![[c, 0.0]] }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `a cos(2πjz) + b sin(2πjz)`.
    pub fn mode(j: usize, a: f64, b: f64) -> Self {
        let mut coeffs = vec![[0.0; 2]; j + 1];
        coeffs[j] = if j == 0 { [a, 0.0] } else { [a, b] };
        Self { coeffs }
    }

    pub fn max_freq(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[[f64; 2]] {
        &self.coeffs
    }

    /// Complex coefficient of `e^{2πijz}`, any signed `j`.
    pub fn c(&self, j: i64) -> Complex64 {
        let ja = j.unsigned_abs() as usize;
        if ja >= self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        let [a, b] = self.coeffs[ja];
        if ja == 0 {
            Complex64::new(a, 0.0)
        } else if j > 0 {
            Complex64::new(a / 2.0, -b / 2.0)
        } else {
            Complex64::new(a / 2.0, b / 2.0)
        }
    }

    /// Builds from complex coefficients `c_j`, `j = 0..=m`; the imaginary part of `c_0` is dropped.
    pub fn from_complex(cs: &[Complex64]) -> Self {
        let mut coeffs = Vec::with_capacity(cs.len().max(1));
        for (j, c) in cs.iter().enumerate() {
            if j == 0 {
                coeffs.push([c.re, 0.0]);
            } else {
                coeffs.push([2.0 * c.re, -2.0 * c.im]);
            }
        }
        if coeffs.is_empty() {
            coeffs.push([0.0, 0.0]);
        }
        Self { coeffs }
    }

    fn complex_vec(&self) -> Vec<Complex64> {
        (0..self.coeffs.len() as i64).map(|j| self.c(j)).collect()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.jet(z)[0]
    }

    /// Value, first and second derivative at `z`.
    pub fn jet(&self, z: f64) -> [f64; 3] {
        let mut out = [self.coeffs[0][0], 0.0, 0.0];
        let step = Complex64::from_polar(1.0, TWO_PI * z);
        let mut ph = Complex64::new(1.0, 0.0);
        for (j, &[a, b]) in self.coeffs.iter().enumerate().skip(1) {
            ph *= step;
            if j % 64 == 0 {
                ph = Complex64::from_polar(1.0, TWO_PI * z * j as f64);
            }
            let w = TWO_PI * j as f64;
            let (cs, sn) = (ph.re, ph.im);
            out[0] += a * cs + b * sn;
            out[1] += w * (-a * sn + b * cs);
            out[2] += -w * w * (a * cs + b * sn);
        }
        out
    }

    pub fn derivative(&self, order: u32) -> Self {
        let cs: Vec<Complex64> = self
            .complex_vec()
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::new(0.0, TWO_PI * j as f64).powu(order))
            .collect();
        let mut out = Self::from_complex(&cs);
        if order > 0 {
            out.coeffs[0] = [0.0, 0.0];
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0][0]
    }

    /// Mean-free periodic antiderivative of `f - mean(f)`.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![[0.0; 2]; self.coeffs.len()];
        for (j, &[a, b]) in self.coeffs.iter().enumerate().skip(1) {
            let w = TWO_PI * j as f64;
            coeffs[j] = [-b / w, a / w];
        }
        Self { coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&[a, b]| [a * s, b * s]).collect() }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0][0] += c;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![[0.0; 2]; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let p = self.coeffs.get(j).copied().unwrap_or([0.0; 2]);
            let q = other.coeffs.get(j).copied().unwrap_or([0.0; 2]);
            *c = [p[0] + q[0], p[1] + q[1]];
        }
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (m1, m2) = (self.max_freq() as i64, other.max_freq() as i64);
        let m = m1 + m2;
        let mut cs = vec![Complex64::new(0.0, 0.0); (m + 1) as usize];
        for j1 in -m1..=m1 {
            let c1 = self.c(j1);
            if c1.norm_sqr() == 0.0 {
                continue;
            }
            for j2 in -m2..=m2 {
                let j = j1 + j2;
                if j < 0 {
                    continue;
                }
                cs[j as usize] += c1 * other.c(j2);
            }
        }
        Self::from_complex(&cs)
    }

    /// `z -> f(z + t)`.
    pub fn shift(&self, t: f64) -> Self {
        let cs: Vec<Complex64> = self
            .complex_vec()
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(1.0, TWO_PI * j as f64 * t))
            .collect();
        Self::from_complex(&cs)
    }

    /// `z -> f(-z)`.
    pub fn reflect(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&[a, b]| [a, -b]).collect() }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest coefficient magnitude outside mode 0.
    pub fn oscillation(&self) -> f64 {
        self.coeffs.iter().skip(1).flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.oscillation() <= tol
    }

    /// Drops trailing modes whose coefficients are below `tol`.
    pub fn trim(&self, tol: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 {
            let last = coeffs[coeffs.len() - 1];
            if last[0].abs() <= tol && last[1].abs() <= tol {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self { coeffs }
    }

    pub fn truncate(&self, max_freq: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(max_freq + 1);
        Self { coeffs }
    }

    /// Uniform samples `f(i / n)`, `i = 0..n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }

    /// Interpolating projection of `f` onto modes `0..=max_freq` from `n` samples.
    pub fn project<F: Fn(f64) -> f64>(f: F, n: usize, max_freq: usize) -> Self {
        let samples: Vec<f64> = (0..n).map(|i| f(i as f64 / n as f64)).collect();
        let hat = fft::forward_1d(&samples);
        let top = max_freq.min((n - 1) / 2);
        Self::from_complex(&hat[..=top])
    }

    /// Projection with grid doubling until the upper half of the spectrum is below `tol`.
    pub fn project_adaptive<F: Fn(f64) -> f64>(f: F, tol: f64) -> Self {
        let mut n = 32;
        loop {
            let p = Self::project(&f, n, n / 2 - 1);
            let half = n / 4;
            let tail = p.coeffs[half..].iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            if tail <= tol || n >= 8192 {
                return p.truncate(half).trim(tol * 1e-3);
            }
            n *= 2;
        }
    }

    /// Sup norm estimated on a fine grid.
    pub fn sup_norm(&self) -> f64 {
        let n = (8 * self.max_freq() + 64).max(64);
        self.sample(n).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw1D {
    max_freq: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for PeriodicFn1D {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Raw1D { max_freq: self.max_freq(), coeffs: self.coeffs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicFn1D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Raw1D::deserialize(d)?;
        if raw.coeffs.len() != raw.max_freq + 1 {
            return Err(serde::de::Error::custom(format!(
                "expected {} coefficients for max_freq {}, got {}",
                raw.max_freq + 1,
                raw.max_freq,
                raw.coeffs.len()
            )));
        }
        PeriodicFn1D::new(raw.coeffs).map_err(serde::de::Error::custom)
    }
}
