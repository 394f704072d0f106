use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Slope of the leaf-wise flow.
///
/// Rationals and quadratic irrationals are exact; a raw float is only usable by
/// the small-divisor solvers when declared Diophantine together with a minimum
/// divisor bound `eps_div`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ThetaSpec {
    Rational { p: i64, q: i64 },
    /// `(a + b sqrt(d)) / c`.
    Quadratic { a: i64, b: i64, c: i64, d: i64 },
    Float {
        value: f64,
        #[serde(default)]
        diophantine: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps_div: Option<f64>,
    },
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Returns `(g, u, v)` with `u a + v b = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn is_squarefree(d: i64) -> bool {
    let mut k = 2i64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl ThetaSpec {
    pub fn rational(p: i64, q: i64) -> Self {
        Self::Rational { p, q }.normalized().expect("nonzero denominator")
    }

    pub fn golden() -> Self {
        Self::Quadratic { a: -1, b: 1, c: 2, d: 5 }
    }

    /// Reduces to lowest terms and checks well-formedness.
    pub fn normalized(&self) -> Result<Self> {
        match *self {
            Self::Rational { p, q } => {
                if q == 0 {
                    return Err(Error::InvalidSpec("rational slope with q = 0".into()));
                }
                let g = gcd(p as i128, q as i128).max(1) as i64;
                let s = q.signum();
                Ok(Self::Rational { p: s * p / g, q: s * q / g })
            }
            Self::Quadratic { a, b, c, d } => {
                if c == 0 {
                    return Err(Error::InvalidSpec("quadratic slope with c = 0".into()));
                }
                if d < 2 || !is_squarefree(d) {
                    return Err(Error::InvalidSpec(format!("d = {d} must be a squarefree integer > 1")));
                }
                if b == 0 {
                    return Self::Rational { p: a, q: c }.normalized();
                }
                let g = gcd(gcd(a as i128, b as i128), c as i128).max(1) as i64;
                let s = c.signum();
                Ok(Self::Quadratic { a: s * a / g, b: s * b / g, c: s * c / g, d })
            }
            Self::Float { value, diophantine, eps_div } => {
                if !value.is_finite() {
                    return Err(Error::InvalidSpec("non-finite slope".into()));
                }
                if let Some(e) = eps_div {
                    if !(e > 0.0 && e.is_finite()) {
                        return Err(Error::InvalidSpec("eps_div must be positive".into()));
                    }
                }
                Ok(Self::Float { value, diophantine, eps_div })
            }
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Self::Rational { p, q } => p as f64 / q as f64,
            Self::Quadratic { a, b, c, d } => (a as f64 + b as f64 * (d as f64).sqrt()) / c as f64,
            Self::Float { value, .. } => value,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Self::Rational { .. })
    }

    /// True for slopes the small-divisor solvers accept.
    pub fn is_diophantine(&self) -> bool {
        match self {
            Self::Rational { .. } => false,
            Self::Quadratic { .. } => true,
            Self::Float { diophantine, eps_div, .. } => *diophantine && eps_div.is_some(),
        }
    }

    pub fn neg(&self) -> Self {
        match *self {
            Self::Rational { p, q } => Self::Rational { p: -p, q },
            Self::Quadratic { a, b, c, d } => Self::Quadratic { a: -a, b: -b, c, d },
            Self::Float { value, diophantine, eps_div } => Self::Float { value: -value, diophantine, eps_div },
        }
    }

    /// `(c + d θ) / (a + b θ)`, exact for rational and quadratic slopes.
    pub fn mobius(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = m;
        match *self {
            Self::Rational { p, q } => {
                let num = c * q + d * p;
                let den = a * q + b * p;
                if den == 0 {
                    return Err(Error::NonUnimodular("slope maps to infinity".into()));
                }
                Self::Rational { p: num, q: den }.normalized()
            }
            Self::Quadratic { a: p0, b: q0, c: r0, d: dd } => {
                let (p0, q0, r0, dd) = (p0 as i128, q0 as i128, r0 as i128, dd as i128);
                let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
                // numerator and denominator as (x + y sqrt(dd)) / r0
                let (nx, ny) = (c * r0 + d * p0, d * q0);
                let (dx, dy) = (a * r0 + b * p0, b * q0);
                let den = dx * dx - dy * dy * dd;
                if den == 0 {
                    return Err(Error::NonUnimodular("degenerate Möbius image".into()));
                }
                let x = nx * dx - ny * dy * dd;
                let y = ny * dx - nx * dy;
                let g = gcd(gcd(x, y), den).max(1);
                let (x, y, den) = (x / g, y / g, den / g);
                let to = |v: i128| i64::try_from(v).map_err(|_| Error::InvalidSpec("slope overflow".into()));
                Self::Quadratic { a: to(x)?, b: to(y)?, c: to(den)?, d: to(dd)? }.normalized()
            }
            Self::Float { value, diophantine, eps_div } => {
                let den = a as f64 + b as f64 * value;
                if den == 0.0 {
                    return Err(Error::NonUnimodular("slope maps to infinity".into()));
                }
                Ok(Self::Float { value: (c as f64 + d as f64 * value) / den, diophantine, eps_div })
            }
        }
    }

    /// Exact equality where both sides are exact, numeric otherwise.
    pub fn same_as(&self, o: &Self) -> bool {
        match (self.normalized(), o.normalized()) {
            (Ok(a @ Self::Rational { .. }), Ok(b @ Self::Rational { .. })) => a == b,
            (Ok(a @ Self::Quadratic { .. }), Ok(b @ Self::Quadratic { .. })) => a == b,
            (Ok(Self::Float { .. }), _) | (_, Ok(Self::Float { .. })) => (self.value() - o.value()).abs() < 1e-12,
            _ => false,
        }
    }

    /// Checks the cohomological divisor `e^{2πijθ} - 1` for mode `j`.
    ///
    /// Returns `Ok(false)` when the mode is exactly resonant.
    pub fn divisor_ok_1d(&self, j: i64) -> Result<bool> {
        match *self {
            Self::Rational { q, .. } => Ok(j % q != 0),
            Self::Quadratic { .. } => Ok(j != 0),
            Self::Float { value, diophantine, eps_div } => {
                let eps = self.require_bound(diophantine, eps_div)?;
                let t = j as f64 * value;
                let dist = 2.0 * (std::f64::consts::PI * (t - t.round())).sin().abs();
                if dist < eps {
                    return Err(Error::NonDiophantineSlope(format!(
                        "|e^(2πi·{j}θ) - 1| = {dist:.3e} below eps_div = {eps:.3e}"
                    )));
                }
                Ok(true)
            }
        }
    }

    /// Checks the directional divisor `j + kθ` for mode `(j, k)`.
    pub fn divisor_ok_2d(&self, j: i64, k: i64) -> Result<bool> {
        match *self {
            Self::Rational { p, q } => Ok(j * q + k * p != 0),
            Self::Quadratic { .. } => Ok(j != 0 || k != 0),
            Self::Float { value, diophantine, eps_div } => {
                let eps = self.require_bound(diophantine, eps_div)?;
                let dist = (j as f64 + k as f64 * value).abs();
                if (j, k) != (0, 0) && dist < eps {
                    return Err(Error::NonDiophantineSlope(format!(
                        "|{j} + {k}θ| = {dist:.3e} below eps_div = {eps:.3e}"
                    )));
                }
                Ok((j, k) != (0, 0))
            }
        }
    }

    fn require_bound(&self, diophantine: bool, eps_div: Option<f64>) -> Result<f64> {
        if !diophantine {
            return Err(Error::NonDiophantineSlope("float slope not declared Diophantine".into()));
        }
        eps_div.ok_or_else(|| Error::NonDiophantineSlope("float slope needs eps_div".into()))
    }
}
