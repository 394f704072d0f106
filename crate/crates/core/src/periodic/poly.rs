use super::fn2d::{Jet2, PeriodicFn2D};
use crate::error::{Error, Result};

/// Maximum power of `z` carried by a [`PolyPeriodic`].
pub const MAX_DEGREE: usize = 2;

/// `Σ_{k<=2} z^k f_k(y, z)` with periodic `f_k`.
///
/// Metric coefficients in coordinates pick up polynomial factors in `z`
/// from the lattice twist; this type carries them exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPeriodic {
    terms: Vec<PeriodicFn2D>,
}

impl PolyPeriodic {
    pub fn new(terms: Vec<PeriodicFn2D>) -> Result<Self> {
        if terms.len() > MAX_DEGREE + 1 {
            return Err(Error::DegreeOverflow);
        }
        let terms = if terms.is_empty() { vec![PeriodicFn2D::constant(0.0)] } else { terms };
        Ok(Self { terms })
    }

    pub fn periodic(f: PeriodicFn2D) -> Self {
        Self { terms: vec![f] }
    }

    pub fn constant(c: f64) -> Self {
        Self::periodic(PeriodicFn2D::constant(c))
    }

    /// `c0 + c1 z + c2 z^2`.
    pub fn poly(c: [f64; 3]) -> Self {
        Self { terms: c.iter().map(|&v| PeriodicFn2D::constant(v)).collect() }.normalized()
    }

    pub fn terms(&self) -> &[PeriodicFn2D] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.len() - 1
    }

    fn normalized(mut self) -> Self {
        while self.terms.len() > 1 && self.terms.last().unwrap().max_abs_coeff() == 0.0 {
            self.terms.pop();
        }
        self
    }

    pub fn eval(&self, y: f64, z: f64) -> f64 {
        let mut s = 0.0;
        let mut zp = 1.0;
        for f in &self.terms {
            s += zp * f.eval(y, z);
            zp *= z;
        }
        s
    }

    /// Value, gradient and Hessian in `(y, z)`.
    pub fn jet(&self, y: f64, z: f64) -> Jet2 {
        let mut out = Jet2::default();
        for (k, f) in self.terms.iter().enumerate() {
            let mono = monomial_jet(k, z);
            out = out.add(&mono.mul(&f.jet(y, z)));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.terms.len().max(o.terms.len());
        let zero = PeriodicFn2D::constant(0.0);
        let terms = (0..n)
            .map(|k| self.terms.get(k).unwrap_or(&zero).add(o.terms.get(k).unwrap_or(&zero)))
            .collect();
        Self { terms }.normalized()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|f| f.scale(s)).collect() }.normalized()
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let deg = self.degree() + o.degree();
        if deg > MAX_DEGREE {
            return Err(Error::DegreeOverflow);
        }
        let mut terms = vec![PeriodicFn2D::constant(0.0); deg + 1];
        for (a, f) in self.terms.iter().enumerate() {
            for (b, g) in o.terms.iter().enumerate() {
                terms[a + b] = terms[a + b].add(&f.mul(g));
            }
        }
        Ok(Self { terms }.normalized())
    }

    pub fn mul_periodic(&self, f: &PeriodicFn2D) -> Self {
        Self { terms: self.terms.iter().map(|t| t.mul(f)).collect() }.normalized()
    }

    /// Partial derivative along `axis` (0 = y, 1 = z) of the given order.
    pub fn differentiate(&self, axis: usize, order: u32) -> Self {
        let mut cur = self.clone();
        for _ in 0..order {
            cur = if axis == 0 {
                Self { terms: cur.terms.iter().map(|f| f.differentiate(0, 1)).collect() }
            } else {
                let n = cur.terms.len();
                let terms = (0..n)
                    .map(|k| {
                        let mut t = cur.terms[k].differentiate(1, 1);
                        if k + 1 < n {
                            t = t.add(&cur.terms[k + 1].scale((k + 1) as f64));
                        }
                        t
                    })
                    .collect();
                Self { terms }
            }
            .normalized();
        }
        cur
    }

    /// Periodic part when the polynomial degree is zero.
    pub fn as_periodic(&self) -> Option<&PeriodicFn2D> {
        (self.degree() == 0).then(|| &self.terms[0])
    }
}

fn monomial_jet(k: usize, z: f64) -> Jet2 {
    let kf = k as f64;
    let p = |e: i32| if e < 0 { 0.0 } else { z.powi(e) };
    Jet2 {
        v: p(k as i32),
        d: [0.0, kf * p(k as i32 - 1)],
        h: [[0.0, 0.0], [0.0, kf * (kf - 1.0) * p(k as i32 - 2)]],
    }
}
