//! Isometry test between normal forms by search over the residual group.

use super::ops;
use super::{act_gl2, act_z, reduce_closed_chain, reduce_dio_chain, Chain, NormalForm, NormalFormClosed, NormalFormDio};
use crate::curvature::r_grid;
use crate::error::{Error, Result};
use crate::map::{det3, AffineMapSpec};
use crate::model::{metric_coords, MetricSpec};
use crate::periodic::{ext_gcd, PeriodicFn2D};
use serde::Serialize;
use std::f64::consts::PI;

/// Bounds for the witness search.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchBounds {
    pub ell_max: i64,
    pub m_max: i64,
    pub tol: f64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self { ell_max: 8, m_max: 6, tol: 1e-7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryDecision {
    Isometric,
    NotIsometric,
    /// No witness within the search bounds and no invariant separates the two.
    Undecided,
}

/// Group element found by the search.
///
/// `map` is an isometry from the first metric onto the second:
/// `map* g₂ = g₁` in normal-form coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub flip: [i64; 3],
    pub ell: Option<i64>,
    pub gl2: Option<[[i64; 2]; 2]>,
    pub translation: [f64; 2],
    pub lift: i64,
    #[serde(skip)]
    pub map: AffineMapSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryReport {
    pub decision: IsometryDecision,
    pub witness: Option<Witness>,
    pub reason: String,
}

/// Isometry invariants: volume and weighted moments of `r`.
fn invariants(spec: &MetricSpec) -> [f64; 3] {
    let metric = metric_coords(spec);
    let n = 32;
    let r = r_grid(&metric, n);
    let (mut vol, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for (i, rv) in r.iter().enumerate() {
        let p = [0.0, (i / n) as f64 / n as f64, (i % n) as f64 / n as f64];
        let w = det3(&metric.eval(&p)).abs().sqrt();
        vol += w;
        m2 += rv * rv * w;
        m3 += rv * rv * rv * w;
    }
    let s = (n * n) as f64;
    [vol / s, m2 / s, m3 / s]
}

fn flips(n: u32) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for e1 in [1, -1] {
        for e2 in [1, -1] {
            for e3 in [1, -1] {
                if n == 0 || e1 == e2 * e3 {
                    out.push([e1, e2, e3]);
                }
            }
        }
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn same_fn(a: &PeriodicFn2D, b: &PeriodicFn2D, tol: f64) -> bool {
    a.sub(b).max_abs_coeff() <= tol * (1.0 + a.max_abs_coeff().max(b.max_abs_coeff()))
}

fn same_spec(a: &MetricSpec, b: &MetricSpec, tol: f64) -> bool {
    a.theta.same_as(&b.theta)
        && close(a.lambda, b.lambda, tol)
        && same_fn(&a.l2, &b.l2, tol)
        && same_fn(&a.nu, &b.nu, tol)
        && same_fn(&a.mu, &b.mu, tol)
}

/// Candidate `(y0, z0)` with `f(y + y0, z + z0) = g(y, z)` for every pair.
fn phase_candidates(pairs: &[(&PeriodicFn2D, &PeriodicFn2D)], tol: f64) -> Vec<[f64; 2]> {
    let mut modes: Vec<(i64, i64, f64, f64)> = Vec::new();
    for (f, g) in pairs {
        for (j, k, c) in f.full_modes() {
            if (j, k) == (0, 0) || j < 0 || (j == 0 && k < 0) || c.norm() <= tol {
                continue;
            }
            let d = g.c(j, k);
            let ph = (d / c).arg() / (2.0 * PI);
            modes.push((j, k, c.norm(), ph));
        }
    }
    modes.sort_by(|a, b| b.2.total_cmp(&a.2));
    let Some(&(j1, k1, _, p1)) = modes.first() else {
        return vec![[0.0, 0.0]];
    };
    let second = modes.iter().find(|m| m.0 * k1 - m.1 * j1 != 0).copied();
    let mut out = Vec::new();
    match second {
        None => {
            let g = ext_gcd(j1, k1).0;
            let (_, u2, v2) = ext_gcd(j1 / g, k1 / g);
            for m in 0..g {
                let t = (p1 + m as f64) / g as f64;
                out.push([t * u2 as f64, t * v2 as f64]);
            }
        }
        Some((j2, k2, _, p2)) => {
            let det = j1 * k2 - k1 * j2;
            let dabs = det.abs().min(64);
            for m1 in 0..dabs {
                for m2 in 0..dabs {
                    let r1 = p1 + m1 as f64;
                    let r2 = p2 + m2 as f64;
                    let y0 = (k2 as f64 * r1 - k1 as f64 * r2) / det as f64;
                    let z0 = (-(j2 as f64) * r1 + j1 as f64 * r2) / det as f64;
                    out.push([y0.rem_euclid(1.0), z0.rem_euclid(1.0)]);
                }
            }
        }
    }
    out
}

/// Looks for a translation (plus an `x`-lift when `n ≠ 0`) taking `spec` to `target`.
fn match_translation(spec: &MetricSpec, target: &MetricSpec, tol: f64) -> Option<(AffineMapSpec, [f64; 2], i64)> {
    let n = spec.n();
    let cands: Vec<([f64; 2], i64)> = if n == 0 {
        phase_candidates(&[(&spec.l2, &target.l2), (&spec.mu, &target.mu)], tol).into_iter().map(|t| (t, 0)).collect()
    } else {
        let nn = n as i64;
        (0..nn).flat_map(|i| (0..nn).map(move |j| ([i as f64 / n as f64, j as f64 / n as f64], j))).collect()
    };
    for (t, lift) in cands {
        let (s1, m1) = ops::translate(spec, 0.0, t[0], t[1]);
        let (s2, m2) = ops::lift_x(&s1, lift, 0);
        if same_spec(&s2, target, tol) {
            return Some((m1.compose(&m2), t, lift));
        }
    }
    None
}

fn gl2_candidates(m_max: i64, n: u32) -> Vec<[[i64; 2]; 2]> {
    let mut out = Vec::new();
    let r = -m_max..=m_max;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    let det = a * d - b * c;
                    if det == 1 || (n == 0 && det == -1) {
                        out.push([[a, b], [c, d]]);
                    }
                }
            }
        }
    }
    out.sort_by_key(|m| m.iter().flatten().map(|v| v.abs()).sum::<i64>());
    out
}

fn flipped_dio(nf: &NormalFormDio, e: [i64; 3]) -> Result<(NormalFormDio, AffineMapSpec)> {
    let mut chain = Chain::new(nf.to_spec());
    chain.try_apply(ops::flip(&chain.spec, e))?;
    reduce_dio_chain(&mut chain)?;
    let r = super::finish_dio(chain, "flip");
    Ok((r.nf, r.change))
}

fn flipped_closed(nf: &NormalFormClosed, e: [i64; 3]) -> Result<(NormalFormClosed, AffineMapSpec)> {
    let mut chain = Chain::new(nf.to_spec());
    chain.try_apply(ops::flip(&chain.spec, e))?;
    super::fix_sign(&mut chain)?;
    reduce_closed_chain(&mut chain)?;
    let r = super::finish_closed(chain, "flip");
    Ok((r.nf, r.change))
}

fn ell_order(ell_max: i64) -> Vec<i64> {
    let mut v = vec![0];
    for l in 1..=ell_max {
        v.push(-l);
        v.push(l);
    }
    v
}

/// Decides whether two normal forms of the same family are isometric.
///
/// The second form is moved by sign changes, the `ℤ`- or `GL₂(ℤ)`-action
/// and translations until it matches the first; the witness map is then an
/// isometry from the first onto the second.
pub fn are_isometric(nf1: &NormalForm, nf2: &NormalForm, bounds: SearchBounds) -> Result<IsometryReport> {
    let not = |reason: String| IsometryReport { decision: IsometryDecision::NotIsometric, witness: None, reason };
    match (nf1, nf2) {
        (NormalForm::Dio(_), NormalForm::Dio(_)) | (NormalForm::Closed(_), NormalForm::Closed(_)) => {}
        _ => return Err(Error::IncompatibleNormalForm("normal forms from different families".into())),
    }
    if nf1.n() != nf2.n() {
        return Ok(not(format!("different lattices: n = {} vs {}", nf1.n(), nf2.n())));
    }
    let (s1, s2) = (nf1.to_spec(), nf2.to_spec());
    let (i1, i2) = (invariants(&s1), invariants(&s2));
    let names = ["volume", "integral of r^2", "integral of r^3"];
    for i in 0..3 {
        if !close(i1[i], i2[i], 1e-6) {
            return Ok(not(format!("{} differs: {:.12e} vs {:.12e}", names[i], i1[i], i2[i])));
        }
    }
    let found = match (nf1, nf2) {
        (NormalForm::Dio(_), NormalForm::Dio(b)) => search_dio(&s1, b, bounds)?,
        (NormalForm::Closed(_), NormalForm::Closed(b)) => search_closed(&s1, b, bounds)?,
        _ => unreachable!(),
    };
    Ok(match found {
        Some(w) => IsometryReport { decision: IsometryDecision::Isometric, witness: Some(w), reason: "witness found".into() },
        None => IsometryReport {
            decision: IsometryDecision::Undecided,
            witness: None,
            reason: format!(
                "invariants agree but no witness with |ell| <= {}, entries <= {}",
                bounds.ell_max, bounds.m_max
            ),
        },
    })
}

fn search_dio(target: &MetricSpec, nf2: &NormalFormDio, bounds: SearchBounds) -> Result<Option<Witness>> {
    let mats = gl2_candidates(bounds.m_max, nf2.n);
    for e in flips(nf2.n) {
        let Ok((f, fmap)) = flipped_dio(nf2, e) else { continue };
        for m in &mats {
            let Ok(th) = f.theta.mobius(*m) else { continue };
            if !th.same_as(&target.theta) {
                continue;
            }
            let Ok(r) = act_gl2(&f, *m) else { continue };
            if let Some((tmap, t, lift)) = match_translation(&r.nf.to_spec(), target, bounds.tol) {
                let map = fmap.compose(&r.change).compose(&tmap).with_label("isometry", &[]);
                let gl2 = (*m != [[1, 0], [0, 1]]).then_some(*m);
                return Ok(Some(Witness { flip: e, ell: None, gl2, translation: t, lift, map }));
            }
        }
    }
    Ok(None)
}

fn search_closed(target: &MetricSpec, nf2: &NormalFormClosed, bounds: SearchBounds) -> Result<Option<Witness>> {
    for e in flips(nf2.n) {
        let Ok((f, fmap)) = flipped_closed(nf2, e) else { continue };
        for ell in ell_order(bounds.ell_max) {
            let r = act_z(&f, ell)?;
            if let Some((tmap, t, lift)) = match_translation(&r.nf.to_spec(), target, bounds.tol) {
                let map = fmap.compose(&r.change).compose(&tmap).with_label("isometry", &[("ell", ell as f64)]);
                return Ok(Some(Witness { flip: e, ell: Some(ell), gl2: None, translation: t, lift, map }));
            }
        }
    }
    Ok(None)
}
