//! The acceptance suite: twelve pass/fail criteria run on the bundled corpus.

use crate::classify::{classify, linear_fit, normalize_for_classification, ClassInput, Compactness, Table2Case};
use crate::corpus::CORPUS;
use crate::curvature::{
    check_parallel_x, curvature_r, curvature_r_closed_form, gauss_bonnet, parallel_transport_loop, LeafLoop, TRANSPORT_STEPS,
};
use crate::deform::{path_for_generator, r_sup, verify_along_path, DeformPath};
use crate::error::{Error, Result};
use crate::map::AffineMapSpec;
use crate::model::{metric_coords, ArithCertificates, MetricSpec};
use crate::normalform::{act_gl2, act_z, reduce_closed, reduce_diophantine, NormalForm, NormalFormClosed, NormalFormDio};
use crate::periodic::{cohomological_residual, solve_cohomological, PeriodicFn1D, PeriodicFn2D, ThetaSpec};
use crate::transforms::{affine_defect_unchecked, check_generator, chi, flow_y, make_generator, sigma, GeneratorKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

pub const PARALLEL_TOL: f64 = 1e-9;
pub const PARALLEL_GRID: usize = 16;
pub const PARALLEL_SECONDS: f64 = 5.0;
pub const GB_TOL: f64 = 1e-6;
pub const GB_REFINEMENT: f64 = 4.0;
pub const CURVATURE_TOL: f64 = 1e-6;
pub const COHOMOLOGICAL_TOL: f64 = 1e-9;
pub const COHOMOLOGICAL_GRID: usize = 512;
pub const DEFECT_TOL: f64 = 1e-8;
pub const R_INVARIANCE_TOL: f64 = 1e-7;
pub const FLOW_FIT_TOL: f64 = 1e-8;
pub const FLAT_TOL: f64 = 1e-8;
pub const HOLONOMY_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const GROUP_LAW_TOL: f64 = 1e-9;
pub const SEED: u64 = 20_240_611;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("criterion {:>2} [{status}] {}: {}", self.id, self.name, self.detail)
    }
}

fn result(id: u8, name: &'static str, outcome: Result<(bool, String)>) -> CriterionResult {
    match outcome {
        Ok((passed, detail)) => CriterionResult { id, name, passed, detail },
        Err(e) => CriterionResult { id, name, passed: false, detail: format!("error: {e}") },
    }
}

fn corpus_specs() -> Result<Vec<(&'static str, MetricSpec)>> {
    CORPUS.iter().map(|e| Ok((e.name, e.spec()?))).collect()
}

fn closed_nf(name: &str) -> Result<(NormalFormClosed, ArithCertificates)> {
    let spec = crate::corpus::get(name).ok_or_else(|| Error::InvalidSpec(name.into()))?.spec()?;
    Ok((reduce_closed(&spec)?.nf, spec.arith))
}

fn dio_nf(name: &str) -> Result<NormalFormDio> {
    let spec = crate::corpus::get(name).ok_or_else(|| Error::InvalidSpec(name.into()))?.spec()?;
    Ok(reduce_diophantine(&spec)?.nf)
}

/// 1. `∇X = 0` on every corpus spec, within the time budget.
pub fn parallel_field() -> CriterionResult {
    result(1, "parallel field", (|| {
        let specs = corpus_specs()?;
        let start = Instant::now();
        let worst = specs.iter().map(|(_, s)| check_parallel_x(&metric_coords(s), PARALLEL_GRID)).fold(0.0, f64::max);
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst < PARALLEL_TOL && secs < PARALLEL_SECONDS,
            format!("{} specs, sup |nabla X| = {worst:.3e} (tol {PARALLEL_TOL:.0e}), {secs:.2} s (limit {PARALLEL_SECONDS} s)", specs.len()),
        ))
    })())
}

/// 2. `∫ r ω̄ = 0` and its refinement from 64² to 128².
pub fn gauss_bonnet_identity() -> CriterionResult {
    result(2, "Gauss-Bonnet", (|| {
        let mut worst = 0.0f64;
        let mut refine_fail = Vec::new();
        for (name, s) in corpus_specs()? {
            let (v64, v128) = (gauss_bonnet(&s, 64).abs(), gauss_bonnet(&s, 128).abs());
            worst = worst.max(v64);
            if v128 * GB_REFINEMENT > v64 {
                refine_fail.push(format!("{name} {v64:.1e}->{v128:.1e}"));
            }
        }
        let ok = worst < GB_TOL && refine_fail.is_empty();
        let refine = if refine_fail.is_empty() { "all".to_string() } else { format!("not reduced {GB_REFINEMENT}x: {}", refine_fail.join(", ")) };
        Ok((ok, format!("max |int r| at 64^2 = {worst:.3e} (tol {GB_TOL:.0e}); refinement {refine}")))
    })())
}

/// 3. Closed-form `r` against the full curvature tensor.
pub fn curvature_oracle() -> CriterionResult {
    result(3, "curvature oracle", (|| {
        let mut simple = MetricSpec::flat(0, ThetaSpec::rational(0, 1), 1.0);
        simple.mu = PeriodicFn2D::mode(1, 0, 1.0, 0.0);
        let mut specs = vec![("mu=cos2piy", simple.clone())];
        for name in ["case4", "case5", "case6", "case9"] {
            specs.push((name, closed_nf(name)?.0.to_spec()));
        }
        let mut worst = 0.0f64;
        for (_, s) in &specs {
            let closed = curvature_r_closed_form(s)?;
            for i in 0..12 {
                for j in 0..12 {
                    let (y, z) = (i as f64 / 12.0, (j as f64 + 0.5) / 12.0);
                    worst = worst.max((closed.eval(y, z) - curvature_r(s, [0.3, y, z])).abs());
                }
            }
        }
        let mut exact = 0.0f64;
        for i in 0..12 {
            let y = i as f64 / 12.0;
            exact = exact.max((curvature_r(&simple, [0.0, y, 0.2]) + 2.0 * PI * PI * (2.0 * PI * y).cos()).abs());
        }
        Ok((
            worst < CURVATURE_TOL && exact < CURVATURE_TOL,
            format!("{} specs, sup |closed - tensor| = {worst:.3e}, |r + 2pi^2 cos 2pi y| = {exact:.3e} (tol {CURVATURE_TOL:.0e})", specs.len()),
        ))
    })())
}

/// 4. Cohomological equation over the golden rotation; resonance at a rational slope.
pub fn cohomological_solver() -> CriterionResult {
    result(4, "cohomological solver", (|| {
        let h = PeriodicFn1D::mode(1, 1.0, 0.0).add(&PeriodicFn1D::mode(2, 0.0, 0.3));
        let golden = ThetaSpec::golden();
        let f = solve_cohomological(&h, &golden)?;
        let res = cohomological_residual(&f, &h, golden.value(), COHOMOLOGICAL_GRID);
        let resonant = solve_cohomological(&PeriodicFn1D::mode(2, 1.0, 0.0), &ThetaSpec::rational(1, 2));
        let resonance_ok = matches!(resonant, Err(Error::ResonantFrequency(_)));
        Ok((
            res < COHOMOLOGICAL_TOL && resonance_ok,
            format!("residual {res:.3e} on {COHOMOLOGICAL_GRID} points (tol {COHOMOLOGICAL_TOL:.0e}); theta = 1/2 gives {resonant:?}"),
        ))
    })())
}

/// 5. The generator suite on the specs where each generator applies.
pub fn generator_suite() -> CriterionResult {
    result(5, "generator suite", (|| {
        let (c4, _) = closed_nf("case4")?;
        let (c5, cert5) = closed_nf("case5")?;
        let (c6, cert6) = closed_nf("case6")?;
        let (c9, _) = closed_nf("case9")?;
        let d3 = NormalForm::Dio(dio_nf("case3")?);
        let d8 = NormalForm::Dio(dio_nf("case8")?);
        let none = ArithCertificates::default();
        let cases: Vec<(&str, NormalForm, GeneratorKind, &ArithCertificates)> = vec![
            ("sigma", NormalForm::Closed(c4), GeneratorKind::Sigma, &none),
            ("phi0", d3, GeneratorKind::Phi0, &none),
            ("flowY (dense)", d8, GeneratorKind::FlowY, &none),
            ("flowY (closed)", NormalForm::Closed(c9), GeneratorKind::FlowY, &none),
            ("chi", NormalForm::Closed(c6), GeneratorKind::Chi, &cert6),
            ("psi", NormalForm::Closed(c5), GeneratorKind::Psi, &cert5),
        ];
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, nf, kind, certs) in cases {
            let spec = nf.to_spec();
            let map = make_generator(kind, &[("s", 0.7)], &nf, certs)?;
            let chk = check_generator(&metric_coords(&spec), &spec.lattice, &map, 8);
            let pass = chk.passes(DEFECT_TOL, R_INVARIANCE_TOL);
            ok &= pass;
            parts.push(format!(
                "{label}: {} (C {:.6e}, res {:.1e}, N^2 {:.1e}, r {:.1e})",
                if pass { "ok" } else { "FAIL" },
                chk.defect.c,
                chk.defect.residual.max(chk.defect.spread),
                chk.n_squared,
                chk.r_invariance
            ));
        }
        Ok((ok, parts.join("; ")))
    })())
}

fn word(s: &AffineMapSpec, a: i64, c: &AffineMapSpec, b: i64) -> AffineMapSpec {
    s.pow(a).compose(&c.pow(b))
}

/// 6. `C(φ∘ψ) = C(φ) + C(ψ)` on random pairs.
pub fn defect_additivity() -> CriterionResult {
    result(6, "defect additivity", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let (c7, cert7) = closed_nf("case7")?;
        let m7 = metric_coords(&c7.to_spec());
        let (c9, _) = closed_nf("case9")?;
        let m9 = metric_coords(&c9.to_spec());
        let (sg, ch) = (sigma(), chi(&c7, &cert7)?.map);
        let mut worst = 0.0f64;
        for i in 0..10 {
            let (metric, f, g) = if i % 2 == 0 {
                let mut pick = || word(&sg, rng.gen_range(-2..=2), &ch, rng.gen_range(-2..=2));
                (&m7, pick(), pick())
            } else {
                let (s, t) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                (&m9, flow_y(c9.n, 0.0, s), flow_y(c9.n, 0.0, t))
            };
            let c = |m: &AffineMapSpec| affine_defect_unchecked(metric, m, 6).c;
            worst = worst.max((c(&f.compose(&g)) - c(&f) - c(&g)).abs());
        }
        Ok((worst < DEFECT_TOL, format!("10 pairs, max |C(fg) - C(f) - C(g)| = {worst:.3e} (tol {DEFECT_TOL:.0e})")))
    })())
}

/// 7. Corpus labels and the linearity of `C` along the flows.
pub fn classification() -> CriterionResult {
    result(7, "classification", (|| {
        let mut ok = true;
        let mut wrong = Vec::new();
        let mut fits = Vec::new();
        for e in CORPUS.iter() {
            let spec = e.spec()?;
            let rep = classify(&normalize_for_classification(&spec)?, &spec.arith)?;
            if rep.table2_case != e.case || rep.table1_row != e.row {
                ok = false;
                wrong.push(format!("{} got {:?}/{:?}", e.name, rep.table1_row, rep.table2_case));
            }
            if matches!(rep.table2_case, Table2Case::Case(8 | 9)) {
                let fit = rep.imc.flow.clone().ok_or_else(|| Error::InvalidSpec("flow fit missing".into()))?;
                let lin = fit.residual < FLOW_FIT_TOL && fit.slope.abs() > FLOW_FIT_TOL;
                ok &= lin;
                fits.push(format!("{} slope {:.6e} res {:.1e}", e.name, fit.slope, fit.residual));
            }
        }
        let labels = if wrong.is_empty() { format!("{} specs as labeled", CORPUS.len()) } else { wrong.join(", ") };
        Ok((ok, format!("{labels}; flows: {}", fits.join(", "))))
    })())
}

/// 8. Non-compact `Isom` comes with an isometry `χ′` of zero defect.
pub fn isom_compactness() -> CriterionResult {
    result(8, "isometry compactness", (|| {
        let mut ok = true;
        let mut parts = Vec::new();
        for e in CORPUS.iter() {
            let spec = e.spec()?;
            let rep = classify(&normalize_for_classification(&spec)?, &spec.arith)?;
            if rep.isom_compact != Compactness::NonCompact {
                continue;
            }
            match &rep.isom_witness {
                Some(w) => {
                    let pass = w.c.abs() < DEFECT_TOL && w.residual < DEFECT_TOL;
                    ok &= pass;
                    parts.push(format!("{} chi' C {:.1e} res {:.1e}", e.name, w.c, w.residual));
                }
                None => {
                    ok = false;
                    parts.push(format!("{} without witness", e.name));
                }
            }
        }
        ok &= !parts.is_empty();
        Ok((ok, parts.join("; ")))
    })())
}

/// 9. Each corpus generator stays affine along its path; `g₀` is flat.
pub fn deformation() -> CriterionResult {
    result(9, "deformation", (|| {
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mut ok = true;
        let mut worst_r0 = 0.0f64;
        let mut checked = 0;
        let mut fails = Vec::new();
        for e in CORPUS.iter() {
            let spec = e.spec()?;
            let input = normalize_for_classification(&spec)?;
            let rep = classify(&input, &spec.arith)?;
            let paths: Vec<(DeformPath, Option<AffineMapSpec>)> = match &input {
                ClassInput::Torus(s) => vec![(DeformPath::linear(s.clone()), None)],
                ClassInput::Normal(nf) if rep.generator_maps.is_empty() => vec![(DeformPath::linear(nf.to_spec()), None)],
                ClassInput::Normal(nf) => rep
                    .generator_maps
                    .iter()
                    .map(|m| Ok((path_for_generator(nf, &spec.arith, m)?, Some(m.clone()))))
                    .collect::<Result<_>>()?,
            };
            for (path, map) in paths {
                worst_r0 = worst_r0.max(r_sup(&path, 0.0)?);
                if let Some(m) = map {
                    checked += 1;
                    if let Err(err) = verify_along_path(&path, &m, &ts) {
                        ok = false;
                        fails.push(format!("{} {}: {err}", e.name, m.kind));
                    }
                }
            }
        }
        ok &= worst_r0 < FLAT_TOL;
        let f = if fails.is_empty() { String::new() } else { format!("; {}", fails.join(", ")) };
        Ok((ok, format!("{checked} generators verified at t in {ts:?}; sup |r(g_0)| = {worst_r0:.3e} (tol {FLAT_TOL:.0e}){f}")))
    })())
}

/// 10. Leaf holonomy `[[1, α], [0, 1]]` along `y ↦ y + 1`, identity along the `X`-orbit.
pub fn holonomy() -> CriterionResult {
    result(10, "holonomy", (|| {
        let mut spec = MetricSpec::flat(0, ThetaSpec::rational(0, 1), 1.0);
        spec.l2 = PeriodicFn2D::mode(0, 1, 0.0, 1.0).add_const(2.0);
        let mut worst2 = 0.0f64;
        let mut worst1 = 0.0f64;
        for z in [0.0, 0.3] {
            let alpha = -2.0 * PI * (2.0 * PI * z).cos() / (2.0 * spec.lambda);
            let expected = [[1.0, alpha], [0.0, 1.0]];
            let h2 = parallel_transport_loop(&spec, z, LeafLoop::Gamma2, TRANSPORT_STEPS)?;
            let h1 = parallel_transport_loop(&spec, z, LeafLoop::Gamma1, TRANSPORT_STEPS)?;
            for i in 0..2 {
                for j in 0..2 {
                    worst2 = worst2.max((h2[i][j] - expected[i][j]).abs());
                    worst1 = worst1.max((h1[i][j] - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        Ok((
            worst2 < HOLONOMY_TOL && worst1 < IDENTITY_TOL,
            format!("gamma_2 error {worst2:.3e} (tol {HOLONOMY_TOL:.0e}); gamma_1 error {worst1:.3e} (tol {IDENTITY_TOL:.0e})"),
        ))
    })())
}

fn closed_gap(a: &NormalFormClosed, b: &NormalFormClosed) -> f64 {
    if a.n != b.n {
        return f64::INFINITY;
    }
    [(a.lambda - b.lambda).abs(), (a.k - b.k).abs(), a.l2.sub(&b.l2).max_abs_coeff(), a.mu.sub(&b.mu).max_abs_coeff()]
        .into_iter()
        .fold(0.0, f64::max)
}

fn dio_gap(a: &NormalFormDio, b: &NormalFormDio) -> f64 {
    if a.n != b.n || !a.theta.same_as(&b.theta) {
        return f64::INFINITY;
    }
    [(a.lambda - b.lambda).abs(), (a.l - b.l).abs(), (a.k - b.k).abs(), a.mu.sub(&b.mu).max_abs_coeff()]
        .into_iter()
        .fold(0.0, f64::max)
}

fn mat_mul2(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// `M⁻¹` for `det M = ±1`.
pub fn inverse2(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] * det, -m[0][1] * det], [-m[1][0] * det, m[0][0] * det]]
}

/// 11. `ℤ`-action composition and `GL₂(ℤ)` inverse round trips.
pub fn group_laws() -> CriterionResult {
    result(11, "normal-form group laws", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
        let mut z_worst = 0.0f64;
        let mut trials = 0;
        for name in ["case4", "case5", "case6", "case9"] {
            let (nf, _) = closed_nf(name)?;
            for _ in 0..2 {
                let (a, b) = (rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3));
                let two = act_z(&act_z(&nf, a)?.nf, b)?.nf;
                let one = act_z(&nf, a + b)?.nf;
                z_worst = z_worst.max(closed_gap(&two, &one));
                trials += 1;
            }
        }
        let gens = [[[0, -1], [1, 0]], [[1, 1], [0, 1]], [[1, 0], [1, 1]]];
        let mut g_worst = 0.0f64;
        for name in ["case2", "case3", "case8"] {
            let nf = dio_nf(name)?;
            for _ in 0..2 {
                let mut m = [[1, 0], [0, 1]];
                for _ in 0..rng.gen_range(1..=3) {
                    m = mat_mul2(m, gens[rng.gen_range(0..gens.len())]);
                }
                let there = act_gl2(&nf, m)?.nf;
                let back = act_gl2(&there, inverse2(m))?.nf;
                g_worst = g_worst.max(dio_gap(&back, &nf));
                trials += 1;
            }
        }
        Ok((
            z_worst < GROUP_LAW_TOL && g_worst < GROUP_LAW_TOL,
            format!("{trials} trials; act_Z composition gap {z_worst:.3e}, act_GL2 round-trip gap {g_worst:.3e} (tol {GROUP_LAW_TOL:.0e})"),
        ))
    })())
}

/// 12. `C(σ)` from the oracle, reported next to the alternative normalizations.
pub fn sigma_constant() -> CriterionResult {
    result(12, "sigma constant", (|| {
        let (nf, _) = closed_nf("case4")?;
        let metric = metric_coords(&nf.to_spec());
        let c = |m: &AffineMapSpec| affine_defect_unchecked(&metric, m, 8).c;
        let s = sigma();
        let c1 = c(&s);
        let la = nf.lambda;
        let mut cons = (c1 - 2.0 / la).abs();
        for k in [-2i64, 2, 3] {
            cons = cons.max((c(&s.pow(k)) - k as f64 * c1).abs());
        }
        let fit = linear_fit(&[1.0, 2.0, 3.0], &[c1, c(&s.pow(2)), c(&s.pow(3))]);
        cons = cons.max(fit.intercept.abs());
        Ok((
            cons < DEFECT_TOL,
            format!(
                "oracle C(sigma) = {c1:.12e} (2/Lambda = {:.12e}); alternatives 1/Lambda = {:.12e}, 2 Lambda = {:.12e}; consistency gap {cons:.3e}",
                2.0 / la,
                1.0 / la,
                2.0 * la
            ),
        ))
    })())
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        parallel_field(),
        gauss_bonnet_identity(),
        curvature_oracle(),
        cohomological_solver(),
        generator_suite(),
        defect_additivity(),
        classification(),
        isom_compactness(),
        deformation(),
        holonomy(),
        group_laws(),
        sigma_constant(),
    ]
}
