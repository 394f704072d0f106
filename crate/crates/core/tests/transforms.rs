use lolight3::corpus;
use lolight3::model::{metric_coords, ArithCertificates};
use lolight3::normalform::{reduce_closed, reduce_diophantine, NormalForm};
use lolight3::transforms::{
    affine_defect, affine_defect_unchecked, check_generator, chi_prime, flow_y, flow_z, make_generator, normalizes_lattice, sigma,
    AffineMapSpec, GeneratorKind,
};
use lolight3::Error;
use proptest::prelude::*;

fn closed(name: &str) -> (NormalForm, ArithCertificates) {
    let spec = corpus::get(name).unwrap().spec().unwrap();
    (NormalForm::Closed(reduce_closed(&spec).unwrap().nf), spec.arith)
}

#[test]
fn kinds_parse_by_name() {
    for k in GeneratorKind::ALL {
        assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
    }
    assert!("rho".parse::<GeneratorKind>().is_err());
}

#[test]
fn sigma_defect_is_two_over_lambda() {
    let (nf, _) = closed("case4");
    let spec = nf.to_spec();
    let d = affine_defect(&metric_coords(&spec), &spec.lattice, &sigma(), 6).unwrap();
    assert!(d.is_affine(1e-10));
    assert!((d.c - 2.0 / spec.lambda).abs() < 1e-10);
}

#[test]
fn sigma_needs_closed_leaves() {
    let spec = corpus::get("case3").unwrap().spec().unwrap();
    let nf = NormalForm::Dio(reduce_diophantine(&spec).unwrap().nf);
    assert!(make_generator(GeneratorKind::Sigma, &[], &nf, &ArithCertificates::default()).is_err());
}

#[test]
fn chi_needs_certificate() {
    let (nf, _) = closed("case6");
    let r = make_generator(GeneratorKind::Chi, &[], &nf, &ArithCertificates::default());
    assert!(matches!(r, Err(Error::CertificateMissing(_))));
}

#[test]
fn chi_prime_is_an_isometry() {
    let (nf, certs) = closed("case6");
    let NormalForm::Closed(c) = &nf else { unreachable!() };
    let m = chi_prime(c, &certs).unwrap();
    let spec = nf.to_spec();
    let chk = check_generator(&metric_coords(&spec), &spec.lattice, &m, 6);
    assert!(chk.passes(1e-8, 1e-7));
    assert!(chk.defect.c.abs() < 1e-8);
}

#[test]
fn y_translation_needs_integral_shear() {
    let (nf, _) = closed("case9");
    let lattice = nf.to_spec().lattice;
    assert!(normalizes_lattice(&flow_z(0.3), &lattice).is_ok());
    assert!(normalizes_lattice(&AffineMapSpec::translation([0.0, 0.3, 0.0]), &lattice).is_err());
}

#[test]
fn generator_suite_on_corpus() {
    for (name, kind) in [("case4", GeneratorKind::Sigma), ("case5", GeneratorKind::Psi), ("case7", GeneratorKind::Chi)] {
        let (nf, certs) = closed(name);
        let spec = nf.to_spec();
        let m = make_generator(kind, &[], &nf, &certs).unwrap();
        assert!(check_generator(&metric_coords(&spec), &spec.lattice, &m, 6).passes(1e-8, 1e-7), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compose_with_inverse_is_identity(a in -3i64..4, s in -2.0f64..2.0, x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let m = sigma().pow(a).compose(&flow_y(2, 0.0, s));
        let p = [x, y, z];
        let q = m.inverse().eval(&m.eval(&p));
        for i in 0..3 {
            prop_assert!((q[i] - p[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn defect_is_additive_on_sigma_and_flows(a in -3i64..4, s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let (nf, _) = closed("case9");
        let g = metric_coords(&nf.to_spec());
        let n = nf.n();
        let c = |m: &AffineMapSpec| affine_defect_unchecked(&g, m, 4).c;
        let (f, h) = (sigma().pow(a).compose(&flow_y(n, 0.0, s)), flow_y(n, 0.0, t));
        prop_assert!((c(&f.compose(&h)) - c(&f) - c(&h)).abs() < 1e-8);
    }
}
