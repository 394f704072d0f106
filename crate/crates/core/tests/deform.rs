use lolight3::corpus;
use lolight3::deform::{collinearity, deform_path, deform_spec, equivariant_path, path_for_generator, r_sup, verify_along_path, DeformPath};
use lolight3::model::metric_coords;
use lolight3::normalform::{reduce_closed, NormalForm};
use lolight3::transforms::{affine_defect, chi, sigma};
use proptest::prelude::*;

fn closed(name: &str) -> (lolight3::normalform::NormalFormClosed, lolight3::model::ArithCertificates) {
    let spec = corpus::get(name).unwrap().spec().unwrap();
    (reduce_closed(&spec).unwrap().nf, spec.arith)
}

#[test]
fn linear_path_endpoints() {
    let (nf, _) = closed("case4");
    let nf = NormalForm::Closed(nf);
    assert_eq!(deform_path(&nf, 1.0).unwrap(), nf.to_spec());
    let flat = deform_path(&nf, 0.0).unwrap();
    assert!(flat.l2.is_constant(0.0) && flat.mu.max_abs_coeff() == 0.0);
    assert!(deform_path(&nf, 1.5).is_err());
}

#[test]
fn linear_path_needs_constant_nu() {
    let spec = corpus::get("case2").unwrap().spec().unwrap();
    if !spec.nu.is_constant(1e-12) {
        assert!(deform_spec(&spec, 0.5).is_err());
    }
}

#[test]
fn equivariant_path_reproduces_metric() {
    let (nf, certs) = closed("case7");
    let c = chi(&nf, &certs).unwrap();
    let ell = c.ell;
    let path = equivariant_path(&nf, &certs, ell, c.b).unwrap();
    let (g1, g) = (path.metric(1.0).unwrap(), metric_coords(&nf.to_spec()));
    for p in [[0.0, 0.2, 0.3], [0.5, 0.9, 0.75]] {
        let (a, b) = (g1.eval(&p), g.eval(&p));
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-12);
            }
        }
    }
    let path = DeformPath::Equivariant(Box::new(path));
    assert!(r_sup(&path, 0.0).unwrap() < 1e-10);
    let ds = verify_along_path(&path, &c.map, &[0.0, 0.5, 1.0]).unwrap();
    assert!(ds.iter().all(|d| (d.c - c.c_const_mu).abs() < 1e-8));
}

#[test]
fn chi_fails_on_linear_path() {
    let (nf, certs) = closed("case7");
    let c = chi(&nf, &certs).unwrap();
    let path = DeformPath::linear(nf.to_spec());
    assert!(verify_along_path(&path, &c.map, &[0.5]).is_err());
}

#[test]
fn path_choice_follows_map_kind() {
    let (nf, certs) = closed("case6");
    let c = chi(&nf, &certs).unwrap();
    let nf = NormalForm::Closed(nf);
    assert!(matches!(path_for_generator(&nf, &certs, &c.map).unwrap(), DeformPath::Equivariant(_)));
    assert!(matches!(path_for_generator(&nf, &certs, &sigma()).unwrap(), DeformPath::Linear(_)));
}

#[test]
fn collinearity_of_line() {
    assert!(collinearity(&[0.0, 0.5, 1.0], &[1.0, 2.0, 3.0]) < 1e-15);
    assert!((collinearity(&[0.0, 0.5, 1.0], &[1.0, 3.0, 3.0]) - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sigma_stays_affine_on_linear_path(t in 0.0f64..1.0) {
        let (nf, _) = closed("case4");
        let spec = deform_spec(&nf.to_spec(), t).unwrap();
        let d = affine_defect(&metric_coords(&spec), &spec.lattice, &sigma(), 4).unwrap();
        prop_assert!(d.is_affine(1e-8));
        prop_assert!((d.c - 2.0 / spec.lambda).abs() < 1e-8);
    }

    #[test]
    fn r_scales_linearly_along_linear_path(t in 0.0f64..1.0) {
        let (nf, _) = closed("case6");
        let path = DeformPath::linear(nf.to_spec());
        let (r1, rt) = (r_sup(&path, 1.0).unwrap(), r_sup(&path, t).unwrap());
        prop_assert!(rt <= r1 + 1e-9);
    }
}
