use lolight3::classify::{
    classify, classify_spec, find_period, isom_compactness, linear_fit, normalize_for_classification, ClassInput, Compactness,
    GroupType, Table2Case,
};
use lolight3::corpus::{self, CORPUS};
use lolight3::model::{ArithCertificates, ArithClaim};
use lolight3::normalform::NormalForm;

fn closed_input(name: &str) -> (ClassInput, ArithCertificates) {
    let spec = corpus::get(name).unwrap().spec().unwrap();
    (normalize_for_classification(&spec).unwrap(), spec.arith)
}

#[test]
fn corpus_labels() {
    for e in CORPUS.iter() {
        let rep = classify_spec(&e.spec().unwrap()).unwrap();
        assert_eq!(rep.table2_case, e.case, "{}", e.name);
        assert_eq!(rep.table1_row, e.row, "{}", e.name);
    }
}

#[test]
fn missing_certificate_is_undecided() {
    let rep = classify_spec(&corpus::get("undecided").unwrap().spec().unwrap()).unwrap();
    assert!(rep.is_undecided());
    assert_eq!(rep.table2_case, Table2Case::Undecided);
    assert_eq!(rep.missing_certificates, vec!["Lcal_over_Lambda".to_string()]);
}

#[test]
fn dropping_k_certificate_is_undecided() {
    let (input, mut certs) = closed_input("case6");
    certs.k_over_lambda = None;
    let rep = classify(&input, &certs).unwrap();
    assert_eq!(rep.missing_certificates, vec!["k_over_Lambda".to_string()]);
}

#[test]
fn irrational_k_gives_z2() {
    let (input, mut certs) = closed_input("case6");
    certs.k_over_lambda = Some(ArithClaim::Irrational);
    let rep = classify(&input, &certs).unwrap();
    assert_eq!(rep.table2_case, Table2Case::Case(7));
    assert_eq!(rep.group, GroupType::Z2);
}

#[test]
fn generators_pass_their_checks() {
    for e in CORPUS.iter() {
        let rep = classify_spec(&e.spec().unwrap()).unwrap();
        for chk in &rep.generator_checks {
            assert!(chk.passes(1e-8, 1e-7), "{} {:?}", e.name, chk.kind);
        }
    }
}

#[test]
fn noncompact_cases_have_witnesses() {
    for name in ["case6", "case9_rational"] {
        let (input, certs) = closed_input(name);
        let rep = isom_compactness(&input, &certs).unwrap();
        assert_eq!(rep.value, Compactness::NonCompact, "{name}");
        let w = rep.witness.unwrap();
        assert!(w.c.abs() < 1e-8 && w.residual < 1e-8);
    }
    let (input, certs) = closed_input("case7");
    assert_eq!(isom_compactness(&input, &certs).unwrap().value, Compactness::Compact);
}

#[test]
fn period_search_prefers_largest_p() {
    let (input, _) = closed_input("case5");
    let ClassInput::Normal(NormalForm::Closed(nf)) = input else { panic!("case5 is closed") };
    let found = find_period(&nf).unwrap();
    assert_eq!((found.p, found.p_prime), (3, 0));
}

#[test]
fn flow_slopes() {
    let rep = classify_spec(&corpus::get("case8").unwrap().spec().unwrap()).unwrap();
    let fit = rep.imc.flow.unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-10 && fit.residual < 1e-10);
    let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
    assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
}

#[test]
fn report_serializes_case_labels() {
    let rep = classify_spec(&corpus::get("flat_torus").unwrap().spec().unwrap()).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    assert_eq!(v["table2_case"], "flat_torus");
    assert_eq!(v["group"], "unclassified");
    assert_eq!(v["isom_compact"], "undecided");
    let rep = classify_spec(&corpus::get("case6").unwrap().spec().unwrap()).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    assert_eq!(v["table2_case"], 6);
    assert_eq!(v["isom_compact"], false);
}
