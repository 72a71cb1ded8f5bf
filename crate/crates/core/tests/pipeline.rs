use saddle_core::asymptotics::{estimate_sinf, expand_raw, expand_rescaled};
use saddle_core::contour::zero_contours;
use saddle_core::riccati::{riccati_sn, scan};
use saddle_core::system::{normalize, normalized_to_json, parse_document, parse_system, pullback_expansion};
use saddle_core::{Error, SinfMethod, System, USeries};

const RICCATI: &str = r#"{"kind": "riccati", "a": 0.5, "b": 1.0}"#;

fn raw_of(text: &str) -> saddle_core::RawSystem {
    match parse_system(text).unwrap() {
        System::Raw(sys) => sys,
        System::Normalized(_) => panic!("expected a raw system"),
    }
}

#[test]
fn document_to_pullback_matches_direct_recursion() {
    let raw = raw_of(r#"{"kind": "raw", "a": -1.3, "f": [[2, 0, 0.4], [0, 2, 0.7], [3, 1, -0.2], [1, 3, 0.1]]}"#);
    let n = 40;
    let (norm, rec) = normalize(&raw, n).unwrap();
    assert!(norm.a() >= 2.0);
    assert_eq!(rec.q[0], 1.0);
    let tilde = expand_rescaled(&norm, n - rec.m).unwrap();
    let coeffs: Vec<f64> = tilde.phis()[2..].iter().map(|p| p.to_f64()).collect();
    let series = USeries::new(2, coeffs, n - rec.m).unwrap();
    let back = pullback_expansion(&series, &rec, n).unwrap();
    let direct = expand_raw(&raw, n);
    for k in 1..=n {
        let (x, y) = (back.coeff(k), direct.phi(k).to_f64());
        assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-12), "n = {k}: {x} vs {y}");
    }
}

#[test]
fn written_normal_form_reparses_to_the_same_expansion() {
    let raw = raw_of(RICCATI);
    let (norm, rec) = normalize(&raw, 80).unwrap();
    let text = normalized_to_json(&norm, Some(&rec));
    let (back, back_rec) = parse_document(&text).unwrap();
    let System::Normalized(back) = back else { panic!("expected a normalized system") };
    assert_eq!(back_rec.as_ref(), Some(&rec));
    let (e1, e2) = (expand_rescaled(&norm, 70).unwrap(), expand_rescaled(&back, 70).unwrap());
    for n in 4..=70 {
        assert_eq!(e1.s(n), e2.s(n));
    }
}

#[test]
fn limit_of_original_system_follows_the_record_sign() {
    let raw = raw_of(RICCATI);
    let (norm, rec) = normalize(&raw, 400).unwrap();
    let tilde = estimate_sinf(&expand_rescaled(&norm, 400).unwrap(), SinfMethod::Aitken).unwrap();
    // Raw rescaled coefficients approach the limit like 1/n.
    let long = expand_raw(&raw, 2000);
    let original = 2.0 * long.s(2000).unwrap() - long.s(1000).unwrap();
    let pulled = rec.limit_sign() * tilde.value;
    assert!((pulled - original).abs() < 1e-4 * original.abs(), "{pulled} vs {original}");
    assert!((riccati_sn(0.5, 1.0, 400).unwrap() - tilde.value * rec.limit_sign()).abs() < 1e-4);
}

#[test]
fn invalid_documents_are_rejected() {
    assert!(matches!(
        parse_system(r#"{"kind": "raw", "a": 1.0, "f": [[0, 1, 0.3]]}"#),
        Err(Error::Validation(m)) if m.contains("f[0,1]")
    ));
    assert!(matches!(
        parse_system(r#"{"kind": "normalized", "a": 0.5, "f0": [], "f2": []}"#),
        Err(Error::Validation(_))
    ));
    assert!(matches!(parse_system("{\n\"kind\": \"raw\",\n\"a\": }"), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn scan_output_is_independent_of_workers() {
    let one = scan((-4.5, 0.5), (-1.5, 1.5), 23, 17, 70, 1).unwrap();
    let many = scan((-4.5, 0.5), (-1.5, 1.5), 23, 17, 70, 5).unwrap();
    assert_eq!(one.to_csv(), many.to_csv());
    assert_eq!(one.to_pgm(), many.to_pgm());
    assert_eq!(zero_contours(&one).to_csv(), zero_contours(&many).to_csv());
}
