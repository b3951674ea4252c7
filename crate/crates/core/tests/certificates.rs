use popnc_core::certificate::{
    corollary_transform, extract_certificate, problem_generators, sos_decompose, tagged_generators, verify_certificate,
    CertificateError, WeightTag,
};
use popnc_core::io::{parse_polynomial, parse_problem};
use popnc_core::poly::Polynomial;
use popnc_core::sos::{build_archimedean_check, build_membership_program, Direction, GeneratorSet, GeneratorTag};
use popnc_sdp::{solve, Settings};

const EXAMPLE31: &str = "vars: x1 x2\nobj: x1^2 + 1\nineq: 1 - x2^2\nineq: x2^2 - 1/4\nc: 2\n";

#[test]
fn square_gives_a_single_gram_entry() {
    let x2: Polynomial<f64> = parse_polynomial("x^2", &["x".to_string()]).unwrap();
    let program = build_membership_program(&x2, &GeneratorSet::new(1), 1, Direction::Feasibility).unwrap();
    let sol = solve(&program.sdp, &Settings::default()).unwrap();
    let cert = extract_certificate(&sol, &program).unwrap();
    assert_eq!(cert.sos_weights.len(), 1);
    let g = &cert.sos_weights[0].gram;
    assert!(
        g[0][0].abs() < 1e-7 && g[0][1].abs() < 1e-7 && (g[1][1] - 1.0).abs() < 1e-7,
        "{g:?}"
    );
    assert!(cert.residual < 1e-8);
    let dec = sos_decompose(&cert.sos_weights[0].gram_f64(), &cert.sos_weights[0].basis, 1, 1e-9).unwrap();
    assert_eq!(dec.squares.len(), 1);
}

#[test]
fn infeasible_solves_have_no_certificate() {
    let p = parse_problem("vars: x\nobj: x\nc: 0\n").unwrap();
    let program = build_archimedean_check(&p, 1).unwrap();
    let sol = solve(&program.sdp, &Settings::default()).unwrap();
    assert!(matches!(
        extract_certificate(&sol, &program),
        Err(CertificateError::NotOptimal(_))
    ));
}

#[test]
fn example_archimedean_certificate_has_four_weights() {
    let p = parse_problem(EXAMPLE31).unwrap();
    let program = build_archimedean_check(&p, 2).unwrap();
    let sol = solve(&program.sdp, &Settings::default()).unwrap();
    let cert = extract_certificate(&sol, &program).unwrap();
    assert!((cert.bound - 2.0).abs() < 1e-6);
    assert_eq!(cert.sos_weights.len(), 4);
    assert!(cert.residual <= 1e-6);
    let gens = tagged_generators(&GeneratorSet::from_problem(&p));
    assert!(verify_certificate(&cert, &gens, 1e-5, 1e-9).passed);
    // exact arithmetic on the float data agrees
    let exact = cert.to_rational();
    let v = verify_certificate(&exact, &problem_generators(&p), 1e-5, 0.0);
    assert!(
        (v.residual - cert.residual).abs() <= 1e-9,
        "{} vs {}",
        v.residual,
        cert.residual
    );
}

#[test]
fn solver_certificate_of_membership_transforms() {
    let p = parse_problem(EXAMPLE31).unwrap();
    let f = p.objective.to_f64();
    let gens = GeneratorSet::from_problem(&p);
    let program = build_membership_program(&f, &gens, 2, Direction::Feasibility).unwrap();
    let sol = solve(&program.sdp, &Settings::default()).unwrap();
    let cert = extract_certificate(&sol, &program).unwrap();
    let tagged = tagged_generators(&gens);
    let t = corollary_transform(&cert, &2.0, &tagged, 1e-5).unwrap();
    let kept: Vec<_> = tagged
        .into_iter()
        .filter(|(t, _)| *t != GeneratorTag::BoundGap)
        .collect();
    let v = verify_certificate(&t.certificate, &kept, 1e-5, 1e-9);
    assert!(v.passed, "{v:?}");
    assert!(t
        .certificate
        .weight(WeightTag::Generator(GeneratorTag::BoundGap))
        .is_none());
    assert_eq!(t.certificate.target, &t.one_plus_psi * &f);
}

#[test]
fn transform_without_bound_gap_weight_is_identity() {
    let p = parse_problem("vars: x\nobj: x^2\nc: 1\n").unwrap();
    let f = p.objective.to_f64();
    let program = build_membership_program(&f, &GeneratorSet::new(1), 1, Direction::Feasibility).unwrap();
    let sol = solve(&program.sdp, &Settings::default()).unwrap();
    let cert = extract_certificate(&sol, &program).unwrap();
    let t = corollary_transform(&cert, &1.0, &[], 1e-5).unwrap();
    assert_eq!(t.one_plus_psi, Polynomial::one(1));
    assert_eq!(t.certificate.sos_weights, cert.sos_weights);
}
