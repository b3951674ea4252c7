use nalgebra::DMatrix;
use proptest::prelude::*;

use popnc_core::certificate::{sos_decompose, CLIP_RELATIVE};
use popnc_core::io::parse_polynomial;
use popnc_core::poly::{basis_size, monomial_basis, Monomial, Polynomial, Rational};
use popnc_core::sos::{build_membership_program, reconstruct_identity, Direction, GeneratorSet, GeneratorTag};

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-20i32..20).prop_map(f64::from),
        -1e3f64..1e3,
        1e-9f64..1e-5,
        (1e15f64..1e18).prop_map(|v| -v),
    ]
}

fn poly_with(n: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Polynomial<f64>> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, n), coefficient()), 0..=max_terms).prop_map(
        move |terms| Polynomial::from_terms(n, terms.into_iter().map(|(e, c)| (Monomial::new(e), c))).unwrap(),
    )
}

fn poly() -> impl Strategy<Value = Polynomial<f64>> {
    (1usize..4).prop_flat_map(|n| poly_with(n, 4, 6))
}

fn rational_poly(n: usize) -> impl Strategy<Value = Polynomial<Rational>> {
    prop::collection::vec((prop::collection::vec(0u32..4, n), -50i64..50, 1i64..12), 0..6).prop_map(move |terms| {
        Polynomial::from_terms(
            n,
            terms
                .into_iter()
                .map(|(e, p, q)| (Monomial::new(e), Rational::new(p.into(), q.into()))),
        )
        .unwrap()
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_polynomials_parse_back(p in poly()) {
        let vars = names(p.num_vars());
        let text = p.display_with(&vars);
        let back: Polynomial<f64> = parse_polynomial(&text, &vars).unwrap();
        prop_assert_eq!(back, p, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_rational_polynomials_parse_back(p in rational_poly(3)) {
        let vars = names(3);
        let text = p.display_with(&vars);
        let back: Polynomial<Rational> = parse_polynomial(&text, &vars).unwrap();
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn product_evaluates_to_product_of_values(
        (p, q, x) in (1usize..4).prop_flat_map(|n| (poly_with(n, 3, 5), poly_with(n, 3, 5), point(n)))
    ) {
        let pq = &p * &q;
        let lhs = pq.evaluate(&x).unwrap();
        let rhs = p.evaluate(&x).unwrap() * q.evaluate(&x).unwrap();
        // bound on the rounding of both sides
        let scale = p.l1_norm() * q.l1_norm() * 1.5f64.powi(6).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn exact_product_evaluates_exactly(
        (p, q) in (rational_poly(2), rational_poly(2)),
        a in -5i64..5, b in 1i64..7,
    ) {
        let x = vec![Rational::new(a.into(), b.into()), Rational::new(b.into(), 3.into())];
        let pq = &p * &q;
        prop_assert_eq!(
            pq.evaluate_exact(&x).unwrap(),
            p.evaluate_exact(&x).unwrap() * q.evaluate_exact(&x).unwrap()
        );
    }

    #[test]
    fn l1_norm_is_a_norm(p in rational_poly(2), q in rational_poly(2), s in -9i64..9) {
        let s = Rational::from_integer(s.into());
        prop_assert!((&p + &q).l1_norm() <= p.l1_norm() + q.l1_norm());
        prop_assert_eq!(p.scale(&s).l1_norm(), p.l1_norm() * num_traits::Signed::abs(&s));
        prop_assert_eq!(p.l1_norm() == Rational::from_integer(0.into()), p.is_zero());
    }

    #[test]
    fn homogeneous_components_sum_back(p in rational_poly(3)) {
        let parts = p.homogeneous_components();
        let mut sum = Polynomial::zero(3);
        let mut last = None;
        for (d, h) in &parts {
            prop_assert!(h.is_homogeneous());
            prop_assert_eq!(h.degree(), *d);
            prop_assert!(last.is_none_or(|l| l < *d));
            last = Some(*d);
            sum = &sum + h;
        }
        prop_assert_eq!(sum, p.clone());
        if !p.is_zero() {
            prop_assert_eq!(p.leading_form().unwrap(), parts.last().unwrap().1.clone());
        }
    }
}

/// Random PSD matrix `B B'` with `B` of size `d x r`, plus an optional tiny
/// component that falls under the clip threshold.
fn gram() -> impl Strategy<Value = (usize, u32, DMatrix<f64>)> {
    (1usize..3, 1u32..3)
        .prop_flat_map(|(n, deg)| {
            let d = basis_size(n, deg);
            (
                Just(n),
                Just(deg),
                1..=d,
                prop::collection::vec(-2.0f64..2.0, d * d),
                prop::bool::ANY,
            )
        })
        .prop_map(|(n, deg, r, entries, tiny)| {
            let d = basis_size(n, deg);
            let b = DMatrix::from_fn(d, r, |i, j| entries[i * d + j]);
            let mut g = &b * b.transpose();
            if tiny {
                let v = DMatrix::from_fn(d, 1, |i, _| entries[(i * 7 + 3) % (d * d)]);
                g += &v * v.transpose() * 1e-10;
            }
            (n, deg, g)
        })
}

fn gram_form(g: &DMatrix<f64>, basis: &[Monomial], n: usize) -> Polynomial<f64> {
    let mut p = Polynomial::zero(n);
    for a in 0..basis.len() {
        for b in 0..basis.len() {
            p.add_term(basis[a].mul(&basis[b]), g[(a, b)]);
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn squares_reconstruct_within_reported_error((n, deg, g) in gram()) {
        let basis = monomial_basis(n, deg);
        let dec = sos_decompose(&g, &basis, n, 1e-9).unwrap();
        let sum = dec.squares.iter().fold(Polynomial::zero(n), |acc, p| &acc + &(p * p));
        let err = (&gram_form(&g, &basis, n) - &sum).l1_norm();
        prop_assert!(err <= dec.truncation_error + 1e-12 * (1.0 + g.norm()), "{} > {}", err, dec.truncation_error);
        // the bound is the clipped mass times basis norms, up to rounding
        let eig = g.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.max();
        let d = basis.len() as f64;
        let clipped: f64 = eig.eigenvalues.iter().filter(|&&l| l <= CLIP_RELATIVE * lmax).map(|l| l.abs()).sum();
        prop_assert!(dec.truncation_error <= clipped * d + 1e-10 * (1.0 + g.norm()) * d * d);
        prop_assert_eq!(dec.squares.len() + dec.clipped.len(), basis.len());
    }
}

#[derive(Debug, Clone)]
struct BuildCase {
    target: Polynomial<f64>,
    ineq: Vec<Polynomial<f64>>,
    eq: Vec<Polynomial<f64>>,
    extra: u32,
    direction: Direction,
}

fn build_case() -> impl Strategy<Value = BuildCase> {
    (1usize..3)
        .prop_flat_map(|n| {
            (
                poly_with(n, 3, 4),
                prop::collection::vec(poly_with(n, 2, 3), 0..3),
                prop::collection::vec(poly_with(n, 2, 3), 0..2),
                0u32..2,
                prop_oneof![
                    Just(Direction::MaximizeLambda),
                    Just(Direction::MinimizeLambda),
                    Just(Direction::Feasibility)
                ],
            )
        })
        .prop_map(|(target, ineq, eq, extra, direction)| BuildCase {
            target,
            ineq: ineq.into_iter().filter(|g| !g.is_zero()).collect(),
            eq: eq.into_iter().filter(|h| !h.is_zero()).collect(),
            extra,
            direction,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Each coefficient-matching row agrees with the polynomial identity
    /// rebuilt from the same variables, and block sizes follow the
    /// truncation degrees.
    #[test]
    fn builder_rows_match_the_identity(case in build_case(), seed in prop::collection::vec(-1.0f64..1.0, 4096)) {
        let n = case.target.num_vars();
        let mut gens = GeneratorSet::new(n);
        for (j, g) in case.ineq.iter().enumerate() {
            gens.push_inequality(GeneratorTag::Inequality(j), g.clone());
        }
        for (l, h) in case.eq.iter().enumerate() {
            gens.push_equality(GeneratorTag::Equality(l), h.clone());
        }
        let k = gens.min_order(&case.target) + case.extra;
        let program = match build_membership_program(&case.target, &gens, k, case.direction) {
            Ok(p) => p,
            Err(e) => {
                prop_assert!(case.target.is_zero(), "{e}");
                return Ok(());
            }
        };
        let v = gens.half_degrees();
        prop_assert_eq!(program.blocks[0].basis.len(), basis_size(n, k));
        for (b, block) in program.blocks.iter().enumerate().skip(1) {
            prop_assert_eq!(block.basis.len(), basis_size(n, k - v[b - 1]));
        }
        let w = gens.eq_degrees();
        for fb in &program.multipliers {
            prop_assert_eq!(fb.basis.len(), basis_size(n, 2 * k - w[fb.generator]));
        }
        prop_assert_eq!(program.constraint_index.clone(), monomial_basis(n, 2 * k));

        let mut next = seed.iter().cycle();
        let grams: Vec<DMatrix<f64>> = program
            .sdp
            .block_dims()
            .iter()
            .map(|&d| {
                let m = DMatrix::from_fn(d, d, |_, _| *next.next().unwrap());
                (&m + m.transpose()) * 0.5
            })
            .collect();
        let free: Vec<f64> = (0..program.sdp.num_free()).map(|_| *next.next().unwrap()).collect();
        let identity = reconstruct_identity(&program, &grams, &free);
        let ts = program.target_scale;
        for (i, con) in program.sdp.constraints().iter().enumerate() {
            let mut lhs = 0.0;
            for e in &con.form.psd {
                let x = grams[e.block][(e.row, e.col)];
                lhs += if e.row == e.col { e.value * x } else { 2.0 * e.value * x };
            }
            for &(j, a) in &con.form.free {
                lhs += a * free[j];
            }
            let m = &program.constraint_index[i];
            prop_assert!((lhs - identity.coeff(m) / ts).abs() <= 1e-9 * (1.0 + lhs.abs()), "row {}", i);
            prop_assert!((con.rhs - case.target.coeff(m) / ts).abs() <= 1e-12);
        }
        for (m, c) in identity.terms() {
            prop_assert!(program.constraint_index.contains(m) || c.abs() < 1e-12);
        }
    }
}
