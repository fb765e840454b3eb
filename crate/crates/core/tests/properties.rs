mod common;

use common::*;
use ksreduce::cli::format::{format_coeff, format_operator};
use ksreduce::cli::parse::{parse_coeff, parse_operator};
use ksreduce::ksfib::{descend, is_in_centralizer, is_projectable, project, pullback};
use ksreduce::opalgebra::{Chart, Coeff, DiffOp};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn commutator_with_function_drops_degree(d in operator(Chart::R4, 3, 2, false), f in poly_coeff(Chart::R4, 2)) {
        let c = d.commutator(&DiffOp::multiplication(f)).unwrap();
        if d.degree() == 0 {
            prop_assert!(c.is_zero());
        } else {
            prop_assert!(c.is_zero() || c.degree() < d.degree());
        }
    }

    #[test]
    fn commutator_bilinear_antisymmetric(
        a in operator(Chart::R4, 2, 2, true),
        b in operator(Chart::R4, 2, 2, true),
        c in operator(Chart::R4, 2, 2, true),
        s in rational(),
    ) {
        let ab = a.commutator(&b).unwrap();
        prop_assert_eq!(&ab, &-&b.commutator(&a).unwrap());
        let lhs = a.commutator(&(&b + &c.scale(&s))).unwrap();
        let rhs = &ab + &a.commutator(&c).unwrap().scale(&s);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_identity(
        a in operator(Chart::R3, 2, 2, true),
        b in operator(Chart::R3, 2, 2, true),
        c in operator(Chart::R3, 2, 2, true),
    ) {
        let t1 = a.commutator(&b.commutator(&c).unwrap()).unwrap();
        let t2 = b.commutator(&c.commutator(&a).unwrap()).unwrap();
        let t3 = c.commutator(&a.commutator(&b).unwrap()).unwrap();
        prop_assert!((&(&t1 + &t2) + &t3).is_zero());
    }

    #[test]
    fn composition_matches_application(
        a in operator(Chart::R4, 2, 2, true),
        b in operator(Chart::R4, 2, 2, true),
        f in coeff(Chart::R4, 3, true, 1),
    ) {
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(ab.apply(&f).unwrap(), a.apply(&b.apply(&f).unwrap()).unwrap());
    }

    #[test]
    fn canonical_form_is_idempotent(f in coeff(Chart::R4, 4, true, 3), n in 0u32..3) {
        let again = Coeff::from_parts(f.chart(), f.numerator().clone(), f.radical_denominator_power());
        prop_assert_eq!(&again, &f);
        // multiplying numerator and denominator by R^(2n) changes nothing
        let lifted = &f * &Coeff::radical_pow(Chart::R4, 2 * n as i32);
        prop_assert_eq!(lifted.div_radical_pow(2 * n as i32), f);
    }

    #[test]
    fn pullback_is_a_ring_homomorphism(f in coeff(Chart::R3, 3, true, 2), g in coeff(Chart::R3, 3, true, 2)) {
        let (pf, pg) = (pullback(&f).unwrap(), pullback(&g).unwrap());
        prop_assert_eq!(pullback(&(&f + &g)).unwrap(), &pf + &pg);
        prop_assert_eq!(pullback(&(&f * &g)).unwrap(), &pf * &pg);
        prop_assert_eq!(pullback(&Coeff::one(Chart::R3)).unwrap(), Coeff::one(Chart::R4));
    }

    #[test]
    fn descend_inverts_pullback(f in coeff(Chart::R3, 6, true, 3)) {
        prop_assert_eq!(descend(&pullback(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn projection_is_compatible_with_pullback(d in projectable_operator(), f in coeff(Chart::R3, 4, true, 1)) {
        prop_assume!(f.numerator().max_degree() <= d.degree() + 2);
        let p = project(&d).unwrap();
        prop_assert_eq!(pullback(&p.apply(&f).unwrap()).unwrap(), d.apply(&pullback(&f).unwrap()).unwrap());
    }

    #[test]
    fn operators_round_trip_through_text(d in operator(Chart::R4, 3, 3, true), e in operator(Chart::R3, 3, 3, true)) {
        prop_assert_eq!(parse_operator(&format_operator(&d), Chart::R4).unwrap(), d);
        prop_assert_eq!(parse_operator(&format_operator(&e), Chart::R3).unwrap(), e);
    }

    #[test]
    fn coefficients_round_trip_through_text(f in coeff(Chart::R3, 4, true, 3)) {
        prop_assert_eq!(parse_coeff(&format_coeff(&f), Chart::R3).unwrap(), f);
    }

    #[test]
    fn centralizer_elements_are_projectable(d in centralizer_operator()) {
        prop_assert!(is_in_centralizer(&d).unwrap());
        prop_assert!(is_projectable(&d).unwrap());
    }
}
