//! Randomized properties of representations and intertwiners.

use num_integer::Integer;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;

use skein_core::intertwiner::{
    abs_det_check, bezout, build_intertwiner, build_r_coeffs_with, check_pattern, closed_form_trace, match_variant,
    periodic_power_check, trace_bound_holds, trace_independence_check, verify_intertwining,
};
use skein_core::punctured_torus::{build_cf_rep, random_unit_triple, shadow_equations_check, structure_check};
use skein_core::quantum_torus::{MappingClass, Sign};
use skein_core::torus_rep::{classical_shadow_check, solve_invariant_characters, TorusCharacter};

fn sl2z() -> impl Strategy<Value = MappingClass> {
    let gens = [
        MappingClass::new(0, -1, 1, 0).unwrap(),
        MappingClass::new(1, 1, 0, 1).unwrap(),
        MappingClass::new(1, -1, 0, 1).unwrap(),
        MappingClass::new(1, 0, 1, 1).unwrap(),
    ];
    prop::collection::vec(0usize..4, 0..8).prop_filter_map("entries too large", move |word| {
        let m = word.iter().fold(MappingClass::identity(), |acc, &g| acc.mul(&gens[g]));
        m.entries().iter().all(|e| e.abs() <= 8).then_some(m)
    })
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn odd_n() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 9, 11, 15])
}

/// A mapping class with an isolated invariant character on the given branch.
fn instance() -> impl Strategy<Value = (MappingClass, TorusCharacter, u64)> {
    (sl2z(), sign(), -3i64..=3, -3i64..=3, odd_n()).prop_filter_map("no isolated character", |(a, s, k1, k2, n)| {
        let (p1, p2) = solve_invariant_characters(&a, s, (k1, k2)).angles()?;
        let chi = TorusCharacter::new(p1, p2, s);
        (chi.ring_order(n) <= 4000).then_some((a, chi, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solved_characters_are_invariant(a in sl2z(), s in sign(), k1 in -5i64..=5, k2 in -5i64..=5) {
        if let Some((p1, p2)) = solve_invariant_characters(&a, s, (k1, k2)).angles() {
            prop_assert!(TorusCharacter::new(p1, p2, s).is_invariant(&a));
        }
    }

    #[test]
    fn classical_shadow(
        n in prop::sample::select(vec![3u64, 5, 7, 9]),
        x in -6i64..=6,
        y in -6i64..=6,
        p1 in -6i64..=6,
        p2 in -6i64..=6,
        den in 1i64..=6,
        s in sign(),
    ) {
        prop_assume!(x.gcd(&y) == 1);
        let chi = TorusCharacter::new(Rational64::new(p1, den), Rational64::new(p2, den), s);
        prop_assert!(classical_shadow_check(n, &chi, x, y).unwrap());
    }

    #[test]
    fn intertwiner_invariants((a, chi, n) in instance()) {
        let res = build_intertwiner(&a, &chi.lift(n).unwrap()).unwrap();
        prop_assert!(verify_intertwining(&res));
        prop_assert!(check_pattern(&res));
        prop_assert!(!res.index_shift_flipped);
        let sq = res.trace_exact().abs_sq();
        prop_assert!(trace_bound_holds(&sq, n, res.n_prime()));
        prop_assert!(abs_det_check(&res).unwrap().ok);
    }

    #[test]
    fn closed_form_agrees((a, chi, n) in instance()) {
        prop_assume!(a.b.gcd(&(n as i64)) == 1);
        let (s1, s2) = chi.s_values(&a).unwrap();
        let (_, r, _) = bezout(a.b, n as i64);
        let forms = closed_form_trace(&a, n, s1, s2, r, chi.sign).unwrap();
        let trace = build_intertwiner(&a, &chi.lift(n).unwrap()).unwrap().trace_exact();
        let (variant, _) = match_variant(&trace, &forms, chi.sign).expect("some variant matches");
        prop_assert_eq!(forms.get(variant).abs_sq(), trace.abs_sq());
    }

    #[test]
    fn r_coefficients_do_not_depend_on_bezout_pair((a, chi, n) in instance(), j in -3i64..=3) {
        let lift = chi.lift(n).unwrap();
        let ni = n as i64;
        let (m, r, s) = bezout(a.b, ni);
        let base = build_r_coeffs_with(&a, &lift, r, s, m).unwrap();
        let alt = build_r_coeffs_with(&a, &lift, r + ni / m * j, s - a.b / m * j, m).unwrap();
        let canon = |v: &[Option<skein_core::cyclotomic::RootOfUnity>]| {
            v.iter().map(|z| z.map(|z| z.minimal())).map(|z| z.map(|z| (z.order(), z.exponent()))).collect::<Vec<_>>()
        };
        prop_assert_eq!(canon(&base.values), canon(&alt.values));
    }

    #[test]
    fn trace_is_lift_independent((a, chi, n) in instance()) {
        prop_assert!(trace_independence_check(&a, n, &chi, &[(0, 0), (1, 2), (-2, 1)]).unwrap());
    }

    #[test]
    fn periodic_powers_are_scalar((a, chi, n) in instance()) {
        prop_assume!(a.is_periodic() && !a.is_identity() && !a.neg().is_identity());
        let res = build_intertwiner(&a, &chi.lift(n).unwrap()).unwrap();
        let p = periodic_power_check(&a, &res).unwrap();
        prop_assert!(p.is_scalar && p.unit_modulus);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chekhov_fock_structure(seed in any::<u64>(), n in prop::sample::select(vec![3u64, 5, 7])) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let [r1, r2, r3] = random_unit_triple(n, &mut rng);
        let rep = build_cf_rep(n, r1, r2, r3).unwrap();
        prop_assert!(structure_check(&rep).unwrap().ok());
        prop_assert!(shadow_equations_check(&rep).unwrap().ok());
    }
}
