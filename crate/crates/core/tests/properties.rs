use proptest::prelude::*;
use waring_core::binary::{decompose_binary, decompose_binary_avoiding, ranks_binary};
use waring_core::certify::{verify_decomposition, verify_with, VerifyOptions, DEFAULT_TOL};
use waring_core::form::random_form;
use waring_core::{parse_form, AvoidanceSet, Rational};

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn display_parses_back(seed in 0u64..10_000, n in 1usize..4, d in 1usize..7) {
        let f = random_form(seed, n, d, 20);
        prop_assume!(!f.is_zero());
        prop_assert_eq!(parse_form(&f.to_string(), n).unwrap(), f);
    }

    #[test]
    fn binary_ranks_follow_the_dichotomy(seed in 0u64..10_000, d in 2usize..11) {
        let f = random_form(seed, 2, d, 9);
        prop_assume!(!f.is_zero());
        let (b, r) = ranks_binary(&f).unwrap();
        prop_assert!(b <= d / 2 + 1);
        prop_assert!(r == b || r == d + 2 - b);
        let dec = decompose_binary(&f, seed).unwrap();
        prop_assert_eq!(dec.len(), r);
        prop_assert!(verify_decomposition(&f, &dec, DEFAULT_TOL).unwrap().valid);
    }

    #[test]
    fn open_rank_decompositions_avoid_points(seed in 0u64..10_000, d in 3usize..9) {
        let f = random_form(seed, 2, d, 9);
        prop_assume!(!f.is_zero());
        let (b, _) = ranks_binary(&f).unwrap();
        let pts = vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]];
        let x = AvoidanceSet::from_points(&pts, seed).unwrap();
        let dec = decompose_binary_avoiding(&f, &x, seed).unwrap();
        prop_assert_eq!(dec.len(), d + 2 - b);
        let opts = VerifyOptions { tol: DEFAULT_TOL, avoid: Some(&x), bound: None };
        prop_assert!(verify_with(&f, &dec, &opts).unwrap().valid);
    }
}

#[test]
fn scaling_keeps_ranks() {
    let f = parse_form("x0^5 + 3*x0^2*x1^3 - x1^5", 2).unwrap();
    let g = f.scale(&q(-7));
    assert_eq!(ranks_binary(&f).unwrap(), ranks_binary(&g).unwrap());
}
