mod common;

use common::*;
use ncsos::NcPoly;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn star_is_an_involution(p in poly(ctx_mixed(), 5, 6)) {
        prop_assert_eq!(p.star().star(), p);
    }

    #[test]
    fn star_reverses_products(p in poly(ctx_mixed(), 4, 5), q in poly(ctx_mixed(), 4, 5)) {
        prop_assert_eq!((&p * &q).star(), &q.star() * &p.star());
    }

    #[test]
    fn star_is_additive(p in poly(ctx_mixed(), 4, 5), q in poly(ctx_mixed(), 4, 5)) {
        prop_assert_eq!((&p + &q).star(), &p.star() + &q.star());
    }

    #[test]
    fn mul_is_associative(
        p in poly(ctx2(), 3, 4),
        q in poly(ctx2(), 3, 4),
        r in poly(ctx2(), 3, 4),
    ) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
    }

    #[test]
    fn mul_distributes(
        p in poly(ctx2(), 3, 4),
        q in poly(ctx2(), 3, 4),
        r in poly(ctx2(), 3, 4),
    ) {
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&(&q + &r) * &p, &(&q * &p) + &(&r * &p));
    }

    #[test]
    fn one_is_a_two_sided_unit(p in poly(ctx_mixed(), 4, 6)) {
        let one = NcPoly::one(p.context().clone());
        prop_assert_eq!(&one * &p, p.clone());
        prop_assert_eq!(&p * &one, p);
    }

    #[test]
    fn degree_is_additive(p in nonzero_poly(ctx_mixed(), 4, 5), q in nonzero_poly(ctx_mixed(), 4, 5)) {
        let prod = &p * &q;
        prop_assert_eq!(prod.degree(), Some(p.degree().unwrap() + q.degree().unwrap()));
    }

    #[test]
    fn symmetric_coefficients_match_their_star(p in symmetric_poly(ctx_mixed(), 5, 6)) {
        prop_assert!(p.is_symmetric());
        let ctx = p.context().clone();
        for (w, c) in p.terms() {
            prop_assert_eq!(&p.coeff(&ctx.star_word(w)), c);
        }
    }
}
