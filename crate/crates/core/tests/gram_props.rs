mod common;

use common::*;
use ncsos::gram::{canonical_gram, gram_space, unique_top_split, ExactGram};
use ncsos::Rational;
use num_traits::Zero;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn canonical_gram_reconstructs(p in symmetric_poly(ctx_mixed(), 4, 6), extra in 0usize..=1) {
        let d = ncsos::gram::default_half_degree(&p) + extra;
        let m = canonical_gram(&p, d).unwrap();
        prop_assert_eq!(m.reconstruct(), p);
    }

    #[test]
    fn zero_sum_perturbations_stay_in_the_family(
        p in symmetric_poly(ctx2(), 4, 5),
        picks in prop::collection::vec((any::<prop::sample::Index>(), nonzero_rational()), 1..6),
    ) {
        let d = 2;
        let space = gram_space(&p, d).unwrap();
        let mut m = canonical_gram(&p, d).unwrap();
        let n = m.n();
        let mut entries = m.entries().to_vec();
        for (ix, s) in picks {
            let multi: Vec<_> = space.constraints().iter().filter(|c| c.positions.len() >= 2).collect();
            let c = ix.get(&multi);
            // move weight between the first two entries of one equation
            let (a, wa) = (c.positions[0], c.weights[0]);
            let (b, wb) = (c.positions[1], c.weights[1]);
            let da = &s / Rational::from_integer(wa.into());
            let db = &s / Rational::from_integer(wb.into());
            for (pos, delta) in [(a, da), (b, -db)] {
                entries[pos.0 * n + pos.1] += &delta;
                if pos.0 != pos.1 {
                    entries[pos.1 * n + pos.0] += &delta;
                }
            }
        }
        m = ExactGram::from_entries(m.basis().clone(), entries).unwrap();
        prop_assert!(space.contains(&m));
        prop_assert_eq!(m.reconstruct(), p);
    }
}

#[test]
fn top_degree_words_have_one_balanced_pair() {
    for ctx in [ctx2(), ctx_mixed()] {
        for d in 1..=3 {
            let space = gram_space(&ncsos::NcPoly::zero(ctx.clone()), d).unwrap();
            let basis = space.basis();
            let mut top_words = 0;
            for g in space.groups().iter().filter(|g| g.word.len() == 2 * d) {
                let balanced: Vec<_> = g
                    .pairs
                    .iter()
                    .filter(|&&(i, j)| basis.words()[i].len() == d && basis.words()[j].len() == d)
                    .collect();
                let (u, v) = unique_top_split(&ctx, &g.word, d).unwrap();
                // pairs are stored with i <= j, so the split may sit in the mirror group
                let (i, j) = (basis.index_of(&u).unwrap(), basis.index_of(&v).unwrap());
                if i <= j {
                    assert_eq!(balanced, vec![&(i, j)]);
                } else {
                    assert!(balanced.is_empty());
                    let mirror = space.group(&ctx.star_word(&g.word)).unwrap();
                    assert!(mirror.pairs.contains(&(j, i)));
                }
                top_words += 1;
            }
            assert!(top_words > 0);
        }
    }
}

#[test]
fn every_top_word_has_exactly_one_ordered_position() {
    let ctx = ctx_mixed();
    let d = 2;
    let space = gram_space(&ncsos::NcPoly::zero(ctx.clone()), d).unwrap();
    for c in space.constraints().iter().filter(|c| c.word.len() == 2 * d) {
        let w = &c.word;
        if *w == ctx.star_word(w) {
            assert_eq!(c.multiplicity(), 1, "v* v words sit on the diagonal");
        } else {
            // the w equation and its w* mirror share one upper-triangle entry
            assert_eq!(c.positions.len(), 1);
        }
        assert!(c.target.is_zero());
    }
}
