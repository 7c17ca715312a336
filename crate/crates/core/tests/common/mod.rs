#![allow(dead_code)]

use std::sync::Arc;

use ncsos::{NcPoly, Rational, VarContext, Word};
use num_bigint::BigInt;
use proptest::prelude::*;

pub fn ctx2() -> Arc<VarContext> {
    Arc::new(VarContext::selfadjoint(&["X1", "X2"]).unwrap())
}

/// Two self-adjoint variables and one with a separate adjoint letter.
pub fn ctx_mixed() -> Arc<VarContext> {
    Arc::new(VarContext::from_decl("X1,X2,Y'").unwrap())
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=7).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| *r != Rational::from_integer(0.into()))
}

pub fn word(ctx: Arc<VarContext>, max_len: usize) -> impl Strategy<Value = Word> {
    let letters = ctx.letters();
    prop::collection::vec(0..letters.len(), 0..=max_len)
        .prop_map(move |ix| Word::from_letters(ix.into_iter().map(|i| letters[i]).collect()))
}

pub fn poly(ctx: Arc<VarContext>, max_len: usize, max_terms: usize) -> impl Strategy<Value = NcPoly> {
    prop::collection::vec((word(ctx.clone(), max_len), rational()), 0..=max_terms)
        .prop_map(move |terms| NcPoly::from_terms(ctx.clone(), terms))
}

pub fn nonzero_poly(ctx: Arc<VarContext>, max_len: usize, max_terms: usize) -> impl Strategy<Value = NcPoly> {
    poly(ctx, max_len, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

pub fn symmetric_poly(ctx: Arc<VarContext>, max_len: usize, max_terms: usize) -> impl Strategy<Value = NcPoly> {
    poly(ctx, max_len, max_terms).prop_map(|p| &p + &p.star())
}

pub fn f() -> NcPoly {
    ncsos::opeval::counter_example_f()
}

pub fn h() -> NcPoly {
    ncsos::opeval::counter_example_h()
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}
