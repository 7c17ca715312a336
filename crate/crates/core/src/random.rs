//! Seeded generators for campaigns and property tests.
//!
//! Every task in a campaign draws from its own ChaCha stream derived from a
//! root seed, so results do not depend on scheduling order.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rand::SeedableRng;

use crate::freealg::{NcPoly, Rational, VarContext, Word};
use crate::numlin::{Matrix, SymMat};

/// Generator for task `stream` under `root`.
pub fn task_rng(root: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng
}

/// Nonzero rational `p/q` with `|p| <= 9`, `1 <= q <= 5`.
pub fn nonzero_rational<R: Rng>(rng: &mut R) -> Rational {
    let num = loop {
        let n: i64 = rng.random_range(-9..=9);
        if n != 0 {
            break n;
        }
    };
    let den: i64 = rng.random_range(1..=5);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn random_word<R: Rng>(rng: &mut R, ctx: &VarContext, len: usize) -> Word {
    let letters = ctx.letters();
    Word::from_letters((0..len).map(|_| letters[rng.random_range(0..letters.len())]).collect())
}

/// A polynomial with up to `max_terms` terms of degree at most `max_degree`.
/// May come out zero when terms cancel.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    ctx: &Arc<VarContext>,
    max_degree: usize,
    max_terms: usize,
) -> NcPoly {
    let n_terms = rng.random_range(0..=max_terms);
    let terms: Vec<_> = (0..n_terms)
        .map(|_| {
            let len = rng.random_range(0..=max_degree);
            (random_word(rng, ctx, len), nonzero_rational(rng))
        })
        .collect();
    NcPoly::from_terms(ctx.clone(), terms)
}

/// A nonzero polynomial of exactly `degree`, with at most `max_terms` terms.
pub fn random_poly_of_degree<R: Rng>(
    rng: &mut R,
    ctx: &Arc<VarContext>,
    degree: usize,
    max_terms: usize,
) -> NcPoly {
    let lead = NcPoly::monomial(ctx.clone(), random_word(rng, ctx, degree), nonzero_rational(rng));
    let mut p = lead.clone();
    let extra = rng.random_range(0..max_terms.max(1));
    for _ in 0..extra {
        let len = rng.random_range(0..=degree);
        let t = NcPoly::monomial(ctx.clone(), random_word(rng, ctx, len), nonzero_rational(rng));
        let next = &p + &t;
        if next.degree() == Some(degree) {
            p = next;
        }
    }
    p
}

/// `p + p*`, symmetric by construction.
pub fn random_symmetric_poly<R: Rng>(
    rng: &mut R,
    ctx: &Arc<VarContext>,
    max_degree: usize,
    max_terms: usize,
) -> NcPoly {
    let p = random_poly(rng, ctx, max_degree, max_terms);
    &p + &p.star()
}

/// Conjugating tuple `g_1..g_r` with `1 <= r <= max_r`, each nonzero of
/// degree at most `max_degree`.
pub fn random_conjugators<R: Rng>(
    rng: &mut R,
    ctx: &Arc<VarContext>,
    max_r: usize,
    max_degree: usize,
) -> Vec<NcPoly> {
    let r = rng.random_range(1..=max_r);
    (0..r)
        .map(|_| {
            let deg = rng.random_range(0..=max_degree);
            random_poly_of_degree(rng, ctx, deg, 4)
        })
        .collect()
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::from_vec(rows, cols, data)
}

/// `(G + Gᵀ)/2` with standard normal `G`.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> SymMat {
    let g = gaussian_matrix(rng, n, n);
    SymMat::symmetrize(&g)
}
