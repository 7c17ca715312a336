//! Gram representations `p = V_dᵀ M V_d` over the border vector `V_d` of all
//! words of degree at most `d`.
//!
//! Entry `(i, j)` of a Gram matrix contributes to the word `b_i* b_j`, where
//! `b` is the border basis. A symmetric polynomial has a whole affine family
//! of Gram matrices; [`AffineGramSpace`] records it as one linear constraint
//! per word, and [`canonical_gram`] picks a deterministic member.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::freealg::{NcPoly, Rational, VarContext, Word};
use crate::ncparse::format_rational;
use crate::numlin::SymMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramLimits {
    pub max_degree: usize,
    pub max_size: usize,
}

impl Default for GramLimits {
    fn default() -> Self {
        Self { max_degree: 6, max_size: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GramError {
    #[error("border degree {d} exceeds the limit {limit}")]
    DegreeLimit { d: usize, limit: usize },
    #[error("border basis would have {size} words, above the limit {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("polynomial degree {degree} exceeds 2d = {}", 2 * .d)]
    DegreeTooHigh { degree: usize, d: usize },
    #[error("word length {len} is not 2d = {}", 2 * .d)]
    WrongLength { len: usize, d: usize },
}

/// Number of words of length at most `d` over `letters` letters.
pub fn border_size(letters: usize, d: usize) -> usize {
    (0..=d).fold((0usize, 1usize), |(acc, pow), _| {
        (acc.saturating_add(pow), pow.saturating_mul(letters))
    }).0
}

/// All words of degree at most `d`, in graded order.
#[derive(Debug, Clone)]
pub struct BorderBasis {
    ctx: Arc<VarContext>,
    d: usize,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl BorderBasis {
    pub fn context(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// `b_i* b_j`.
    pub fn product(&self, i: usize, j: usize) -> Word {
        self.ctx.star_word(&self.words[i]).concat(&self.words[j])
    }

    pub fn labels(&self) -> Vec<String> {
        self.words.iter().map(|w| self.ctx.format_word(w)).collect()
    }
}

pub fn border_basis(ctx: &Arc<VarContext>, d: usize) -> Result<BorderBasis, GramError> {
    border_basis_with(ctx, d, GramLimits::default())
}

pub fn border_basis_with(
    ctx: &Arc<VarContext>,
    d: usize,
    limits: GramLimits,
) -> Result<BorderBasis, GramError> {
    if d > limits.max_degree {
        return Err(GramError::DegreeLimit { d, limit: limits.max_degree });
    }
    let letters = ctx.letters();
    let size = border_size(letters.len(), d);
    if size > limits.max_size {
        return Err(GramError::SizeLimit { size, limit: limits.max_size });
    }
    // extending each level in order keeps the graded order
    let mut words = Vec::with_capacity(size);
    words.push(Word::empty());
    let mut level_start = 0;
    for _ in 0..d {
        let level_end = words.len();
        for i in level_start..level_end {
            for l in &letters {
                let mut next = words[i].letters().to_vec();
                next.push(*l);
                words.push(Word::from_letters(next));
            }
        }
        level_start = level_end;
    }
    debug_assert!(words.windows(2).all(|w| w[0] < w[1]));
    let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    Ok(BorderBasis { ctx: ctx.clone(), d, words, index })
}

/// Dense symmetric Gram matrix indexed by a border basis.
#[derive(Debug, Clone)]
pub struct GramMatrix<T> {
    basis: Arc<BorderBasis>,
    entries: Vec<T>,
}

pub type ExactGram = GramMatrix<Rational>;
pub type NumericGram = GramMatrix<f64>;

impl<T: Clone> GramMatrix<T> {
    pub fn basis(&self) -> &Arc<BorderBasis> {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n() + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// Looks an entry up by its basis words.
    pub fn entry(&self, row: &Word, col: &Word) -> Option<&T> {
        Some(self.get(self.basis.index_of(row)?, self.basis.index_of(col)?))
    }
}

impl ExactGram {
    pub fn zeros(basis: Arc<BorderBasis>) -> Self {
        let n = basis.len();
        Self { basis, entries: vec![Rational::zero(); n * n] }
    }

    /// Builds from a row-major array; fails unless exactly symmetric.
    pub fn from_entries(basis: Arc<BorderBasis>, entries: Vec<Rational>) -> Option<Self> {
        let n = basis.len();
        if entries.len() != n * n {
            return None;
        }
        let m = Self { basis, entries };
        (0..n).all(|i| (0..i).all(|j| m.get(i, j) == m.get(j, i))).then_some(m)
    }

    /// Adds `v` at `(i, j)` and at `(j, i)` (once on the diagonal).
    pub fn add_symmetric(&mut self, i: usize, j: usize, v: &Rational) {
        let n = self.n();
        self.entries[i * n + j] += v;
        if i != j {
            self.entries[j * n + i] += v;
        }
    }

    /// `Σ_{i,j} M(i,j) b_i* b_j`, exactly.
    pub fn reconstruct(&self) -> NcPoly {
        let n = self.n();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c = self.get(i, j);
                if !c.is_zero() {
                    terms.push((self.basis.product(i, j), c.clone()));
                }
            }
        }
        NcPoly::from_terms(self.basis.ctx.clone(), terms)
    }

    /// Nonzero entries as `(row word, column word, value)`, row-major.
    pub fn nonzero_entries(&self) -> Vec<(Word, Word, Rational)> {
        let n = self.n();
        let words = self.basis.words();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c = self.get(i, j);
                if !c.is_zero() {
                    out.push((words[i].clone(), words[j].clone(), c.clone()));
                }
            }
        }
        out
    }

    pub fn to_numeric(&self) -> NumericGram {
        GramMatrix {
            basis: self.basis.clone(),
            entries: self.entries.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }

    pub fn to_json(&self) -> GramJson {
        GramJson {
            mode: "exact",
            basis: self.basis.labels(),
            entries: self.entries.iter().map(|c| GramEntry::Exact(format_rational(c))).collect(),
        }
    }
}

impl NumericGram {
    pub fn from_sym(basis: Arc<BorderBasis>, m: &SymMat) -> Self {
        assert_eq!(m.n(), basis.len(), "Gram dimension");
        Self { basis, entries: m.as_matrix().as_slice().to_vec() }
    }

    pub fn to_sym(&self) -> SymMat {
        let n = self.n();
        let mut s = SymMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                s.set(i, j, *self.get(i, j));
            }
        }
        s
    }

    /// Floating-point analogue of [`ExactGram::reconstruct`].
    pub fn reconstruct(&self) -> BTreeMap<Word, f64> {
        let n = self.n();
        let mut out = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                let c = *self.get(i, j);
                if c != 0.0 {
                    *out.entry(self.basis.product(i, j)).or_insert(0.0) += c;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> GramJson {
        GramJson {
            mode: "numeric",
            basis: self.basis.labels(),
            entries: self.entries.iter().map(|c| GramEntry::Numeric(*c)).collect(),
        }
    }
}

/// `{mode, basis: [word strings], entries: row-major}`. Exact entries are
/// rational strings, numeric entries plain numbers.
#[derive(Debug, Clone, Serialize)]
pub struct GramJson {
    pub mode: &'static str,
    pub basis: Vec<String>,
    pub entries: Vec<GramEntry>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum GramEntry {
    Exact(String),
    Numeric(f64),
}

/// All basis pairs `(i, j)`, `i <= j`, producing one word `b_i* b_j`.
#[derive(Debug, Clone)]
pub struct GramGroup {
    pub word: Word,
    pub pairs: Vec<(usize, usize)>,
    pub target: Rational,
}

/// One linear equation on the upper triangle of a symmetric Gram matrix:
/// `Σ weight_k M(pos_k) = target`, where `weight` counts how many ordered
/// positions producing `word` the upper-triangle entry stands for.
#[derive(Debug, Clone)]
pub struct GramConstraint {
    pub word: Word,
    pub positions: Vec<(usize, usize)>,
    pub weights: Vec<u32>,
    pub target: Rational,
}

impl GramConstraint {
    /// Number of ordered `(a, b)` with `b_a* b_b = word`.
    pub fn multiplicity(&self) -> u32 {
        self.weights.iter().sum()
    }
}

/// Every symmetric Gram matrix of a fixed polynomial over a fixed basis.
#[derive(Debug, Clone)]
pub struct AffineGramSpace {
    basis: Arc<BorderBasis>,
    groups: Vec<GramGroup>,
    constraints: Vec<GramConstraint>,
}

impl AffineGramSpace {
    pub fn basis(&self) -> &Arc<BorderBasis> {
        &self.basis
    }

    /// Groups in graded order of their word; words absent from `p` carry
    /// target zero.
    pub fn groups(&self) -> &[GramGroup] {
        &self.groups
    }

    pub fn group(&self, w: &Word) -> Option<&GramGroup> {
        self.groups
            .binary_search_by(|g| g.word.cmp(w))
            .ok()
            .map(|i| &self.groups[i])
    }

    /// One equation per orbit `{w, w*}`; symmetric matrices satisfy the
    /// `w` and `w*` equations together.
    pub fn constraints(&self) -> &[GramConstraint] {
        &self.constraints
    }

    /// Exact membership test.
    pub fn contains(&self, m: &ExactGram) -> bool {
        self.constraints.iter().all(|c| {
            let mut s = Rational::zero();
            for (&(i, j), &wt) in c.positions.iter().zip(&c.weights) {
                s += m.get(i, j) * Rational::from_integer(wt.into());
            }
            s == c.target
        })
    }

    /// Frobenius projection of a symmetric matrix onto the family: every
    /// entry of an equation is shifted by `(target - sum) / multiplicity`.
    pub fn project(&self, m: &mut SymMat, targets: &[f64]) {
        for (c, t) in self.constraints.iter().zip(targets) {
            let sum: f64 = c
                .positions
                .iter()
                .zip(&c.weights)
                .map(|(&(i, j), &wt)| f64::from(wt) * m.get(i, j))
                .sum();
            let delta = (t - sum) / f64::from(c.multiplicity());
            if delta != 0.0 {
                for &(i, j) in &c.positions {
                    m.add_at(i, j, delta);
                }
            }
        }
    }

    pub fn float_targets(&self) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.target.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

fn check_gram_input(p: &NcPoly, d: usize) -> Result<(), GramError> {
    if !p.is_symmetric() {
        return Err(GramError::NotSymmetric);
    }
    match p.degree() {
        Some(deg) if deg > 2 * d => Err(GramError::DegreeTooHigh { degree: deg, d }),
        _ => Ok(()),
    }
}

/// `⌈deg(p)/2⌉`, zero for the zero polynomial.
pub fn default_half_degree(p: &NcPoly) -> usize {
    p.degree().map_or(0, |deg| deg.div_ceil(2))
}

pub fn gram_space(p: &NcPoly, d: usize) -> Result<AffineGramSpace, GramError> {
    gram_space_with(p, d, GramLimits::default())
}

pub fn gram_space_with(p: &NcPoly, d: usize, limits: GramLimits) -> Result<AffineGramSpace, GramError> {
    check_gram_input(p, d)?;
    let basis = Arc::new(border_basis_with(p.context(), d, limits)?);
    Ok(space_over(p, basis))
}

fn space_over(p: &NcPoly, basis: Arc<BorderBasis>) -> AffineGramSpace {
    let ctx = basis.context().clone();
    let n = basis.len();
    let mut by_word: BTreeMap<Word, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            by_word.entry(basis.product(i, j)).or_default().push((i, j));
        }
    }
    let groups: Vec<GramGroup> = by_word
        .iter()
        .map(|(w, pairs)| GramGroup { word: w.clone(), pairs: pairs.clone(), target: p.coeff(w) })
        .collect();

    // one representative per orbit {w, w*}; either side may have no
    // upper-triangle pairs of its own
    let orbits: std::collections::BTreeSet<Word> = by_word
        .keys()
        .map(|w| std::cmp::min(w.clone(), ctx.star_word(w)))
        .collect();
    let no_pairs = Vec::new();
    let mut constraints = Vec::new();
    for w in &orbits {
        let ws = ctx.star_word(w);
        let pairs = by_word.get(w).unwrap_or(&no_pairs);
        let mut positions = Vec::new();
        let mut weights = Vec::new();
        if ws == *w {
            for &(i, j) in pairs {
                positions.push((i, j));
                weights.push(if i == j { 1 } else { 2 });
            }
        } else {
            // (i, j) yields w; for the mirror group, (j, i) yields w
            positions.extend(pairs.iter().copied());
            if let Some(mirror) = by_word.get(&ws) {
                positions.extend(mirror.iter().copied());
            }
            weights.resize(positions.len(), 1);
        }
        constraints.push(GramConstraint { word: w.clone(), positions, weights, target: p.coeff(w) });
    }
    AffineGramSpace { basis, groups, constraints }
}

/// Deterministic Gram matrix of `p`: each word `w` is split as `u* v` with
/// `u` the adjoint of its first `⌊|w|/2⌋` letters, its coefficient placed at
/// `(u, v)`, and the result symmetrized.
pub fn canonical_gram(p: &NcPoly, d: usize) -> Result<ExactGram, GramError> {
    canonical_gram_with(p, d, GramLimits::default())
}

pub fn canonical_gram_with(p: &NcPoly, d: usize, limits: GramLimits) -> Result<ExactGram, GramError> {
    check_gram_input(p, d)?;
    let basis = Arc::new(border_basis_with(p.context(), d, limits)?);
    Ok(canonical_over(p, basis))
}

pub(crate) fn canonical_over(p: &NcPoly, basis: Arc<BorderBasis>) -> ExactGram {
    let ctx = basis.context().clone();
    let half = Rational::new(1.into(), 2.into());
    let mut m = ExactGram::zeros(basis.clone());
    for (w, c) in p.terms() {
        let k = w.len() / 2;
        let u = ctx.star_word(&w.prefix(k));
        let v = w.suffix_from(k);
        let i = basis.index_of(&u).expect("left half within basis");
        let j = basis.index_of(&v).expect("right half within basis");
        let share = c * &half;
        let n = m.n();
        m.entries[i * n + j] += &share;
        m.entries[j * n + i] += &share;
    }
    m
}

/// Both the Gram space and the canonical member over one shared basis.
pub fn gram_family(
    p: &NcPoly,
    d: usize,
    limits: GramLimits,
) -> Result<(AffineGramSpace, ExactGram), GramError> {
    check_gram_input(p, d)?;
    let basis = Arc::new(border_basis_with(p.context(), d, limits)?);
    Ok((space_over(p, basis.clone()), canonical_over(p, basis)))
}

/// The only split `w = u* v` with `|u| = |v| = d`.
pub fn unique_top_split(ctx: &VarContext, w: &Word, d: usize) -> Result<(Word, Word), GramError> {
    if w.len() != 2 * d {
        return Err(GramError::WrongLength { len: w.len(), d });
    }
    Ok((ctx.star_word(&w.prefix(d)), w.suffix_from(d)))
}
