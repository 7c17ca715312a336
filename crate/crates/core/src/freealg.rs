//! Exact arithmetic in the free *-algebra over a finite set of letters.
//!
//! Words are finite sequences of letters; a letter is a variable, possibly
//! carrying the formal adjoint mark when its variable is not self-adjoint.
//! Polynomials are finitely supported maps from words to exact rationals and
//! are always kept in graded-lexicographic order (see [`Word`]'s `Ord`).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact coefficient type.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("variable context must declare at least one variable")]
    EmptyContext,
    #[error("invalid variable name {0:?}")]
    InvalidName(String),
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("variable index {0} is out of range")]
    VarOutOfRange(usize),
    #[error("variable {0} is self-adjoint and has no separate adjoint letter")]
    StarredSelfAdjoint(String),
    #[error("operands live in different variable contexts")]
    ContextMismatch,
}

/// `true` when `s` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The set of variables a polynomial is written over, with their *-structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarContext {
    names: Vec<String>,
    selfadjoint: Vec<bool>,
}

impl VarContext {
    pub fn new<I, S>(vars: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        let mut names = Vec::new();
        let mut selfadjoint = Vec::new();
        for (name, sa) in vars {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(AlgebraError::InvalidName(name));
            }
            if names.contains(&name) {
                return Err(AlgebraError::DuplicateName(name));
            }
            names.push(name);
            selfadjoint.push(sa);
        }
        if names.is_empty() {
            return Err(AlgebraError::EmptyContext);
        }
        Ok(Self { names, selfadjoint })
    }

    /// A context where every variable is self-adjoint.
    pub fn selfadjoint(names: &[&str]) -> Result<Self, AlgebraError> {
        Self::new(names.iter().map(|n| (*n, true)))
    }

    /// Parses a declaration such as `X1,X2` or `X'`. A trailing apostrophe
    /// declares the variable as not self-adjoint.
    pub fn from_decl(decl: &str) -> Result<Self, AlgebraError> {
        let vars = decl.split(',').map(|raw| {
            let raw = raw.trim();
            match raw.strip_suffix('\'') {
                Some(name) => (name.trim().to_string(), false),
                None => (raw.to_string(), true),
            }
        });
        Self::new(vars)
    }

    /// Inverse of [`VarContext::from_decl`].
    pub fn decl(&self) -> String {
        self.names
            .iter()
            .zip(&self.selfadjoint)
            .map(|(n, sa)| if *sa { n.clone() } else { format!("{n}'") })
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn is_selfadjoint(&self, var: usize) -> bool {
        self.selfadjoint[var]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn letter(&self, var: usize, starred: bool) -> Result<Letter, AlgebraError> {
        if var >= self.names.len() {
            return Err(AlgebraError::VarOutOfRange(var));
        }
        if starred && self.selfadjoint[var] {
            return Err(AlgebraError::StarredSelfAdjoint(self.names[var].clone()));
        }
        Ok(Letter { var, starred })
    }

    /// All distinct letters, in canonical order.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(self.letter_count());
        for (var, sa) in self.selfadjoint.iter().enumerate() {
            out.push(Letter { var, starred: false });
            if !sa {
                out.push(Letter { var, starred: true });
            }
        }
        out
    }

    /// A self-adjoint variable contributes one letter, any other two.
    pub fn letter_count(&self) -> usize {
        self.selfadjoint.iter().map(|sa| if *sa { 1 } else { 2 }).sum()
    }

    pub fn star_letter(&self, l: Letter) -> Letter {
        if self.selfadjoint[l.var] {
            l
        } else {
            Letter { var: l.var, starred: !l.starred }
        }
    }

    /// Reverses the word and toggles the adjoint mark on non-self-adjoint letters.
    pub fn star_word(&self, w: &Word) -> Word {
        Word(w.0.iter().rev().map(|l| self.star_letter(*l)).collect())
    }

    pub fn format_letter(&self, l: Letter) -> String {
        if l.starred {
            format!("{}'", self.names[l.var])
        } else {
            self.names[l.var].clone()
        }
    }

    /// Product form accepted by the parser, `X1*X2`; the empty word prints as `1`.
    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.0.iter()
            .map(|l| self.format_letter(*l))
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Juxtaposed form for human-readable reports, `X1X2`.
    pub fn format_word_compact(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.0.iter().map(|l| self.format_letter(*l)).collect()
    }
}

/// A variable, possibly marked as its formal adjoint.
///
/// The derived order compares `(var, starred)`, unstarred first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub var: usize,
    pub starred: bool,
}

/// A monomial. Ordered by length first, then letter by letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded order used for printing and Gram indexing.
pub fn word_compare(a: &Word, b: &Word) -> Ordering {
    a.cmp(b)
}

/// A noncommutative polynomial with exact rational coefficients.
///
/// Invariant: no stored coefficient is zero.
#[derive(Debug, Clone)]
pub struct NcPoly {
    ctx: Arc<VarContext>,
    terms: BTreeMap<Word, Rational>,
}

impl PartialEq for NcPoly {
    fn eq(&self, other: &Self) -> bool {
        self.same_context(other) && self.terms == other.terms
    }
}

impl Eq for NcPoly {}

impl NcPoly {
    pub fn zero(ctx: Arc<VarContext>) -> Self {
        Self { ctx, terms: BTreeMap::new() }
    }

    pub fn one(ctx: Arc<VarContext>) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn constant(ctx: Arc<VarContext>, c: Rational) -> Self {
        Self::monomial(ctx, Word::empty(), c)
    }

    pub fn monomial(ctx: Arc<VarContext>, word: Word, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(word, c);
        }
        Self { ctx, terms }
    }

    /// Single letter `var` (or its adjoint).
    pub fn var(ctx: Arc<VarContext>, var: usize, starred: bool) -> Result<Self, AlgebraError> {
        let l = ctx.letter(var, starred)?;
        Ok(Self::monomial(ctx, Word(vec![l]), Rational::one()))
    }

    /// Sums repeated words and drops zero coefficients.
    pub fn from_terms<I>(ctx: Arc<VarContext>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Word, Rational)>,
    {
        let mut p = Self::zero(ctx);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn context(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn same_context(&self, other: &NcPoly) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    fn check_context(&self, other: &NcPoly) -> Result<(), AlgebraError> {
        if self.same_context(other) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub(crate) fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Terms in canonical word order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Length of the longest word, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        // graded order puts the longest words last
        self.terms.keys().next_back().map(Word::len)
    }

    /// Terms whose word has length equal to the degree.
    pub fn top_terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        let d = self.degree().unwrap_or(0);
        self.terms.iter().filter(move |(w, _)| w.len() == d)
    }

    pub fn star(&self) -> NcPoly {
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| (self.ctx.star_word(w), c.clone()))
            .collect();
        Self { ctx: self.ctx.clone(), terms }
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(w, c)| self.terms.get(&self.ctx.star_word(w)) == Some(c))
    }

    pub fn scale(&self, c: &Rational) -> NcPoly {
        if c.is_zero() {
            return Self::zero(self.ctx.clone());
        }
        let terms = self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect();
        Self { ctx: self.ctx.clone(), terms }
    }

    pub fn checked_add(&self, other: &NcPoly) -> Result<NcPoly, AlgebraError> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &NcPoly) -> Result<NcPoly, AlgebraError> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c);
        }
        Ok(out)
    }

    /// Convolution product: the coefficient of `w` is the sum of
    /// `p(u) q(v)` over all splits `w = uv`.
    pub fn checked_mul(&self, other: &NcPoly) -> Result<NcPoly, AlgebraError> {
        self.check_context(other)?;
        let mut out = Self::zero(self.ctx.clone());
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        Ok(out)
    }

    /// `g* p g`.
    pub fn conjugate_by(&self, g: &NcPoly) -> Result<NcPoly, AlgebraError> {
        g.star().checked_mul(self)?.checked_mul(g)
    }

    /// Coefficients rounded to `f64`.
    pub fn to_f64_terms(&self) -> BTreeMap<Word, f64> {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(w, c)| (w.clone(), c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Largest absolute coefficient, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&NcPoly> for &NcPoly {
            type Output = NcPoly;

            /// Panics when the operands live in different contexts; use the
            /// `checked_*` method to get an error instead.
            fn $method(self, rhs: &NcPoly) -> NcPoly {
                self.$checked(rhs).expect("polynomial context mismatch")
            }
        }

        impl $trait<NcPoly> for NcPoly {
            type Output = NcPoly;

            fn $method(self, rhs: NcPoly) -> NcPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &NcPoly {
    type Output = NcPoly;

    fn neg(self) -> NcPoly {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect();
        NcPoly { ctx: self.ctx.clone(), terms }
    }
}

impl Neg for NcPoly {
    type Output = NcPoly;

    fn neg(self) -> NcPoly {
        -&self
    }
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::ncparse::print_canonical(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ctx2() -> Arc<VarContext> {
        Arc::new(VarContext::selfadjoint(&["X1", "X2"]).unwrap())
    }

    fn w(letters: &[usize]) -> Word {
        Word(letters.iter().map(|&var| Letter { var, starred: false }).collect())
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    /// The counter-example over {X1, X2}.
    fn f(ctx: &Arc<VarContext>) -> NcPoly {
        NcPoly::from_terms(
            ctx.clone(),
            [(w(&[0, 1, 1, 0]), q(1)), (w(&[1, 0, 0, 1]), q(-1)), (w(&[]), q(1))],
        )
    }

    #[test]
    fn star_reverses_words() {
        let ctx = ctx2();
        assert_eq!(ctx.star_word(&w(&[0, 1])), w(&[1, 0]));
        assert_eq!(ctx.star_word(&Word::empty()), Word::empty());
    }

    #[test]
    fn star_toggles_adjoint_letters() {
        let ctx = VarContext::from_decl("Y'").unwrap();
        let y = ctx.letter(0, false).unwrap();
        let ys = ctx.letter(0, true).unwrap();
        let yy = Word::from_letters(vec![y, ys]);
        assert_eq!(ctx.star_word(&yy), yy);
        let single = Word::from_letters(vec![y]);
        assert_eq!(ctx.star_word(&single), Word::from_letters(vec![ys]));
    }

    #[test]
    fn context_validation() {
        assert_eq!(VarContext::from_decl(""), Err(AlgebraError::InvalidName(String::new())));
        assert!(matches!(VarContext::from_decl("X,X"), Err(AlgebraError::DuplicateName(_))));
        assert!(matches!(VarContext::from_decl("1X"), Err(AlgebraError::InvalidName(_))));
        let ctx = VarContext::from_decl("X1, Y'").unwrap();
        assert!(ctx.is_selfadjoint(0));
        assert!(!ctx.is_selfadjoint(1));
        assert_eq!(ctx.decl(), "X1,Y'");
        assert_eq!(ctx.letter_count(), 3);
        assert!(matches!(ctx.letter(0, true), Err(AlgebraError::StarredSelfAdjoint(_))));
    }

    #[test]
    fn mul_concatenates_and_telescopes() {
        let ctx = ctx2();
        let a = NcPoly::monomial(ctx.clone(), w(&[0, 1]), q(1));
        let b = NcPoly::monomial(ctx.clone(), w(&[1, 0]), q(1));
        assert_eq!(&a * &b, NcPoly::monomial(ctx.clone(), w(&[0, 1, 1, 0]), q(1)));

        let x1 = NcPoly::var(ctx.clone(), 0, false).unwrap();
        let one = NcPoly::one(ctx.clone());
        let lhs = (&one + &x1) * (&one - &x1);
        let rhs = NcPoly::from_terms(ctx.clone(), [(w(&[]), q(1)), (w(&[0, 0]), q(-1))]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn x1_f_x1_by_hand() {
        let ctx = ctx2();
        let x1 = NcPoly::var(ctx.clone(), 0, false).unwrap();
        let got = &(&x1 * &f(&ctx)) * &x1;
        let expected = NcPoly::from_terms(
            ctx.clone(),
            [
                (w(&[0, 0, 1, 1, 0, 0]), q(1)),
                (w(&[0, 1, 0, 0, 1, 0]), q(-1)),
                (w(&[0, 0]), q(1)),
            ],
        );
        assert_eq!(got, expected);
        assert_eq!(got.degree(), Some(6));
    }

    #[test]
    fn star_and_symmetry() {
        let ctx = ctx2();
        let p = NcPoly::from_terms(ctx.clone(), [(w(&[0, 1]), q(3)), (w(&[1]), q(-2))]);
        let expected = NcPoly::from_terms(ctx.clone(), [(w(&[1, 0]), q(3)), (w(&[1]), q(-2))]);
        assert_eq!(p.star(), expected);
        assert!(!p.is_symmetric());
        assert_eq!(f(&ctx).star(), f(&ctx));
        assert!(f(&ctx).is_symmetric());

        let hctx = Arc::new(VarContext::from_decl("X'").unwrap());
        let x = hctx.letter(0, false).unwrap();
        let xs = hctx.letter(0, true).unwrap();
        let h = NcPoly::from_terms(
            hctx.clone(),
            [
                (Word::from_letters(vec![x, xs]), q(1)),
                (Word::from_letters(vec![xs, x]), q(-1)),
                (Word::empty(), q(1)),
            ],
        );
        assert!(h.is_symmetric());
    }

    #[test]
    fn degree_queries() {
        let ctx = ctx2();
        assert_eq!(f(&ctx).degree(), Some(4));
        assert_eq!(NcPoly::one(ctx.clone()).degree(), Some(0));
        assert_eq!(NcPoly::zero(ctx.clone()).degree(), None);
    }

    #[test]
    fn graded_order() {
        assert_eq!(word_compare(&w(&[]), &w(&[0])), Ordering::Less);
        assert_eq!(word_compare(&w(&[0, 1]), &w(&[1, 0])), Ordering::Less);
        assert_eq!(word_compare(&w(&[1]), &w(&[0, 0])), Ordering::Less);

        // enumerate every word of length <= 2 independently, then sort
        let mut all = vec![w(&[])];
        for a in 0..2 {
            all.push(w(&[a]));
            for b in 0..2 {
                all.push(w(&[a, b]));
            }
        }
        all.sort();
        let expected = vec![
            w(&[]),
            w(&[0]),
            w(&[1]),
            w(&[0, 0]),
            w(&[0, 1]),
            w(&[1, 0]),
            w(&[1, 1]),
        ];
        assert_eq!(all, expected);
    }

    #[test]
    fn unstarred_before_starred() {
        let ctx = VarContext::from_decl("X',Y").unwrap();
        assert_eq!(
            ctx.letters(),
            vec![
                Letter { var: 0, starred: false },
                Letter { var: 0, starred: true },
                Letter { var: 1, starred: false }
            ]
        );
    }

    #[test]
    fn mixed_contexts_are_rejected() {
        let a = NcPoly::one(ctx2());
        let b = NcPoly::one(Arc::new(VarContext::selfadjoint(&["Y"]).unwrap()));
        assert_eq!(a.checked_mul(&b), Err(AlgebraError::ContextMismatch));
        assert_eq!(a.checked_add(&b), Err(AlgebraError::ContextMismatch));
    }

    #[test]
    fn zero_coefficients_never_stored() {
        let ctx = ctx2();
        let p = NcPoly::from_terms(ctx.clone(), [(w(&[0]), q(2)), (w(&[0]), q(-2))]);
        assert!(p.is_zero());
        assert!(NcPoly::monomial(ctx, w(&[1]), q(0)).is_zero());
    }
}
