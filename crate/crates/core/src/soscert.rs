//! Sum-of-hermitian-squares membership.
//!
//! Refutation is exact: [`top_obstruction`] reads sign patterns off the
//! top-degree part of a polynomial, which pins the corresponding Gram entries
//! in every representative. Certification is numerical: Dykstra's
//! alternating projections between the PSD cone and the affine Gram family,
//! followed by an independently re-expanded certificate.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::freealg::{AlgebraError, NcPoly, Rational, VarContext, Word};
use crate::gram::{self, gram_family, unique_top_split, GramError, GramLimits, NumericGram};
use crate::ncparse::format_rational;
use crate::numlin::{factor_psd, psd_project_with_eigen, sym_eigen, NumError, SymMat, DEFAULT_EIGEN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SosError {
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("the zero polynomial has no top-degree part")]
    ZeroPolynomial,
    #[error("conjugator list is empty or entirely zero")]
    EmptyConjugators,
    #[error("no top-degree obstruction found for the conjugated polynomial")]
    ObstructionMissing,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ObstructionKind {
    /// A top-degree word `v* v` with negative coefficient: the diagonal
    /// Gram entry at `v` is forced negative.
    NegativeTopDiagonal,
    /// Sums of hermitian squares have even degree.
    OddTopDegree,
    /// A top-degree word `u* v`, `u != v`, with nonzero coefficient while
    /// `u* u` and `v* v` are absent: a zero diagonal next to a nonzero
    /// off-diagonal entry.
    ZeroDiagonalNonzeroRow,
}

impl fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Exact proof that a polynomial is not a sum of hermitian squares.
///
/// `coefficient` is the coefficient of `top_word` in the refuted polynomial;
/// it is negative for [`ObstructionKind::NegativeTopDiagonal`]. For
/// [`ObstructionKind::OddTopDegree`] the witness word is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub kind: ObstructionKind,
    pub witness_word: Word,
    pub top_word: Word,
    pub coefficient: Rational,
}

impl Obstruction {
    pub fn describe(&self, ctx: &VarContext) -> String {
        format!(
            "{}: witness {}, coefficient {} (top word {})",
            self.kind,
            ctx.format_word_compact(&self.witness_word),
            format_rational(&self.coefficient),
            ctx.format_word_compact(&self.top_word)
        )
    }
}

/// Exact top-degree test. `Some` proves `p` is not a sum of hermitian squares.
pub fn top_obstruction(p: &NcPoly) -> Result<Option<Obstruction>, SosError> {
    if !p.is_symmetric() {
        return Err(SosError::NotSymmetric);
    }
    let deg = p.degree().ok_or(SosError::ZeroPolynomial)?;
    let ctx = p.context();
    if deg % 2 == 1 {
        let (w, c) = p.top_terms().next().expect("nonzero polynomial");
        return Ok(Some(Obstruction {
            kind: ObstructionKind::OddTopDegree,
            witness_word: Word::empty(),
            top_word: w.clone(),
            coefficient: c.clone(),
        }));
    }
    let d = deg / 2;
    for (w, c) in p.top_terms() {
        if !c.is_negative() {
            continue;
        }
        let (u, v) = unique_top_split(ctx, w, d)?;
        if u == v {
            return Ok(Some(Obstruction {
                kind: ObstructionKind::NegativeTopDiagonal,
                witness_word: v,
                top_word: w.clone(),
                coefficient: c.clone(),
            }));
        }
    }
    for (w, c) in p.top_terms() {
        let (u, v) = unique_top_split(ctx, w, d)?;
        if u == v {
            continue;
        }
        let uu = ctx.star_word(&u).concat(&u);
        let vv = ctx.star_word(&v).concat(&v);
        if p.coeff(&uu).is_zero() && p.coeff(&vv).is_zero() {
            return Ok(Some(Obstruction {
                kind: ObstructionKind::ZeroDiagonalNonzeroRow,
                witness_word: u,
                top_word: w.clone(),
                coefficient: c.clone(),
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SosOptions {
    pub accept_tol: f64,
    pub converge_tol: f64,
    pub max_iters: usize,
    pub limits: GramLimits,
}

impl Default for SosOptions {
    fn default() -> Self {
        Self { accept_tol: 1e-7, converge_tol: 1e-10, max_iters: 20_000, limits: GramLimits::default() }
    }
}

/// Polynomial with floating-point coefficients, used for extracted
/// certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly {
    terms: BTreeMap<Word, f64>,
}

impl RealPoly {
    pub fn from_terms(terms: BTreeMap<Word, f64>) -> Self {
        Self { terms: terms.into_iter().filter(|(_, c)| *c != 0.0).collect() }
    }

    pub fn terms(&self) -> &BTreeMap<Word, f64> {
        &self.terms
    }

    pub fn star(&self, ctx: &VarContext) -> RealPoly {
        Self { terms: self.terms.iter().map(|(w, c)| (ctx.star_word(w), *c)).collect() }
    }

    pub fn mul(&self, other: &RealPoly) -> RealPoly {
        let mut out = BTreeMap::new();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                *out.entry(u.concat(v)).or_insert(0.0) += a * b;
            }
        }
        Self::from_terms(out)
    }

    /// Grammar form with decimal coefficients; parses back exactly to the
    /// binary value of each `f64`.
    pub fn format(&self, ctx: &VarContext) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let sep = match (i, *c < 0.0) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            out.push_str(sep);
            let mag = c.abs();
            if w.is_empty() {
                out.push_str(&format!("{mag}"));
            } else if mag == 1.0 {
                out.push_str(&ctx.format_word(w));
            } else {
                out.push_str(&format!("{mag}*{}", ctx.format_word(w)));
            }
        }
        out
    }
}

/// Largest coefficient of `p - Σ g_i* g_i`, with the squares expanded
/// directly from the `g_i`.
pub fn certificate_residual(p: &NcPoly, gs: &[RealPoly]) -> f64 {
    let ctx = p.context();
    let mut diff: BTreeMap<Word, f64> = p.to_f64_terms();
    for g in gs {
        for (w, c) in g.star(ctx).mul(g).terms() {
            *diff.entry(w.clone()).or_insert(0.0) -= c;
        }
    }
    diff.values().fold(0.0f64, |m, c| m.max(c.abs()))
}

#[derive(Debug, Clone)]
pub enum SosResult {
    Certificate { gs: Vec<RealPoly>, gram: NumericGram, residual: f64, iterations: usize },
    NotSos { obstruction: Obstruction },
    Inconclusive { iterations: usize, final_gap: f64, min_eigenvalue: f64 },
}

impl SosResult {
    pub fn status(&self) -> &'static str {
        match self {
            SosResult::Certificate { .. } => "certificate",
            SosResult::NotSos { .. } => "not_sos",
            SosResult::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_certificate(&self) -> bool {
        matches!(self, SosResult::Certificate { .. })
    }

    pub fn is_not_sos(&self) -> bool {
        matches!(self, SosResult::NotSos { .. })
    }

    pub fn to_json(&self, ctx: &VarContext) -> SosResultJson {
        let mut j = SosResultJson {
            status: self.status(),
            gs: None,
            residual: None,
            witness_word: None,
            top_word: None,
            coefficient: None,
            kind: None,
            iterations: None,
            min_eigenvalue: None,
        };
        match self {
            SosResult::Certificate { gs, residual, iterations, .. } => {
                j.gs = Some(gs.iter().map(|g| g.format(ctx)).collect());
                j.residual = Some(*residual);
                j.iterations = Some(*iterations);
            }
            SosResult::NotSos { obstruction } => {
                j.witness_word = Some(ctx.format_word_compact(&obstruction.witness_word));
                j.top_word = Some(ctx.format_word_compact(&obstruction.top_word));
                j.coefficient = Some(format_rational(&obstruction.coefficient));
                j.kind = Some(obstruction.kind);
            }
            SosResult::Inconclusive { iterations, final_gap, min_eigenvalue } => {
                j.iterations = Some(*iterations);
                j.residual = Some(*final_gap);
                j.min_eigenvalue = Some(*min_eigenvalue);
            }
        }
        j
    }
}

/// Flat JSON view; fields that do not apply to the status are `null`.
/// For inconclusive results `residual` carries the final iterate gap.
#[derive(Debug, Clone, Serialize)]
pub struct SosResultJson {
    pub status: &'static str,
    pub gs: Option<Vec<String>>,
    pub residual: Option<f64>,
    pub witness_word: Option<String>,
    pub top_word: Option<String>,
    pub coefficient: Option<String>,
    pub kind: Option<ObstructionKind>,
    pub iterations: Option<usize>,
    pub min_eigenvalue: Option<f64>,
}

/// Decides whether `p` is a sum of hermitian squares over the border basis
/// of degree `d`.
pub fn sos_decompose(p: &NcPoly, d: usize, opts: &SosOptions) -> Result<SosResult, SosError> {
    if !p.is_symmetric() {
        return Err(SosError::NotSymmetric);
    }
    if let Some(deg) = p.degree() {
        if deg > 2 * d {
            return Err(GramError::DegreeTooHigh { degree: deg, d }.into());
        }
    }
    if p.is_zero() {
        let basis = std::sync::Arc::new(gram::border_basis_with(p.context(), d, opts.limits)?);
        let n = basis.len();
        return Ok(SosResult::Certificate {
            gs: Vec::new(),
            gram: NumericGram::from_sym(basis, &SymMat::zeros(n)),
            residual: 0.0,
            iterations: 0,
        });
    }
    if let Some(obstruction) = top_obstruction(p)? {
        return Ok(SosResult::NotSos { obstruction });
    }

    let (space, start) = gram_family(p, d, opts.limits)?;
    let basis = space.basis().clone();
    let targets = space.float_targets();

    // Dykstra: x lives in the affine family, y in the PSD cone; the cone
    // step carries the correction term.
    let mut x = start.to_numeric().to_sym();
    let mut correction = SymMat::zeros(basis.len());
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let shifted = x.add(&correction);
        let (y, _) = psd_project_with_eigen(&shifted)?;
        correction = shifted.sub(&y);
        let mut next = y;
        space.project(&mut next, &targets);
        gap = next.sub(&x).frobenius();
        x = next;
        if gap <= opts.converge_tol {
            converged = true;
            break;
        }
    }

    let min_eigenvalue = sym_eigen(&x, DEFAULT_EIGEN_TOL)?.min();
    if !converged || min_eigenvalue < -opts.accept_tol {
        return Ok(SosResult::Inconclusive { iterations, final_gap: gap, min_eigenvalue });
    }

    let factor = factor_psd(&x, opts.accept_tol)?;
    let words = basis.words();
    let gs: Vec<RealPoly> = (0..factor.cols())
        .map(|col| {
            RealPoly::from_terms(
                words.iter().enumerate().map(|(j, w)| (w.clone(), factor.get(j, col))).collect(),
            )
        })
        .collect();
    let residual = certificate_residual(p, &gs);
    if residual <= opts.accept_tol {
        Ok(SosResult::Certificate { gs, gram: NumericGram::from_sym(basis, &x), residual, iterations })
    } else {
        Ok(SosResult::Inconclusive { iterations, final_gap: gap, min_eigenvalue })
    }
}

/// `Σ g_i* p g_i`, exactly.
pub fn conjugated_poly(p: &NcPoly, gs: &[NcPoly]) -> Result<NcPoly, SosError> {
    if gs.iter().all(NcPoly::is_zero) {
        return Err(SosError::EmptyConjugators);
    }
    let mut acc = NcPoly::zero(p.context().clone());
    for g in gs {
        acc = acc.checked_add(&p.conjugate_by(g)?)?;
    }
    Ok(acc)
}

/// Exact refutation of `Σ g_i* p g_i ∈ 1 + SoS` for one conjugator tuple.
#[derive(Debug, Clone)]
pub struct ConjugationRefutation {
    pub conjugated: NcPoly,
    /// Proves `F ∉ SoS`, hence `F ∉ 1 + SoS`.
    pub obstruction: Obstruction,
    /// The same test applied to `F - 1`, when `F - 1` is nonzero.
    pub shifted: Option<Obstruction>,
}

pub fn refute_conjugation(p: &NcPoly, gs: &[NcPoly]) -> Result<ConjugationRefutation, SosError> {
    let conjugated = conjugated_poly(p, gs)?;
    if conjugated.is_zero() {
        return Err(SosError::ObstructionMissing);
    }
    let obstruction = top_obstruction(&conjugated)?.ok_or(SosError::ObstructionMissing)?;
    let shifted_poly = &conjugated - &NcPoly::one(p.context().clone());
    let shifted = if shifted_poly.is_zero() { None } else { top_obstruction(&shifted_poly)? };
    Ok(ConjugationRefutation { conjugated, obstruction, shifted })
}

/// `-Σ_i c_{i,u}²` for the coefficient of `u` in each `g_i`.
pub fn quadratic_rule(gs: &[NcPoly], u: &Word) -> Rational {
    gs.iter().fold(Rational::zero(), |acc, g| {
        let c = g.coeff(u);
        acc - &c * &c
    })
}

/// `f64` view of a rational coefficient.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
