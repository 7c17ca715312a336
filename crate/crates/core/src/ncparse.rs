//! Text form of noncommutative polynomials.
//!
//! ```text
//! poly     := sign? term (('+' | '-') term)*
//! term     := rational ('*'? factor ('*' factor)*)? | factor ('*' factor)*
//! factor   := var adjoint? ('^' posint)? | '(' poly ')' adjoint?
//! adjoint  := '\''
//! rational := integer | integer '/' posint | decimal
//! ```
//!
//! Multiplication is always explicit; the apostrophe is the adjoint. Powers
//! expand to repeated letters.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::freealg::{NcPoly, Rational, VarContext, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    AdjointOnSelfAdjoint(String),
    ZeroDenominator,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at byte {offset}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => format!("syntax error: {msg}"),
        ParseErrorKind::UnknownVariable(v) => format!("unknown variable {v:?}"),
        ParseErrorKind::AdjointOnSelfAdjoint(v) => {
            format!("adjoint applied to self-adjoint variable {v:?}")
        }
        ParseErrorKind::ZeroDenominator => "zero denominator".to_string(),
    }
}

/// Polynomial text together with the context it is written over.
#[derive(Debug, Clone)]
pub struct PolySource<'a> {
    pub text: &'a str,
    pub context: Arc<VarContext>,
}

pub fn parse(src: &PolySource<'_>) -> Result<NcPoly, ParseError> {
    parse_poly(src.text, &src.context)
}

pub fn parse_poly(text: &str, ctx: &Arc<VarContext>) -> Result<NcPoly, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, ctx };
    p.skip_ws();
    let out = p.poly()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a single monomial such as `X1*X2` (or `1` for the empty word).
pub fn parse_word(text: &str, ctx: &Arc<VarContext>) -> Result<Word, ParseError> {
    let p = parse_poly(text, ctx)?;
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (Some((w, c)), None) if c.is_one() => Ok(w.clone()),
        _ => Err(ParseError {
            kind: ParseErrorKind::Syntax("expected a single monomial".into()),
            offset: 0,
        }),
    }
}

/// Parses a standalone rational (`3`, `-3/4`, `0.25`).
pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let ctx = Arc::new(VarContext::selfadjoint(&["_"]).expect("static context"));
    let mut p = Parser { src: text.as_bytes(), pos: 0, ctx: &ctx };
    p.skip_ws();
    let neg = p.eat(b'-');
    if !neg {
        p.eat(b'+');
    }
    p.skip_ws();
    let r = p.rational()?.ok_or_else(|| p.syntax("expected a number"))?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(if neg { -r } else { r })
}

struct Parser<'a, 'c> {
    src: &'a [u8],
    pos: usize,
    ctx: &'c Arc<VarContext>,
}

impl Parser<'_, '_> {
    fn syntax(&self, msg: &str) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax(msg.to_string()), offset: self.pos }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn poly(&mut self) -> Result<NcPoly, ParseError> {
        let mut acc = NcPoly::zero(self.ctx.clone());
        let mut negate = false;
        if self.eat(b'-') {
            negate = true;
        } else {
            self.eat(b'+');
        }
        loop {
            self.skip_ws();
            let t = self.term()?;
            acc = if negate { &acc - &t } else { &acc + &t };
            self.skip_ws();
            match self.peek() {
                Some(b'+') => negate = false,
                Some(b'-') => negate = true,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<NcPoly, ParseError> {
        let coeff = self.rational()?;
        self.skip_ws();
        let mut acc = match coeff {
            Some(c) => {
                let explicit = self.eat(b'*');
                self.skip_ws();
                if !explicit && !self.at_factor_start() {
                    return Ok(NcPoly::constant(self.ctx.clone(), c));
                }
                NcPoly::constant(self.ctx.clone(), c) * self.factor()?
            }
            None => self.factor()?,
        };
        loop {
            self.skip_ws();
            if !self.eat(b'*') {
                return Ok(acc);
            }
            self.skip_ws();
            acc = acc * self.factor()?;
        }
    }

    fn at_factor_start(&self) -> bool {
        matches!(self.peek(), Some(c) if c == b'(' || c == b'_' || c.is_ascii_alphabetic())
    }

    fn factor(&mut self) -> Result<NcPoly, ParseError> {
        if self.eat(b'(') {
            self.skip_ws();
            let inner = self.poly()?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(self.syntax("expected ')'"));
            }
            return Ok(if self.eat(b'\'') { inner.star() } else { inner });
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c == b'_' || c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return Err(self.syntax("expected a variable or '('"));
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        let var = self.ctx.index_of(name).ok_or_else(|| ParseError {
            kind: ParseErrorKind::UnknownVariable(name.to_string()),
            offset: start,
        })?;
        let adj_at = self.pos;
        let starred = self.eat(b'\'');
        let letter = self.ctx.letter(var, starred).map_err(|_| ParseError {
            kind: ParseErrorKind::AdjointOnSelfAdjoint(name.to_string()),
            offset: adj_at,
        })?;
        let mut reps = 1usize;
        if self.eat(b'^') {
            let at = self.pos;
            let digits = self.digits();
            reps = std::str::from_utf8(digits)
                .ok()
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&k| k > 0)
                .ok_or(ParseError {
                    kind: ParseErrorKind::Syntax("expected a positive exponent".into()),
                    offset: at,
                })?;
        }
        Ok(NcPoly::monomial(
            self.ctx.clone(),
            Word::from_letters(vec![letter; reps]),
            Rational::one(),
        ))
    }

    fn digits(&mut self) -> &[u8] {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn rational(&mut self) -> Result<Option<Rational>, ParseError> {
        let start = self.pos;
        let int_part = self.digits().to_vec();
        if int_part.is_empty() {
            return Ok(None);
        }
        let whole = big(&int_part);
        if self.eat(b'.') {
            let frac = self.digits().to_vec();
            if frac.is_empty() {
                return Err(self.syntax("expected digits after '.'"));
            }
            let scale = num_traits::pow(BigInt::from(10u32), frac.len());
            let num = whole * &scale + big(&frac);
            return Ok(Some(Rational::new(num, scale)));
        }
        let save = self.pos;
        self.skip_ws();
        if self.eat(b'/') {
            self.skip_ws();
            let den_at = self.pos;
            let den = self.digits().to_vec();
            if den.is_empty() {
                return Err(self.syntax("expected a denominator"));
            }
            let den = big(&den);
            if den.is_zero() {
                return Err(ParseError { kind: ParseErrorKind::ZeroDenominator, offset: den_at });
            }
            return Ok(Some(Rational::new(whole, den)));
        }
        self.pos = save;
        debug_assert!(self.pos > start);
        Ok(Some(Rational::from_integer(whole)))
    }
}

fn big(digits: &[u8]) -> BigInt {
    BigInt::parse_bytes(digits, 10).expect("ascii digits")
}

/// Reduced fraction, integers without a denominator.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Deterministic text form, terms in graded word order. Parses back to the
/// same polynomial.
pub fn print_canonical(p: &NcPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let ctx = p.context();
    let mut out = String::new();
    for (i, (w, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        if w.is_empty() {
            out.push_str(&format_rational(&mag));
        } else if mag.is_one() {
            out.push_str(&ctx.format_word(w));
        } else {
            out.push_str(&format_rational(&mag));
            out.push('*');
            out.push_str(&ctx.format_word(w));
        }
    }
    out
}
