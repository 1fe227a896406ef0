//! Expression language for operators and symbols.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := signed (('*' | '/') signed)*
//! signed := '-' signed | factor
//! factor := atom ['^' uint]
//! atom   := number | symbol | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-q^2` is `-(q^2)`. Juxtaposition
//! is rejected: in a non-commutative algebra `q p` and `qp` must never be
//! guessed at. `/` needs a right operand that elaborates to a nonzero scalar.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use qmorse_core::milnor::{Family, PlanePoly};
use qmorse_core::{Caps, Coefficient, QMonomial, QSeries, Weight};

/// Deepest accepted nesting of parentheses and unary minus.
pub const MAX_DEPTH: usize = 200;
/// Largest accepted literal exponent.
pub const MAX_POWER: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

fn expected_suffix(e: &[&'static str]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", e.join(", "))
    }
}

/// Sums and products are n-ary so long flat inputs do not nest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(BigRational),
    Sym { name: String, offset: usize },
    Neg(Box<Expr>),
    /// `(negated, operand)` pairs.
    Sum(Vec<(bool, Expr)>),
    /// First operand, then `(divide, operand, operator offset)`.
    Product(Box<Expr>, Vec<(bool, Expr, usize)>),
    Pow { base: Box<Expr>, exp: u32, offset: usize },
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{r}"),
            Expr::Sym { name, .. } => write!(f, "{name}"),
            Expr::Neg(x) => write!(f, "(-{x})"),
            Expr::Sum(xs) => {
                write!(f, "(")?;
                for (k, (neg, x)) in xs.iter().enumerate() {
                    match (k, neg) {
                        (0, false) => write!(f, "{x}")?,
                        (0, true) => write!(f, "-{x}")?,
                        (_, false) => write!(f, " + {x}")?,
                        (_, true) => write!(f, " - {x}")?,
                    }
                }
                write!(f, ")")
            }
            Expr::Product(first, rest) => {
                write!(f, "({first}")?;
                for (div, x, _) in rest {
                    write!(f, " {} {x}", if *div { '/' } else { '*' })?;
                }
                write!(f, ")")
            }
            Expr::Pow { base, exp, .. } => write!(f, "{base}^{exp}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(r, _) => format!("number {r}"),
        Tok::Ident(s) => format!("symbol '{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn err(offset: usize, message: impl Into<String>, expected: &[&'static str]) -> ParseError {
    ParseError {
        offset,
        message: message.into(),
        expected: expected.to_vec(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_end = i;
            let mut frac = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac = &text[fs..i];
                if int_end == start && frac.is_empty() {
                    return Err(err(start, "malformed number", &["digit"]));
                }
            }
            let int_part = &text[start..int_end];
            let digits = format!("{int_part}{frac}");
            let n: BigInt = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse().map_err(|_| err(start, "malformed number", &["digit"]))?
            };
            let d = num_traits::pow(BigInt::from(10), frac.len());
            let is_int = i == int_end;
            out.push((Tok::Num(BigRational::new(n, d), is_int), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(err(
                start,
                format!("unexpected character {ch:?}"),
                &["number", "symbol", "'('", "'-'"],
            ));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

const AFTER_OPERAND: &[&str] = &["'+'", "'-'", "'*'", "'/'", "'^'", "')'", "end of input"];
const OPERAND: &[&str] = &["number", "symbol", "'('", "'-'"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.offset(), "expression nested too deeply", &[]));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.term()?;
        let mut parts = vec![(false, first)];
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            parts.push((neg, self.term()?));
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part").1
        } else {
            Expr::Sum(parts)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let first = self.signed()?;
        let mut rest = Vec::new();
        loop {
            let div = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                Tok::Num(..) | Tok::Ident(_) | Tok::LParen => {
                    return Err(err(
                        self.offset(),
                        "implicit multiplication not allowed; write '*' between factors",
                        AFTER_OPERAND,
                    ))
                }
                _ => break,
            };
            let (_, offset) = self.bump();
            rest.push((div, self.signed()?, offset));
        }
        Ok(if rest.is_empty() {
            first
        } else {
            Expr::Product(Box::new(first), rest)
        })
    }

    fn signed(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            self.enter()?;
            let inner = self.signed()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, offset) = self.bump();
        let at = self.offset();
        match self.bump().0 {
            Tok::Num(r, true) => {
                let exp = r
                    .to_integer()
                    .try_into()
                    .ok()
                    .filter(|&e: &u32| e <= MAX_POWER)
                    .ok_or_else(|| {
                        err(at, format!("exponent exceeds the limit {MAX_POWER}"), &[])
                    })?;
                if *self.peek() == Tok::Caret {
                    return Err(err(
                        self.offset(),
                        "chained powers are ambiguous; use parentheses",
                        &["'+'", "'-'", "'*'", "'/'", "')'", "end of input"],
                    ));
                }
                Ok(Expr::Pow {
                    base: Box::new(base),
                    exp,
                    offset,
                })
            }
            other => Err(err(
                at,
                format!("exponent must be a non-negative integer literal, found {}", describe(&other)),
                &["non-negative integer"],
            )),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(r, _) => Ok(Expr::Num(r)),
            Tok::Ident(name) => Ok(Expr::Sym { name, offset }),
            Tok::LParen => {
                self.enter()?;
                let inner = self.expr()?;
                self.depth -= 1;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (Tok::Num(..) | Tok::Ident(_) | Tok::LParen, at) => Err(err(
                        at,
                        "implicit multiplication not allowed; write '*' between factors",
                        AFTER_OPERAND,
                    )),
                    (other, at) => Err(err(
                        at,
                        format!("unclosed '(' opened at byte {offset}, found {}", describe(&other)),
                        &["')'", "'+'", "'-'", "'*'", "'/'"],
                    )),
                }
            }
            other => Err(err(offset, format!("unexpected {}", describe(&other)), OPERAND)),
        }
    }
}

/// Parses `text` per the grammar in the module docs.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => Err(err(p.offset(), "unmatched ')'", &["'+'", "'-'", "'*'", "'/'", "end of input"])),
        other => Err(err(
            p.offset(),
            format!("unexpected {}", describe(other)),
            AFTER_OPERAND,
        )),
    }
}

/// Errors of elaboration into a concrete value.
#[derive(Debug, Error)]
pub enum ElabError {
    #[error("unknown symbol '{name}' at byte {offset}; allowed: {allowed}")]
    UnknownSymbol {
        name: String,
        offset: usize,
        allowed: String,
    },
    #[error("division at byte {offset}: divisor must be a nonzero scalar constant")]
    BadDivisor { offset: usize },
    #[error(transparent)]
    Core(#[from] qmorse_core::Error),
}

/// Caps generous enough that elaborating a polynomial drops nothing.
pub fn unbounded_caps() -> Caps {
    Caps::new(u32::MAX / 4, Weight::from_halves(u32::MAX / 4))
}

const OPERATOR_SYMBOLS: &str = "q, p, a, ad, adag, hbar, t, i, sqrt2";

/// Elaborates into a normal-ordered series; multiplication keeps operand order.
pub fn elaborate(e: &Expr, caps: Caps) -> Result<QSeries, ElabError> {
    let scalar = |c: Coefficient| QSeries::constant(c, caps);
    Ok(match e {
        Expr::Num(r) => scalar(Coefficient::from_rational(r.clone())),
        Expr::Sym { name, offset } => match name.as_str() {
            "q" => QSeries::q(caps),
            "p" => QSeries::p(caps),
            "a" => QSeries::a(caps),
            "ad" | "adag" => QSeries::adag(caps),
            "hbar" => QSeries::hbar(caps),
            "t" => QSeries::t(caps),
            "i" => scalar(Coefficient::i()),
            "sqrt2" => scalar(Coefficient::sqrt2()),
            _ => {
                return Err(ElabError::UnknownSymbol {
                    name: name.clone(),
                    offset: *offset,
                    allowed: OPERATOR_SYMBOLS.into(),
                })
            }
        },
        Expr::Neg(x) => -&elaborate(x, caps)?,
        Expr::Sum(parts) => {
            let mut acc = QSeries::zero(caps);
            for (neg, x) in parts {
                let v = elaborate(x, caps)?;
                acc = if *neg { &acc - &v } else { &acc + &v };
            }
            acc
        }
        Expr::Product(first, rest) => {
            let mut acc = elaborate(first, caps)?;
            for (div, x, offset) in rest {
                let v = elaborate(x, caps)?;
                if *div {
                    let c = v.coefficient(&QMonomial::ONE);
                    if v.len() != 1 || c.is_zero() {
                        return Err(ElabError::BadDivisor { offset: *offset });
                    }
                    acc = acc.scale(&c.inv()?);
                } else {
                    acc = acc.mul(&v)?;
                }
            }
            acc
        }
        Expr::Pow { base, exp, .. } => elaborate(base, caps)?.pow(*exp)?,
    })
}

/// Commutative polynomial in `x, y` and named parameters.
#[derive(Clone, Debug, PartialEq)]
struct CPoly {
    terms: BTreeMap<Vec<u32>, Coefficient>,
}

impl CPoly {
    fn constant(c: Coefficient, n: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; n], c);
        }
        CPoly { terms }
    }

    fn var(k: usize, n: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        CPoly {
            terms: BTreeMap::from([(e, Coefficient::one())]),
        }
    }

    fn add_scaled(&self, o: &CPoly, k: &Coefficient) -> CPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            let slot = out.terms.entry(e.clone()).or_insert_with(Coefficient::zero);
            *slot = &*slot + &(c * k);
            if slot.is_zero() {
                out.terms.remove(e);
            }
        }
        out
    }

    fn mul(&self, o: &CPoly) -> CPoly {
        let mut out = CPoly {
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            for (f, d) in &o.terms {
                let g: Vec<u32> = e.iter().zip(f).map(|(a, b)| a + b).collect();
                let single = CPoly {
                    terms: BTreeMap::from([(g, c * d)]),
                };
                out = out.add_scaled(&single, &Coefficient::one());
            }
        }
        out
    }

    fn as_constant(&self) -> Option<Coefficient> {
        match self.terms.len() {
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|&d| d == 0).then(|| c.clone())
            }
            _ => None,
        }
    }
}

/// Elaborates a commutative symbol `F(x, y) + sum_j lambda_j G_j(x, y)`.
///
/// `x` may be written `q` and `y` may be written `p`. Each parameter must
/// enter linearly.
pub fn elaborate_family(e: &Expr, params: &[String]) -> Result<Family, ElabError> {
    let n = 2 + params.len();
    let poly = elaborate_commutative(e, params, n)?;
    let mut base = PlanePoly::zero();
    let mut directions = vec![PlanePoly::zero(); params.len()];
    for (exps, c) in &poly.terms {
        let lam: u32 = exps[2..].iter().sum();
        match lam {
            0 => base.add_term(exps[0], exps[1], c.clone()),
            1 => {
                let j = exps[2..].iter().position(|&d| d == 1).expect("one parameter");
                directions[j].add_term(exps[0], exps[1], c.clone());
            }
            _ => {
                return Err(ElabError::Core(qmorse_core::Error::domain(
                    "parameters must enter the family linearly",
                )))
            }
        }
    }
    Ok(Family { base, directions })
}

fn elaborate_commutative(e: &Expr, params: &[String], n: usize) -> Result<CPoly, ElabError> {
    let rec = |x: &Expr| elaborate_commutative(x, params, n);
    let one = Coefficient::one();
    Ok(match e {
        Expr::Num(r) => CPoly::constant(Coefficient::from_rational(r.clone()), n),
        Expr::Sym { name, offset } => match name.as_str() {
            "x" | "q" => CPoly::var(0, n),
            "y" | "p" => CPoly::var(1, n),
            "i" => CPoly::constant(Coefficient::i(), n),
            "sqrt2" => CPoly::constant(Coefficient::sqrt2(), n),
            other => match params.iter().position(|s| s == other) {
                Some(j) => CPoly::var(2 + j, n),
                None => {
                    let mut allowed = vec!["x", "y", "q", "p", "i", "sqrt2"];
                    allowed.extend(params.iter().map(String::as_str));
                    return Err(ElabError::UnknownSymbol {
                        name: name.clone(),
                        offset: *offset,
                        allowed: allowed.join(", "),
                    });
                }
            },
        },
        Expr::Neg(x) => CPoly::constant(Coefficient::zero(), n).add_scaled(&rec(x)?, &-&one),
        Expr::Sum(parts) => {
            let mut acc = CPoly::constant(Coefficient::zero(), n);
            for (neg, x) in parts {
                acc = acc.add_scaled(&rec(x)?, &if *neg { -&one } else { one.clone() });
            }
            acc
        }
        Expr::Product(first, rest) => {
            let mut acc = rec(first)?;
            for (div, x, offset) in rest {
                let v = rec(x)?;
                if *div {
                    let d = v
                        .as_constant()
                        .filter(|c| !c.is_zero())
                        .ok_or(ElabError::BadDivisor { offset: *offset })?;
                    acc = CPoly::constant(Coefficient::zero(), n).add_scaled(&acc, &d.inv()?);
                } else {
                    acc = acc.mul(&v);
                }
            }
            acc
        }
        Expr::Pow { base, exp, .. } => {
            let b = rec(base)?;
            let mut acc = CPoly::constant(Coefficient::one(), n);
            for _ in 0..*exp {
                acc = acc.mul(&b);
            }
            acc
        }
    })
}

/// Parses and elaborates in one step.
pub fn parse_qseries(text: &str, caps: Caps) -> Result<QSeries, crate::CliError> {
    let e = parse_expr(text)?;
    Ok(elaborate(&e, caps)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str) -> QSeries {
        elaborate(&parse_expr(text).unwrap(), unbounded_caps()).unwrap()
    }

    #[test]
    fn harmonic_from_text() {
        let c = unbounded_caps();
        let expect = &QSeries::monomial(1, 1, 0, 0, c).scale(&Coefficient::from_int(2)) + &QSeries::hbar(c);
        assert_eq!(q("p^2+q^2"), expect);
    }

    #[test]
    fn coefficients_and_division() {
        let c = unbounded_caps();
        let expect = QSeries::monomial(1, 1, 1, 0, c).scale(&(&Coefficient::i() * &Coefficient::ratio(1, 2)));
        assert_eq!(q("(i/2)*hbar*ad*a"), expect);
        assert_eq!(q("3/4*ad"), QSeries::adag(c).scale(&Coefficient::ratio(3, 4)));
        assert_eq!(q("0.25*a"), QSeries::a(c).scale(&Coefficient::ratio(1, 4)));
    }

    #[test]
    fn commutator_text() {
        let c = unbounded_caps();
        assert_eq!(q("p*q-q*p"), QSeries::hbar(c).scale(&-&Coefficient::i()));
        assert_eq!(q("ad*a"), QSeries::monomial(1, 1, 0, 0, c));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(q("-q^2"), -&q("q^2"));
        assert_eq!(q("2*-q"), q("-2*q"));
        assert_eq!(q("--a"), q("a"));
    }

    #[test]
    fn implicit_multiplication_rejected() {
        let e = parse_expr("q p").unwrap_err();
        assert!(e.message.contains("implicit multiplication not allowed"));
        assert_eq!(e.offset, 2);
        let e = parse_expr("2q").unwrap_err();
        assert!(e.message.contains("implicit multiplication"));
        let e = parse_expr("(q)(p)").unwrap_err();
        assert!(e.message.contains("implicit multiplication"));
    }

    #[test]
    fn error_positions_and_expectations() {
        let e = parse_expr("q + ").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.contains(&"number"));
        let e = parse_expr("q^x").unwrap_err();
        assert_eq!(e.offset, 2);
        assert_eq!(e.expected, vec!["non-negative integer"]);
        assert!(parse_expr("q^1.5").is_err());
        assert!(parse_expr("q^2^3").is_err());
        let e = parse_expr("(q + p").unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(parse_expr("q)").is_err());
        let e = parse_expr("q $ p").unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(parse_expr("").is_err());
        assert!(parse_expr("q^1000").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let text = format!("{}q{}", "(".repeat(10_000), ")".repeat(10_000));
        assert!(parse_expr(&text).unwrap_err().message.contains("nested"));
        assert!(parse_expr(&"-".repeat(10_000)).is_err());
    }

    #[test]
    fn elaboration_errors() {
        let e = parse_expr("z*q").unwrap();
        assert!(matches!(elaborate(&e, unbounded_caps()), Err(ElabError::UnknownSymbol { offset: 0, .. })));
        let e = parse_expr("q/p").unwrap();
        assert!(matches!(elaborate(&e, unbounded_caps()), Err(ElabError::BadDivisor { offset: 1 })));
        let e = parse_expr("q/(1-1)").unwrap();
        assert!(elaborate(&e, unbounded_caps()).is_err());
    }

    #[test]
    fn families() {
        let params = vec!["l1".to_string(), "l2".to_string()];
        let f = elaborate_family(&parse_expr("p^2 + q^4 + l1*q + l2*q^2").unwrap(), &params).unwrap();
        assert_eq!(f.base.coefficient(0, 2), Coefficient::one());
        assert_eq!(f.base.coefficient(4, 0), Coefficient::one());
        assert_eq!(f.directions[0], PlanePoly::x());
        assert_eq!(f.directions[1], PlanePoly::monomial(2, 0, Coefficient::one()));
        let bad = elaborate_family(&parse_expr("y^2 + l1^2*x").unwrap(), &params[..1]);
        assert!(bad.is_err());
        // commutative: q*p == p*q in the symbol
        let a = elaborate_family(&parse_expr("q*p").unwrap(), &[]).unwrap();
        let b = elaborate_family(&parse_expr("p*q").unwrap(), &[]).unwrap();
        assert_eq!(a, b);
    }
}
