use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::qseries::{QMonomial, QSeries};
use super::scalar::{ScalarSeries, Signature, Var};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Replaces `adag, a` by commuting `x, y`.
pub fn total_symbol(f: &QSeries) -> ScalarSeries {
    let mut out = ScalarSeries::zero(Signature::X_Y_HBAR_T, *f.caps());
    for (m, c) in f.terms() {
        out.add_term(vec![m.adag, m.a, m.hbar, m.t], c.clone());
    }
    out
}

/// Total symbol restricted to `hbar = 0`.
pub fn principal_symbol(f: &QSeries) -> ScalarSeries {
    let mut out = ScalarSeries::zero(Signature::X_Y_T, *f.caps());
    for (m, c) in f.terms().filter(|(m, _)| m.hbar == 0) {
        out.add_term(vec![m.adag, m.a, m.t], c.clone());
    }
    out
}

fn borel_factor(k: u32, inverse: bool) -> BigRational {
    let f = factorial(k);
    if inverse {
        BigRational::from_integer(f)
    } else {
        BigRational::new(BigInt::one(), f)
    }
}

/// Divides the coefficient of `hbar^k` by `k!`.
pub fn borel(f: &QSeries) -> QSeries {
    borel_q(f, false)
}

/// Multiplies the coefficient of `hbar^k` by `k!`.
pub fn borel_inverse(f: &QSeries) -> QSeries {
    borel_q(f, true)
}

fn borel_q(f: &QSeries, inverse: bool) -> QSeries {
    QSeries::from_terms(
        *f.caps(),
        f.terms()
            .map(|(m, c)| (*m, c.scale_rational(&borel_factor(m.hbar, inverse)))),
    )
}

/// Borel transform in `hbar` of a scalar series.
pub fn borel_scalar(f: &ScalarSeries) -> Result<ScalarSeries> {
    borel_s(f, false)
}

pub fn borel_inverse_scalar(f: &ScalarSeries) -> Result<ScalarSeries> {
    borel_s(f, true)
}

fn borel_s(f: &ScalarSeries, inverse: bool) -> Result<ScalarSeries> {
    let i = f
        .signature()
        .index(Var::Hbar)
        .ok_or_else(|| Error::domain("Borel transform needs an hbar variable"))?;
    ScalarSeries::from_terms(
        f.signature(),
        *f.caps(),
        f.terms()
            .map(|(e, c)| (e.clone(), c.scale_rational(&borel_factor(e[i], inverse)))),
    )
}

/// Convolution in `hbar` matching the Borel transform: `hbar^a * hbar^b`
/// contributes `a! b! / (a+b)! hbar^(a+b)`, so that `B(xy) = Bx * By`.
pub fn hbar_convolution(x: &ScalarSeries, y: &ScalarSeries) -> Result<ScalarSeries> {
    if x.signature() != y.signature() {
        return Err(Error::domain("signature mismatch in convolution"));
    }
    let sig = x.signature();
    let hi = sig
        .index(Var::Hbar)
        .ok_or_else(|| Error::domain("convolution needs an hbar variable"))?;
    let caps = x.caps().meet(y.caps());
    let mut out = ScalarSeries::zero(sig, caps);
    for (e1, c1) in x.terms() {
        for (e2, c2) in y.terms() {
            let (a, b) = (e1[hi], e2[hi]);
            let w = BigRational::new(factorial(a) * factorial(b), factorial(a + b));
            let e: Vec<u32> = e1.iter().zip(e2).map(|(p, q)| p + q).collect();
            out.add_term(e, (c1 * c2).scale_rational(&w));
        }
    }
    Ok(out)
}

/// `u o f = sum_n u_n f^n` for `u` in `(z, hbar, t)`.
///
/// `f` must not contain a bare constant: every monomial needs positive weight
/// or positive `t`-order, which makes each output coefficient a finite sum.
pub fn compose_scalar(u: &ScalarSeries, f: &QSeries) -> Result<QSeries> {
    if u.signature() != Signature::Z_HBAR_T {
        return Err(Error::domain(format!(
            "compose_scalar expects a series in (z, hbar, t), got {:?}",
            u.signature().names()
        )));
    }
    if !f.coefficient(&QMonomial::ONE).is_zero() {
        return Err(Error::domain(
            "composition not t-adically/weight-adically finite: operand has a weight-0, t-order-0 constant term",
        ));
    }
    let caps = u.caps().meet(f.caps());
    let f = f.with_caps(caps);
    let deg = u.degree_in(Var::Z)?;
    let mut out = QSeries::zero(caps);
    let mut power = QSeries::one(caps);
    for n in 0..=deg {
        if n > 0 {
            power = power.mul(&f)?;
            if power.is_zero() {
                break;
            }
        }
        let un = u.coefficient_in(Var::Z, n)?;
        for (e, c) in un.terms() {
            out = &out + &power.shift(e[1], e[2]).scale(c);
        }
        caps.guard(out.len(), "composition")?;
    }
    Ok(out)
}

/// Hermitian conjugation: `c adag^m a^n -> conj(c) adag^n a^m`.
///
/// The image of a normal-ordered monomial is again normal-ordered, so no
/// reordering is needed.
pub fn dagger(f: &QSeries) -> QSeries {
    QSeries::from_terms(
        *f.caps(),
        f.terms()
            .map(|(m, c)| (QMonomial::new(m.a, m.adag, m.hbar, m.t), c.conj())),
    )
}

/// Keeps the `adag`/`a`-free part, as a series in `(hbar, t)`.
pub fn pi_restriction(f: &QSeries) -> ScalarSeries {
    let mut out = ScalarSeries::zero(Signature::HBAR_T, *f.caps());
    for (m, c) in f.terms().filter(|(m, _)| m.is_central()) {
        out.add_term(vec![m.hbar, m.t], c.clone());
    }
    out
}

/// `P(f, g) = pi(f^dagger g)`.
pub fn pairing(f: &QSeries, g: &QSeries) -> Result<ScalarSeries> {
    Ok(pi_restriction(&dagger(f).mul(g)?))
}

/// Coefficient-wise complex conjugation on `C_hbar`.
pub fn tau(alpha: &ScalarSeries) -> ScalarSeries {
    alpha.conj()
}

/// Embeds a central series in `(hbar, t)` into the algebra.
pub fn central_to_qseries(alpha: &ScalarSeries) -> Result<QSeries> {
    if alpha.signature() != Signature::HBAR_T {
        return Err(Error::domain("expected a series in (hbar, t)"));
    }
    Ok(QSeries::from_terms(
        *alpha.caps(),
        alpha
            .terms()
            .map(|(e, c)| (QMonomial::new(0, 0, e[0], e[1]), c.clone())),
    ))
}

/// Coefficient of the constant term.
pub fn constant_term(f: &QSeries) -> Coefficient {
    f.coefficient(&QMonomial::ONE)
}
