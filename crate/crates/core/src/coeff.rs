//! Exact scalars in the number field `Q(i, sqrt 2)`.
//!
//! An element is stored as `r + s*i + u*sqrt2 + v*i*sqrt2` with four reduced
//! rationals. Internally products are formed as `(A + B sqrt2)(C + D sqrt2)`
//! over Gaussian rationals `A = r + s i`, `B = u + v i`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Element of `Q(i, sqrt 2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coefficient {
    r: BigRational,
    s: BigRational,
    u: BigRational,
    v: BigRational,
}

fn q_is_zero(x: &BigRational) -> bool {
    x.numer().is_zero()
}

// product of two Gaussian rationals, skipping zero parts
fn gmul(
    a: (&BigRational, &BigRational),
    b: (&BigRational, &BigRational),
) -> (BigRational, BigRational) {
    let (ar, ai) = a;
    let (br, bi) = b;
    let azr = q_is_zero(ar);
    let azi = q_is_zero(ai);
    let bzr = q_is_zero(br);
    let bzi = q_is_zero(bi);
    let mut re = BigRational::zero();
    let mut im = BigRational::zero();
    if !azr && !bzr {
        re += ar * br;
    }
    if !azi && !bzi {
        re -= ai * bi;
    }
    if !azr && !bzi {
        im += ar * bi;
    }
    if !azi && !bzr {
        im += ai * br;
    }
    (re, im)
}

impl Coefficient {
    pub fn new(r: BigRational, s: BigRational, u: BigRational, v: BigRational) -> Self {
        Coefficient { r, s, u, v }
    }

    pub fn zero() -> Self {
        Coefficient {
            r: BigRational::zero(),
            s: BigRational::zero(),
            u: BigRational::zero(),
            v: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        let mut c = Self::zero();
        c.s = BigRational::one();
        c
    }

    pub fn sqrt2() -> Self {
        let mut c = Self::zero();
        c.u = BigRational::one();
        c
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut c = Self::zero();
        c.r = r;
        c
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(BigRational::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Pure imaginary rational `x * i`.
    pub fn imag(x: BigRational) -> Self {
        let mut c = Self::zero();
        c.s = x;
        c
    }

    pub fn real_part(&self) -> &BigRational {
        &self.r
    }
    pub fn imag_part(&self) -> &BigRational {
        &self.s
    }
    pub fn sqrt2_part(&self) -> &BigRational {
        &self.u
    }
    pub fn imag_sqrt2_part(&self) -> &BigRational {
        &self.v
    }

    pub fn components(&self) -> [&BigRational; 4] {
        [&self.r, &self.s, &self.u, &self.v]
    }

    pub fn is_zero(&self) -> bool {
        q_is_zero(&self.r) && q_is_zero(&self.s) && q_is_zero(&self.u) && q_is_zero(&self.v)
    }

    pub fn is_one(&self) -> bool {
        self.r.is_one() && q_is_zero(&self.s) && q_is_zero(&self.u) && q_is_zero(&self.v)
    }

    /// True when the value is a rational number.
    pub fn is_rational(&self) -> bool {
        q_is_zero(&self.s) && q_is_zero(&self.u) && q_is_zero(&self.v)
    }

    /// Rational value, if the element is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.r)
    }

    /// Complex conjugation `i -> -i`; `sqrt 2` is fixed.
    pub fn conj(&self) -> Self {
        Coefficient {
            r: self.r.clone(),
            s: -self.s.clone(),
            u: self.u.clone(),
            v: -self.v.clone(),
        }
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::domain("division by zero coefficient"));
        }
        // x = A + B sqrt2, x^-1 = (A - B sqrt2) / (A^2 - 2 B^2)
        let a = (&self.r, &self.s);
        let b = (&self.u, &self.v);
        let (a2r, a2i) = gmul(a, a);
        let (b2r, b2i) = gmul(b, b);
        let two = BigRational::from_integer(BigInt::from(2));
        let nr = a2r - &two * b2r;
        let ni = a2i - &two * b2i;
        let den = &nr * &nr + &ni * &ni;
        let inv_r = &nr / &den;
        let inv_i = -(&ni / &den);
        let (rr, ri) = gmul((&inv_r, &inv_i), a);
        let (ur, ui) = gmul((&inv_r, &inv_i), b);
        Ok(Coefficient {
            r: rr,
            s: ri,
            u: -ur,
            v: -ui,
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, Error> {
        Ok(self * &other.inv()?)
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        if k.is_one() {
            return self.clone();
        }
        let f = |x: &BigRational| {
            if q_is_zero(x) {
                x.clone()
            } else {
                x * BigRational::from_integer(k.clone())
            }
        };
        Coefficient {
            r: f(&self.r),
            s: f(&self.s),
            u: f(&self.u),
            v: f(&self.v),
        }
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        let f = |x: &BigRational| if q_is_zero(x) { x.clone() } else { x * k };
        Coefficient {
            r: f(&self.r),
            s: f(&self.s),
            u: f(&self.u),
            v: f(&self.v),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Coefficient::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        let s2 = std::f64::consts::SQRT_2;
        Complex64::new(f(&self.r) + s2 * f(&self.u), f(&self.s) + s2 * f(&self.v))
    }

    /// Parse the four canonical rational strings of the JSON series format.
    pub fn from_parts(r: &str, i: &str, r2: &str, ir2: &str) -> Result<Self, Error> {
        Ok(Coefficient {
            r: parse_rational(r)?,
            s: parse_rational(i)?,
            u: parse_rational(r2)?,
            v: parse_rational(ir2)?,
        })
    }
}

/// Parse `"p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let t = text.trim();
    let bad = || Error::format(format!("invalid rational literal {text:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(t).map_err(|_| bad())?,
        )),
    }
}

/// Canonical string of a rational: reduced, sign on the numerator, integers bare.
pub fn rational_string(x: &BigRational) -> String {
    x.to_string()
}

impl Default for Coefficient {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::from_int(n)
    }
}

impl From<BigRational> for Coefficient {
    fn from(r: BigRational) -> Self {
        Coefficient::from_rational(r)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [
            (&self.r, ""),
            (&self.s, "i"),
            (&self.u, "sqrt2"),
            (&self.v, "i*sqrt2"),
        ];
        let mut first = true;
        for (x, unit) in parts {
            if q_is_zero(x) {
                continue;
            }
            let neg = x.is_negative();
            let mag = x.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            if unit.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{unit}")?;
            } else {
                write!(f, "({mag})*{unit}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn add(self, o: &Coefficient) -> Coefficient {
        Coefficient {
            r: &self.r + &o.r,
            s: &self.s + &o.s,
            u: &self.u + &o.u,
            v: &self.v + &o.v,
        }
    }
}

impl<'a> Sub<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn sub(self, o: &Coefficient) -> Coefficient {
        Coefficient {
            r: &self.r - &o.r,
            s: &self.s - &o.s,
            u: &self.u - &o.u,
            v: &self.v - &o.v,
        }
    }
}

impl<'a> Mul<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    fn mul(self, o: &Coefficient) -> Coefficient {
        let a = (&self.r, &self.s);
        let b = (&self.u, &self.v);
        let c = (&o.r, &o.s);
        let d = (&o.u, &o.v);
        let b_zero = q_is_zero(b.0) && q_is_zero(b.1);
        let d_zero = q_is_zero(d.0) && q_is_zero(d.1);
        let (mut r, mut s) = gmul(a, c);
        let (mut u, mut v) = (BigRational::zero(), BigRational::zero());
        if !b_zero && !d_zero {
            let (x, y) = gmul(b, d);
            r += &x + &x;
            s += &y + &y;
        }
        if !d_zero {
            let (x, y) = gmul(a, d);
            u += x;
            v += y;
        }
        if !b_zero {
            let (x, y) = gmul(b, c);
            u += x;
            v += y;
        }
        Coefficient { r, s, u, v }
    }
}

impl<'a> Div<&'a Coefficient> for &'a Coefficient {
    type Output = Coefficient;
    /// Panics on division by zero; use [`Coefficient::checked_div`] for a fallible version.
    fn div(self, o: &Coefficient) -> Coefficient {
        self.checked_div(o).expect("division by zero coefficient")
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            r: -self.r.clone(),
            s: -self.s.clone(),
            u: -self.u.clone(),
            v: -self.v.clone(),
        }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            r: -self.r,
            s: -self.s,
            u: -self.u,
            v: -self.v,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $m(self, o: Coefficient) -> Coefficient {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $m(self, o: &Coefficient) -> Coefficient {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Coefficient> for &'a Coefficient {
            type Output = Coefficient;
            fn $m(self, o: Coefficient) -> Coefficient {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, o: &Coefficient) {
        if !q_is_zero(&o.r) {
            self.r += &o.r;
        }
        if !q_is_zero(&o.s) {
            self.s += &o.s;
        }
        if !q_is_zero(&o.u) {
            self.u += &o.u;
        }
        if !q_is_zero(&o.v) {
            self.v += &o.v;
        }
    }
}

impl AddAssign for Coefficient {
    fn add_assign(&mut self, o: Coefficient) {
        *self += &o;
    }
}

impl SubAssign<&Coefficient> for Coefficient {
    fn sub_assign(&mut self, o: &Coefficient) {
        if !q_is_zero(&o.r) {
            self.r -= &o.r;
        }
        if !q_is_zero(&o.s) {
            self.s -= &o.s;
        }
        if !q_is_zero(&o.u) {
            self.u -= &o.u;
        }
        if !q_is_zero(&o.v) {
            self.v -= &o.v;
        }
    }
}

impl MulAssign<&Coefficient> for Coefficient {
    fn mul_assign(&mut self, o: &Coefficient) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: i64, s: i64, u: i64, v: i64) -> Coefficient {
        Coefficient::new(
            BigRational::from_integer(r.into()),
            BigRational::from_integer(s.into()),
            BigRational::from_integer(u.into()),
            BigRational::from_integer(v.into()),
        )
    }

    #[test]
    fn units_square_correctly() {
        assert_eq!(&Coefficient::i() * &Coefficient::i(), Coefficient::from_int(-1));
        assert_eq!(
            &Coefficient::sqrt2() * &Coefficient::sqrt2(),
            Coefficient::from_int(2)
        );
        let isq = &Coefficient::i() * &Coefficient::sqrt2();
        assert_eq!(&isq * &isq, Coefficient::from_int(-2));
    }

    #[test]
    fn inverse_roundtrip() {
        for x in [c(1, 2, 3, 4), c(0, 0, 1, 0), c(-3, 0, 0, 5), c(0, 1, 0, 0), c(7, 0, 5, 0)] {
            let y = x.inv().unwrap();
            assert!((&x * &y).is_one(), "{x} * {y}");
        }
        assert!(Coefficient::zero().inv().is_err());
    }

    #[test]
    fn conj_is_involution_and_fixes_sqrt2() {
        let x = c(1, -2, 3, 4);
        assert_eq!(x.conj().conj(), x);
        assert_eq!(Coefficient::sqrt2().conj(), Coefficient::sqrt2());
        assert_eq!(Coefficient::i().conj(), -Coefficient::i());
    }

    #[test]
    fn rational_strings_are_canonical() {
        let x = parse_rational("6/-8").unwrap();
        assert_eq!(rational_string(&x), "-3/4");
        assert_eq!(rational_string(&parse_rational("4/2").unwrap()), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(c(1, -1, 0, 0).to_string(), "1 - i");
        assert_eq!(Coefficient::ratio(-1, 2).to_string(), "-1/2");
        assert_eq!(Coefficient::zero().to_string(), "0");
    }
}
