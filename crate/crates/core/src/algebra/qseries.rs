//! Truncated normal-ordered series in `(adag, a, hbar, t)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;

use super::caps::{Caps, Weight};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// `(adag)^adag a^a hbar^hbar t^t`, always read in normal order.
///
/// The same key is reused for the `q`/`p` ordered views, where `adag` is the
/// exponent of the left letter and `a` the exponent of the right letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QMonomial {
    pub adag: u32,
    pub a: u32,
    pub hbar: u32,
    pub t: u32,
}

impl QMonomial {
    pub const ONE: QMonomial = QMonomial::new(0, 0, 0, 0);

    pub const fn new(adag: u32, a: u32, hbar: u32, t: u32) -> Self {
        QMonomial { adag, a, hbar, t }
    }

    /// Twice the weight `(m + n)/2 + k`.
    pub const fn weight_halves(&self) -> u32 {
        self.adag + self.a + 2 * self.hbar
    }

    pub fn weight(&self) -> Weight {
        Weight::from_halves(self.weight_halves())
    }

    pub const fn is_central(&self) -> bool {
        self.adag == 0 && self.a == 0
    }

    pub const fn is_diagonal(&self) -> bool {
        self.adag == self.a
    }

    pub fn exponents(&self) -> [u32; 4] {
        [self.adag, self.a, self.hbar, self.t]
    }
}

pub(crate) type TermMap = BTreeMap<QMonomial, Coefficient>;

/// How a right letter passes a left letter: `right * left = left * right + c hbar`.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub(crate) enum Contraction {
    /// `c = 1`, the relation `[a, adag] = hbar`.
    Unit,
    Scaled(Coefficient),
}

impl Contraction {
    fn powers(&self, n: u32) -> Vec<Coefficient> {
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut acc = Coefficient::one();
        for _ in 0..=n {
            out.push(acc.clone());
            if let Contraction::Scaled(c) = self {
                acc = &acc * c;
            }
        }
        out
    }
}

/// Accumulates `sign * lhs * rhs` into `acc`, keeping only terms with at least
/// `min_j` contractions and removing `min_j` powers of `hbar` from each.
#[allow(clippy::too_many_arguments)]
pub(crate) fn accumulate_product(
    acc: &mut HashMap<QMonomial, Coefficient>,
    lhs: &TermMap,
    rhs: &TermMap,
    contraction: &Contraction,
    caps: &Caps,
    min_j: u32,
    negate: bool,
    what: &str,
) -> Result<()> {
    let max_n = lhs.keys().map(|m| m.a).max().unwrap_or(0);
    let max_m = rhs.keys().map(|m| m.adag).max().unwrap_or(0);
    let cpow = contraction.powers(max_n.min(max_m));
    let wcap = caps.weight_cap.halves();
    for (x, cx) in lhs {
        for (y, cy) in rhs {
            let t = x.t + y.t;
            if t > caps.t_cap {
                continue;
            }
            let jmax = x.a.min(y.adag);
            if jmax < min_j {
                continue;
            }
            // every contraction keeps the weight; dividing by hbar^min_j lowers it
            let w = x.weight_halves() + y.weight_halves();
            if w < 2 * min_j || w - 2 * min_j > wcap {
                continue;
            }
            let base = cx * cy;
            let mut factor = BigInt::one();
            for j in 0..=jmax {
                if j >= min_j {
                    let mono = QMonomial {
                        adag: x.adag + y.adag - j,
                        a: x.a + y.a - j,
                        hbar: x.hbar + y.hbar + j - min_j,
                        t,
                    };
                    let mut c = base.scale_int(&factor);
                    if j > 0 {
                        if let Contraction::Scaled(_) = contraction {
                            c = &c * &cpow[j as usize];
                        }
                    }
                    let entry = acc.entry(mono).or_insert_with(Coefficient::zero);
                    if negate {
                        *entry -= &c;
                    } else {
                        *entry += &c;
                    }
                }
                // C(n, j+1) C(m, j+1) (j+1)! from C(n, j) C(m, j) j!
                factor = factor * BigInt::from(x.a - j) * BigInt::from(y.adag - j)
                    / BigInt::from(j + 1);
            }
        }
        caps.guard(acc.len(), what)?;
    }
    Ok(())
}

pub(crate) fn collect(acc: HashMap<QMonomial, Coefficient>) -> TermMap {
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Element of the truncated algebra `Q{t}`: a sparse normal-ordered sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    terms: TermMap,
    caps: Caps,
}

impl QSeries {
    pub fn zero(caps: Caps) -> Self {
        QSeries {
            terms: TermMap::new(),
            caps,
        }
    }

    pub fn one(caps: Caps) -> Self {
        Self::constant(Coefficient::one(), caps)
    }

    pub fn constant(c: Coefficient, caps: Caps) -> Self {
        Self::term(QMonomial::ONE, c, caps)
    }

    pub fn term(mono: QMonomial, c: Coefficient, caps: Caps) -> Self {
        let mut s = Self::zero(caps);
        s.add_term(mono, c);
        s
    }

    pub fn monomial(adag: u32, a: u32, hbar: u32, t: u32, caps: Caps) -> Self {
        Self::term(QMonomial::new(adag, a, hbar, t), Coefficient::one(), caps)
    }

    pub fn adag(caps: Caps) -> Self {
        Self::monomial(1, 0, 0, 0, caps)
    }

    pub fn a(caps: Caps) -> Self {
        Self::monomial(0, 1, 0, 0, caps)
    }

    pub fn hbar(caps: Caps) -> Self {
        Self::monomial(0, 0, 1, 0, caps)
    }

    pub fn t(caps: Caps) -> Self {
        Self::monomial(0, 0, 0, 1, caps)
    }

    /// `q = (adag - a) / (sqrt2 i)`.
    pub fn q(caps: Caps) -> Self {
        // 1/(sqrt2 i) = -i sqrt2 / 2
        let c = &(&Coefficient::i() * &Coefficient::sqrt2()) * &Coefficient::ratio(-1, 2);
        Self::from_terms(
            caps,
            [
                (QMonomial::new(1, 0, 0, 0), c.clone()),
                (QMonomial::new(0, 1, 0, 0), -c),
            ],
        )
    }

    /// `p = (adag + a) / sqrt2`.
    pub fn p(caps: Caps) -> Self {
        let c = &Coefficient::sqrt2() * &Coefficient::ratio(1, 2);
        Self::from_terms(
            caps,
            [
                (QMonomial::new(1, 0, 0, 0), c.clone()),
                (QMonomial::new(0, 1, 0, 0), c),
            ],
        )
    }

    /// `p^2 + q^2 = 2 adag a + hbar`.
    pub fn harmonic(caps: Caps) -> Self {
        Self::from_terms(
            caps,
            [
                (QMonomial::new(1, 1, 0, 0), Coefficient::from_int(2)),
                (QMonomial::new(0, 0, 1, 0), Coefficient::one()),
            ],
        )
    }

    /// Builds a series from terms in any order; duplicates are summed and
    /// terms beyond the caps dropped.
    pub fn from_terms<I>(caps: Caps, terms: I) -> Self
    where
        I: IntoIterator<Item = (QMonomial, Coefficient)>,
    {
        let mut s = Self::zero(caps);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub(crate) fn from_map(caps: Caps, terms: TermMap) -> Self {
        let mut s = QSeries { terms, caps };
        s.terms
            .retain(|m, c| !c.is_zero() && caps.admits(m.t, m.weight_halves()));
        s
    }

    /// Adds `c * mono`, respecting the caps.
    pub fn add_term(&mut self, mono: QMonomial, c: Coefficient) {
        if c.is_zero() || !self.caps.admits(mono.t, mono.weight_halves()) {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QMonomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &QMonomial) -> Coefficient {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn coefficient_of(&self, adag: u32, a: u32, hbar: u32, t: u32) -> Coefficient {
        self.coefficient(&QMonomial::new(adag, a, hbar, t))
    }

    /// Reassigns the caps, dropping terms that no longer fit.
    pub fn with_caps(&self, caps: Caps) -> Self {
        Self::from_map(caps, self.terms.clone())
    }

    pub fn max_weight(&self) -> Weight {
        Weight::from_halves(self.terms.keys().map(|m| m.weight_halves()).max().unwrap_or(0))
    }

    pub fn max_t(&self) -> u32 {
        self.terms.keys().map(|m| m.t).max().unwrap_or(0)
    }

    pub fn is_central(&self) -> bool {
        self.terms.keys().all(QMonomial::is_central)
    }

    pub fn is_t_free(&self) -> bool {
        self.terms.keys().all(|m| m.t == 0)
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        if c.is_zero() {
            return Self::zero(self.caps);
        }
        QSeries {
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
            caps: self.caps,
        }
    }

    /// Multiplication by the central monomial `hbar^k t^l`.
    pub fn shift(&self, hbar: u32, t: u32) -> Self {
        Self::from_terms(
            self.caps,
            self.terms.iter().map(|(m, c)| {
                (
                    QMonomial::new(m.adag, m.a, m.hbar + hbar, m.t + t),
                    c.clone(),
                )
            }),
        )
    }

    /// Coefficient of `t^l`, returned as a `t`-free series.
    pub fn t_coefficient(&self, l: u32) -> Self {
        QSeries {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.t == l)
                .map(|(m, c)| (QMonomial { t: 0, ..*m }, c.clone()))
                .collect(),
            caps: self.caps,
        }
    }

    /// Terms with `t`-exponent at most `l`.
    pub fn t_truncated(&self, l: u32) -> Self {
        QSeries {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.t <= l)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
            caps: self.caps,
        }
    }

    pub fn t_derivative(&self) -> Self {
        QSeries {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.t > 0)
                .map(|(m, c)| {
                    (
                        QMonomial { t: m.t - 1, ..*m },
                        c.scale_int(&BigInt::from(m.t)),
                    )
                })
                .collect(),
            caps: self.caps,
        }
    }

    /// Normal-ordered product, truncated at the meet of both caps.
    pub fn mul(&self, o: &QSeries) -> Result<QSeries> {
        let caps = self.caps.meet(&o.caps);
        let mut acc = HashMap::new();
        accumulate_product(
            &mut acc,
            &self.terms,
            &o.terms,
            &Contraction::Unit,
            &caps,
            0,
            false,
            "product",
        )?;
        Ok(Self::from_map(caps, collect(acc)))
    }

    pub fn pow(&self, n: u32) -> Result<QSeries> {
        let mut acc = QSeries::one(self.caps);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `self * o - o * self`.
    pub fn commutator(&self, o: &QSeries) -> Result<QSeries> {
        let caps = self.caps.meet(&o.caps);
        let mut acc = HashMap::new();
        // the j = 0 parts cancel exactly, so only contracted terms are formed
        accumulate_product(
            &mut acc,
            &self.terms,
            &o.terms,
            &Contraction::Unit,
            &caps,
            1,
            false,
            "commutator",
        )?;
        accumulate_product(
            &mut acc,
            &o.terms,
            &self.terms,
            &Contraction::Unit,
            &caps,
            1,
            true,
            "commutator",
        )?;
        let shifted = collect(acc)
            .into_iter()
            .map(|(m, c)| (QMonomial { hbar: m.hbar + 1, ..m }, c))
            .collect();
        Ok(Self::from_map(caps, shifted))
    }

    /// `(i/hbar) [self, o]`, formed without leaving the polynomial algebra.
    ///
    /// Truncation is applied to the result's weight, so top-weight terms of
    /// the bracket are exact even though the raw commutator would exceed the
    /// weight cap.
    pub fn bracket(&self, o: &QSeries) -> Result<QSeries> {
        let caps = self.caps.meet(&o.caps);
        let mut acc = HashMap::new();
        accumulate_product(
            &mut acc,
            &self.terms,
            &o.terms,
            &Contraction::Unit,
            &caps,
            1,
            false,
            "bracket",
        )?;
        accumulate_product(
            &mut acc,
            &o.terms,
            &self.terms,
            &Contraction::Unit,
            &caps,
            1,
            true,
            "bracket",
        )?;
        let i = Coefficient::i();
        let terms = collect(acc).into_iter().map(|(m, c)| (m, &c * &i)).collect();
        Ok(Self::from_map(caps, terms))
    }

    /// Exact division by `hbar`; fails unless every monomial carries `hbar`.
    pub fn divide_hbar(&self) -> Result<QSeries> {
        if let Some((m, _)) = self.terms.iter().find(|(m, _)| m.hbar == 0) {
            return Err(Error::domain(format!(
                "series is not divisible by hbar (monomial {m:?})"
            )));
        }
        Ok(QSeries {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (QMonomial { hbar: m.hbar - 1, ..*m }, c.clone()))
                .collect(),
            caps: self.caps,
        })
    }
}

impl<'a> Add<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn add(self, o: &QSeries) -> QSeries {
        let mut out = self.with_caps(self.caps.meet(&o.caps));
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn sub(self, o: &QSeries) -> QSeries {
        let mut out = self.with_caps(self.caps.meet(&o.caps));
        for (m, c) in &o.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
            caps: self.caps,
        }
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (name, e) in [("ad", m.adag), ("a", m.a), ("hbar", m.hbar), ("t", m.t)] {
                match e {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::new(4, Weight::integer(6))
    }

    #[test]
    fn annihilator_times_creator() {
        let c = caps();
        let prod = QSeries::a(c).mul(&QSeries::adag(c)).unwrap();
        let expected = QSeries::from_terms(
            c,
            [
                (QMonomial::new(1, 1, 0, 0), Coefficient::one()),
                (QMonomial::new(0, 0, 1, 0), Coefficient::one()),
            ],
        );
        assert_eq!(prod, expected);
    }

    #[test]
    fn number_operator_squared() {
        // (ad a)(ad a) = ad^2 a^2 + hbar ad a
        let c = caps();
        let n = QSeries::monomial(1, 1, 0, 0, c);
        let sq = n.mul(&n).unwrap();
        let expected = QSeries::from_terms(
            c,
            [
                (QMonomial::new(2, 2, 0, 0), Coefficient::one()),
                (QMonomial::new(1, 1, 1, 0), Coefficient::one()),
            ],
        );
        assert_eq!(sq, expected);
    }

    #[test]
    fn commutator_examples() {
        let c = caps();
        let comm = QSeries::a(c).commutator(&QSeries::adag(c)).unwrap();
        assert_eq!(comm, QSeries::hbar(c));
        let n = QSeries::monomial(1, 1, 0, 0, c);
        let f = n.commutator(&QSeries::adag(c)).unwrap();
        assert_eq!(f, QSeries::monomial(1, 0, 1, 0, c));
        assert!(n.commutator(&n).unwrap().is_zero());
    }

    #[test]
    fn pq_relation_and_harmonic() {
        let c = caps();
        let (q, p) = (QSeries::q(c), QSeries::p(c));
        let comm = p.commutator(&q).unwrap();
        let expected = QSeries::hbar(c).scale(&-Coefficient::i());
        assert_eq!(comm, expected);
        let h = &p.mul(&p).unwrap() + &q.mul(&q).unwrap();
        assert_eq!(h, QSeries::harmonic(c));
    }

    #[test]
    fn truncation_drops_heavy_terms() {
        let c = Caps::new(1, Weight::integer(1));
        let x = QSeries::monomial(1, 0, 0, 0, c);
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq, QSeries::monomial(2, 0, 0, 0, c));
        let cube = sq.mul(&x).unwrap();
        assert!(cube.is_zero());
        let t = QSeries::t(c);
        assert!(t.mul(&t).unwrap().is_zero());
    }

    #[test]
    fn guard_turns_blowup_into_resource_error() {
        let c = Caps::new(0, Weight::integer(20)).with_term_guard(5);
        let x = &QSeries::adag(c) + &QSeries::a(c);
        let big = x.pow(8);
        assert!(matches!(big, Err(Error::Resource(_))));
    }

    #[test]
    fn bracket_matches_divided_commutator() {
        let c = caps();
        let f = QSeries::monomial(2, 1, 0, 0, c);
        let g = &QSeries::monomial(0, 3, 0, 1, c) + &QSeries::monomial(1, 1, 1, 0, c);
        let fused = f.bracket(&g).unwrap();
        let wide = c.widen(2);
        let slow = f
            .with_caps(wide)
            .commutator(&g.with_caps(wide))
            .unwrap()
            .divide_hbar()
            .unwrap()
            .scale(&Coefficient::i())
            .with_caps(c);
        assert_eq!(fused, slow);
    }

    #[test]
    fn divide_hbar_rejects_hbar_free_terms() {
        let c = caps();
        assert!(QSeries::adag(c).divide_hbar().is_err());
        assert_eq!(
            QSeries::monomial(1, 0, 2, 0, c).divide_hbar().unwrap(),
            QSeries::monomial(1, 0, 1, 0, c)
        );
    }
}
