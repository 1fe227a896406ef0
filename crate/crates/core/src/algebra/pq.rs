//! Position/momentum ordered views of the algebra.
//!
//! Storage is always normal-ordered in `(adag, a)`. These types expand a
//! series as `sum c q^m p^n` (or `p^n q^m`) for calculus and for linear
//! substitutions. The ordered product reuses the normal-ordering kernel with
//! a different contraction constant:
//! `p q = q p - i hbar` and `q p = p q + i hbar`.

use std::collections::HashMap;

use super::caps::Caps;
use super::qseries::{accumulate_product, collect, Contraction, QMonomial, QSeries, TermMap};
use crate::coeff::Coefficient;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PqOrder {
    /// `q^m p^n`
    QBeforeP,
    /// `p^n q^m`
    PBeforeQ,
}

impl PqOrder {
    fn contraction(self) -> Contraction {
        match self {
            PqOrder::QBeforeP => Contraction::Scaled(-Coefficient::i()),
            PqOrder::PBeforeQ => Contraction::Scaled(Coefficient::i()),
        }
    }
}

/// A series written in `q`/`p` ordered form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PqPolynomial {
    order: PqOrder,
    // adag = exponent of the left letter, a = exponent of the right letter
    terms: TermMap,
    caps: Caps,
}

impl PqPolynomial {
    pub fn zero(order: PqOrder, caps: Caps) -> Self {
        PqPolynomial {
            order,
            terms: TermMap::new(),
            caps,
        }
    }

    fn key(order: PqOrder, q: u32, p: u32, hbar: u32, t: u32) -> QMonomial {
        match order {
            PqOrder::QBeforeP => QMonomial::new(q, p, hbar, t),
            PqOrder::PBeforeQ => QMonomial::new(p, q, hbar, t),
        }
    }

    fn unkey(&self, m: &QMonomial) -> (u32, u32) {
        match self.order {
            PqOrder::QBeforeP => (m.adag, m.a),
            PqOrder::PBeforeQ => (m.a, m.adag),
        }
    }

    /// Adds `c q^q p^p hbar^hbar t^t` (read in this polynomial's order).
    pub fn add_term(&mut self, q: u32, p: u32, hbar: u32, t: u32, c: Coefficient) {
        let m = Self::key(self.order, q, p, hbar, t);
        if c.is_zero() || !self.caps.admits(m.t, m.weight_halves()) {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Coefficient::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn from_terms<I>(order: PqOrder, caps: Caps, terms: I) -> Self
    where
        I: IntoIterator<Item = ([u32; 4], Coefficient)>,
    {
        let mut s = Self::zero(order, caps);
        for ([q, p, h, t], c) in terms {
            s.add_term(q, p, h, t, c);
        }
        s
    }

    pub fn order(&self) -> PqOrder {
        self.order
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    /// Terms as `([q exponent, p exponent, hbar, t], coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = ([u32; 4], &Coefficient)> + '_ {
        self.terms.iter().map(move |(m, c)| {
            let (q, p) = self.unkey(m);
            ([q, p, m.hbar, m.t], c)
        })
    }

    pub fn coefficient(&self, q: u32, p: u32, hbar: u32, t: u32) -> Coefficient {
        self.terms
            .get(&Self::key(self.order, q, p, hbar, t))
            .cloned()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product inside the ordered algebra.
    pub fn mul(&self, o: &PqPolynomial) -> Result<PqPolynomial> {
        assert_eq!(self.order, o.order, "mixed q/p orderings");
        let caps = self.caps.meet(&o.caps);
        let mut acc = HashMap::new();
        accumulate_product(
            &mut acc,
            &self.terms,
            &o.terms,
            &self.order.contraction(),
            &caps,
            0,
            false,
            "ordered product",
        )?;
        let mut terms = collect(acc);
        terms.retain(|m, _| caps.admits(m.t, m.weight_halves()));
        Ok(PqPolynomial {
            order: self.order,
            terms,
            caps,
        })
    }

    fn add(&mut self, o: &PqPolynomial, scale: &Coefficient) {
        for (m, c) in &o.terms {
            let (q, p) = o.unkey(m);
            self.add_term(q, p, m.hbar, m.t, c * scale);
        }
    }

    fn shifted(&self, hbar: u32, t: u32) -> PqPolynomial {
        let mut out = Self::zero(self.order, self.caps);
        for (m, c) in &self.terms {
            let (q, p) = self.unkey(m);
            out.add_term(q, p, m.hbar + hbar, m.t + t, c.clone());
        }
        out
    }

    /// Re-expresses the ordered form in normal order (`from_pq`).
    pub fn to_qseries(&self) -> Result<QSeries> {
        let caps = self.caps;
        let q = QSeries::q(caps);
        let p = QSeries::p(caps);
        let max_q = self.terms().map(|(e, _)| e[0]).max().unwrap_or(0);
        let max_p = self.terms().map(|(e, _)| e[1]).max().unwrap_or(0);
        let qpow = powers(&q, max_q)?;
        let ppow = powers(&p, max_p)?;
        let mut out = QSeries::zero(caps);
        for ([qe, pe, h, t], c) in self.terms() {
            let word = match self.order {
                PqOrder::QBeforeP => qpow[qe as usize].mul(&ppow[pe as usize])?,
                PqOrder::PBeforeQ => ppow[pe as usize].mul(&qpow[qe as usize])?,
            };
            out = &out + &word.shift(h, t).scale(c);
        }
        Ok(out)
    }

    /// Expands a normal-ordered series in the requested `q`/`p` order (`to_pq`).
    pub fn from_qseries(f: &QSeries, order: PqOrder) -> Result<PqPolynomial> {
        let caps = *f.caps();
        let half_sqrt2 = &Coefficient::sqrt2() * &Coefficient::ratio(1, 2);
        let i_half_sqrt2 = &half_sqrt2 * &Coefficient::i();
        // adag = (p + i q)/sqrt2, a = (p - i q)/sqrt2
        let adag = Self::from_terms(
            order,
            caps,
            [
                ([0, 1, 0, 0], half_sqrt2.clone()),
                ([1, 0, 0, 0], i_half_sqrt2.clone()),
            ],
        );
        let ann = Self::from_terms(
            order,
            caps,
            [([0, 1, 0, 0], half_sqrt2), ([1, 0, 0, 0], -i_half_sqrt2)],
        );
        let max_m = f.terms().map(|(m, _)| m.adag).max().unwrap_or(0);
        let max_n = f.terms().map(|(m, _)| m.a).max().unwrap_or(0);
        let dpow = ordered_powers(&adag, max_m)?;
        let apow = ordered_powers(&ann, max_n)?;
        let mut out = Self::zero(order, caps);
        for (m, c) in f.terms() {
            let word = dpow[m.adag as usize].mul(&apow[m.a as usize])?;
            out.add(&word.shifted(m.hbar, m.t), c);
        }
        Ok(out)
    }
}

fn powers(x: &QSeries, n: u32) -> Result<Vec<QSeries>> {
    let mut v = vec![QSeries::one(*x.caps())];
    for k in 1..=n as usize {
        let next = v[k - 1].mul(x)?;
        v.push(next);
    }
    Ok(v)
}

fn ordered_powers(x: &PqPolynomial, n: u32) -> Result<Vec<PqPolynomial>> {
    let mut one = PqPolynomial::zero(x.order, x.caps);
    one.add_term(0, 0, 0, 0, Coefficient::one());
    let mut v = vec![one];
    for k in 1..=n as usize {
        let next = v[k - 1].mul(x)?;
        v.push(next);
    }
    Ok(v)
}

/// Normal-ordered image of a `q`/`p` ordered polynomial.
pub fn from_pq(f: &PqPolynomial) -> Result<QSeries> {
    f.to_qseries()
}

/// `q`-before-`p` ordered expansion of a normal-ordered series.
pub fn to_pq(f: &QSeries) -> Result<PqPolynomial> {
    PqPolynomial::from_qseries(f, PqOrder::QBeforeP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::caps::Weight;

    fn caps() -> Caps {
        Caps::new(3, Weight::integer(5))
    }

    #[test]
    fn sum_of_squares_is_harmonic() {
        let c = caps();
        let f = PqPolynomial::from_terms(
            PqOrder::QBeforeP,
            c,
            [([2, 0, 0, 0], Coefficient::one()), ([0, 2, 0, 0], Coefficient::one())],
        );
        assert_eq!(from_pq(&f).unwrap(), QSeries::harmonic(c));
    }

    #[test]
    fn q_alone() {
        let c = caps();
        let f = PqPolynomial::from_terms(PqOrder::QBeforeP, c, [([1, 0, 0, 0], Coefficient::one())]);
        assert_eq!(from_pq(&f).unwrap(), QSeries::q(c));
        let one = PqPolynomial::from_terms(PqOrder::QBeforeP, c, [([0, 0, 0, 0], Coefficient::one())]);
        assert_eq!(from_pq(&one).unwrap(), QSeries::one(c));
    }

    #[test]
    fn ordered_product_relation() {
        let c = caps();
        for order in [PqOrder::QBeforeP, PqOrder::PBeforeQ] {
            let q = PqPolynomial::from_terms(order, c, [([1, 0, 0, 0], Coefficient::one())]);
            let p = PqPolynomial::from_terms(order, c, [([0, 1, 0, 0], Coefficient::one())]);
            let pq = from_pq(&p.mul(&q).unwrap()).unwrap();
            let qp = from_pq(&q.mul(&p).unwrap()).unwrap();
            let direct_pq = QSeries::p(c).mul(&QSeries::q(c)).unwrap();
            let direct_qp = QSeries::q(c).mul(&QSeries::p(c)).unwrap();
            assert_eq!(pq, direct_pq);
            assert_eq!(qp, direct_qp);
        }
    }

    #[test]
    fn roundtrip_through_both_orders() {
        let c = caps();
        let f = QSeries::from_terms(
            c,
            [
                (QMonomial::new(3, 1, 0, 0), Coefficient::ratio(2, 3)),
                (QMonomial::new(0, 2, 1, 1), Coefficient::i()),
                (QMonomial::new(1, 0, 0, 2), Coefficient::sqrt2()),
            ],
        );
        for order in [PqOrder::QBeforeP, PqOrder::PBeforeQ] {
            let view = PqPolynomial::from_qseries(&f, order).unwrap();
            assert_eq!(view.to_qseries().unwrap(), f);
        }
    }
}
