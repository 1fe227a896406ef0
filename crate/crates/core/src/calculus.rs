//! Quantum partial derivatives, antiderivatives and reconstruction of the
//! Hamiltonian of a derivation.
//!
//! `d/dq f = -(i/hbar)[f, p]` and `d/dp f = (i/hbar)[f, q]`. On `q`-before-`p`
//! ordered monomials the first acts as the classical partial derivative, and
//! likewise the second on `p`-before-`q` monomials, which is how the
//! antiderivatives are formed.

use crate::algebra::{Caps, PqOrder, PqPolynomial, QSeries, ScalarSeries};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

pub fn d_dq(f: &QSeries) -> Result<QSeries> {
    Ok(-&f.bracket(&QSeries::p(*f.caps()))?)
}

pub fn d_dp(f: &QSeries) -> Result<QSeries> {
    f.bracket(&QSeries::q(*f.caps()))
}

// integration raises the weight by 1/2; the cap follows so nothing is lost
fn integrate(f: &QSeries, order: PqOrder) -> Result<QSeries> {
    let caps = f.caps().widen(1);
    let view = PqPolynomial::from_qseries(&f.with_caps(caps), order)?;
    let mut out = PqPolynomial::zero(order, caps);
    for ([q, p, h, t], c) in view.terms() {
        match order {
            PqOrder::QBeforeP => {
                out.add_term(q + 1, p, h, t, c * &Coefficient::ratio(1, q as i64 + 1))
            }
            PqOrder::PBeforeQ => {
                out.add_term(q, p + 1, h, t, c * &Coefficient::ratio(1, p as i64 + 1))
            }
        }
    }
    out.to_qseries()
}

/// The antiderivative in `q` that is left-divisible by `q`:
/// `q^m p^n -> q^(m+1) p^n / (m+1)`.
pub fn int_dq(f: &QSeries) -> Result<QSeries> {
    integrate(f, PqOrder::QBeforeP)
}

/// The antiderivative in `p` that is left-divisible by `p`:
/// `p^n q^m -> p^(n+1) q^m / (n+1)`.
pub fn int_dp(f: &QSeries) -> Result<QSeries> {
    integrate(f, PqOrder::PBeforeQ)
}

fn left_divide(f: &QSeries, order: PqOrder) -> Result<QSeries> {
    let view = PqPolynomial::from_qseries(f, order)?;
    let mut out = PqPolynomial::zero(order, *f.caps());
    for ([q, p, h, t], c) in view.terms() {
        let (q, p) = match order {
            PqOrder::QBeforeP if q > 0 => (q - 1, p),
            PqOrder::PBeforeQ if p > 0 => (q, p - 1),
            _ => {
                let letter = if order == PqOrder::QBeforeP { "q" } else { "p" };
                return Err(Error::domain(format!("series is not left-divisible by {letter}")));
            }
        };
        out.add_term(q, p, h, t, c.clone());
    }
    out.to_qseries()
}

/// `G` with `f = q G`, if it exists.
pub fn left_divide_q(f: &QSeries) -> Result<QSeries> {
    left_divide(f, PqOrder::QBeforeP)
}

/// `G` with `f = p G`, if it exists.
pub fn left_divide_p(f: &QSeries) -> Result<QSeries> {
    left_divide(f, PqOrder::PBeforeQ)
}

/// Images of the generators under a candidate derivation
/// `D = (i/hbar)[., H] + alpha d/dt`.
#[derive(Clone, Debug)]
pub struct DerivationSpec {
    pub dq: QSeries,
    pub dp: QSeries,
    pub alpha: Option<ScalarSeries>,
}

impl DerivationSpec {
    pub fn new(dq: QSeries, dp: QSeries) -> Self {
        DerivationSpec { dq, dp, alpha: None }
    }

    /// The derivation of a Hamiltonian: `Dq = (i/hbar)[q, H]`, `Dp = (i/hbar)[p, H]`.
    pub fn of_hamiltonian(h: &QSeries) -> Result<Self> {
        let caps = *h.caps();
        Ok(DerivationSpec::new(
            QSeries::q(caps).bracket(h)?,
            QSeries::p(caps).bracket(h)?,
        ))
    }

    /// `[Dp, q] + [p, Dq]`, which vanishes for a derivation.
    pub fn compatibility_defect(&self) -> Result<QSeries> {
        let caps = self.dq.caps().meet(self.dp.caps()).widen(1);
        let dq = self.dq.with_caps(caps);
        let dp = self.dp.with_caps(caps);
        let a = dp.commutator(&QSeries::q(caps))?;
        let b = QSeries::p(caps).commutator(&dq)?;
        Ok(&a + &b)
    }
}

/// `H = int(Dp) dq - int(Dq) dp + (i/hbar) int int [p, Dq] dp dq`,
/// the double integral taken as `dq` inside, `dp` outside.
///
/// The result satisfies `(i/hbar)[q, H] = Dq` and `(i/hbar)[p, H] = Dp`;
/// `H` is determined up to the center.
pub fn reconstruct_hamiltonian(d: &DerivationSpec) -> Result<(QSeries, Option<ScalarSeries>)> {
    if !d.compatibility_defect()?.is_zero() {
        return Err(Error::domain(
            "not a derivation: [Dp, q] + [p, Dq] does not vanish",
        ));
    }
    let caps: Caps = d.dq.caps().meet(d.dp.caps());
    let dq = d.dq.with_caps(caps);
    let dp = d.dp.with_caps(caps);
    let first = int_dq(&dp)?;
    let second = int_dp(&dq)?;
    let inner = QSeries::p(caps.widen(1)).bracket(&dq.with_caps(caps.widen(1)))?;
    let third = int_dp(&int_dq(&inner)?)?;
    let h = &(&first - &second) + &third;
    Ok((h, d.alpha.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{from_pq, Weight};

    fn caps() -> Caps {
        Caps::new(2, Weight::integer(4))
    }

    fn pq(terms: &[([u32; 2], Coefficient)]) -> QSeries {
        let p = PqPolynomial::from_terms(
            PqOrder::QBeforeP,
            caps(),
            terms.iter().map(|([q, p], c)| ([*q, *p, 0, 0], c.clone())),
        );
        from_pq(&p).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let c = caps();
        let q = QSeries::q(c);
        let p = QSeries::p(c);
        let q2 = q.mul(&q).unwrap();
        assert_eq!(d_dq(&q2).unwrap(), q.scale(&Coefficient::from_int(2)));
        assert!(d_dq(&p).unwrap().is_zero());
        assert_eq!(d_dq(&q.mul(&p).unwrap()).unwrap(), p);
        assert_eq!(d_dp(&p.mul(&p).unwrap()).unwrap(), p.scale(&Coefficient::from_int(2)));
        assert!(d_dp(&QSeries::hbar(c)).unwrap().is_zero());
    }

    #[test]
    fn derivative_is_classical_on_ordered_monomials() {
        // d/dq (q^3 p^2) = 3 q^2 p^2 in q-before-p order
        let f = pq(&[([3, 2], Coefficient::one())]);
        let expect = pq(&[([2, 2], Coefficient::from_int(3))]);
        assert_eq!(d_dq(&f).unwrap(), expect);
    }

    #[test]
    fn integral_examples() {
        let c = caps();
        let q = QSeries::q(c);
        let p = QSeries::p(c);
        let same = |x: QSeries, y: QSeries| assert_eq!(x.with_caps(c), y);
        same(int_dq(&p).unwrap(), q.mul(&p).unwrap());
        same(int_dq(&q).unwrap(), q.mul(&q).unwrap().scale(&Coefficient::ratio(1, 2)));
        same(int_dq(&QSeries::one(c)).unwrap(), q.clone());
        same(int_dp(&q).unwrap(), p.mul(&q).unwrap());
    }

    #[test]
    fn integrals_are_divisible_and_invert_derivatives() {
        let f = pq(&[
            ([2, 1], Coefficient::ratio(3, 5)),
            ([0, 2], Coefficient::i()),
            ([1, 0], Coefficient::sqrt2()),
            ([0, 0], Coefficient::one()),
        ]);
        let fq = int_dq(&f).unwrap();
        assert_eq!(d_dq(&fq).unwrap().with_caps(*f.caps()), f);
        assert!(left_divide_q(&fq).is_ok());
        let fp = int_dp(&f).unwrap();
        assert_eq!(d_dp(&fp).unwrap().with_caps(*f.caps()), f);
        assert!(left_divide_p(&fp).is_ok());
        // p q = q p - i hbar is not left-divisible by q
        let c = caps();
        let pqw = QSeries::p(c).mul(&QSeries::q(c)).unwrap();
        assert!(left_divide_q(&pqw).is_err());
    }

    #[test]
    fn mixed_partials_commute() {
        let f = pq(&[
            ([2, 2], Coefficient::one()),
            ([3, 1], Coefficient::ratio(-1, 3)),
            ([1, 1], Coefficient::i()),
        ]);
        let a = d_dq(&d_dp(&f).unwrap()).unwrap();
        let b = d_dp(&d_dq(&f).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reconstruct_examples() {
        let c = caps();
        let q = QSeries::q(c);
        let p = QSeries::p(c);
        let (h, _) = reconstruct_hamiltonian(&DerivationSpec::new(-&q, p.clone())).unwrap();
        assert_eq!(h, q.mul(&p).unwrap().with_caps(*h.caps()));

        let (h, _) =
            reconstruct_hamiltonian(&DerivationSpec::new(QSeries::zero(c), QSeries::zero(c)))
                .unwrap();
        assert!(h.is_zero());

        let (h, _) = reconstruct_hamiltonian(&DerivationSpec::new(p.clone(), -&q)).unwrap();
        let expected = (&p.mul(&p).unwrap() + &q.mul(&q).unwrap()).scale(&Coefficient::ratio(-1, 2));
        assert_eq!(h, expected.with_caps(*h.caps()));
        let d = DerivationSpec::of_hamiltonian(&h).unwrap();
        assert_eq!(d.dq, p.with_caps(*d.dq.caps()));
        assert_eq!(d.dp, (-&q).with_caps(*d.dp.caps()));
    }

    #[test]
    fn rejects_non_derivations() {
        let c = caps();
        let d = DerivationSpec::new(QSeries::q(c), QSeries::q(c));
        assert!(matches!(reconstruct_hamiltonian(&d), Err(Error::Domain(_))));
    }

    #[test]
    fn roundtrip_up_to_center() {
        let h = pq(&[
            ([3, 0], Coefficient::one()),
            ([1, 2], Coefficient::ratio(2, 7)),
            ([2, 1], Coefficient::i()),
            ([0, 4], Coefficient::sqrt2()),
        ]);
        let d = DerivationSpec::of_hamiltonian(&h).unwrap();
        let (h2, _) = reconstruct_hamiltonian(&d).unwrap();
        let diff = &h2.with_caps(*h.caps()) - &h;
        assert!(diff.is_central(), "difference not central: {diff}");
    }
}
