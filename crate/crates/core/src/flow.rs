//! Order-by-order integration of Heisenberg equations and propagators.
//!
//! The flow `phi_t` of a (possibly `t`-dependent) Hamiltonian `H` solves
//! `d/dt phi(X) = (i/hbar)[phi(X), H]`, `phi_0 = id`. It is integrated as a
//! `t`-power series, never through the meromorphic conjugation `U f U^-1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::algebra::{Caps, QSeries};
use crate::error::{Error, Result};

/// `t`-coefficients `H_0, ..., H_n` of `h`, each `t`-free.
pub fn t_slices(h: &QSeries, n: u32) -> Vec<QSeries> {
    (0..=n).map(|l| h.t_coefficient(l)).collect()
}

/// Sums `sum_l t^l x_l` back into one series.
pub fn from_t_slices(xs: &[QSeries], caps: Caps) -> QSeries {
    let mut out = QSeries::zero(caps);
    for (l, x) in xs.iter().enumerate() {
        out = &out + &x.with_caps(caps).shift(0, l as u32);
    }
    out
}

/// Next coefficient of a flow series: given `phi_0..phi_m` and `H_0..H_m`,
/// returns `phi_(m+1) = 1/(m+1) sum_(j<=m) (i/hbar)[phi_j, H_(m-j)]`.
pub fn flow_step(phi: &[QSeries], h: &[QSeries]) -> Result<QSeries> {
    let m = phi.len() - 1;
    if h.len() <= m {
        return Err(Error::internal(format!(
            "flow step {} needs {} Hamiltonian coefficients, got {}",
            m + 1,
            m + 1,
            h.len()
        )));
    }
    let caps = *phi[0].caps();
    let mut acc = QSeries::zero(caps);
    for (j, pj) in phi.iter().enumerate() {
        let hj = &h[m - j];
        if hj.is_zero() || pj.is_zero() {
            continue;
        }
        acc = &acc + &pj.bracket(hj)?;
    }
    let inv = BigRational::new(BigInt::one(), BigInt::from(m + 1));
    Ok(acc.scale(&inv.into()))
}

/// `t`-coefficients `phi_0(x), ..., phi_n(x)` of the flow of a `t`-free `x`.
pub fn flow_coefficients(h: &[QSeries], x: &QSeries, n: u32) -> Result<Vec<QSeries>> {
    let mut phi = vec![x.clone()];
    for _ in 0..n {
        let next = flow_step(&phi, h)?;
        phi.push(next);
    }
    Ok(phi)
}

/// `phi_t(f)` through `t^n`, where `phi_t` is the flow of `h`.
///
/// `t` is central and fixed by the flow, so a `t`-dependent `f = sum t^l f_l`
/// maps to `sum t^l phi_t(f_l)`.
///
/// Weight truncation is exact when `h` is weight-homogeneous; a mix of
/// weights below and above 1 can carry dropped heavy terms back under the cap.
pub fn integrate_heisenberg(h: &QSeries, f: &QSeries, n: u32) -> Result<QSeries> {
    let caps = h.caps().meet(f.caps());
    let n = n.min(caps.t_cap);
    let caps = caps.with_t_cap(n);
    let hs: Vec<QSeries> = t_slices(&h.with_caps(caps), n);
    let f = f.with_caps(caps);
    let mut out = QSeries::zero(caps);
    for l in 0..=n {
        let fl = f.t_coefficient(l);
        if fl.is_zero() {
            continue;
        }
        let phi = flow_coefficients(&hs, &fl, n - l)?;
        for (k, c) in phi.iter().enumerate() {
            out = &out + &c.shift(0, l + k as u32);
        }
        caps.guard(out.len(), "flow")?;
    }
    Ok(out)
}

/// Solution of `dU/dt = H U`, `U(0) = 1`, through `t^n`:
/// `(k+1) U_(k+1) = sum_(j<=k) H_(k-j) U_j`.
pub fn solve_propagator(h: &QSeries, n: u32) -> Result<QSeries> {
    let caps = h.caps().with_t_cap(n.min(h.caps().t_cap));
    let n = caps.t_cap;
    let hs = t_slices(&h.with_caps(caps), n);
    let mut us = vec![QSeries::one(caps)];
    for k in 0..n as usize {
        let mut acc = QSeries::zero(caps);
        for (j, uj) in us.iter().enumerate() {
            acc = &acc + &hs[k - j].mul(uj)?;
        }
        let inv = BigRational::new(BigInt::one(), BigInt::from(k + 1));
        us.push(acc.scale(&inv.into()));
    }
    Ok(from_t_slices(&us, caps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{QMonomial, Weight};
    use crate::coeff::Coefficient;
    use crate::algebra::ops::factorial;

    fn caps(n: u32) -> Caps {
        Caps::new(n, Weight::integer(4))
    }

    #[test]
    fn number_operator_rotates_a() {
        let c = caps(12);
        let h = QSeries::monomial(1, 1, 0, 0, c);
        let phi = integrate_heisenberg(&h, &QSeries::a(c), 12).unwrap();
        assert_eq!(phi.len(), 13);
        for k in 0..=12u32 {
            let expect = &Coefficient::i().pow(k)
                * &Coefficient::from_rational(BigRational::new(BigInt::one(), factorial(k)));
            assert_eq!(phi.coefficient_of(0, 1, 0, k), expect);
        }
    }

    #[test]
    fn conserved_quantity() {
        let c = caps(5);
        let h = &QSeries::harmonic(c) + &QSeries::monomial(2, 2, 0, 0, c);
        assert_eq!(integrate_heisenberg(&h, &h, 5).unwrap(), h);
    }

    #[test]
    fn momentum_under_position() {
        let c = caps(4);
        let phi = integrate_heisenberg(&QSeries::q(c), &QSeries::p(c), 4).unwrap();
        assert_eq!(phi, &QSeries::p(c) + &QSeries::t(c));
    }

    #[test]
    fn center_is_fixed() {
        let c = caps(4);
        let h = &QSeries::q(c).mul(&QSeries::p(c)).unwrap() + &QSeries::monomial(2, 0, 0, 1, c);
        assert_eq!(integrate_heisenberg(&h, &QSeries::hbar(c), 4).unwrap(), QSeries::hbar(c));
        let k = QSeries::constant(Coefficient::ratio(3, 7), c);
        assert_eq!(integrate_heisenberg(&h, &k, 4).unwrap(), k);
    }

    #[test]
    fn time_reversal_returns_observable() {
        let c = caps(5);
        let h = QSeries::monomial(2, 1, 0, 0, c);
        let f = &QSeries::monomial(1, 2, 0, 0, c) + &QSeries::adag(c);
        let fwd = integrate_heisenberg(&h, &f, 5).unwrap();
        let back = integrate_heisenberg(&-&h, &fwd, 5).unwrap();
        assert_eq!(back, f.with_caps(*back.caps()));
    }

    #[test]
    fn propagators() {
        let c = caps(6);
        let one = solve_propagator(&QSeries::one(c), 6).unwrap();
        for k in 0..=6u32 {
            let expect = Coefficient::from_rational(BigRational::new(BigInt::one(), factorial(k)));
            assert_eq!(one.coefficient_of(0, 0, 0, k), expect);
        }
        let ad = solve_propagator(&QSeries::adag(c), 6).unwrap();
        for k in 0..=6u32 {
            let expect = Coefficient::from_rational(BigRational::new(BigInt::one(), factorial(k)));
            assert_eq!(ad.coefficient(&QMonomial::new(k, 0, 0, k)), expect);
        }
        assert_eq!(ad.len(), 7);
        assert_eq!(solve_propagator(&QSeries::zero(c), 6).unwrap(), QSeries::one(c));
    }
}
