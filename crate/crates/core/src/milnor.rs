//! Commutative checks on symbols: Milnor numbers and the dimension of the
//! versality quotient `C[x,y] / ({C[x,y], F} + C[x,y] F)`.
//!
//! Everything is computed in `C[x,y] / m^(D+1)` (`m = (x, y)`) by exact
//! Gaussian elimination; `stabilized` reports whether the answer at `D`
//! agrees with the one at `D + 1`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{ScalarSeries, Signature, Var};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// Sparse polynomial in commuting `x, y`, keyed by `(i, j)` for `x^i y^j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlanePoly {
    terms: BTreeMap<(u32, u32), Coefficient>,
}

impl PlanePoly {
    pub fn zero() -> Self {
        PlanePoly::default()
    }

    pub fn monomial(i: u32, j: u32, c: Coefficient) -> Self {
        let mut p = PlanePoly::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn x() -> Self {
        PlanePoly::monomial(1, 0, Coefficient::one())
    }

    pub fn y() -> Self {
        PlanePoly::monomial(0, 1, Coefficient::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Coefficient)>>(terms: I) -> Self {
        let mut p = PlanePoly::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// The `x, y` part of a symbol; `hbar` and `t` must not occur.
    pub fn from_symbol(s: &ScalarSeries) -> Result<Self> {
        let sig = s.signature();
        let (Some(ix), Some(iy)) = (sig.index(Var::X), sig.index(Var::Y)) else {
            return Err(Error::domain("symbol must be a series in x, y"));
        };
        let mut p = PlanePoly::zero();
        for (e, c) in s.terms() {
            if e.iter().enumerate().any(|(k, &d)| k != ix && k != iy && d > 0) {
                return Err(Error::domain(format!(
                    "symbol depends on variables other than x, y ({})",
                    sig.names().join(", ")
                )));
            }
            p.add_term(e[ix], e[iy], c.clone());
        }
        Ok(p)
    }

    pub fn to_symbol(&self, caps: crate::algebra::Caps) -> ScalarSeries {
        let mut s = ScalarSeries::zero(Signature::X_Y_T, caps);
        for (&(i, j), c) in &self.terms {
            s.add_term(vec![i, j, 0], c.clone());
        }
        s
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(Coefficient::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, i: u32, j: u32) -> Coefficient {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn add(&self, o: &PlanePoly) -> PlanePoly {
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &PlanePoly) -> PlanePoly {
        self.add(&o.scale(&Coefficient::from_int(-1)))
    }

    pub fn scale(&self, k: &Coefficient) -> PlanePoly {
        PlanePoly::from_terms(self.terms.iter().map(|(&e, c)| (e, c * k)))
    }

    pub fn mul(&self, o: &PlanePoly) -> PlanePoly {
        let mut out = PlanePoly::zero();
        for (&(i, j), c) in &self.terms {
            for (&(k, l), d) in &o.terms {
                out.add_term(i + k, j + l, c * d);
            }
        }
        out
    }

    /// `x^i y^j * self`.
    pub fn shifted(&self, i: u32, j: u32) -> PlanePoly {
        PlanePoly::from_terms(self.terms.iter().map(|(&(a, b), c)| ((a + i, b + j), c.clone())))
    }

    pub fn dx(&self) -> PlanePoly {
        PlanePoly::from_terms(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c.scale_int(&i.into()))),
        )
    }

    pub fn dy(&self) -> PlanePoly {
        PlanePoly::from_terms(
            self.terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c.scale_int(&j.into()))),
        )
    }

    /// Poisson bracket `{g, f} = g_x f_y - g_y f_x`.
    pub fn poisson(g: &PlanePoly, f: &PlanePoly) -> PlanePoly {
        g.dx().mul(&f.dy()).sub(&g.dy().mul(&f.dx()))
    }
}

impl fmt::Display for PlanePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if i > 0 {
                write!(f, "*x^{i}")?;
            }
            if j > 0 {
                write!(f, "*y^{j}")?;
            }
        }
        Ok(())
    }
}

/// Monomials of degree `<= d`, highest degree first, then larger `y`
/// exponent first. Gaussian elimination pivots on the earliest columns, so
/// surviving (basis) monomials are the low-degree ones.
fn columns(d: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for deg in (0..=d).rev() {
        for j in (0..=deg).rev() {
            out.push((deg - j, j));
        }
    }
    out
}

/// Row-reduced span of truncated polynomials.
struct Span {
    index: BTreeMap<(u32, u32), usize>,
    cols: Vec<(u32, u32)>,
    // pivot column -> normalized row (dense)
    rows: BTreeMap<usize, Vec<Coefficient>>,
}

impl Span {
    fn new(d: u32) -> Self {
        let cols = columns(d);
        let index = cols.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        Span {
            index,
            cols,
            rows: BTreeMap::new(),
        }
    }

    fn dense(&self, p: &PlanePoly) -> Vec<Coefficient> {
        let mut v = vec![Coefficient::zero(); self.cols.len()];
        for (m, c) in p.terms() {
            if let Some(&k) = self.index.get(m) {
                v[k] = c.clone();
            }
        }
        v
    }

    fn reduce(&self, mut v: Vec<Coefficient>) -> Vec<Coefficient> {
        for (&piv, row) in &self.rows {
            if v[piv].is_zero() {
                continue;
            }
            let k = v[piv].clone();
            for (a, b) in v.iter_mut().zip(row) {
                if !b.is_zero() {
                    *a = &*a - &(&k * b);
                }
            }
        }
        v
    }

    /// Adds `v`; returns whether it enlarged the span.
    fn insert(&mut self, v: Vec<Coefficient>) -> Result<bool> {
        let mut v = self.reduce(v);
        let Some(piv) = v.iter().position(|c| !c.is_zero()) else {
            return Ok(false);
        };
        let inv = v[piv].inv()?;
        for a in v.iter_mut() {
            *a = &*a * &inv;
        }
        // keep the existing rows reduced against the new pivot
        for row in self.rows.values_mut() {
            if row[piv].is_zero() {
                continue;
            }
            let k = row[piv].clone();
            for (a, b) in row.iter_mut().zip(&v) {
                if !b.is_zero() {
                    *a = &*a - &(&k * b);
                }
            }
        }
        self.rows.insert(piv, v);
        Ok(true)
    }

    fn insert_poly(&mut self, p: &PlanePoly) -> Result<bool> {
        let v = self.dense(p);
        self.insert(v)
    }

    fn quotient_basis(&self) -> Vec<(u32, u32)> {
        let mut b: Vec<(u32, u32)> = (0..self.cols.len())
            .filter(|k| !self.rows.contains_key(k))
            .map(|k| self.cols[k])
            .collect();
        b.sort_by_key(|&(i, j)| (i + j, j));
        b
    }
}

fn check_origin(f: &PlanePoly) -> Result<()> {
    if !f.coefficient(0, 0).is_zero() {
        return Err(Error::domain("F(0, 0) must vanish"));
    }
    Ok(())
}

fn monomials_up_to(d: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..=d).flat_map(|deg| (0..=deg).map(move |j| (deg - j, j)))
}

fn jacobian_quotient(f: &PlanePoly, d: u32) -> Result<Vec<(u32, u32)>> {
    let mut span = Span::new(d);
    let (fx, fy) = (f.dx(), f.dy());
    for (i, j) in monomials_up_to(d) {
        span.insert_poly(&fx.shifted(i, j))?;
        span.insert_poly(&fy.shifted(i, j))?;
    }
    Ok(span.quotient_basis())
}

/// Result of a truncated quotient computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub dim: usize,
    /// Basis monomials `[i, j]` for `x^i y^j`.
    pub basis: Vec<[u32; 2]>,
    pub cutoff: u32,
    pub stabilized: bool,
}

fn report(at_d: Vec<(u32, u32)>, at_d1: Vec<(u32, u32)>, d: u32) -> QuotientReport {
    QuotientReport {
        dim: at_d.len(),
        stabilized: at_d.len() == at_d1.len(),
        basis: at_d.into_iter().map(|(i, j)| [i, j]).collect(),
        cutoff: d,
    }
}

/// `dim C[x,y] / ((F_x, F_y) + m^(D+1))` and whether it is stable in `D`.
pub fn milnor_number(f: &PlanePoly, d: u32) -> Result<(usize, bool)> {
    let r = milnor_report(f, d)?;
    Ok((r.dim, r.stabilized))
}

pub fn milnor_report(f: &PlanePoly, d: u32) -> Result<QuotientReport> {
    check_origin(f)?;
    Ok(report(jacobian_quotient(f, d)?, jacobian_quotient(f, d + 1)?, d))
}

fn versality_span(f: &PlanePoly, d: u32) -> Result<Span> {
    let mut span = Span::new(d);
    let gmax = d + f.degree();
    for (i, j) in monomials_up_to(gmax) {
        let g = PlanePoly::monomial(i, j, Coefficient::one());
        span.insert_poly(&PlanePoly::poisson(&g, f))?;
        if i + j <= d {
            span.insert_poly(&f.shifted(i, j))?;
        }
    }
    Ok(span)
}

/// Dimension and monomial basis of `C[x,y] / ({C[x,y], F} + C[x,y] F + m^(D+1))`.
pub fn versality_dimension(f: &PlanePoly, d: u32) -> Result<QuotientReport> {
    check_origin(f)?;
    let a = versality_span(f, d)?.quotient_basis();
    let b = versality_span(f, d + 1)?.quotient_basis();
    Ok(report(a, b, d))
}

/// A family `F = base + sum_j lambda_j direction_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub base: PlanePoly,
    pub directions: Vec<PlanePoly>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersalReport {
    pub versal: bool,
    pub quotient_dim: usize,
    pub spanned_dim: usize,
    pub cutoff: u32,
    pub stabilized: bool,
}

/// Whether the classes of `1` and the `d F / d lambda_j` at `lambda = 0`
/// span the versality quotient of the base.
pub fn check_versal(family: &Family, d: u32) -> Result<VersalReport> {
    let q = versality_dimension(&family.base, d)?;
    let mut span = versality_span(&family.base, d)?;
    let before = span.rows.len();
    span.insert_poly(&PlanePoly::monomial(0, 0, Coefficient::one()))?;
    for dir in &family.directions {
        span.insert_poly(dir)?;
    }
    let spanned = span.rows.len() - before;
    Ok(VersalReport {
        versal: spanned == q.dim,
        quotient_dim: q.dim,
        spanned_dim: spanned,
        cutoff: d,
        stabilized: q.stabilized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_k(k: u32) -> PlanePoly {
        PlanePoly::from_terms([((0, 2), Coefficient::one()), ((k + 1, 0), Coefficient::one())])
    }

    #[test]
    fn milnor_examples() {
        assert_eq!(milnor_number(&a_k(1), 8).unwrap(), (1, true));
        for k in 1..=6 {
            assert_eq!(milnor_number(&a_k(k), 10).unwrap(), (k as usize, true));
        }
        let f = PlanePoly::from_terms([((3, 0), Coefficient::one()), ((0, 3), Coefficient::one())]);
        let r = milnor_report(&f, 8).unwrap();
        assert_eq!(r.dim, 4);
        assert_eq!(r.basis, vec![[0, 0], [1, 0], [0, 1], [1, 1]]);
    }

    #[test]
    fn local_not_global() {
        // x^2 + y^2 + x^3 has a second critical point away from the origin
        let f = PlanePoly::from_terms([
            ((2, 0), Coefficient::one()),
            ((0, 2), Coefficient::one()),
            ((3, 0), Coefficient::one()),
        ]);
        assert_eq!(milnor_number(&f, 8).unwrap(), (1, true));
    }

    #[test]
    fn non_isolated_does_not_stabilize() {
        let f = PlanePoly::monomial(0, 2, Coefficient::one());
        let (_, stable) = milnor_number(&f, 6).unwrap();
        assert!(!stable);
    }

    #[test]
    fn versality_examples() {
        for k in 1..=6 {
            let r = versality_dimension(&a_k(k), 10).unwrap();
            assert_eq!(r.dim, k as usize);
            assert!(r.stabilized);
            let expect: Vec<[u32; 2]> = (0..k).map(|i| [i, 0]).collect();
            assert_eq!(r.basis, expect);
        }
        let r = versality_dimension(&PlanePoly::x(), 6).unwrap();
        assert_eq!(r.dim, 0);
    }

    #[test]
    fn versal_families() {
        for k in 1..=6 {
            let fam = Family {
                base: a_k(k),
                directions: (1..k).map(|j| PlanePoly::monomial(j, 0, Coefficient::one())).collect(),
            };
            assert!(check_versal(&fam, 10).unwrap().versal, "k = {k}");
        }
        let bare = |k| Family {
            base: a_k(k),
            directions: vec![],
        };
        assert!(!check_versal(&bare(2), 10).unwrap().versal);
        assert!(check_versal(&bare(1), 10).unwrap().versal);
        // a direction already in the relations does not help
        let fam = Family {
            base: a_k(2),
            directions: vec![PlanePoly::y()],
        };
        assert!(!check_versal(&fam, 10).unwrap().versal);
    }

    #[test]
    fn origin_is_required() {
        let f = PlanePoly::monomial(0, 0, Coefficient::one()).add(&PlanePoly::x());
        assert!(milnor_number(&f, 4).is_err());
    }

    #[test]
    fn symbol_conversion() {
        let caps = crate::algebra::Caps::new(0, crate::algebra::Weight::integer(4));
        let f = a_k(3);
        assert_eq!(PlanePoly::from_symbol(&f.to_symbol(caps)).unwrap(), f);
    }
}
