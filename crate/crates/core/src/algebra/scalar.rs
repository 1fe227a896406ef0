//! Truncated commutative series over a fixed variable signature.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::caps::{Caps, Weight};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// A commuting variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Stand-in for `p^2 + q^2` when composing; weight 1.
    Z,
    /// Symbol of `adag`; weight 1/2.
    X,
    /// Symbol of `a`; weight 1/2.
    Y,
    Hbar,
    /// Deformation parameter; bounded by the `t`-cap.
    T,
    /// Level index of a spectrum; unweighted.
    N,
    /// Single expansion variable of a coefficient list; bounded by the `t`-cap.
    Lambda,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Z => "z",
            Var::X => "x",
            Var::Y => "y",
            Var::Hbar => "hbar",
            Var::T => "t",
            Var::N => "n",
            Var::Lambda => "lambda",
        }
    }

    fn weight_halves(self) -> u32 {
        match self {
            Var::Z | Var::Hbar => 2,
            Var::X | Var::Y => 1,
            Var::T | Var::N | Var::Lambda => 0,
        }
    }

    fn is_order(self) -> bool {
        matches!(self, Var::T | Var::Lambda)
    }
}

/// Ordered variable list of a [`ScalarSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature(&'static [Var]);

impl Signature {
    pub const Z_HBAR_T: Signature = Signature(&[Var::Z, Var::Hbar, Var::T]);
    pub const HBAR_T: Signature = Signature(&[Var::Hbar, Var::T]);
    pub const N_HBAR_T: Signature = Signature(&[Var::N, Var::Hbar, Var::T]);
    pub const X_Y_HBAR_T: Signature = Signature(&[Var::X, Var::Y, Var::Hbar, Var::T]);
    pub const X_Y_T: Signature = Signature(&[Var::X, Var::Y, Var::T]);
    pub const LAMBDA: Signature = Signature(&[Var::Lambda]);

    const ALL: [Signature; 6] = [
        Self::Z_HBAR_T,
        Self::HBAR_T,
        Self::N_HBAR_T,
        Self::X_Y_HBAR_T,
        Self::X_Y_T,
        Self::LAMBDA,
    ];

    pub fn vars(&self) -> &'static [Var] {
        self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn index(&self, v: Var) -> Option<usize> {
        self.0.iter().position(|&x| x == v)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.0.iter().map(|v| v.name()).collect()
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Signature> {
        Self::ALL
            .iter()
            .find(|sig| {
                sig.0.len() == names.len()
                    && sig.0.iter().zip(names).all(|(v, n)| v.name() == n.as_ref())
            })
            .copied()
            .ok_or_else(|| {
                let got: Vec<&str> = names.iter().map(|n| n.as_ref()).collect();
                Error::format(format!("unknown variable signature {got:?}"))
            })
    }

    fn weight_halves(&self, exps: &[u32]) -> u32 {
        self.0
            .iter()
            .zip(exps)
            .map(|(v, e)| v.weight_halves() * e)
            .sum()
    }

    fn order(&self, exps: &[u32]) -> u32 {
        self.0
            .iter()
            .zip(exps)
            .filter(|(v, _)| v.is_order())
            .map(|(_, e)| *e)
            .sum()
    }
}

/// Element of a commutative truncated series ring such as `C_hbar{z, t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarSeries {
    sig: Signature,
    terms: BTreeMap<Vec<u32>, Coefficient>,
    caps: Caps,
}

impl ScalarSeries {
    pub fn zero(sig: Signature, caps: Caps) -> Self {
        ScalarSeries {
            sig,
            terms: BTreeMap::new(),
            caps,
        }
    }

    pub fn constant(sig: Signature, c: Coefficient, caps: Caps) -> Self {
        let mut s = Self::zero(sig, caps);
        s.add_term(vec![0; sig.arity()], c);
        s
    }

    pub fn one(sig: Signature, caps: Caps) -> Self {
        Self::constant(sig, Coefficient::one(), caps)
    }

    /// The series consisting of the single variable `v`.
    pub fn var(sig: Signature, v: Var, caps: Caps) -> Result<Self> {
        let i = sig
            .index(v)
            .ok_or_else(|| Error::domain(format!("variable {} not in signature", v.name())))?;
        let mut e = vec![0; sig.arity()];
        e[i] = 1;
        let mut s = Self::zero(sig, caps);
        s.add_term(e, Coefficient::one());
        Ok(s)
    }

    pub fn from_terms<I>(sig: Signature, caps: Caps, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Coefficient)>,
    {
        let mut s = Self::zero(sig, caps);
        for (e, c) in terms {
            if e.len() != sig.arity() {
                return Err(Error::format(format!(
                    "exponent {e:?} does not match signature {:?}",
                    sig.names()
                )));
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Coefficient)> {
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

    pub fn coefficient(&self, exps: &[u32]) -> Coefficient {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    fn admits(&self, exps: &[u32]) -> bool {
        self.caps
            .admits(self.sig.order(exps), self.sig.weight_halves(exps))
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Coefficient) {
        if c.is_zero() || !self.admits(&exps) {
            return;
        }
        match self.terms.entry(exps) {
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

    pub fn with_caps(&self, caps: Caps) -> Self {
        let mut s = Self::zero(self.sig, caps);
        for (e, c) in &self.terms {
            s.add_term(e.clone(), c.clone());
        }
        s
    }

    fn check_sig(&self, o: &ScalarSeries) -> Result<()> {
        if self.sig != o.sig {
            return Err(Error::domain(format!(
                "signature mismatch: {:?} vs {:?}",
                self.sig.names(),
                o.sig.names()
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &ScalarSeries) -> Result<Self> {
        self.check_sig(o)?;
        let mut out = self.with_caps(self.caps.meet(&o.caps));
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &ScalarSeries) -> Result<Self> {
        self.check_sig(o)?;
        let mut out = self.with_caps(self.caps.meet(&o.caps));
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        ScalarSeries {
            sig: self.sig,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            caps: self.caps,
        }
    }

    pub fn scale(&self, k: &Coefficient) -> Self {
        let mut out = Self::zero(self.sig, self.caps);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, o: &ScalarSeries) -> Result<Self> {
        self.check_sig(o)?;
        let caps = self.caps.meet(&o.caps);
        let mut out = Self::zero(self.sig, caps);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                if out.admits(&e) {
                    out.add_term(e, c1 * c2);
                }
            }
            caps.guard(out.terms.len(), "scalar product")?;
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = Self::one(self.sig, self.caps);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn var_index(&self, v: Var) -> Result<usize> {
        self.sig.index(v).ok_or_else(|| {
            Error::domain(format!(
                "variable {} not in signature {:?}",
                v.name(),
                self.sig.names()
            ))
        })
    }

    /// Partial derivative in `v`.
    pub fn derivative(&self, v: Var) -> Result<Self> {
        let i = self.var_index(v)?;
        let mut out = Self::zero(self.sig, self.caps);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c.scale_int(&BigInt::from(e[i])));
        }
        Ok(out)
    }

    /// Coefficient of `v^k`, keeping `v` in the signature with exponent 0.
    pub fn coefficient_in(&self, v: Var, k: u32) -> Result<Self> {
        let i = self.var_index(v)?;
        let mut out = Self::zero(self.sig, self.caps);
        for (e, c) in &self.terms {
            if e[i] == k {
                let mut e2 = e.clone();
                e2[i] = 0;
                out.add_term(e2, c.clone());
            }
        }
        Ok(out)
    }

    /// Multiplies by `v^k`.
    pub fn shift(&self, v: Var, k: u32) -> Result<Self> {
        let i = self.var_index(v)?;
        let mut out = Self::zero(self.sig, self.caps);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] += k;
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    /// Highest exponent of `v` present.
    pub fn degree_in(&self, v: Var) -> Result<u32> {
        let i = self.var_index(v)?;
        Ok(self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
    }

    /// Terms whose `v`-exponent is at most `k`.
    pub fn truncated_in(&self, v: Var, k: u32) -> Result<Self> {
        let i = self.var_index(v)?;
        let mut out = Self::zero(self.sig, self.caps);
        for (e, c) in &self.terms {
            if e[i] <= k {
                out.add_term(e.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Substitutes `v := value`, where `value` lives in the target signature.
    ///
    /// Every remaining variable of `self` must exist in `value`'s signature.
    pub fn substitute(&self, v: Var, value: &ScalarSeries) -> Result<Self> {
        let i = self.var_index(v)?;
        let target = value.sig;
        let mut positions = Vec::with_capacity(self.sig.arity());
        for (j, w) in self.sig.vars().iter().enumerate() {
            if j == i {
                positions.push(None);
                continue;
            }
            let pos = target.index(*w).ok_or_else(|| {
                Error::domain(format!(
                    "variable {} has no image in {:?}",
                    w.name(),
                    target.names()
                ))
            })?;
            positions.push(Some(pos));
        }
        let caps = value.caps.meet(&self.caps);
        let max_deg = self.degree_in(v)?;
        let mut powers = vec![ScalarSeries::one(target, caps)];
        for k in 1..=max_deg {
            let next = powers[k as usize - 1].mul(value)?;
            powers.push(next);
        }
        let mut out = ScalarSeries::zero(target, caps);
        for (e, c) in &self.terms {
            let mut shift = vec![0u32; target.arity()];
            for (j, pos) in positions.iter().enumerate() {
                if let Some(p) = pos {
                    shift[*p] += e[j];
                }
            }
            for (pe, pc) in &powers[e[i] as usize].terms {
                let ne: Vec<u32> = pe.iter().zip(&shift).map(|(a, b)| a + b).collect();
                out.add_term(ne, c * pc);
            }
            caps.guard(out.terms.len(), "substitution")?;
        }
        Ok(out)
    }

    /// Complex conjugation of every coefficient.
    pub fn conj(&self) -> Self {
        ScalarSeries {
            sig: self.sig,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.conj()))
                .collect(),
            caps: self.caps,
        }
    }

    pub fn max_weight(&self) -> Weight {
        Weight::from_halves(
            self.terms
                .keys()
                .map(|e| self.sig.weight_halves(e))
                .max()
                .unwrap_or(0),
        )
    }
}

impl fmt::Display for ScalarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (v, k) in self.sig.vars().iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{}", v.name())?,
                    _ => write!(f, "*{}^{k}", v.name())?,
                }
            }
        }
        Ok(())
    }
}
