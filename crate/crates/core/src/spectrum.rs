//! The Fock representation `rho`, exact Rayleigh–Schrödinger perturbation
//! theory, numeric diagonalization, the `hbar`-trace and inner products.
//!
//! `rho` acts on `C_hbar[z]` by `adag -> z` and `a -> hbar d/dz`. The monomials
//! `z^n` are left unnormalized, `<n|n> = n! hbar^n`; only [`fock_matrix`]
//! switches to the normalized basis `z^n / sqrt(n! hbar^n)` at numeric `hbar`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::ops::factorial;
use crate::algebra::{Caps, QSeries, ScalarSeries, Signature, Var, Weight};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// A vector `sum c z^j hbar^k t^l` of the Fock space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FockVector {
    terms: BTreeMap<(u32, u32, u32), Coefficient>,
}

impl FockVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `z^j`.
    pub fn basis(j: u32) -> Self {
        let mut v = Self::zero();
        v.add_term(j, 0, 0, Coefficient::one());
        v
    }

    pub fn add_term(&mut self, j: u32, hbar: u32, t: u32, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((j, hbar, t)).or_default();
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&(j, hbar, t));
        }
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32, u32), Coefficient)>>(terms: I) -> Self {
        let mut v = Self::zero();
        for ((j, h, t), c) in terms {
            v.add_term(j, h, t, c);
        }
        v
    }

    /// Terms as `((j, hbar, t), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, j: u32, hbar: u32, t: u32) -> Coefficient {
        self.terms.get(&(j, hbar, t)).cloned().unwrap_or_default()
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
}

// falling factorial j (j-1) ... (j-n+1)
fn falling(j: u32, n: u32) -> BigInt {
    (0..n).fold(BigInt::from(1), |acc, i| acc * BigInt::from(j - i))
}

/// `rho(f) psi`.
pub fn apply_rho(f: &QSeries, psi: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (m, c) in f.terms() {
        for (&(j, h, t), d) in psi.terms() {
            if m.a > j {
                continue;
            }
            let k = falling(j, m.a);
            out.add_term(
                j - m.a + m.adag,
                h + m.hbar + m.a,
                t + m.t,
                (c * d).scale_int(&k),
            );
        }
    }
    out
}

fn unbounded(t_cap: u32) -> Caps {
    Caps::new(t_cap, Weight::from_halves(u32::MAX / 4))
}

/// `<psi|chi> = sum conj(c_n) d_n n! hbar^n`, as a series in `(hbar, t)`.
pub fn inner_product(psi: &FockVector, chi: &FockVector) -> ScalarSeries {
    let mut out = ScalarSeries::zero(Signature::HBAR_T, unbounded(u32::MAX / 4));
    for (&(j, h1, t1), c) in psi.terms() {
        for (&(j2, h2, t2), d) in chi.terms() {
            if j != j2 {
                continue;
            }
            out.add_term(
                vec![j + h1 + h2, t1 + t2],
                (&c.conj() * d).scale_int(&factorial(j)),
            );
        }
    }
    out
}

/// `Tr_hbar(f) = sum_(n<=M) <n|f|n>` with unnormalized `|n> = z^n`,
/// `<n|f|n> = pi(a^n f adag^n)`.
pub fn trace_hbar(f: &QSeries, m: u32) -> ScalarSeries {
    let caps = Caps::new(
        f.caps().t_cap,
        Weight::from_halves(2 * m + f.max_weight().halves()),
    );
    let mut out = ScalarSeries::zero(Signature::HBAR_T, caps);
    for n in 0..=m {
        let img = apply_rho(f, &FockVector::basis(n));
        let nf = factorial(n);
        for (&(j, h, t), c) in img.terms() {
            if j == n {
                out.add_term(vec![h + n, t], c.scale_int(&nf));
            }
        }
    }
    out
}

// Laurent polynomial in hbar
type Laurent = BTreeMap<i32, Coefficient>;

fn l_add(acc: &mut Laurent, x: &Laurent, scale: &Coefficient, shift: i32) {
    for (e, c) in x {
        let k = e + shift;
        let v = acc.entry(k).or_default();
        *v += &(c * scale);
        if v.is_zero() {
            acc.remove(&k);
        }
    }
}

fn l_mul(x: &Laurent, y: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (e, c) in y {
        l_add(&mut out, x, c, *e);
    }
    out
}

// sparse vector over Laurent polynomials
type LVec = BTreeMap<u32, Laurent>;

fn lv_add(acc: &mut LVec, j: u32, x: &Laurent, scale: &Coefficient, shift: i32) {
    let e = acc.entry(j).or_default();
    l_add(e, x, scale, shift);
    if e.is_empty() {
        acc.remove(&j);
    }
}

// column j of a t-free operator in the basis z^m: m -> polynomial in hbar
fn column(f: &QSeries, j: u32) -> LVec {
    let mut out = LVec::new();
    for (&(m, h, _), c) in apply_rho(f, &FockVector::basis(j)).terms() {
        let mut l = Laurent::new();
        l.insert(h as i32, c.clone());
        lv_add(&mut out, m, &l, &Coefficient::one(), 0);
    }
    out
}

struct Columns<'a> {
    ops: &'a [QSeries],
    cache: BTreeMap<(usize, u32), LVec>,
}

impl Columns<'_> {
    fn apply(&mut self, l: usize, v: &LVec) -> LVec {
        let mut out = LVec::new();
        for (&j, x) in v {
            let col = self
                .cache
                .entry((l, j))
                .or_insert_with(|| column(&self.ops[l], j));
            for (&m, a) in col.iter() {
                let prod = l_mul(a, x);
                lv_add(&mut out, m, &prod, &Coefficient::one(), 0);
            }
        }
        out
    }
}

/// Exact Rayleigh–Schrödinger series of level `n` for `f = f_0 + sum_(l>=1) t^l f_l`,
/// `f_0 = p^2 + q^2`, through `t^order`, as a series in `(hbar, t)`.
///
/// Non-degenerate recursion with intermediate normalization `<n|psi_k> = 0`:
/// `E_k = sum_l (A_l psi_(k-l))_n` and
/// `psi_k[m] = (-(sum_l A_l psi_(k-l))[m] + sum_(j=1)^(k-1) E_j psi_(k-j)[m]) / (2 hbar (m - n))`.
pub fn rs_perturbation(f: &QSeries, n: u32, order: u32) -> Result<ScalarSeries> {
    let caps = f.caps().with_t_cap(order.min(f.caps().t_cap));
    let order = caps.t_cap;
    if f.t_coefficient(0) != QSeries::harmonic(*f.caps()) {
        return Err(Error::domain(
            "rs_perturbation expects f = p^2 + q^2 + O(t)",
        ));
    }
    let ops: Vec<QSeries> = (0..=order).map(|l| f.t_coefficient(l)).collect();
    let mut cols = Columns {
        ops: &ops,
        cache: BTreeMap::new(),
    };
    let one = Coefficient::one();
    let mut psi: Vec<LVec> = vec![LVec::from([(n, Laurent::from([(0, one.clone())]))])];
    let mut energy: Vec<Laurent> = vec![Laurent::from([(1, Coefficient::from_int(2 * n as i64 + 1))])];
    for k in 1..=order as usize {
        let mut rhs = LVec::new();
        for l in 1..=k {
            if ops[l].is_zero() {
                continue;
            }
            let av = cols.apply(l, &psi[k - l]);
            for (m, x) in &av {
                lv_add(&mut rhs, *m, x, &one, 0);
            }
        }
        let ek = rhs.remove(&n).unwrap_or_default();
        // psi_k[m] (E0_m - E0_n) = -rhs[m] + sum_(j=1)^(k-1) E_j psi_(k-j)[m]
        let mut num = LVec::new();
        for (m, x) in &rhs {
            lv_add(&mut num, *m, x, &-&one, 0);
        }
        for j in 1..k {
            for (m, x) in &psi[k - j] {
                let prod = l_mul(&energy[j], x);
                lv_add(&mut num, *m, &prod, &one, 0);
            }
        }
        num.remove(&n);
        let mut next = LVec::new();
        for (m, x) in num {
            let gap = Coefficient::from_int(2 * (m as i64 - n as i64));
            let inv = gap.inv()?;
            lv_add(&mut next, m, &x, &inv, -1);
        }
        psi.push(next);
        energy.push(ek);
    }
    let mut out = ScalarSeries::zero(Signature::HBAR_T, caps);
    for (k, e) in energy.iter().enumerate() {
        for (p, c) in e {
            if *p < 0 {
                return Err(Error::internal(format!(
                    "Rayleigh-Schroedinger order {k} has a negative hbar power {p}"
                )));
            }
            out.add_term(vec![*p as u32, k as u32], c.clone());
        }
    }
    Ok(out)
}

/// `E(n, hbar, t)` evaluated at a concrete level, as a series in `(hbar, t)`.
pub fn level_series(e: &ScalarSeries, n: u32) -> Result<ScalarSeries> {
    let value = ScalarSeries::constant(Signature::HBAR_T, Coefficient::from_int(n as i64), *e.caps());
    e.substitute(Var::N, &value)
}

/// Dense matrix of `rho(f)` in the normalized basis at numeric `(t, hbar)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub dim: usize,
    pub matrix: DMatrix<Complex64>,
}

impl FockOperator {
    /// Row-major CSV, each entry written as a `re,im` pair.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:e},{:e}", z.re, z.im)
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// `<e_m|f|e_n>` for `m, n < dim`, with `e_n = z^n / sqrt(n! hbar^n)`.
pub fn fock_matrix(f: &QSeries, dim: usize, t: f64, hbar: f64) -> Result<FockOperator> {
    if dim == 0 {
        return Err(Error::domain("Fock matrix dimension must be at least 1"));
    }
    if hbar.is_nan() || hbar <= 0.0 || !hbar.is_finite() || !t.is_finite() {
        return Err(Error::domain("fock_matrix needs finite t and hbar > 0"));
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 0..dim {
        let img = apply_rho(f, &FockVector::basis(n as u32));
        for (&(row, h, tl), c) in img.terms() {
            let row = row as usize;
            if row >= dim {
                continue;
            }
            // sqrt(row! hbar^row / (n! hbar^n))
            let mut ratio = 1.0f64;
            if row > n {
                for k in n + 1..=row {
                    ratio *= k as f64 * hbar;
                }
                ratio = ratio.sqrt();
            } else if row < n {
                for k in row + 1..=n {
                    ratio *= k as f64 * hbar;
                }
                ratio = 1.0 / ratio.sqrt();
            }
            let scale = ratio * hbar.powi(h as i32) * t.powi(tl as i32);
            m[(row, n)] += c.to_complex() * scale;
        }
    }
    Ok(FockOperator { dim, matrix: m })
}

/// Lowest eigenvalues of a truncated Fock matrix with a convergence check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagResult {
    pub dim: usize,
    pub t: f64,
    pub hbar: f64,
    /// Sorted by real part; imaginary parts vanish for hermitian input.
    pub eigenvalues: Vec<[f64; 2]>,
    /// Largest relative change of the requested levels from `dim` to `dim + 10`.
    pub relative_change: f64,
    pub converged: bool,
    pub hermitian: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub const CONVERGENCE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;

fn eigen(op: &FockOperator) -> (Vec<Complex64>, bool) {
    let scale = op.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let hermitian = op.hermiticity_defect() <= HERMITIAN_TOL * scale;
    let mut ev: Vec<Complex64> = if hermitian {
        SymmetricEigen::new(op.matrix.clone())
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect()
    } else {
        match Schur::new(op.matrix.clone()).eigenvalues() {
            Some(v) => v.iter().copied().collect(),
            None => op.matrix.diagonal().iter().copied().collect(),
        }
    };
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    (ev, hermitian)
}

/// The `k` lowest eigenvalues of `rho(f)` truncated to `dim` states.
pub fn diagonalize(f: &QSeries, t: f64, hbar: f64, dim: usize, k: usize) -> Result<DiagResult> {
    let k = k.min(dim);
    let (ev, hermitian) = eigen(&fock_matrix(f, dim, t, hbar)?);
    let (ev2, _) = eigen(&fock_matrix(f, dim + 10, t, hbar)?);
    let mut change: f64 = 0.0;
    for i in 0..k {
        let d = (ev[i] - ev2[i]).norm() / ev2[i].norm().max(f64::MIN_POSITIVE);
        change = change.max(d);
    }
    Ok(DiagResult {
        dim,
        t,
        hbar,
        eigenvalues: ev[..k].iter().map(|z| [z.re, z.im]).collect(),
        relative_change: change,
        converged: change < CONVERGENCE_TOL,
        hermitian,
        warning: (!hermitian).then(|| {
            "operator is not self-adjoint at these parameters; eigenvalues are complex and sorted by real part".to_string()
        }),
    })
}

/// Numeric value of a series in `(hbar, t)` at concrete parameters.
pub fn evaluate_hbar_t(e: &ScalarSeries, hbar: f64, t: f64) -> Result<Complex64> {
    let ih = e
        .signature()
        .index(Var::Hbar)
        .ok_or_else(|| Error::domain("series has no hbar variable"))?;
    let it = e
        .signature()
        .index(Var::T)
        .ok_or_else(|| Error::domain("series has no t variable"))?;
    if e.signature().arity() != 2 {
        return Err(Error::domain("expected a series in (hbar, t)"));
    }
    Ok(e.terms().fold(Complex64::new(0.0, 0.0), |acc, (x, c)| {
        acc + c.to_complex() * hbar.powi(x[ih] as i32) * t.powi(x[it] as i32)
    }))
}
