//! The quantum Morse normal form of a deformed harmonic oscillator.
//!
//! For `f = f_0 + O(t)` with `f_0 = p^2 + q^2 = 2 adag a + hbar` we find a
//! scalar germ `u(t, z)` with `u(0, z) = z` and a flow `phi_t` such that
//! `u o phi_t(f) = f_0`. Order by order in `t` this is the homological equation
//!
//! ```text
//! g o f + (i/hbar)[f, K] = -df/dt,      du/dt = du/dz * g,
//! ```
//!
//! where `K` generates `phi` in the frame `d/dt phi(X) = phi((i/hbar)[X, K])`.
//! The stored generator `H = phi(K)` is the one of the Heisenberg equation
//! `d/dt phi(X) = (i/hbar)[phi(X), H]`, so [`crate::flow::integrate_heisenberg`]
//! replays `phi` directly.
//!
//! Since `ad(f_0)` is diagonal on normal-ordered monomials,
//! `(i/hbar)[f_0, adag^m a^n] = 2i(m-n) adag^m a^n`, each order splits into a
//! diagonal part (a function of `f_0`) and an exactly invertible remainder.

use serde::{Deserialize, Serialize};

use crate::algebra::ops::central_to_qseries;
use crate::algebra::{
    to_pq, Caps, PqOrder, PqPolynomial, QMonomial, QSeries, ScalarSeries, Signature, Var, Weight,
};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::flow::{flow_step, from_t_slices, integrate_heisenberg};
use crate::io::{scalar_to_json, qseries_to_json, CoefJson, SeriesJson};

/// `f_0 = p^2 + q^2 = 2 adag a + hbar`.
pub fn harmonic(caps: Caps) -> QSeries {
    QSeries::harmonic(caps)
}

// prod_{j<n} (N - j hbar) with N = (z - hbar)/2, for n = 0..=max
fn falling_products(max: u32, caps: Caps) -> Result<Vec<ScalarSeries>> {
    let sig = Signature::Z_HBAR_T;
    let half = Coefficient::ratio(1, 2);
    let mut out = vec![ScalarSeries::one(sig, caps)];
    for j in 0..max {
        let factor = ScalarSeries::from_terms(
            sig,
            caps,
            [
                (vec![1, 0, 0], half.clone()),
                (vec![0, 1, 0], Coefficient::ratio(-1, 2) - Coefficient::from_int(j as i64)),
            ],
        )?;
        let next = out[j as usize].mul(&factor)?;
        out.push(next);
    }
    Ok(out)
}

/// Writes a diagonal series (`adag` and `a` exponents equal) as `s o f_0`.
pub fn diagonal_to_scalar(d: &QSeries) -> Result<ScalarSeries> {
    if let Some((m, _)) = d.terms().find(|(m, _)| !m.is_diagonal()) {
        return Err(Error::domain(format!(
            "diagonal_to_scalar: off-diagonal monomial adag^{} a^{}",
            m.adag, m.a
        )));
    }
    let caps = *d.caps();
    let max = d.terms().map(|(m, _)| m.a).max().unwrap_or(0);
    let prods = falling_products(max, caps)?;
    let mut out = ScalarSeries::zero(Signature::Z_HBAR_T, caps);
    for (m, c) in d.terms() {
        for (e, pc) in prods[m.a as usize].terms() {
            out.add_term(vec![e[0], e[1] + m.hbar, e[2] + m.t], pc * c);
        }
    }
    Ok(out)
}

/// Splits `r = s o f_0 + (i/hbar)[f_0, K]` with `K` free of diagonal terms.
pub fn split_homological(r: &QSeries) -> Result<(ScalarSeries, QSeries)> {
    let caps = *r.caps();
    let mut diag = QSeries::zero(caps);
    let mut k = QSeries::zero(caps);
    for (m, c) in r.terms() {
        if m.is_diagonal() {
            diag.add_term(*m, c.clone());
        } else {
            let d = 2 * (m.adag as i64 - m.a as i64);
            let denom = &Coefficient::i() * &Coefficient::from_int(d);
            k.add_term(*m, c.checked_div(&denom)?);
        }
    }
    Ok((diagonal_to_scalar(&diag)?, k))
}

/// Output of the normal-form solver.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormResult {
    /// `t`-order through which everything is exact.
    pub order: u32,
    /// `f|_(t=0) = scale * f_0 + shift`.
    pub scale: Coefficient,
    /// Central `hbar`-part of `f|_(t=0)`, in `(hbar, t)`.
    pub shift: ScalarSeries,
    /// `g = (du/dt) / (du/dz)` in `(z, hbar, t)`.
    pub g: ScalarSeries,
    /// Generator of `phi` for [`integrate_heisenberg`].
    pub h: QSeries,
    /// Normalizing germ, `u(0, z) = z`.
    pub u: ScalarSeries,
    /// Inverse of `u` in `z`.
    pub u_inv: ScalarSeries,
    /// `E(n, hbar, t)` with `u(t, E) = scale * hbar (2n + 1) + shift`.
    pub spectrum: ScalarSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub order: u32,
    pub scale: CoefJson,
    pub shift: SeriesJson,
    pub g: SeriesJson,
    #[serde(rename = "H")]
    pub h: SeriesJson,
    pub u: SeriesJson,
    pub u_inv: SeriesJson,
    pub spectrum: SeriesJson,
}

impl NormalFormResult {
    pub fn to_json(&self, approx: bool) -> NormalFormJson {
        NormalFormJson {
            order: self.order,
            scale: (&self.scale).into(),
            shift: scalar_to_json(&self.shift, approx),
            g: scalar_to_json(&self.g, approx),
            h: qseries_to_json(&self.h, approx),
            u: scalar_to_json(&self.u, approx),
            u_inv: scalar_to_json(&self.u_inv, approx),
            spectrum: scalar_to_json(&self.spectrum, approx),
        }
    }

    /// `compose_scalar(u, phi(f)) - f|_(t=0)`, with `phi` replayed from `h`;
    /// zero when the normal form is correct through the caps.
    pub fn replay_defect(&self, f: &QSeries) -> Result<QSeries> {
        let caps = self.h.caps().meet(f.caps());
        let phi_f = integrate_heisenberg(&self.h, &f.with_caps(caps), self.order)?;
        let lhs = compose_cached(&self.u, &phi_f, &mut Vec::new())?;
        Ok(&lhs - &f.with_caps(caps).t_coefficient(0))
    }
}

/// Weight cap making a single-family computation exact through `t^n`.
///
/// A term of weight `w` at `t^l` sets the grading slope `(w - 1)/l`; the cap is
/// `1 + n * max(0, slope)`, and at least the weight of `f|_(t=0)`.
pub fn default_weight_cap(f: &QSeries, n: u32) -> Weight {
    let mut halves = 2u32.max(f.t_coefficient(0).max_weight().halves());
    for (m, _) in f.terms().filter(|(m, _)| m.t > 0) {
        let w = m.weight_halves() as i64;
        if w > 2 {
            let extra = (n as i64 * (w - 2) + m.t as i64 - 1) / m.t as i64;
            halves = halves.max(2 + extra as u32);
        }
    }
    Weight::from_halves(halves)
}

/// Caps for `f` through `t^n` with the default weight cap.
pub fn default_caps(f: &QSeries, n: u32) -> Caps {
    Caps::new(n, default_weight_cap(f, n)).with_term_guard(f.caps().term_guard)
}

/// `f_0 + t g` with caps sufficient for the family through `t^n`.
pub fn harmonic_family(g: &QSeries, n: u32) -> QSeries {
    let wide = Caps::new(n, Weight::from_halves(u32::MAX / 4)).with_term_guard(g.caps().term_guard);
    let f = &harmonic(wide) + &g.with_caps(wide).shift(0, 1);
    let caps = default_caps(&f, n);
    f.with_caps(caps)
}

// u o f with a shared cache of powers of f
fn compose_cached(u: &ScalarSeries, f: &QSeries, powers: &mut Vec<QSeries>) -> Result<QSeries> {
    if u.signature() != Signature::Z_HBAR_T {
        return Err(Error::domain("composition expects a series in (z, hbar, t)"));
    }
    if !f.coefficient(&QMonomial::ONE).is_zero() {
        return Err(Error::domain(
            "composition not t-adically/weight-adically finite: operand has a weight-0, t-order-0 constant term",
        ));
    }
    let caps = *f.caps();
    if powers.is_empty() {
        powers.push(QSeries::one(caps));
    }
    let deg = u.degree_in(Var::Z)?;
    while powers.len() <= deg as usize {
        let next = powers.last().expect("non-empty").mul(f)?;
        powers.push(next);
    }
    let mut out = QSeries::zero(caps);
    for (e, c) in u.terms() {
        out = &out + &powers[e[0] as usize].shift(e[1], e[2]).scale(c);
        caps.guard(out.len(), "composition")?;
    }
    Ok(out)
}

/// Decomposes `f|_(t=0) = c f_0 + kappa(hbar)`.
fn harmonic_base(f: &QSeries) -> Result<(Coefficient, ScalarSeries)> {
    let base = f.t_coefficient(0);
    let caps = *f.caps();
    let c = &base.coefficient_of(1, 1, 0, 0) * &Coefficient::ratio(1, 2);
    let not_harmonic = |why: &str| {
        Error::domain(format!(
            "not a harmonic deformation: {why} (use reduce_to_harmonic / linear_symplectic first)"
        ))
    };
    if c.is_zero() {
        return Err(not_harmonic("f at t=0 has no adag*a term"));
    }
    let rest = &base - &harmonic(caps).scale(&c);
    let mut kappa = ScalarSeries::zero(Signature::HBAR_T, caps);
    for (m, x) in rest.terms() {
        if !m.is_central() {
            return Err(not_harmonic(&format!(
                "f at t=0 contains adag^{} a^{}",
                m.adag, m.a
            )));
        }
        if m.hbar == 0 {
            return Err(not_harmonic(
                "f at t=0 has a constant term; only hbar-dependent central terms are allowed",
            ));
        }
        kappa.add_term(vec![m.hbar, 0], x.clone());
    }
    Ok((c, kappa))
}

fn lift_hbar_t(kappa: &ScalarSeries, caps: Caps) -> Result<ScalarSeries> {
    ScalarSeries::from_terms(
        Signature::Z_HBAR_T,
        caps,
        kappa.terms().map(|(e, c)| (vec![0, e[0], e[1]], c.clone())),
    )
}

/// Solves the normal form of `f` through `t^n`.
///
/// Caps come from `f` (its weight cap should be at least
/// [`default_weight_cap`]); the `t`-cap is lowered to `n`.
pub fn quantum_morse(f: &QSeries, n: u32) -> Result<NormalFormResult> {
    let caps = f.caps().with_t_cap(n.min(f.caps().t_cap));
    let n = caps.t_cap;
    let f = f.with_caps(caps);
    let (scale, kappa) = harmonic_base(&f)?;
    let inv_scale = scale.inv()?;

    // f' = (f - kappa) / c has f'|_(t=0) = f_0
    let fn_ = (&f - &central_to_qseries(&kappa)?).scale(&inv_scale);
    let (g1, hin) = solve_homological(&fn_, n)?;
    let u1 = transport(&g1, n)?;
    let h = outer_generator(&hin, n)?;

    // undo the normalization: u(z) = c u'((z - kappa)/c) + kappa
    let z = ScalarSeries::var(Signature::Z_HBAR_T, Var::Z, caps)?;
    let kappa_z = lift_hbar_t(&kappa, caps)?;
    let arg = z.sub(&kappa_z)?.scale(&inv_scale);
    let u = u1.substitute(Var::Z, &arg)?.scale(&scale).add(&kappa_z)?;
    let g = g1.substitute(Var::Z, &arg)?.scale(&scale);
    let u_inv = invert_series_z(&u)?;

    let mut res = NormalFormResult {
        order: n,
        scale,
        shift: kappa,
        g,
        h,
        u,
        u_inv,
        spectrum: ScalarSeries::zero(Signature::N_HBAR_T, caps),
    };
    res.spectrum = spectrum_closure(&res)?;
    Ok(res)
}

// order-by-order homological solution for f with f|_(t=0) = f_0;
// returns g and the inner-frame generator K
fn solve_homological(f: &QSeries, n: u32) -> Result<(ScalarSeries, QSeries)> {
    let caps = *f.caps();
    let gamma = -&f.t_derivative();
    let mut lower = QSeries::zero(caps);
    let mut g = ScalarSeries::zero(Signature::Z_HBAR_T, caps);
    let mut k_all = QSeries::zero(caps);
    let mut powers = Vec::new();
    for k in 0..n {
        let r = &gamma.t_coefficient(k) - &lower.t_coefficient(k);
        let (s, kk) = split_homological(&r)?;
        let gk = s.shift(Var::T, k)?;
        let hk = kk.shift(0, k);
        if !gk.is_zero() {
            lower = &lower + &compose_cached(&gk, f, &mut powers)?;
        }
        if !hk.is_zero() {
            lower = &lower + &f.bracket(&hk)?;
        }
        if lower.t_coefficient(k) != gamma.t_coefficient(k) {
            return Err(Error::internal(format!(
                "homological equation not solved at order {k}"
            )));
        }
        g = g.add(&gk)?;
        k_all = &k_all + &hk;
    }
    Ok((g, k_all))
}

// u_(k+1) = 1/(k+1) sum_(i+j=k) du_i/dz g_j, u_0 = z
fn transport(g: &ScalarSeries, n: u32) -> Result<ScalarSeries> {
    let caps = *g.caps();
    let sig = Signature::Z_HBAR_T;
    let gs: Vec<ScalarSeries> = (0..=n)
        .map(|j| g.coefficient_in(Var::T, j))
        .collect::<Result<_>>()?;
    let mut us = vec![ScalarSeries::var(sig, Var::Z, caps)?];
    let mut dus = vec![us[0].derivative(Var::Z)?];
    for k in 0..n as usize {
        let mut acc = ScalarSeries::zero(sig, caps);
        for i in 0..=k {
            if !gs[k - i].is_zero() {
                acc = acc.add(&dus[i].mul(&gs[k - i])?)?;
            }
        }
        let next = acc.scale(&Coefficient::ratio(1, k as i64 + 1));
        dus.push(next.derivative(Var::Z)?);
        us.push(next);
    }
    let mut u = ScalarSeries::zero(sig, caps);
    for (k, uk) in us.iter().enumerate() {
        u = u.add(&uk.shift(Var::T, k as u32)?)?;
    }
    Ok(u)
}

// H = phi(K), built order by order: the t^m coefficient of phi(X) needs
// only H_0..H_(m-1)
fn outer_generator(k_all: &QSeries, n: u32) -> Result<QSeries> {
    let caps = *k_all.caps();
    let mut hout: Vec<QSeries> = Vec::new();
    let mut flows: Vec<Vec<QSeries>> = Vec::new();
    for k in 0..n {
        for phi in flows.iter_mut() {
            let next = flow_step(phi, &hout)?;
            phi.push(next);
        }
        flows.push(vec![k_all.t_coefficient(k)]);
        let mut hk = QSeries::zero(caps);
        for (l, phi) in flows.iter().enumerate() {
            hk = &hk + &phi[k as usize - l];
        }
        hout.push(hk);
    }
    Ok(from_t_slices(&hout, caps))
}

/// Compositional inverse in `z` of `u = z + O(t)`.
pub fn invert_series_z(u: &ScalarSeries) -> Result<ScalarSeries> {
    if u.signature() != Signature::Z_HBAR_T {
        return Err(Error::domain("invert_series_z expects a series in (z, hbar, t)"));
    }
    let caps = *u.caps();
    let z = ScalarSeries::var(Signature::Z_HBAR_T, Var::Z, caps)?;
    if u.coefficient_in(Var::T, 0)? != z {
        return Err(Error::domain(
            "invert_series_z: u(t=0, z) must equal z for t-adic inversion",
        ));
    }
    // v <- z - (u(v) - v) gains one t-order per step
    let mut v = z.clone();
    for _ in 0..=caps.t_cap + 1 {
        let uv = u.substitute(Var::Z, &v)?;
        let next = z.sub(&uv.sub(&v)?)?;
        if next == v {
            return Ok(v);
        }
        v = next;
    }
    Ok(v)
}

/// `E(n, hbar, t) = u_inv(t, scale * hbar (2n+1) + shift)`.
pub fn spectrum_closure(res: &NormalFormResult) -> Result<ScalarSeries> {
    let caps = *res.u_inv.caps();
    let sig = Signature::N_HBAR_T;
    let mut level = ScalarSeries::from_terms(
        sig,
        caps,
        [
            (vec![1, 1, 0], &res.scale * &Coefficient::from_int(2)),
            (vec![0, 1, 0], res.scale.clone()),
        ],
    )?;
    for (e, c) in res.shift.terms() {
        level.add_term(vec![0, e[0], e[1]], c.clone());
    }
    res.u_inv.substitute(Var::Z, &level)
}

/// `t -> hbar t` in a spectrum `E(n, hbar, t)`.
pub fn rescale_t(e: &ScalarSeries) -> Result<ScalarSeries> {
    let it = e
        .signature()
        .index(Var::T)
        .ok_or_else(|| Error::domain("series has no t variable"))?;
    let ih = e
        .signature()
        .index(Var::Hbar)
        .ok_or_else(|| Error::domain("series has no hbar variable"))?;
    let caps = e.caps().widen(2 * e.caps().t_cap);
    ScalarSeries::from_terms(
        e.signature(),
        caps,
        e.terms().map(|(x, c)| {
            let mut y = x.clone();
            y[ih] += x[it];
            (y, c.clone())
        }),
    )
}

/// Substitutes `(q, p) -> (m11 q + m12 p, m21 q + m22 p)`; requires `det = 1`.
pub fn linear_symplectic(f: &QSeries, m: &[[Coefficient; 2]; 2]) -> Result<QSeries> {
    let det = &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]);
    if !det.is_one() {
        return Err(Error::domain(format!(
            "linear_symplectic: determinant is {det}, must be 1"
        )));
    }
    let caps = *f.caps();
    let (q, p) = (QSeries::q(caps), QSeries::p(caps));
    let q2 = &q.scale(&m[0][0]) + &p.scale(&m[0][1]);
    let p2 = &q.scale(&m[1][0]) + &p.scale(&m[1][1]);
    let view = to_pq(f)?;
    let max_q = view.terms().map(|(e, _)| e[0]).max().unwrap_or(0);
    let max_p = view.terms().map(|(e, _)| e[1]).max().unwrap_or(0);
    let qp = powers(&q2, max_q)?;
    let pp = powers(&p2, max_p)?;
    let mut out = QSeries::zero(caps);
    for ([a, b, h, t], c) in view.terms() {
        let w = qp[a as usize].mul(&pp[b as usize])?;
        out = &out + &w.shift(h, t).scale(c);
    }
    Ok(out)
}

fn powers(x: &QSeries, n: u32) -> Result<Vec<QSeries>> {
    let mut v = vec![QSeries::one(*x.caps())];
    for k in 1..=n as usize {
        let next = v[k - 1].mul(x)?;
        v.push(next);
    }
    Ok(v)
}

/// Normal form of a `t`-free Morse operator `f0` with harmonic quadratic
/// part, through the interpolation `Q + t (f0 - Q)`; read the result at `t = 1`.
///
/// `Q = c (p^2 + q^2) + (hbar-central part of f0)`.
pub fn reduce_to_harmonic(f0: &QSeries, n: u32) -> Result<NormalFormResult> {
    let fam = interpolation_family(f0, n)?;
    quantum_morse(&fam, n)
}

/// The family `Q + t (f0 - Q)` used by [`reduce_to_harmonic`].
pub fn interpolation_family(f0: &QSeries, n: u32) -> Result<QSeries> {
    if !f0.is_t_free() {
        return Err(Error::domain("reduce_to_harmonic expects a t-free operator"));
    }
    let not_morse = |why: &str| Error::domain(format!("not Morse: {why}"));
    if !f0.coefficient(&QMonomial::ONE).is_zero() {
        return Err(not_morse("nonzero constant term; shift the energy first"));
    }
    if !f0.coefficient_of(1, 0, 0, 0).is_zero() || !f0.coefficient_of(0, 1, 0, 0).is_zero() {
        return Err(not_morse("nonzero linear part"));
    }
    let alpha = f0.coefficient_of(2, 0, 0, 0);
    let beta = f0.coefficient_of(1, 1, 0, 0);
    let gamma = f0.coefficient_of(0, 2, 0, 0);
    let disc = &(&beta * &beta) - &(&(&alpha * &gamma) * &Coefficient::from_int(4));
    if disc.is_zero() {
        return Err(not_morse("degenerate Hessian"));
    }
    if !alpha.is_zero() || !gamma.is_zero() {
        return Err(Error::domain(
            "quadratic part is Morse but not of the form c(p^2+q^2); precondition with linear_symplectic",
        ));
    }
    let wide = f0.caps().with_t_cap(n).widen(2);
    let c = &beta * &Coefficient::ratio(1, 2);
    let mut q = harmonic(wide).scale(&c);
    let excess = &f0.with_caps(wide) - &q;
    for (m, x) in excess.terms().filter(|(m, _)| m.is_central() && m.hbar > 0) {
        q.add_term(*m, x.clone());
    }
    let rest = &f0.with_caps(wide) - &q.with_caps(wide);
    let fam = &q + &rest.shift(0, 1);
    let caps = default_caps(&fam, n).meet(&Caps::new(n, Weight::from_halves(u32::MAX / 4)));
    let caps = Caps {
        weight_cap: caps.weight_cap.max(f0.caps().weight_cap),
        ..caps
    };
    Ok(fam.with_caps(caps))
}

/// Coefficient of `q` in a `q`-before-`p` view; a convenience for building
/// matrices of linear substitutions in tests and the CLI.
pub fn pq_coefficient(f: &QSeries, qe: u32, pe: u32) -> Result<Coefficient> {
    Ok(PqPolynomial::from_qseries(f, PqOrder::QBeforeP)?.coefficient(qe, pe, 0, 0))
}
