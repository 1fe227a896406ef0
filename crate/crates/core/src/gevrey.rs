//! Borel/Gevrey growth diagnostics for perturbative coefficient lists.
//!
//! For `E = sum alpha_k lambda^k` the Borel coefficients are
//! `beta_k = alpha_k / k!`. Gevrey-1 growth means the ratios
//! `|beta_(k+1) / beta_k|` stay bounded, i.e. the Borel transform has a
//! positive radius of convergence.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{ScalarSeries, Signature};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};

/// Slope of `log ratio` vs `log k` above which growth is super-factorial.
pub const DEFAULT_SLOPE_LIMIT: f64 = 0.5;
/// `max / min` of the ratios below which they count as a bounded band.
pub const DEFAULT_BAND_LIMIT: f64 = 4.0;
/// Fewest nonzero coefficients in the window for a non-inconclusive verdict.
pub const MIN_NONZERO: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "gevrey1-consistent")]
    Gevrey1Consistent,
    #[serde(rename = "inconclusive")]
    Inconclusive,
    #[serde(rename = "violated")]
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub k: usize,
    pub ratio: f64,
}

/// Growth diagnostics of one coefficient list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorelReport {
    pub source: String,
    /// Ratio indices `k` analysed, `|beta_(k+1)/beta_k|` for `k` in `[kmin, kmax]`.
    pub window: [usize; 2],
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub ratios: Vec<RatioEntry>,
    /// Cauchy–Hadamard roots `|beta_k|^(1/k)`, `k >= 1` (null for zero coefficients).
    pub roots: Vec<Option<f64>>,
    pub slope: Option<f64>,
    pub band: Option<f64>,
    pub radius: Option<f64>,
    pub verdict: Verdict,
}

/// Thresholds of the verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub slope: f64,
    pub band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            slope: DEFAULT_SLOPE_LIMIT,
            band: DEFAULT_BAND_LIMIT,
        }
    }
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 900;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln |c|` without overflow for rational `c`; `None` for zero.
pub fn ln_abs(c: &Coefficient) -> Option<f64> {
    if c.is_zero() {
        return None;
    }
    if let Some(r) = c.as_rational() {
        return Some(ln_bigint(r.numer()) - ln_bigint(r.denom()));
    }
    Some(c.to_complex().norm().ln())
}

fn sign_of(c: &Coefficient) -> f64 {
    match c.as_rational() {
        Some(r) if r.numer().sign() == Sign::Minus => -1.0,
        Some(_) => 1.0,
        None => c.to_complex().re.signum(),
    }
}

/// Diagnostics of `alpha_0, alpha_1, ...` over ratio indices `[kmin, kmax]`
/// (`kmax` clamped to the data).
pub fn gevrey_report(
    alpha: &[Coefficient],
    window: (usize, usize),
    source: &str,
) -> BorelReport {
    let logs: Vec<Option<f64>> = alpha.iter().map(ln_abs).collect();
    let signs: Vec<f64> = alpha.iter().map(sign_of).collect();
    let mut r = report_from_logs(&logs, &signs, window, source, Thresholds::default());
    // exact renderings where they fit in a double
    for (k, c) in alpha.iter().enumerate() {
        let Some(x) = c.as_rational() else { continue };
        let beta = x / BigRational::from_integer(crate::algebra::ops::factorial(k as u32));
        if let Some(v) = x.to_f64().filter(|v| v.is_finite()) {
            r.alpha[k] = v;
        }
        if let Some(v) = beta.to_f64().filter(|v| v.is_finite() && (*v != 0.0 || x.is_zero())) {
            r.beta[k] = v;
        }
    }
    r
}

/// As [`gevrey_report`] with explicit thresholds, starting from `ln |alpha_k|`.
pub fn report_from_logs(
    ln_alpha: &[Option<f64>],
    signs: &[f64],
    window: (usize, usize),
    source: &str,
    th: Thresholds,
) -> BorelReport {
    let n = ln_alpha.len();
    let ln_beta: Vec<Option<f64>> = ln_alpha
        .iter()
        .enumerate()
        .map(|(k, l)| l.map(|v| v - ln_factorial(k)))
        .collect();
    let value = |l: &Option<f64>, s: f64| l.map_or(0.0, |v| s * v.exp());
    let alpha: Vec<f64> = ln_alpha.iter().zip(signs).map(|(l, s)| value(l, *s)).collect();
    let beta: Vec<f64> = ln_beta.iter().zip(signs).map(|(l, s)| value(l, *s)).collect();
    let roots = (1..n).map(|k| ln_beta[k].map(|v| (v / k as f64).exp())).collect();

    let kmin = window.0;
    let kmax = window.1.min(n.saturating_sub(2));
    // per-step ratios between consecutive nonzero coefficients
    let mut ratios = Vec::new();
    let nonzero: Vec<usize> = (kmin..=(kmax + 1).min(n.saturating_sub(1)))
        .filter(|&k| ln_beta[k].is_some())
        .collect();
    for w in nonzero.windows(2) {
        let (a, b) = (w[0], w[1]);
        let per_step = (ln_beta[b].unwrap() - ln_beta[a].unwrap()) / (b - a) as f64;
        ratios.push(RatioEntry {
            k: a,
            ratio: per_step.exp(),
        });
    }

    let enough = nonzero.len() >= MIN_NONZERO && ratios.len() >= 2;
    let slope = fit_slope(&ratios);
    let band = if ratios.is_empty() {
        None
    } else {
        let max = ratios.iter().map(|r| r.ratio).fold(f64::MIN, f64::max);
        let min = ratios.iter().map(|r| r.ratio).fold(f64::MAX, f64::min);
        Some(max / min)
    };
    let radius = if ratios.is_empty() {
        None
    } else {
        let top = &ratios[ratios.len() / 2..];
        let mut v: Vec<f64> = top.iter().map(|r| r.ratio).collect();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let median = if m % 2 == 1 {
            v[m / 2]
        } else {
            (v[m / 2 - 1] + v[m / 2]) / 2.0
        };
        Some(1.0 / median)
    };
    let verdict = if !enough {
        Verdict::Inconclusive
    } else if slope.is_some_and(|s| s > th.slope) {
        Verdict::Violated
    } else if band.is_some_and(|b| b < th.band) {
        Verdict::Gevrey1Consistent
    } else {
        Verdict::Inconclusive
    };
    BorelReport {
        source: source.to_string(),
        window: [kmin, kmax],
        alpha,
        beta,
        ratios,
        roots,
        slope,
        band,
        radius,
        verdict,
    }
}

// least-squares slope of ln(ratio) against ln(k), k >= 1
fn fit_slope(ratios: &[RatioEntry]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ratios
        .iter()
        .filter(|r| r.k >= 1)
        .map(|r| ((r.k as f64).ln(), r.ratio.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let den = m * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return None;
    }
    Some((m * sxy - sx * sy) / den)
}

/// Coefficients `alpha_l` of `E(n*, hbar, t) / hbar = sum_l alpha_l lambda^l`,
/// `lambda = t hbar^w`, with `w = w_halves / 2`.
///
/// Every term `t^l hbar^k` must satisfy `k - 1 = l w`.
pub fn extract_diagonal(e: &ScalarSeries, level: u32, w_halves: i32) -> Result<Vec<Coefficient>> {
    let e = if e.signature() == Signature::N_HBAR_T {
        crate::spectrum::level_series(e, level)?
    } else if e.signature() == Signature::HBAR_T {
        e.clone()
    } else {
        return Err(Error::domain(
            "extract_diagonal expects a series in (n, hbar, t) or (hbar, t)",
        ));
    };
    let len = e.caps().t_cap as usize + 1;
    let mut out = vec![Coefficient::zero(); len];
    for (x, c) in e.terms() {
        let (k, l) = (x[0] as i64, x[1] as i64);
        if 2 * (k - 1) != l * w_halves as i64 {
            return Err(Error::domain(format!(
                "homogeneity violated: term t^{l} hbar^{k} does not satisfy k - 1 = l * {}/2",
                w_halves
            )));
        }
        if (l as usize) < len {
            out[l as usize] = c.clone();
        }
    }
    Ok(out)
}

/// True iff every monomial `t^l hbar^k n^j` satisfies `k = l (d/2 - 1) + 1`.
pub fn homogeneity_check(e: &ScalarSeries, d: u32) -> bool {
    let sig = e.signature();
    let (Some(ih), Some(it)) = (sig.index(crate::algebra::Var::Hbar), sig.index(crate::algebra::Var::T))
    else {
        return false;
    };
    e.terms().all(|(x, _)| {
        let (k, l) = (x[ih] as i64, x[it] as i64);
        2 * k == l * (d as i64 - 2) + 2
    })
}

/// Scales `alpha_k -> k! alpha_k`; the control that must flip a Gevrey-1
/// verdict to violated.
pub fn factorial_boost(alpha: &[Coefficient]) -> Vec<Coefficient> {
    alpha
        .iter()
        .enumerate()
        .map(|(k, c)| c.scale_int(&crate::algebra::ops::factorial(k as u32)))
        .collect()
}

/// True if `x` is zero; a convenience for trimmed coefficient tables.
pub fn is_zero_coefficient(x: &Coefficient) -> bool {
    x.is_zero() || x.as_rational().is_some_and(|r| r.numer().is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ops::factorial;
    use crate::algebra::{Caps, Weight};

    fn facs(n: u32, power: u32) -> Vec<Coefficient> {
        (0..n)
            .map(|k| Coefficient::from_bigint(factorial(k).pow(power)))
            .collect()
    }

    #[test]
    fn factorial_is_consistent() {
        let r = gevrey_report(&facs(17, 1), (10, 15), "k!");
        assert_eq!(r.verdict, Verdict::Gevrey1Consistent);
        for x in &r.ratios {
            assert!((x.ratio - 1.0).abs() < 1e-12);
        }
        assert!((r.radius.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squared_factorial_is_violated() {
        let r = gevrey_report(&facs(17, 2), (10, 15), "(k!)^2");
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.slope.unwrap() > 0.9);
    }

    #[test]
    fn too_few_is_inconclusive() {
        let r = gevrey_report(&facs(5, 1), (0, 4), "short");
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn scale_equivariance() {
        let base = facs(17, 1);
        let r0 = gevrey_report(&base, (4, 15), "base");
        let scaled: Vec<Coefficient> = base
            .iter()
            .enumerate()
            .map(|(k, c)| c * &(&Coefficient::from_int(5) * &Coefficient::ratio(3, 2).pow(k as u32)))
            .collect();
        let r1 = gevrey_report(&scaled, (4, 15), "scaled");
        assert_eq!(r0.verdict, r1.verdict);
        assert!((r1.radius.unwrap() - r0.radius.unwrap() / 1.5).abs() < 1e-12);
    }

    #[test]
    fn zeros_are_skipped() {
        // alpha_(2j) = (2j)!, odd ones zero: per-step ratios stay 1
        let a: Vec<Coefficient> = (0..30u32)
            .map(|k| {
                if k % 2 == 0 {
                    Coefficient::from_bigint(factorial(k))
                } else {
                    Coefficient::zero()
                }
            })
            .collect();
        let r = gevrey_report(&a, (2, 26), "even");
        assert_eq!(r.verdict, Verdict::Gevrey1Consistent);
        assert!(r.ratios.iter().all(|x| (x.ratio - 1.0).abs() < 1e-12));
    }

    #[test]
    fn huge_coefficients_do_not_overflow() {
        let r = gevrey_report(&facs(200, 1), (100, 198), "big");
        assert_eq!(r.verdict, Verdict::Gevrey1Consistent);
        assert!(r.ratios.iter().all(|x| (x.ratio - 1.0).abs() < 1e-9));
    }

    #[test]
    fn extraction_and_homogeneity() {
        let caps = Caps::new(3, Weight::integer(6));
        let e = ScalarSeries::from_terms(
            Signature::N_HBAR_T,
            caps,
            [
                (vec![1, 1, 0], Coefficient::from_int(2)),
                (vec![0, 1, 0], Coefficient::one()),
                (vec![0, 2, 1], Coefficient::ratio(3, 4)),
                (vec![0, 3, 2], Coefficient::ratio(-21, 16)),
            ],
        )
        .unwrap();
        assert!(homogeneity_check(&e, 4));
        assert!(!homogeneity_check(&e, 3));
        let a = extract_diagonal(&e, 0, 2).unwrap();
        assert_eq!(
            a,
            vec![
                Coefficient::one(),
                Coefficient::ratio(3, 4),
                Coefficient::ratio(-21, 16),
                Coefficient::zero()
            ]
        );
        let a2 = extract_diagonal(&e, 2, 2).unwrap();
        assert_eq!(a2[0], Coefficient::from_int(5));
        let mut bad = e.clone();
        bad.add_term(vec![0, 2, 2], Coefficient::one());
        assert!(!homogeneity_check(&bad, 4));
        assert!(extract_diagonal(&bad, 0, 2).is_err());
    }

    #[test]
    fn linear_family_extraction() {
        // hbar(2n+1) - t^2/4: w = -1/2
        let caps = Caps::new(4, Weight::integer(2));
        let e = ScalarSeries::from_terms(
            Signature::N_HBAR_T,
            caps,
            [
                (vec![1, 1, 0], Coefficient::from_int(2)),
                (vec![0, 1, 0], Coefficient::one()),
                (vec![0, 0, 2], Coefficient::ratio(-1, 4)),
            ],
        )
        .unwrap();
        let a = extract_diagonal(&e, 3, -1).unwrap();
        assert_eq!(a[0], Coefficient::from_int(7));
        assert_eq!(a[2], Coefficient::ratio(-1, 4));
        assert!(a[3].is_zero() && a[4].is_zero() && a[1].is_zero());
        assert!(homogeneity_check(&e, 1));
    }

    #[test]
    fn boost_flips_consistent_to_violated() {
        let base = facs(17, 1);
        assert_eq!(
            gevrey_report(&factorial_boost(&base), (10, 15), "boost").verdict,
            Verdict::Violated
        );
    }
}
