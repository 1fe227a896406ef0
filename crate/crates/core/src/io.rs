//! The `qseries-v1` JSON interchange format.
//!
//! ```json
//! {"format":"qseries-v1","vars":["adag","a","hbar","t"],"t_cap":4,"weight_cap":"9/2",
//!  "terms":[{"exp":[1,1,0,0],"coef":{"r":"2","i":"0","r2":"0","ir2":"0"}}]}
//! ```
//!
//! Terms are emitted in the canonical (sorted) monomial order, so equal
//! series serialize to identical bytes.

use serde::{Deserialize, Serialize};

use crate::algebra::{Caps, QMonomial, QSeries, ScalarSeries, Signature, Weight};
use crate::coeff::{rational_string, Coefficient};
use crate::error::{Error, Result};

pub const FORMAT: &str = "qseries-v1";
pub const QSERIES_VARS: [&str; 4] = ["adag", "a", "hbar", "t"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefJson {
    pub r: String,
    pub i: String,
    pub r2: String,
    pub ir2: String,
}

impl From<&Coefficient> for CoefJson {
    fn from(c: &Coefficient) -> Self {
        let [r, i, r2, ir2] = c.components().map(rational_string);
        CoefJson { r, i, r2, ir2 }
    }
}

impl CoefJson {
    pub fn to_coefficient(&self) -> Result<Coefficient> {
        Coefficient::from_parts(&self.r, &self.i, &self.r2, &self.ir2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: CoefJson,
    /// Optional float rendering `[re, im]`; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub format: String,
    pub vars: Vec<String>,
    pub t_cap: u32,
    pub weight_cap: String,
    pub terms: Vec<TermJson>,
}

fn term(exp: Vec<u32>, c: &Coefficient, approx: bool) -> TermJson {
    TermJson {
        exp,
        coef: c.into(),
        approx: approx.then(|| {
            let z = c.to_complex();
            [z.re, z.im]
        }),
    }
}

fn check_header(s: &SeriesJson) -> Result<Caps> {
    if s.format != FORMAT {
        return Err(Error::format(format!(
            "unsupported format {:?}, expected {FORMAT:?}",
            s.format
        )));
    }
    let w: Weight = s.weight_cap.parse()?;
    Ok(Caps::new(s.t_cap, w))
}

pub fn qseries_to_json(f: &QSeries, approx: bool) -> SeriesJson {
    SeriesJson {
        format: FORMAT.into(),
        vars: QSERIES_VARS.iter().map(|s| s.to_string()).collect(),
        t_cap: f.caps().t_cap,
        weight_cap: f.caps().weight_cap.to_string(),
        terms: f
            .terms()
            .map(|(m, c)| term(m.exponents().to_vec(), c, approx))
            .collect(),
    }
}

pub fn qseries_from_json(s: &SeriesJson) -> Result<QSeries> {
    let caps = check_header(s)?;
    if s.vars != QSERIES_VARS {
        return Err(Error::format(format!(
            "QSeries vars must be {QSERIES_VARS:?}, got {:?}",
            s.vars
        )));
    }
    let mut out = QSeries::zero(caps);
    for t in &s.terms {
        let [m, n, k, l]: [u32; 4] = t
            .exp
            .as_slice()
            .try_into()
            .map_err(|_| Error::format(format!("exponent {:?} must have 4 entries", t.exp)))?;
        out.add_term(QMonomial::new(m, n, k, l), t.coef.to_coefficient()?);
    }
    Ok(out)
}

pub fn scalar_to_json(f: &ScalarSeries, approx: bool) -> SeriesJson {
    SeriesJson {
        format: FORMAT.into(),
        vars: f.signature().names().iter().map(|s| s.to_string()).collect(),
        t_cap: f.caps().t_cap,
        weight_cap: f.caps().weight_cap.to_string(),
        terms: f.terms().map(|(e, c)| term(e.clone(), c, approx)).collect(),
    }
}

pub fn scalar_from_json(s: &SeriesJson) -> Result<ScalarSeries> {
    let caps = check_header(s)?;
    let sig = Signature::from_names(&s.vars)?;
    let terms = s
        .terms
        .iter()
        .map(|t| Ok((t.exp.clone(), t.coef.to_coefficient()?)))
        .collect::<Result<Vec<_>>>()?;
    ScalarSeries::from_terms(sig, caps, terms)
}

/// Canonical compact JSON text of a series (no float renderings).
pub fn qseries_to_string(f: &QSeries) -> String {
    serde_json::to_string(&qseries_to_json(f, false)).expect("series JSON is always serializable")
}

pub fn scalar_to_string(f: &ScalarSeries) -> String {
    serde_json::to_string(&scalar_to_json(f, false)).expect("series JSON is always serializable")
}

pub fn parse_series_json(text: &str) -> Result<SeriesJson> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("invalid series JSON: {e}")))
}

pub fn qseries_from_str(text: &str) -> Result<QSeries> {
    qseries_from_json(&parse_series_json(text)?)
}

pub fn scalar_from_str(text: &str) -> Result<ScalarSeries> {
    scalar_from_json(&parse_series_json(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Var;

    #[test]
    fn qseries_roundtrip() {
        let caps = Caps::new(3, Weight::from_halves(9));
        let f = QSeries::from_terms(
            caps,
            [
                (QMonomial::new(1, 1, 0, 0), Coefficient::from_int(2)),
                (QMonomial::new(0, 0, 1, 2), Coefficient::ratio(-3, 4)),
                (QMonomial::new(2, 0, 0, 1), &Coefficient::sqrt2() * &Coefficient::i()),
            ],
        );
        let text = qseries_to_string(&f);
        assert!(text.starts_with(r#"{"format":"qseries-v1","vars":["adag","a","hbar","t"],"t_cap":3,"weight_cap":"9/2""#));
        assert!(text.contains(r#""r":"-3/4""#));
        assert_eq!(qseries_from_str(&text).unwrap(), f);
        let with_floats = serde_json::to_string(&qseries_to_json(&f, true)).unwrap();
        assert_eq!(qseries_from_str(&with_floats).unwrap(), f);
    }

    #[test]
    fn scalar_roundtrip() {
        let caps = Caps::new(2, Weight::integer(4));
        let z = ScalarSeries::var(Signature::Z_HBAR_T, Var::Z, caps).unwrap();
        let f = z.mul(&z).unwrap().scale(&Coefficient::ratio(1, 3));
        let text = scalar_to_string(&f);
        assert!(text.contains(r#""vars":["z","hbar","t"]"#));
        assert_eq!(scalar_from_str(&text).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(qseries_from_str("{}"), Err(Error::Format(_))));
        let bad = r#"{"format":"qseries-v2","vars":["adag","a","hbar","t"],"t_cap":1,"weight_cap":"1","terms":[]}"#;
        assert!(matches!(qseries_from_str(bad), Err(Error::Format(_))));
        let bad = r#"{"format":"qseries-v1","vars":["adag","a","hbar","t"],"t_cap":1,"weight_cap":"1","terms":[{"exp":[1],"coef":{"r":"1","i":"0","r2":"0","ir2":"0"}}]}"#;
        assert!(matches!(qseries_from_str(bad), Err(Error::Format(_))));
    }
}
