use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use qmorse_core::algebra::{borel, borel_scalar, dagger, principal_symbol, total_symbol};
use qmorse_core::coeff::parse_rational;
use qmorse_core::flow::integrate_heisenberg;
use qmorse_core::gevrey::{extract_diagonal, gevrey_report, BorelReport};
use qmorse_core::io::{qseries_to_json, scalar_to_json};
use qmorse_core::milnor::{check_versal, milnor_report, versality_dimension};
use qmorse_core::normal_form::{harmonic, harmonic_family, quantum_morse, rescale_t};
use qmorse_core::spectrum::{diagonalize, fock_matrix, level_series, rs_perturbation, trace_hbar};
use qmorse_core::{Caps, Coefficient, QSeries, ScalarSeries, Var, Weight};

use crate::expr::{elaborate, elaborate_family, parse_expr, unbounded_caps};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qmorse", version, about = "Exact quantum Morse normal forms and spectral oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CapArgs {
    /// Highest retained power of t.
    #[arg(long)]
    pub t_cap: Option<u32>,
    /// Highest retained weight (adag, a, q, p weigh 1/2; hbar weighs 1), e.g. 4 or 9/2.
    #[arg(long)]
    pub weight_cap: Option<String>,
}

impl CapArgs {
    fn caps(&self) -> Result<Caps, CliError> {
        let mut c = unbounded_caps();
        if let Some(t) = self.t_cap {
            c = c.with_t_cap(t);
        }
        if let Some(w) = &self.weight_cap {
            c = c.with_weight_cap(w.parse::<Weight>()?);
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Rs,
    NormalForm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Product A*B.
    Mul {
        a: String,
        b: String,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Commutator [A, B] = AB - BA.
    Commutator {
        a: String,
        b: String,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Hermitian conjugate.
    Dagger {
        a: String,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Borel transform in hbar.
    Borel {
        a: String,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Total and principal symbols.
    Symbol {
        a: String,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Heisenberg flow of an observable.
    Flow {
        #[arg(long)]
        hamiltonian: String,
        #[arg(long)]
        observable: String,
        #[arg(long)]
        order: u32,
        /// Defaults to the weight bound of the exact flow.
        #[arg(long)]
        weight_cap: Option<String>,
    },
    /// Normal form of p^2 + q^2 + t*G.
    NormalForm {
        #[arg(long)]
        perturbation: String,
        #[arg(long)]
        order: u32,
        /// Report the spectrum with t replaced by hbar*t.
        #[arg(long)]
        rescale_t: bool,
    },
    /// Spectrum E(n, hbar, t) of p^2 + q^2 + t*G from the normal form.
    Spectrum {
        #[arg(long)]
        perturbation: String,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        rescale_t: bool,
    },
    /// Rayleigh-Schroedinger series of one level (independent oracle).
    Rs {
        #[arg(long)]
        perturbation: String,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        order: u32,
    },
    /// Numeric eigenvalues in a truncated Fock basis.
    Diag {
        #[arg(long)]
        perturbation: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Write the matrix as CSV (row-major re,im pairs).
        #[arg(long)]
        export_matrix: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Borel/Gevrey growth diagnostics.
    Gevrey {
        /// Perturbation G; coefficients are taken from the spectrum of p^2 + q^2 + t*G.
        #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
        from_spectrum: Option<String>,
        /// File of coefficients alpha_0, alpha_1, ...: a JSON array or rationals separated by whitespace/commas.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Ratio indices K1:K2.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long, default_value_t = 16)]
        order: u32,
        #[arg(long, value_enum, default_value_t = Source::Rs)]
        source: Source,
        /// Exponent w of lambda = t hbar^w, in half-units; inferred when omitted.
        #[arg(long, allow_negative_numbers = true)]
        w_halves: Option<i32>,
        #[arg(long)]
        csv: bool,
    },
    /// hbar-trace sum_(n<=M) <n|A|n> and its Borel transform.
    Trace {
        a: String,
        #[arg(long)]
        levels: u32,
    },
    /// Milnor number of a plane curve symbol in x, y (q, p accepted).
    Milnor {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 12)]
        cutoff: u32,
    },
    /// Versality check of a family with linear parameters.
    Versal {
        #[arg(long)]
        symbol: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
        #[arg(long, default_value_t = 12)]
        cutoff: u32,
    },
}

fn operator(text: &str, caps: Caps) -> Result<QSeries, CliError> {
    Ok(elaborate(&parse_expr(text)?, caps)?)
}

fn series_json(f: &QSeries) -> Value {
    serde_json::to_value(qseries_to_json(f, true)).expect("serializable")
}

fn scalar_json(f: &ScalarSeries) -> Value {
    serde_json::to_value(scalar_to_json(f, true)).expect("serializable")
}

fn family(g_text: &str, order: u32) -> Result<QSeries, CliError> {
    let g = operator(g_text, unbounded_caps())?;
    Ok(harmonic_family(&g, order))
}

fn parse_window(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("invalid window {s:?}: expected K1:K2"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Reads coefficients from a JSON array (strings or numbers) or from
/// whitespace/comma separated rationals; `#` starts a comment.
pub fn parse_coefficients(text: &str) -> Result<Vec<Coefficient>, CliError> {
    let t = text.trim_start();
    if t.starts_with('[') {
        let v: Vec<Value> =
            serde_json::from_str(t).map_err(|e| CliError::Input(format!("coefficient file: {e}")))?;
        return v
            .iter()
            .map(|x| match x {
                Value::String(s) => Ok(Coefficient::from_rational(parse_rational(s)?)),
                Value::Number(n) => {
                    let f = n.as_f64().unwrap_or(f64::NAN);
                    BigRational::from_float(f)
                        .map(Coefficient::from_rational)
                        .ok_or_else(|| CliError::Input(format!("non-finite coefficient {n}")))
                }
                other => Err(CliError::Input(format!("unexpected coefficient {other}"))),
            })
            .collect();
    }
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
            out.push(Coefficient::from_rational(parse_rational(tok)?));
        }
    }
    Ok(out)
}

// the w with every term t^l hbar^k satisfying 2(k - 1) = l w_halves
fn infer_w_halves(e: &ScalarSeries) -> Result<i32, CliError> {
    let sig = e.signature();
    let (ih, it) = (
        sig.index(Var::Hbar).expect("hbar"),
        sig.index(Var::T).expect("t"),
    );
    let mut w = None;
    for (x, _) in e.terms().filter(|(x, _)| x[it] > 0) {
        let num = 2 * (x[ih] as i64 - 1);
        let l = x[it] as i64;
        if num % l != 0 {
            return Err(qmorse_core::Error::domain("spectrum is not homogeneous in t hbar^w").into());
        }
        let this = (num / l) as i32;
        if w.is_some_and(|v| v != this) {
            return Err(qmorse_core::Error::domain("spectrum is not homogeneous in t hbar^w").into());
        }
        w = Some(this);
    }
    Ok(w.unwrap_or(0))
}

fn report_csv(r: &BorelReport) -> String {
    let mut s = String::from("k,alpha,beta,ratio,root\n");
    for k in 0..r.alpha.len() {
        let ratio = r
            .ratios
            .iter()
            .find(|x| x.k == k)
            .map_or(String::new(), |x| format!("{:e}", x.ratio));
        let root = if k == 0 {
            String::new()
        } else {
            r.roots[k - 1].map_or(String::new(), |x| format!("{x:e}"))
        };
        s.push_str(&format!("{k},{:e},{:e},{ratio},{root}\n", r.alpha[k], r.beta[k]));
    }
    s
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Runs a parsed command; returns the text for stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    use Command::*;
    let out = match cli.command {
        Mul { a, b, caps } => {
            let c = caps.caps()?;
            series_json(&operator(&a, c)?.mul(&operator(&b, c)?)?)
        }
        Commutator { a, b, caps } => {
            let c = caps.caps()?;
            series_json(&operator(&a, c)?.commutator(&operator(&b, c)?)?)
        }
        Dagger { a, caps } => series_json(&dagger(&operator(&a, caps.caps()?)?)),
        Borel { a, caps } => series_json(&borel(&operator(&a, caps.caps()?)?)),
        Symbol { a, caps } => {
            let f = operator(&a, caps.caps()?)?;
            json!({
                "total": scalar_json(&total_symbol(&f)),
                "principal": scalar_json(&principal_symbol(&f)),
            })
        }
        Flow {
            hamiltonian,
            observable,
            order,
            weight_cap,
        } => {
            let h = operator(&hamiltonian, unbounded_caps())?;
            let x = operator(&observable, unbounded_caps())?;
            let w = match weight_cap {
                Some(w) => w.parse::<Weight>()?,
                None => {
                    // each bracket with H adds w(H) - 1; H itself must fit too
                    let growth = h.max_weight().halves().saturating_sub(2);
                    let bound = x.max_weight().halves() + order * growth;
                    Weight::from_halves(bound.max(h.max_weight().halves()))
                }
            };
            let caps = Caps::new(order, w);
            series_json(&integrate_heisenberg(&h.with_caps(caps), &x.with_caps(caps), order)?)
        }
        NormalForm {
            perturbation,
            order,
            rescale_t: rescale,
        } => {
            let f = family(&perturbation, order)?;
            let mut res = quantum_morse(&f, order)?;
            if rescale {
                res.spectrum = rescale_t(&res.spectrum)?;
            }
            serde_json::to_value(res.to_json(true)).expect("serializable")
        }
        Spectrum {
            perturbation,
            order,
            level,
            rescale_t: rescale,
        } => {
            let f = family(&perturbation, order)?;
            let mut e = quantum_morse(&f, order)?.spectrum;
            if let Some(n) = level {
                e = level_series(&e, n)?;
            }
            if rescale {
                e = rescale_t(&e)?;
            }
            scalar_json(&e)
        }
        Rs {
            perturbation,
            level,
            order,
        } => scalar_json(&rs_perturbation(&family(&perturbation, order)?, level, order)?),
        Diag {
            perturbation,
            t,
            hbar,
            dim,
            levels,
            export_matrix,
            csv,
        } => {
            let c = unbounded_caps();
            let g = operator(&perturbation, c)?;
            let f = &harmonic(c) + &g.shift(0, 1);
            if let Some(path) = export_matrix {
                std::fs::write(path, fock_matrix(&f, dim, t, hbar)?.to_csv())?;
            }
            let r = diagonalize(&f, t, hbar, dim, levels)?;
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
            if csv {
                let mut s = String::from("level,re,im\n");
                for (k, [re, im]) in r.eigenvalues.iter().enumerate() {
                    s.push_str(&format!("{k},{re:.17e},{im:.17e}\n"));
                }
                return Ok(s);
            }
            serde_json::to_value(r).expect("serializable")
        }
        Gevrey {
            from_spectrum,
            coeffs,
            window,
            level,
            order,
            source,
            w_halves,
            csv,
        } => {
            let (alpha, label) = match (from_spectrum, coeffs) {
                (Some(g), _) => {
                    let f = family(&g, order)?;
                    let e = match source {
                        Source::Rs => rs_perturbation(&f, level, order)?,
                        Source::NormalForm => level_series(&quantum_morse(&f, order)?.spectrum, level)?,
                    };
                    let w = match w_halves {
                        Some(w) => w,
                        None => infer_w_halves(&e)?,
                    };
                    let src = match source {
                        Source::Rs => "rs",
                        Source::NormalForm => "normal-form",
                    };
                    (
                        extract_diagonal(&e, level, w)?,
                        format!("{src} level {level} of p^2+q^2+t*({g}), lambda = t hbar^({w}/2)"),
                    )
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)?;
                    (parse_coefficients(&text)?, path.display().to_string())
                }
                (None, None) => return Err(CliError::Input("need --from-spectrum or --coeffs".into())),
            };
            let n = alpha.len();
            let win = match window {
                Some(w) => parse_window(&w)?,
                None => (n / 2, n.saturating_sub(2)),
            };
            let report = gevrey_report(&alpha, win, &label);
            if csv {
                return Ok(report_csv(&report));
            }
            serde_json::to_value(report).expect("serializable")
        }
        Trace { a, levels } => {
            let f = operator(&a, unbounded_caps())?;
            let tr = trace_hbar(&f, levels);
            json!({
                "trace": scalar_json(&tr),
                "borel": scalar_json(&borel_scalar(&tr)?),
            })
        }
        Milnor { symbol, cutoff } => {
            let fam = elaborate_family(&parse_expr(&symbol)?, &[])?;
            serde_json::to_value(milnor_report(&fam.base, cutoff)?).expect("serializable")
        }
        Versal {
            symbol,
            params,
            cutoff,
        } => {
            let params: Vec<String> = params.into_iter().map(|s| s.trim().to_string()).collect();
            let fam = elaborate_family(&parse_expr(&symbol)?, &params)?;
            let q = versality_dimension(&fam.base, cutoff)?;
            let r = check_versal(&fam, cutoff)?;
            json!({ "quotient": q, "versal": r })
        }
    };
    Ok(pretty(&out) + "\n")
}
