use std::process::Command;

use proptest::prelude::*;

use qmorse_cli::expr::{elaborate, parse_expr, unbounded_caps};
use qmorse_core::io::qseries_from_str;
use qmorse_core::{Coefficient, QSeries};

fn qmorse(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qmorse"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("stdout is JSON")
}

#[test]
fn mul_output_round_trips() {
    let (code, out, _) = qmorse(&["mul", "p", "q"]);
    assert_eq!(code, 0);
    let f = qseries_from_str(&out).unwrap();
    let c = *f.caps();
    let expect = QSeries::p(c).mul(&QSeries::q(c)).unwrap();
    assert_eq!(f, expect);
}

#[test]
fn commutator_is_minus_i_hbar() {
    let (code, out, _) = qmorse(&["commutator", "p", "q"]);
    assert_eq!(code, 0);
    let f = qseries_from_str(&out).unwrap();
    assert_eq!(f, QSeries::hbar(*f.caps()).scale(&-&Coefficient::i()));
}

#[test]
fn caps_are_honoured() {
    // (a + adag a) adag = adag a + hbar + (weight 3/2 terms, dropped)
    let (_, out, _) = qmorse(&["mul", "a + ad*a", "ad", "--weight-cap", "1"]);
    let f = qseries_from_str(&out).unwrap();
    let c = *f.caps();
    assert_eq!(f, &QSeries::monomial(1, 1, 0, 0, c) + &QSeries::hbar(c));
}

#[test]
fn parse_errors_exit_2() {
    let (code, out, err) = qmorse(&["mul", "q p", "q"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("implicit multiplication not allowed"));
    assert!(err.contains("byte 2"));
    let (code, _, err) = qmorse(&["dagger", "zeta"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown symbol"));
}

#[test]
fn domain_errors_exit_3() {
    let (code, _, err) = qmorse(&["milnor", "--symbol", "1 + x^2 + y^2"]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = qmorse(&["versal", "--symbol", "y^2 + l^2*x", "--params", "l"]);
    assert_eq!(code, 3);
}

#[test]
fn guard_overflow_exits_4() {
    let out = Command::new(env!("CARGO_BIN_EXE_qmorse"))
        .args(["mul", "q^6", "p^6"])
        .env("QMORSE_TERM_GUARD", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("QMORSE_TERM_GUARD"));
}

#[test]
fn spectrum_of_linear_family() {
    let (code, out, _) = qmorse(&["spectrum", "--perturbation", "q", "--order", "4", "--level", "1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let terms = v["terms"].as_array().unwrap();
    // 3 hbar - t^2 / 4
    assert_eq!(terms.len(), 2);
    let find = |e: [u64; 2]| {
        terms
            .iter()
            .find(|t| t["exp"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).eq(e))
            .map(|t| t["coef"]["r"].as_str().unwrap().to_string())
    };
    assert_eq!(find([1, 0]).as_deref(), Some("3"));
    assert_eq!(find([0, 2]).as_deref(), Some("-1/4"));
}

#[test]
fn rescaled_spectrum_moves_t_into_hbar() {
    let (_, out, _) = qmorse(&[
        "spectrum", "--perturbation", "q", "--order", "2", "--level", "0", "--rescale-t",
    ]);
    let v = json(&out);
    let exps: Vec<Vec<u64>> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["exp"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
        .collect();
    assert!(exps.contains(&vec![2, 2]));
}

#[test]
fn rs_and_normal_form_agree() {
    let (_, a, _) = qmorse(&["rs", "--perturbation", "q^4", "--level", "1", "--order", "3"]);
    let (_, b, _) = qmorse(&["spectrum", "--perturbation", "q^4", "--order", "3", "--level", "1"]);
    assert_eq!(json(&a)["terms"], json(&b)["terms"]);
}

#[test]
fn normal_form_json_has_all_parts() {
    let (code, out, _) = qmorse(&["normal-form", "--perturbation", "q^3", "--order", "2"]);
    assert_eq!(code, 0);
    let v = json(&out);
    for key in ["order", "scale", "shift", "g", "H", "u", "u_inv", "spectrum"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn flow_rotates_annihilator() {
    let (code, out, _) = qmorse(&["flow", "--hamiltonian", "ad*a", "--observable", "a", "--order", "3"]);
    assert_eq!(code, 0);
    let f = qseries_from_str(&out).unwrap();
    assert_eq!(f.len(), 4);
    assert_eq!(f.coefficient_of(0, 1, 0, 1), Coefficient::i());
}

#[test]
fn diag_outputs() {
    let dir = std::env::temp_dir().join(format!("qmorse-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.csv");
    let (code, out, _) = qmorse(&[
        "diag", "--perturbation", "q^4", "--t", "0.01", "--dim", "40", "--levels", "2", "--csv",
        "--export-matrix", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "level,re,im");
    let e0: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((e0 - 1.0073736721).abs() < 1e-8);
    let matrix = std::fs::read_to_string(&path).unwrap();
    assert_eq!(matrix.lines().count(), 40);
    assert_eq!(matrix.lines().next().unwrap().split(',').count(), 80);
    let (_, out, _) = qmorse(&["diag", "--perturbation", "q^4", "--t", "0.01", "--dim", "40"]);
    assert_eq!(json(&out)["eigenvalues"].as_array().unwrap().len(), 1);
}

#[test]
fn gevrey_from_file_and_spectrum() {
    let dir = std::env::temp_dir().join(format!("qmorse-gevrey-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("coeffs.txt");
    // alpha_k = k! * 2^k: Borel ratios are exactly 2
    let mut text = String::from("# k! 2^k\n");
    let mut f = num_bigint::BigInt::from(1);
    for k in 0..14u32 {
        if k > 0 {
            f *= k * 2;
        }
        text.push_str(&format!("{f}\n"));
    }
    std::fs::write(&path, text).unwrap();
    let (code, out, _) = qmorse(&["gevrey", "--coeffs", path.to_str().unwrap(), "--window", "4:12"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "gevrey1-consistent");
    assert!((v["radius"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let (code, out, _) = qmorse(&["gevrey", "--from-spectrum", "q^4", "--order", "10", "--window", "4:9"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["alpha"][1].as_f64(), Some(0.75));
    let (code, out, _) = qmorse(&["gevrey", "--from-spectrum", "q^4", "--order", "10", "--csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("k,alpha,beta,ratio,root\n"));
}

#[test]
fn trace_and_borel() {
    let (code, out, _) = qmorse(&["trace", "1", "--levels", "4"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let coefs: Vec<&str> = v["trace"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["coef"]["r"].as_str().unwrap())
        .collect();
    assert_eq!(coefs, vec!["1", "1", "2", "6", "24"]);
    assert!(v["borel"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t["coef"]["r"] == "1"));
}

#[test]
fn milnor_and_versal() {
    let (_, out, _) = qmorse(&["milnor", "--symbol", "x^3 + y^3", "--cutoff", "8"]);
    assert_eq!(json(&out)["dim"], 4);
    let (_, out, _) = qmorse(&[
        "versal", "--symbol", "p^2 + q^5 + l1*q + l2*q^2 + l3*q^3", "--params", "l1,l2,l3",
    ]);
    let v = json(&out);
    assert_eq!(v["versal"]["versal"], true);
    assert_eq!(v["quotient"]["dim"], 4);
    let (_, out, _) = qmorse(&["versal", "--symbol", "y^2 + x^3"]);
    assert_eq!(json(&out)["versal"]["versal"], false);
}

#[test]
fn long_flat_expressions_do_not_overflow() {
    let text = vec!["q"; 50_000].join("+");
    let f = elaborate(&parse_expr(&text).unwrap(), unbounded_caps()).unwrap();
    assert_eq!(f, QSeries::q(unbounded_caps()).scale(&Coefficient::from_int(50_000)));
}

fn token() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "q", "p", "a", "ad", "hbar", "t", "i", "sqrt2", "x", "1", "3/4", "0.5", "+", "-", "*", "/",
        "^", "^2", "(", ")", " ", "2", "q p",
    ])
    .prop_map(String::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_never_panics_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_expr(&text) {
            prop_assert!(e.offset <= text.len());
        }
    }

    #[test]
    fn parser_and_elaboration_never_panic_on_tokens(toks in prop::collection::vec(token(), 0..16)) {
        let text = toks.concat();
        match parse_expr(&text) {
            Ok(e) => {
                let _ = elaborate(&e, unbounded_caps());
            }
            Err(e) => prop_assert!(e.offset <= text.len()),
        }
    }

    #[test]
    fn printed_ast_reparses_to_same_value(toks in prop::collection::vec(token(), 1..10)) {
        let text = toks.concat();
        if let Ok(e) = parse_expr(&text) {
            let again = parse_expr(&e.to_string()).expect("printed AST parses");
            let a = elaborate(&e, unbounded_caps());
            let b = elaborate(&again, unbounded_caps());
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
