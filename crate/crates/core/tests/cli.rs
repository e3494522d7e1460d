use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use ptlc::langsuite::{membership_str, LanguageId};

fn ptlc(args: &[&str]) -> Output {
    ptlc_with(args, None, &[])
}

fn ptlc_with(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ptlc"));
    cmd.args(args).env_remove("PTLC_SYSTEM").stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ptlc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn eval_past_examples() {
    let o = ptlc(&["eval", "-f", "P a", "-w", "abb", "--pos", "3", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");

    let o = ptlc(&["eval", "-f", "P a", "-w", "bb"]);
    assert_eq!(json(&o)["value"], false);
    assert_eq!(json(&o)["mode"], "after_end");
}

#[test]
fn unknown_symbols_are_input_errors() {
    let o = ptlc(&["eval", "-f", "P c", "-w", "ab"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown symbol 'c'"));
    assert_eq!(ptlc(&["eval", "--bogus"]).status.code(), Some(2));
}

#[test]
fn eval_trace_prints_every_subformula() {
    let o = ptlc(&["eval", "-f", "a & P b", "-w", "ba", "--trace"]);
    let table = json(&o)["table"].as_array().unwrap().clone();
    let rows: Vec<(String, Vec<bool>)> = table
        .iter()
        .map(|r| (r["formula"].as_str().unwrap().to_string(), serde_json::from_value(r["values"].clone()).unwrap()))
        .collect();
    assert_eq!(rows.last().unwrap(), &("a & P b".to_string(), vec![false, false, true, false]));
    assert!(rows.iter().any(|(f, _)| f == "P b"));
}

#[test]
fn future_formulas_default_to_before_start() {
    let o = ptlc(&["eval", "-f", "F a", "-w", "ba"]);
    assert_eq!(json(&o)["mode"], "before_start");
    assert_eq!(json(&o)["value"], true);
    let o = ptlc(&["eval", "-f", "F a", "-w", "ba", "--mode", "after-end"]);
    assert_eq!(json(&o)["value"], false);
}

#[test]
fn classify_reference_languages() {
    let dyck = json(&ptlc(&["classify", "lang:DYCK_1_1"]));
    assert_eq!((dyck["star_free"].clone(), dyck["left_det_poly"].clone()), (true.into(), false.into()));
    assert_eq!(json(&ptlc(&["classify", "lang:PARITY"]))["star_free"], false);
    assert_eq!(json(&ptlc(&["classify", "lang:FIRST"]))["left_det_poly"], true);
}

#[test]
fn classify_reads_dfa_files_and_stdin() {
    let d = ptlc::langsuite::reference_dfa(LanguageId::Last).unwrap().to_json();
    let path = scratch("last.json", &d);
    let from_file = json(&ptlc(&["classify", path.to_str().unwrap()]));
    let from_stdin = json(&ptlc_with(&["classify", "-"], Some(&d), &[]));
    assert_eq!(from_file, from_stdin);
    assert_eq!(from_file["unambiguous_poly"], true);
    assert_eq!(from_file["left_det_poly"], false);
}

#[test]
fn compiled_formula_verifies_against_its_automaton() {
    let text = ptlc(&["compile", "dfa-to-ptl", "lang:FIRST", "--format", "text"]);
    assert_eq!(text.status.code(), Some(0));
    let o = ptlc_with(&["verify", "formula-file:-", "lang:FIRST"], Some(&stdout(&text)), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(json(&o)["counterexample"].is_null());

    // the JSON form of the state formulas pipes in the same way
    let full = ptlc(&["compile", "dfa-to-ptl", "lang:FIRST"]);
    assert!(json(&full)["states"].is_object());
    let o = ptlc_with(&["verify", "formula-file:-", "lang:FIRST"], Some(&stdout(&full)), &[]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn non_po_automata_do_not_compile() {
    let o = ptlc(&["compile", "dfa-to-ptl", "lang:PARITY"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not partially ordered"));
}

#[test]
fn run_a_compiled_recognizer() {
    let spec = ptlc(&["compile", "ptl-to-tf", "-f", "P (b & !P (a | b))", "--alphabet", "ab"]);
    let path = scratch("first.json", &stdout(&spec));
    let p = path.to_str().unwrap();
    let run = |w: &str| json(&ptlc(&["run", p, "-w", w]))["accept"].as_bool().unwrap();
    assert!(run("ba"));
    assert!(!run("ab"));
    for w in ["", "b", "bb", "abab", "baaa"] {
        assert_eq!(run(w), membership_str(LanguageId::First, w).unwrap(), "{w}");
    }
    let traced = json(&ptlc(&["run", p, "-w", "ba", "--trace"]));
    assert!(traced["trace"].is_object() || traced["trace"].is_array());
}

#[test]
fn verify_reports_counterexamples_with_exit_status_one() {
    let o = ptlc(&["verify", "formula:P a", "lang:LAST", "--max-len", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["counterexample"]["string"], "a");
    assert_eq!(r["counterexample"]["expected"], "true");
}

#[test]
fn verify_needs_an_alphabet_for_two_formulas() {
    assert_eq!(ptlc(&["verify", "formula:P a", "formula:!!P a"]).status.code(), Some(2));
    let o = ptlc(&["verify", "formula:P a", "formula:!!P a", "--alphabet", "ab"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_enforces_the_budget() {
    let o = ptlc(&["verify", "lang:LDP2", "lang:LDP2", "--max-len", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn language_model_round_trip() {
    let spec = ptlc(&["compile", "dfa-to-lm", "lang:FIRST"]);
    let path = scratch("first_lm.json", &stdout(&spec));
    let p = path.to_str().unwrap();
    let next = json(&ptlc(&["lm-next", p, "-w", "a"]));
    assert_eq!(next["support"], serde_json::json!(["UNK"]));
    let next = json(&ptlc(&["lm-next", p, "-w", "b"]));
    assert_eq!(next["support"], serde_json::json!(["a", "b", "EOS"]));
    let o = ptlc(&["verify", "lang:FIRST", &format!("spec:{p}"), "--max-len", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn gen_rows_are_labeled_and_deterministic() {
    let args = ["gen", "--lang", "parity", "-n", "10", "--len", "12", "--seed", "3"];
    let o = ptlc(&args);
    let text = stdout(&o);
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let s = r["string"].as_str().unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(r["label"].as_bool().unwrap(), membership_str(LanguageId::Parity, s).unwrap());
    }
    let mut jobs = args.to_vec();
    jobs.extend(["--jobs", "3"]);
    assert_eq!(stdout(&ptlc(&jobs)), text);
    assert_eq!(stdout(&ptlc(&args)), text);
}

#[test]
fn gen_tsv_and_ranges() {
    let o = ptlc(&["gen", "--lang", "DYCK_1_1", "-n", "2", "--len", "3..6", "--tsv"]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    // odd lengths are infeasible for Dyck languages and are skipped
    assert_eq!(lines.len(), 4);
    for l in &lines {
        let cols: Vec<&str> = l.split('\t').collect();
        assert_eq!(cols[0], "DYCK_1_1");
        assert_eq!(cols[2] == "1", membership_str(LanguageId::Dyck11, cols[1]).unwrap());
    }
}

#[test]
fn float_system_comes_from_flag_or_environment() {
    let compile = |env: &[(&str, &str)], extra: &[&str]| {
        let mut args = vec!["compile", "ptl-to-tf", "-f", "P a"];
        args.extend_from_slice(extra);
        json(&ptlc_with(&args, None, env))["float_system"].clone()
    };
    assert_eq!(compile(&[], &[])["kind"], "minifloat");
    let grid = compile(&[("PTLC_SYSTEM", "grid:1,64")], &[]);
    assert_eq!(grid["kind"], "explicit");
    assert_eq!(compile(&[], &["--system", "grid:1,64"]), grid);
    assert_eq!(compile(&[("PTLC_SYSTEM", "grid:1,64")], &["--system", "minifloat:4,3"])["kind"], "minifloat");
    let o = ptlc(&["compile", "ptl-to-tf", "-f", "P a", "--system", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}
