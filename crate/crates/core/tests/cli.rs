//! Runs the `fole` binary against the fixture files.

use std::path::{Path, PathBuf};
use std::process::Command;

use fole::database::{read_manifest, read_table};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn fole(args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_fole")).args(args).output().unwrap();
    Run {
        code: o.status.code().unwrap_or(-1),
        out: String::from_utf8(o.stdout).unwrap(),
        err: String::from_utf8(o.stderr).unwrap(),
    }
}

#[test]
fn validate_lists_every_object() {
    let r = fole(&["validate", &fixture("system.fole")]);
    assert_eq!(r.code, 0, "{}", r.err);
    for line in ["ok schema S1", "ok structure M2", "ok structure morphism bridge", "ok system Pair"] {
        assert!(r.out.contains(line), "{}", r.out);
    }
}

#[test]
fn eval_prints_a_keyed_table() {
    let r = fole(&["eval", "--structure", &fixture("m_go.fole"), "--formula", "Go"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "_key,agnt,dest,inst");
    assert_eq!(lines[1], "k1,john,boston,bus1");
    assert_eq!(lines[2], "(1 row)");
}

#[test]
fn check_exit_code_follows_satisfaction() {
    let ok = fole(&["check", "--structure", &fixture("m_go.fole"), "--spec", &fixture("t_go.fole")]);
    assert_eq!(ok.code, 0, "{}", ok.err);
    assert!(ok.out.ends_with("satisfied\n"));

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.fole");
    std::fs::write(
        &spec,
        format!("include \"{}\"\n\nspec Bad : S_go\n  top[Go] |- bot[Go]\nend\n", fixture("s_go.fole")),
    )
    .unwrap();
    let bad = fole(&["check", "--structure", &fixture("m_go.fole"), "--spec", spec.to_str().unwrap()]);
    assert_eq!(bad.code, 1);
    assert!(bad.out.starts_with("FAIL top[{agnt:Person, dest:City, inst:Bus}] |- bot["), "{}", bad.out);
    assert!(bad.out.ends_with("violated\n"), "{}", bad.out);
}

#[test]
fn translate_and_reduct_use_the_morphism() {
    let rename = format!("{}#rename", fixture("travel.fole"));
    let r = fole(&["translate", "--morphism", &rename, "--formula", "Travel /\\ ~Travel"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.trim(), "(Go /\\ ~Go)");

    let r = fole(&["reduct", "--morphism", &rename, "--structure", &fixture("m_go.fole")]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("structure M_go_reduct : S_travel"));
    assert!(r.out.contains("key k1 : Travel (agnt: john, dest: boston, inst: bus1)"));
}

#[test]
fn reduct_output_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let rename = format!("{}#rename", fixture("travel.fole"));
    let r = fole(&["reduct", "--morphism", &rename, "--structure", &fixture("m_go.fole"), "--name", "R"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let path = dir.path().join("r.fole");
    std::fs::write(&path, format!("include \"{}\"\n\n{}", fixture("travel.fole"), r.out)).unwrap();
    let v = fole(&["validate", path.to_str().unwrap()]);
    assert_eq!(v.code, 0, "{}", v.err);
    assert!(v.out.contains("ok structure R"));
}

#[test]
fn prove_invariance_agrees() {
    let r = fole(&[
        "prove-invariance",
        "--morphism",
        &format!("{}#rename", fixture("travel.fole")),
        "--structure",
        &fixture("m_go.fole"),
        "--spec",
        &format!("{}#T_travel", fixture("travel.fole")),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(!r.out.contains("MISMATCH"));
    assert!(r.out.ends_with("invariant\n"));
}

#[test]
fn consequence_answers_queries() {
    let r = fole(&[
        "consequence",
        "--spec",
        &fixture("t_go.fole"),
        "--depth",
        "1",
        "--pool",
        "dest",
        "--query",
        "Go |- Go",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.trim(), "derivable Go |- Go");
}

#[test]
fn sound_reports_soundness() {
    let r = fole(&["sound", "--structure", &fixture("m_go.fole"), "--spec", &fixture("t_go.fole")]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.trim(), "sound");
}

#[test]
fn fuse_finds_foreign_constraints() {
    let r = fole(&["fuse", "--system", &fixture("system.fole"), "--depth", "1", "--pool", "--connectives", "meet,join"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("node n1: 735 derivable, 0 foreign"), "{}", r.out);
    assert!(r.out.contains("node n2: 360 derivable, 35 foreign"), "{}", r.out);
    assert!(r.out.contains("  B |- C\n"));
}

#[test]
fn export_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("db");
    let r = fole(&[
        "export",
        "--structure",
        &fixture("m_go.fole"),
        "--spec",
        &fixture("t_go.fole"),
        "--depth",
        "1",
        "--pool",
        "dest",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let manifest = read_manifest(&out).unwrap();
    assert!(!manifest.is_empty());
    let (header, rows) = read_table(&out.join("Go.csv")).unwrap();
    assert_eq!(header, ["_key", "agnt", "dest", "inst"]);
    assert_eq!(rows, [["k1", "john", "boston", "bus1"]]);
}

#[test]
fn errors_exit_with_two() {
    let r = fole(&["eval", "--structure", &fixture("m_go.fole"), "--formula", "Nope"]);
    assert_eq!(r.code, 2);
    assert!(r.err.starts_with("error: "), "{}", r.err);

    let r = fole(&["validate", "/nonexistent/file.fole"]);
    assert_eq!(r.code, 2);

    let r = fole(&["sound"]);
    assert_eq!(r.code, 2);
}

#[test]
fn load_flag_brings_names_into_scope() {
    let r = fole(&["--load", &fixture("travel.fole"), "translate", "--morphism", "rename", "--formula", "Travel"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.trim(), "Go");
}

#[test]
fn reports_are_deterministic() {
    let args = ["consequence", "--spec", &fixture("t_go.fole"), "--depth", "1", "--pool", "dest"];
    let a = fole(&args);
    let b = fole(&args);
    assert_eq!(a.code, 0, "{}", a.err);
    assert_eq!(a.out, b.out);
    let args = ["fuse", "--system", &fixture("system.fole"), "--depth", "1", "--pool"];
    assert_eq!(fole(&args).out, fole(&args).out);
}
