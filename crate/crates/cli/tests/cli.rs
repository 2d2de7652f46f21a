use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn hyltl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyltl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SAFETY: &str = "F({x>=21} & X on)";

#[test]
fn bha_dot_has_three_locations() {
    let o = hyltl(&["bha", "--formula", SAFETY, "--actions", "on,off", "--vars", "x", "--format", "dot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let nodes: Vec<&str> = out.lines().filter(|l| l.trim_start().starts_with('l') && !l.contains("->")).collect();
    assert_eq!(nodes.len(), 3, "{out}");
    assert_eq!(nodes.iter().filter(|l| l.contains("peripheries=2")).count(), 2);
}

#[test]
fn positive_formula_skips_pi() {
    let o = hyltl(&["bha", "-f", SAFETY, "--actions", "on,off"]);
    assert!(stderr(&o).contains("[pi] skipped: formula is positive"));
    let o = hyltl(&["bha", "-f", "!G({x>=18} | X F on)", "--actions", "on,off"]);
    assert!(o.status.success());
    assert!(stderr(&o).lines().any(|l| l.starts_with("[pi] size")));
}

#[test]
fn gamma_prints_the_discrete_formula() {
    let o = hyltl(&["gamma", "--formula", SAFETY, "--actions", "on,off"]);
    assert_eq!(stdout(&o), "!b0 & !b1 & (true U (\"x >= 21\" & X(b0 & !b1)))\n");
}

#[test]
fn formula_stages() {
    let o = hyltl(&["parse", "-f", "F {x >= 21}"]);
    assert_eq!(stdout(&o), "true U {x >= 21}\n");
    let o = hyltl(&["nnf", "-f", "!(on U off)"]);
    assert_eq!(stdout(&o), "!on R !off\n");
    let o = hyltl(&["pi", "-f", "!{x >= 21}"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("{x < 21}"), "{}", stdout(&o));
}

#[test]
fn subcommands_are_deterministic() {
    let runs = [
        vec!["bha", "-f", "!G({x>=18} | X F on)", "--actions", "on,off", "--format", "hoa"],
        vec!["ba", "-f", SAFETY, "--actions", "on,off"],
        vec!["check", "--random", "3"],
    ];
    for args in runs {
        let (a, b) = (hyltl(&args), hyltl(&args));
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn compose_emits_the_monitor() {
    let (sys, prop) = (data("thermostat.ha"), data("safety.bha"));
    let o = hyltl(&["compose", "--system", &sys, "--property", &prop, "--format", "monitor"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = include_str!("../../core/tests/golden/thermostat_product.monitor");
    assert_eq!(stdout(&o), golden);
    let o = hyltl(&["compose", "--system", &sys, "--formula", SAFETY, "--format", "monitor"]);
    assert_eq!(stdout(&o), golden);
}

#[test]
fn compose_rejects_other_variables() {
    let o = hyltl(&[
        "compose",
        "--system",
        &data("thermostat.ha"),
        "--property",
        &data("other_vars.bha"),
        "--format",
        "monitor",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("variable sets differ"));
}

#[test]
fn hoa_import_matches_internal_translation() {
    let internal = hyltl(&["bha", "-f", SAFETY, "--actions", "on,off"]);
    let imported = hyltl(&["bha", "-f", SAFETY, "--actions", "on,off", "--from-hoa", &data("safety.hoa")]);
    assert!(imported.status.success(), "{}", stderr(&imported));
    assert_eq!(internal.stdout, imported.stdout);
    assert!(stderr(&imported).contains("[ba] imported"));
}

#[test]
fn export_round_trips() {
    let out = std::env::temp_dir().join(format!("hyltl-export-{}.ha", std::process::id()));
    let out = out.display().to_string();
    let o = hyltl(&["export", "--input", &data("thermostat.ha"), "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = hyltl(&["export", "--input", &out]);
    assert_eq!(stdout(&again), std::fs::read_to_string(&out).unwrap());
    let dot = hyltl(&["export", "--input", &data("safety.bha"), "--format", "dot"]);
    assert!(stdout(&dot).starts_with("digraph bha"));
    std::fs::remove_file(out).unwrap();
}

#[test]
fn check_reports_every_suite() {
    let o = hyltl(&["check", "-f", "!G({x>=18} | X F on)", "--actions", "on,off", "--samples", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for suite in ["discretization", "split translation", "automaton", "tableau", "upward closure"] {
        assert!(out.contains(&format!("  {suite}: ok")), "{out}");
    }
}

#[test]
fn seed_changes_random_formulas() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_hyltl"))
            .args(["check", "--random", "2"])
            .env("HYLTL_SEED", seed)
            .output()
            .unwrap()
    };
    assert_eq!(run("5").stdout, run("5").stdout);
    assert_ne!(run("5").stdout, run("6").stdout);
    assert_eq!(run("nope").status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(hyltl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hyltl(&["bha"]).status.code(), Some(1));
    assert_eq!(hyltl(&["parse", "-f", SAFETY, "--format", "dot"]).status.code(), Some(1));
    let bad = hyltl(&["parse", "-f", "U {x>0}"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("1:1"));
    assert_eq!(hyltl(&["parse", "-f", "F on", "--actions", "off"]).status.code(), Some(2));
    assert_eq!(
        hyltl(&["export", "--input", &data("missing.ha")]).status.code(),
        Some(2)
    );
    assert_eq!(hyltl(&["check", "-f", "G {x>=1}"]).status.code(), Some(2));
    assert_eq!(hyltl(&["--help"]).status.code(), Some(0));
}
