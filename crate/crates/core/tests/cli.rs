use std::path::Path;
use std::process::{Command, Output};

fn prt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prt"))
        .args(args)
        .env_remove("PRT_SEED")
        .output()
        .expect("prt runs")
}

fn text(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn gen_writes_a_roundtrippable_tree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.txt");
    let out = prt(&[
        "gen",
        "--depth",
        "30",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&path).starts_with("CODINGTREE"));
    let back = prt(&["roundtrip", path.to_str().unwrap()]);
    assert_eq!(
        back.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&back.stderr)
    );
}

#[test]
fn seed_comes_from_the_environment() {
    let a = prt(&["gen", "--depth", "20", "--seed", "9"]);
    let b = Command::new(env!("CARGO_BIN_EXE_prt"))
        .args(["gen", "--depth", "20"])
        .env("PRT_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(
        a.stdout,
        prt(&["gen", "--depth", "20", "--seed", "10"]).stdout
    );
}

#[test]
fn example_chains_classify_to_their_case() {
    let dir = tempfile::tempdir().unwrap();
    for id in 1..=7 {
        let path = dir.path().join(format!("case{id}.txt"));
        let p = path.to_str().unwrap();
        let out = prt(&["classify", "--example", &id.to_string(), "--out", p]);
        assert_eq!(out.status.code(), Some(0));
        let out = prt(&["classify", "--chain", p]);
        assert_eq!(out.status.code(), Some(0));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.starts_with("DIARY"), "{stdout}");
        let log = String::from_utf8(out.stderr).unwrap();
        assert!(log.contains(&format!("diary id {id}")), "{log}");
    }
}

#[test]
fn enumerate_agrees_with_brute_force() {
    let out = prt(&["enumerate", "--p", "2", "--depth", "24", "--stability"]);
    assert_eq!(out.status.code(), Some(0));
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(
        log.contains("7 enumerated, 7 brute force, agree=true"),
        "{log}"
    );
}

#[test]
fn verify_reports_each_check() {
    let out = prt(&["verify", "--suite", "core", "--depth", "24"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap() + &String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("PASS"));
    assert!(!report.contains("FAIL"));
}

#[test]
fn exit_codes() {
    assert_eq!(prt(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(prt(&["gen", "--depth", "0"]).status.code(), Some(2));
    assert_eq!(prt(&["hl-search", "--trees", "9"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "DIARY v1\nnonsense\n").unwrap();
    assert_eq!(
        prt(&["roundtrip", path.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(
        prt(&["roundtrip", dir.path().join("missing").to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
