use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn polecasc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polecasc")).arg("--out").arg(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn orbits_f4_lists_sixteen() {
    let dir = tempfile::tempdir().unwrap();
    let o = polecasc(dir.path(), &["orbits", "F", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("16 orbits"));
    let lines = fs::read_to_string(dir.path().join("orbits_F4.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 16);
}

#[test]
fn special_classify_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = polecasc(dir.path(), &["special-classify"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.trim() == "1 3 60 150"));
}

#[test]
fn cascade_writes_all_phases() {
    let dir = tempfile::tempdir().unwrap();
    let o = polecasc(dir.path(), &["cascade", "F", "4", "--levi", "B3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let db = dir.path().join("cascade_F4_levi4");
    for k in 0..5 {
        assert!(db.join(format!("gen_{k}.jsonl")).exists());
        assert!(db.join(format!("std_{k}.jsonl")).exists());
    }
    let again = polecasc(dir.path(), &["verify-main", "F", "4"]);
    assert!(again.status.success());
    assert!(String::from_utf8_lossy(&again.stderr).contains("importing"));
}

#[test]
fn verification_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = polecasc(dir.path(), &["cascade", "D", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(polecasc(dir.path(), &["orbits", "Q", "4"]).status.code(), Some(2));
    assert_eq!(polecasc(dir.path(), &["orbits", "F", "4", "--levi", "A7"]).status.code(), Some(2));

    let bad = dir.path().join("cascade_F4_levi4");
    fs::create_dir_all(&bad).unwrap();
    fs::write(bad.join("manifest.json"), "{\"schema\": \"other/9\"}").unwrap();
    assert_eq!(polecasc(dir.path(), &["verify-tau", "F", "4"]).status.code(), Some(2));
}

#[test]
fn resumed_sweep_matches_uninterrupted() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(polecasc(a.path(), &["special-vanish", "--scope", "sample"]).status.success());
    let partial = polecasc(b.path(), &["special-vanish", "--scope", "sample", "--max-shards", "30"]);
    assert!(stdout(&partial).contains("rerun to resume"));
    assert!(polecasc(b.path(), &["special-vanish", "--scope", "sample"]).status.success());
    for p in [a.path(), b.path()] {
        assert!(polecasc(p, &["report"]).status.success());
    }
    let sums = |p: &Path| fs::read_to_string(p.join("SHA256SUMS")).unwrap();
    assert_eq!(sums(a.path()), sums(b.path()));
}
