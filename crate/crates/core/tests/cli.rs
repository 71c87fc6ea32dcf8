mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{BOW, MEDIATION, FRONT_DOOR_HIDDEN, FRONT_DOOR};

fn file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("swig-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn swig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swig")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identify_front_door() {
    let g = file("fd.g", FRONT_DOOR);
    let o = swig(&["identify", path(&g), "P(Y(A=a))"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Σ_m p(m|a) Σ_{a'} p(y|m,a') p(a')\n");
    let o = swig(&["identify", path(&g), "P(Y(A=a) | M(A=a))", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("(result (verdict identified) (estimand "));
}

#[test]
fn hedge_exits_two() {
    let g = file("bow.g", BOW);
    let o = swig(&["identify", path(&g), "P(Y(A=a))"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "NOT-IDENTIFIED: hedge {A} ⊂ {A,Y} in district {Y}\n");
    let o = swig(&["identify", path(&g), "P(Y(A=a))", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "(result (verdict not-identified) (witness (inner A) (outer A Y) (district Y)))\n");
}

#[test]
fn errors_exit_one_with_a_message() {
    let g = file("fd-err.g", FRONT_DOOR);
    let o = swig(&["identify", path(&g), "P(Y(A=a)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
    let bad = file("bad.g", "var A\nA -> B\n");
    let o = swig(&["project", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let o = swig(&["identify", path(&g), "P(Y(A=a)", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("(result (verdict error) (error "));
    assert_eq!(swig(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn separation_and_swig() {
    let g = file("fd-sep.g", FRONT_DOOR);
    let o = swig(&["sep", path(&g), "M(a) _||_ A", "--treat", "A=a"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("separated\n"));
    let o = swig(&["sep", path(&g), "Y(a) ⫫ A", "--treat", "A=a"]);
    assert_eq!(stdout(&o), "not separated\npath: Y(a) <-> A\n");
    let o = swig(&["swig", path(&g), "--treat", "A=a"]);
    assert_eq!(stdout(&o), "node A | a\nnode M(a)\nnode Y(a)\nM(a) -> Y(a)\na -> M(a)\nA <-> Y(a)\n");
}

#[test]
fn pocalc_reports_applications_and_refusals() {
    let g = file("mediation.g", MEDIATION);
    let o = swig(&["pocalc", path(&g), "--rule", "2", "--y", "Y", "--z", "A=a", "--w", "C"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("rule 2 applies: P(Y(A=a) | C(A=a)) = P(Y | C, A=a)\n"), "{out}");
    assert!(out.contains("precondition: "));
    let o = swig(&["pocalc", path(&g), "--rule", "2", "--y", "Y", "--z", "A=a"]);
    assert!(stdout(&o).starts_with("rule 2 refused"));
    assert_eq!(swig(&["pocalc", path(&g), "--rule", "4", "--y", "Y"]).status.code(), Some(1));
}

#[test]
fn project_and_verify() {
    let g = file("front_door_hidden.g", FRONT_DOOR_HIDDEN);
    let o = swig(&["project", path(&g)]);
    assert_eq!(stdout(&o), "var A M Y\nA -> M\nM -> Y\nA <-> Y\n");
    let args = ["verify", path(&g), "P(Y(A=a))", "--random", "4", "--seed", "9"];
    let a = swig(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).contains("max-abs-error: 0e0\n"), "{}", stdout(&a));
    assert_eq!(stdout(&a), stdout(&swig(&args)));
    let o = swig(&["verify", path(&g), "P(Y(A=a))", "--random", "2", "--coupling", "comonotone", "--format", "machine"]);
    assert!(stdout(&o).starts_with("(result (verdict verified) "));
}

#[test]
fn verify_reads_a_model_file() {
    let g = file("front_door_hidden-m.g", FRONT_DOOR_HIDDEN);
    let model = "variable H states 2 hidden\nvariable A states 2 parents H\nvariable M states 2 parents A\nvariable Y states 2 parents M H\ncpt H\n1/2 1/2\ncpt A\n1/4 3/4\n3/5 2/5\ncpt M\n1/3 2/3\n9/10 1/10\ncpt Y\n1/2 1/2\n1/5 4/5\n7/8 1/8\n1/10 9/10\n";
    let m = file("front_door_hidden.model", model);
    let o = swig(&["verify", path(&g), "P(Y(A=a))", "--model", path(&m)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("cells: 4 (skipped 0)\n"), "{}", stdout(&o));
}
