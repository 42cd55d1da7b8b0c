use std::path::Path;
use std::process::{Command, Output};

use flatlift::fixtures;
use flatlift::format::{parse_diagram, parse_poset, write_diagram, write_family, write_poset};

fn flatlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatlift")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn result_line(o: &Output) -> String {
    stdout(o).lines().rev().find(|l| l.starts_with("RESULT")).unwrap_or_default().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn hollow_cube_flatness() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cube.poset");
    std::fs::write(&f, write_poset(&fixtures::hollow_cube())).unwrap();
    let o = flatlift(&["poset", path(&f), "flat"]);
    assert!(result_line(&o).contains("ind_flat=true pro_flat=false"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generated_powerset_is_neither() {
    let o = flatlift(&["poset", "--gen", "powerset:3", "flat"]);
    assert!(result_line(&o).contains("ind_flat=false pro_flat=false"));
    let o = flatlift(&["poset", "--gen", "product:3,3", "flat"]);
    assert!(result_line(&o).contains("ind_flat=true pro_flat=true"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.poset");
    std::fs::write(&empty, "# nothing\n").unwrap();
    assert_eq!(flatlift(&["poset", path(&empty), "info"]).status.code(), Some(2));

    let bad = dir.path().join("bad.poset");
    std::fs::write(&bad, "a b\na < c\n").unwrap();
    assert_eq!(flatlift(&["poset", path(&bad), "info"]).status.code(), Some(2));

    let missing = dir.path().join("missing.poset");
    assert_eq!(flatlift(&["poset", path(&missing), "info"]).status.code(), Some(2));
    assert_eq!(flatlift(&["poset", "--gen", "wheel:3", "info"]).status.code(), Some(2));
    assert_eq!(flatlift(&["census", "--max-n", "8"]).status.code(), Some(2));
}

#[test]
fn crown_report_lists_witness() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cube.poset");
    std::fs::write(&f, write_poset(&fixtures::hollow_cube())).unwrap();
    let o = flatlift(&["poset", path(&f), "crown", "ind"]);
    assert!(result_line(&o).contains("elements=6 relations=6 kernel_dim=1 one_connected=false"));
}

#[test]
fn chain_obstruction_lifts() {
    let dir = tempfile::tempdir().unwrap();
    let x = fixtures::chain_obstruction();
    let (p, d, out) = (dir.path().join("c.poset"), dir.path().join("c.diagram"), dir.path().join("l.diagram"));
    std::fs::write(&p, write_poset(&x.shape)).unwrap();
    std::fs::write(&d, write_diagram(&x)).unwrap();
    let o = flatlift(&["lift", "--poset", path(&p), "--diagram", path(&d), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(result_line(&o).contains("pure=true strict=true stable_iso=true"));

    let shape = parse_poset(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let lifted = parse_diagram(&shape, &std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(lifted.is_strictly_commutative());
    assert!(lifted.is_purely_monic());
}

#[test]
fn unliftable_morphism_modes() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y, f) = fixtures::unliftable_morphism(3);
    let file = |name: &str, text: String| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let p = file("m.poset", write_poset(&x.shape));
    let xs = file("x.diagram", write_diagram(&x));
    let ys = file("y.diagram", write_diagram(&y));
    let h = file("f.hom", write_family(&x.shape, &f));
    let base = ["lift", "--poset", path(&p), "--diagram", path(&xs), "--target", path(&ys), "--hom", path(&h)];

    let o = flatlift(&[&base[..], &["--mode", "strict-full-test"]].concat());
    assert_eq!(result_line(&o), "RESULT strict_lift=none");
    assert_eq!(o.status.code(), Some(1));

    let o = flatlift(&[&base[..], &["--mode", "morphism"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(result_line(&o).contains("homotopism=true natural=true purely_monic=true certified=true"));
}

#[test]
fn precondition_failure_is_named() {
    let o = flatlift(&["lift", "--gen", "powerset:3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("RESULT check=ind_flat ok=false"));
}

#[test]
fn seeded_lifts_pass() {
    for seed in 0..5 {
        let s = seed.to_string();
        let o = flatlift(&["lift", "--gen", "product:2,2", "--seed", &s, "--ring", "2,3"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let o = flatlift(&["lift", "--gen", "product:2,2", "--seed", &s, "--mode", "dual"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let o = flatlift(&["lift", "--gen", "chain:4", "--seed", &s, "--mode", "morphism"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
}

#[test]
fn census_counts_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatlift(&["census", "--max-n", "5", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(result_line(&o).starts_with("RESULT classes=1,2,5,16,63 candidates=0 disagreements=0 quasitree_violations=0"));
    let seq = flatlift(&["census", "--max-n", "4", "--sequential", "--list", "all"]);
    let par = flatlift(&["census", "--max-n", "4", "--jobs", "2", "--list", "all"]);
    let listing = |o: &Output| stdout(o).lines().filter(|l| l.contains("aut=")).map(String::from).collect::<Vec<_>>();
    assert_eq!(listing(&seq).len(), 24);
    assert_eq!(listing(&seq), listing(&par));
}

#[test]
fn examples_report_every_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = flatlift(&["examples", "--export", path(dir.path())]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(lines.len() >= 12);
    // the ten-element poset is the only fixture whose listed verdict does not hold
    let failed: Vec<&str> = lines.iter().filter(|l| l.starts_with("FAIL")).copied().collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("ten-element-flat"));
    assert_eq!(o.status.code(), Some(1));
    assert!(dir.path().join("chain-obstruction.diagram").exists());
}
