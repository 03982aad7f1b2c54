use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn osveta(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_osveta")).current_dir(dir).args(args).output().unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    osveta(dir, args).status.code().unwrap()
}

fn with_fixture(name: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(dir.path(), &["fixture", "--name", name, "--out", "m.obj"]), 0);
    dir
}

fn read(dir: &TempDir, file: &str) -> String {
    std::fs::read_to_string(dir.path().join(file)).unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = with_fixture("cube");
    let d = dir.path();
    assert_eq!(code(d, &[]), 1);
    assert_eq!(code(d, &["frobnicate"]), 1);
    assert_eq!(code(d, &["descriptors", "--in", "m.obj", "--out", "d.csv", "--bogus"]), 1);
    assert_eq!(code(d, &["decimate", "--in", "m.obj", "--fraction", "0.5", "--out", "s.obj"]), 1);
    assert_eq!(code(d, &["perturb", "--in", "m.obj", "--sigma", "0.01", "--out", "p.obj"]), 1);
    assert_eq!(code(d, &["rank", "--in", "m.obj", "--method", "random"]), 1);
    assert_eq!(code(d, &["rank", "--in", "m.obj", "--method", "neuro"]), 1);
    assert_eq!(code(d, &["rank", "--in", "m.obj", "--criterion", "kg-sideways"]), 1);
    assert_eq!(code(d, &["eval", "--in", "m.obj", "--model", "x.fnn"]), 1);
    assert_eq!(code(d, &["train", "--in", "m.obj", "--out", "x.fnn"]), 1);
    let help = osveta(d, &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("descriptors"));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = with_fixture("cube");
    let d = dir.path();
    std::fs::write(d.join("broken.obj"), "v 0 0 0\nf 1 2 3\n").unwrap();
    std::fs::write(d.join("junk.fnn"), "not a model\n").unwrap();
    assert_eq!(code(d, &["descriptors", "--in", "missing.obj", "--out", "d.csv"]), 2);
    assert_eq!(code(d, &["descriptors", "--in", "broken.obj", "--out", "d.csv"]), 2);
    assert_eq!(code(d, &["decimate", "--in", "m.obj", "--fraction", "1.5", "--seed", "1", "--out", "s.obj"]), 2);
    assert_eq!(code(d, &["perturb", "--in", "m.obj", "--sigma=-1", "--seed", "1", "--out", "p.obj"]), 2);
    assert_eq!(code(d, &["rank", "--in", "m.obj", "--method", "neuro", "--model", "junk.fnn"]), 2);
    let out = osveta(d, &["rank", "--in", "m.obj", "--top", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn rank_exports_a_top_selection() {
    let dir = with_fixture("sphere-and-cube");
    let d = dir.path();
    let args = ["rank", "--in", "m.obj", "--top", "50", "--out", "sel.csv", "--points", "sel.obj"];
    assert_eq!(code(d, &args), 0);
    let sel = read(&dir, "sel.csv");
    let mut lines = sel.lines();
    assert_eq!(lines.next(), Some("rank,vertex_index,score,mask_bits"));
    assert_eq!(lines.count(), 50);
    assert_eq!(read(&dir, "sel.obj").lines().filter(|l| l.starts_with("v ")).count(), 50);

    let args = ["rank", "--in", "m.obj", "--criterion", "kg-pos", "--top", "10", "--out", "kg.csv"];
    assert_eq!(code(d, &args), 0);
    assert_eq!(read(&dir, "kg.csv").lines().count(), 11);
}

#[test]
fn descriptors_cover_every_vertex() {
    let dir = with_fixture("icosphere");
    assert_eq!(code(dir.path(), &["descriptors", "--in", "m.obj", "--out", "d.csv"]), 0);
    let csv = read(&dir, "d.csv");
    assert!(csv.lines().next().unwrap().starts_with("index,theta,"));
    assert_eq!(csv.lines().count(), 642 + 1);
}

#[test]
fn pipeline_from_training_to_report() {
    let dir = with_fixture("cube");
    let d = dir.path();
    assert_eq!(code(d, &["fixture", "--name", "sphere-and-cube", "--out", "t.obj"]), 0);
    let train = ["train", "--in", "t.obj", "--seed", "3", "--epochs", "5", "--out", "m.fnn", "--losses", "l.csv"];
    assert_eq!(code(d, &train), 0);
    assert_eq!(read(&dir, "l.csv").lines().count(), 6);
    assert!(read(&dir, "m.fnn").starts_with("OSVETA-FNN 1"));

    let eval = ["eval", "--in", "t.obj", "--model", "m.fnn", "--L", "30", "--levels", "0,20,40,60,80,90", "--seed", "7"];
    assert_eq!(code(d, &[&eval[..], &["--out", "r.md"]].concat()), 0);
    let md = read(&dir, "r.md");
    assert!(md.starts_with("| Level | 0% | 20% | 40% | 60% | 80% | 90% |"));
    for row in ["| Total VR |", "| Random | 0 |", "| OSVETA | 0 |", "| Neuro-OSVETA | 0 |"] {
        assert!(md.contains(row), "{row}");
    }
    assert_eq!(code(d, &[&eval[..], &["--out", "r.csv"]].concat()), 0);
    assert_eq!(read(&dir, "r.csv").lines().count(), 1 + 6 * 3);
}

#[test]
fn decimate_and_perturb_write_meshes() {
    let dir = with_fixture("icosphere");
    let d = dir.path();
    let args = ["decimate", "--in", "m.obj", "--fraction", "0.5", "--seed", "1", "--out", "s.obj", "--trace", "t.csv", "--map", "c.csv"];
    assert_eq!(code(d, &args), 0);
    assert_eq!(read(&dir, "s.obj").lines().filter(|l| l.starts_with("v ")).count(), 321);
    assert_eq!(read(&dir, "t.csv").lines().next(), Some("vertex_index,removal_step,survival_depth"));
    assert_eq!(read(&dir, "c.csv").lines().count(), 643);

    assert_eq!(code(d, &["perturb", "--in", "m.obj", "--sigma", "0", "--seed", "2", "--out", "p.obj"]), 0);
    assert_eq!(code(d, &["perturb", "--in", "p.obj", "--sigma", "0", "--seed", "9", "--out", "q.obj"]), 0);
    assert_eq!(read(&dir, "p.obj"), read(&dir, "q.obj"));
}
