use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symsat::solver::save_matrix;

fn symsat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symsat"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.jsonl", "b.jsonl"] {
        let o = symsat(dir.path(), &["gen", "sudoku", "--count", "4", "--seed", "9", "-o", name]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = symsat(dir.path(), &["gen", "sudoku", "--count", "4", "--seed", "10", "-o", "c.jsonl"]);
    assert!(o.status.success());
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.jsonl")).unwrap());
    assert_ne!(a, fs::read(dir.path().join("c.jsonl")).unwrap());
}

#[test]
fn symfind_finds_full_symmetric_group_of_identity() {
    let dir = tempfile::tempdir().unwrap();
    save_matrix(&dir.path().join("id.ssm"), &DMatrix::identity(5, 5)).unwrap();
    let o = symsat(dir.path(), &["symfind", "id.ssm", "-o", "r.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("S5"));
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["expr"], "S5");
}

#[test]
fn symfind_reports_trivial_group_for_random_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = DMatrix::from_fn(7, 7, |_, _| rng.gen_range(-1.0..1.0));
    save_matrix(&dir.path().join("r.ssm"), &(&a + a.transpose())).unwrap();
    let o = symsat(dir.path(), &["symfind", "r.ssm", "--normalize"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("I7"));
}

#[test]
fn zero_epoch_training_writes_a_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(symsat(p, &["gen", "sudoku", "--count", "3", "--seed", "1", "-o", "tr.jsonl"]).status.success());
    assert!(symsat(p, &["gen", "sudoku", "--count", "2", "--seed", "2", "-o", "te.jsonl"]).status.success());
    let o = symsat(
        p,
        &["train", "plain", "--train", "tr.jsonl", "--test", "te.jsonl", "--epochs", "0", "--k", "6", "--tag", "z"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = p.join(stdout(&o).lines().last().unwrap().trim());
    for f in ["config.txt", "config.json", "report.csv", "report.json", "model.ssn"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(run.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("epoch,phase,"));

    // the config echo replays the run
    let cfg = run.join("config.txt");
    let o = symsat(p, &["train", "--config", cfg.to_str().unwrap(), "--tag", "replay"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let replay = p.join(stdout(&o).lines().last().unwrap().trim());
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("config.json")).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(replay.join("config.json")).unwrap()).unwrap();
    assert_eq!(a, b);

    let o = symsat(p, &["eval", run.join("model.ssn").to_str().unwrap(), "te.jsonl", "--json"]);
    assert!(o.status.success());
    let e: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(e["examples"], 2);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(symsat(p, &["gen", "sudoku", "--count", "2", "-o", "s.jsonl"]).status.success());
    assert!(symsat(p, &["gen", "cube", "--count", "2", "-o", "c.jsonl"]).status.success());
    let mismatched = symsat(p, &["train", "plain", "--train", "s.jsonl", "--test", "c.jsonl", "--epochs", "0"]);
    assert_eq!(mismatched.status.code(), Some(2));
    let wrong_task = symsat(p, &["train", "plain", "--task", "cube", "--train", "s.jsonl", "--test", "s.jsonl"]);
    assert_eq!(wrong_task.status.code(), Some(2));
    assert_eq!(symsat(p, &["train", "nonsense", "--train", "s.jsonl", "--test", "s.jsonl"]).status.code(), Some(1));
    assert_eq!(symsat(p, &["no-such-command"]).status.code(), Some(1));
    assert_eq!(symsat(p, &["--help"]).status.code(), Some(0));
    assert_eq!(symsat(p, &["eval", "missing.ssn", "s.jsonl"]).status.code(), Some(2));
}
