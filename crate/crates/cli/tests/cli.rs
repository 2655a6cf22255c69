use std::path::Path;
use std::process::{Command, Output};

fn kgec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgec")).args(args).env_remove("KGEC_WORKERS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn build_synthetic(out: &Path) {
    let o = kgec(&[
        "build",
        "--synthetic",
        "3,20,0.3,0.05",
        "--base-fraction",
        "0.6",
        "--snapshots",
        "2",
        "--growth",
        "15,15",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_validate_train_eval_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let runs = tmp.path().join("runs");
    build_synthetic(&data);

    let o = kgec(&["validate", "--dataset", data.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 violations"));

    let o = kgec(&[
        "train",
        "--dataset",
        data.to_str().unwrap(),
        "--init",
        "schema",
        "--gamma",
        "0.5",
        "--dim",
        "8",
        "--lr",
        "0.01",
        "--batch",
        "32",
        "--max-epochs",
        "5",
        "--seeds",
        "1,2",
        "--out",
        runs.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("omega_base="));

    let run_dir = std::fs::read_dir(&runs).unwrap().next().unwrap().unwrap().path();
    let ckpt = run_dir.join("snapshot2.ckpt");
    assert!(ckpt.is_file());
    let o = kgec(&[
        "eval",
        "--dataset",
        data.to_str().unwrap(),
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--snapshot",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("all\tmrr=")));
    assert_eq!(text.lines().count(), 4);

    let o = kgec(&["report", "--runs", runs.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(runs.join("summary.csv").is_file());
}

#[test]
fn missing_dataset_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kgec(&["train", "--dataset", tmp.path().join("absent").to_str().unwrap(), "--out", tmp.path().join("r").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn bad_flags_are_rejected() {
    let o = kgec(&["build", "--synthetic", "3,20", "--out", "x"]);
    assert!(!o.status.success());
    let o = kgec(&["train", "--dataset", ".", "--model", "nonsense"]);
    assert!(!o.status.success());
}
