use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_richards-cem"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const HEADER: &str =
    "experiment,H,m,L,dim_Vms,dim_Vh,err_H1,err_L2,picard_mean_fine,picard_mean_coarse,lambda_hat,offline_s,online_s";

#[test]
fn run_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("e1.toml");
    fs::write(&config, "experiment = \"E1\"\nn = 16\nhdiv = 4\nn_basis = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = cli(&["--threads", "1", "--seed", "7", "run", "--config", path(&config), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..6], &["E1", "0.25", "3", "3", "48", "225"]);
    assert!(out.join("E1_fem_p1.txt").exists());
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "experiment = \"E1\"\nn = 16\nhdiv = 4\nn_basis = 3\ncolour = 1\n").unwrap();
    let o = cli(&["run", "--config", path(&config), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn report_check_flags_wrong_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    fs::write(&good, format!("{HEADER}\nE1,0.25,3,4,64,16129,0.15,0.03,2,2,0,1,1\n")).unwrap();
    let o = cli(&["verify", "--out", path(dir.path()), "--report", path(&good)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, format!("{HEADER}\nE1,0.25,3,4,65,16129,0.15,0.03,2,2,0,1,1\n")).unwrap();
    let o = cli(&["verify", "--out", path(dir.path()), "--report", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL"));
}

#[test]
fn verify_runs_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["verify", "--out", path(dir.path()), "--criteria", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = fs::read_to_string(dir.path().join("acceptance.txt")).unwrap();
    assert!(text.starts_with("PASS criterion  8"), "{text}");
    let o = cli(&["verify", "--out", path(dir.path()), "--criteria", "12"]);
    assert_eq!(o.status.code(), Some(1));
}
