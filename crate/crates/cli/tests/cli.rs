use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ratkrylov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratkrylov")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn reproduce_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex1");
    let o = ratkrylov(&["reproduce", "example1", "--n", "12", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["biorthogonality.csv", "projection.csv", "ritz.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(out.join("ritz.csv")).unwrap();
    assert!(csv.starts_with("# ratkrylov ritz v1\nn,index,theta_re,theta_im,distance,class\n"));
    assert!(stdout(&o).contains("steps completed      12 of 12"));
}

#[test]
fn reproduce_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = ratkrylov(&["reproduce", "example2", "--n", "8", "--seed", "5", "--out", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["biorthogonality.csv", "projection.csv", "ritz.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

fn write_shift(path: &Path, m: usize) {
    let mut text = format!("%%MatrixMarket matrix coordinate real general\n{m} {m} {m}\n");
    for j in 1..=m {
        text.push_str(&format!("{} {} 1\n", j % m + 1, j));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn breakdown_before_min_n_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("shift.mtx");
    write_shift(&a, 6);
    let out = dir.path().join("run");
    let o = ratkrylov(&["lanczos", "--matrix", a.to_str().unwrap(), "--v", "e1", "--n", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("breakdown  "));
    assert!(out.join("summary.json").exists());
}

#[test]
fn lanczos_then_ritz() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let gen = "triangular:m=12";
    let o = ratkrylov(&[
        "lanczos",
        "--gen",
        gen,
        "--seed",
        "3",
        "--poles-k",
        "0,6.5",
        "--poles-l",
        "0,inf",
        "--n",
        "8",
        "--bases",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["T.mtx", "S.mtx", "V.mtx", "W.mtx"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = dir.path().join("ritz.csv");
    let o = ratkrylov(&[
        "ritz",
        "--t",
        out.join("T.mtx").to_str().unwrap(),
        "--s",
        out.join("S.mtx").to_str().unwrap(),
        "--gen",
        gen,
        "--seed",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(csv).unwrap();
    // 1 + 2 + ... + 8 Ritz values after the comment and header lines.
    assert_eq!(text.lines().count(), 2 + 36);
    assert_eq!(text, fs::read_to_string(out.join("ritz.csv")).unwrap());
}

#[test]
fn arnoldi_and_oracle_check_report() {
    let o = ratkrylov(&["arnoldi", "--gen", "random:m=10", "--poles-k", "2+1i,inf", "--n", "6"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("orthonormality"));
    let o =
        ratkrylov(&["oracle-check", "--gen", "hermitian:m=14", "--seed", "2", "--poles-k", "0.5,inf", "--poles-l", "0.5,inf", "--n", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let sine: f64 = text.lines().find(|l| l.starts_with("sin∠(V")).unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert!(sine < 1e-8, "{text}");
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = ratkrylov(&["lanczos", "--gen", "triangular:m=5", "--n", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let o = ratkrylov(&["lanczos", "--gen", "triangular:m=5", "--poles-k", "1,zz", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn selftest_single_criterion() {
    let o = ratkrylov(&["selftest", "--criterion", "7"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS criterion 7"));
    assert!(!ratkrylov(&["selftest", "--criterion", "11"]).status.success());
}
