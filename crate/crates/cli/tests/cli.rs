use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const THETA: &str = r#"
ladder = [0.03125, 0.015625]
k_max = 3
checks = ["theorem-1", "theorem-2bis", "kohler-jobin-2"]

[[domain]]
label = "theta"
shape = { kind = "union", parts = [
    { kind = "ball", center = [-1.5, 0.0], radius = 1.0 },
    { kind = "ball", center = [1.5, 0.0], radius = 1.0 },
] }
"#;

fn speclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speclab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, format!("command = \"verify\"\n{body}")).unwrap();
    p.display().to_string()
}

#[test]
fn verify_theta_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), THETA);
    let out = dir.path().join("out");
    let o = speclab(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("records.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let mut rows = 0;
    for row in rdr.records() {
        let row = row.unwrap();
        let lhs: f64 = row[4].parse().unwrap();
        match &row[0] {
            // Zero up to the discretization error of λ_k(Θ).
            "theorem-1" | "theorem-2bis" => assert!(lhs <= 0.005 * 30.0, "{:?}", row),
            "kohler-jobin-2" => assert!(&row[9] != "violated"),
            other => panic!("unexpected check {other}"),
        }
        rows += 1;
    }
    assert_eq!(rows, 7);
    assert!(out.join("run-manifest.json").exists());
}

#[test]
fn increasing_ladder_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &THETA.replace("[0.03125, 0.015625]", "[0.015625, 0.03125]"));
    let o = speclab(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`ladder`"), "{err}");
    assert!(err.contains("run.toml:3"), "{err}");
}

#[test]
fn missing_config_and_bad_command_fail() {
    let o = speclab(&["verify", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = speclab(&["frobnicate", "--config", "x.toml"]);
    assert!(!o.status.success());
}

#[test]
fn repeated_runs_write_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), THETA);
    let read = |name: &str| {
        let out = dir.path().join(name);
        let o = speclab(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "1"]);
        assert!(o.status.success());
        fs::read(out.join("records.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}
