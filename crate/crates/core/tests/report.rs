use speclab::harness::InequalityId;
use speclab::report::{run, Command, RunConfig};
use speclab::Error;

const THETA: &str = r#"
[[domain]]
label = "theta"
shape = { kind = "union", parts = [
    { kind = "ball", center = [-1.5, 0.0], radius = 1.0 },
    { kind = "ball", center = [1.5, 0.0], radius = 1.0 },
] }
"#;

fn field_of(text: &str) -> (String, String) {
    match RunConfig::from_toml(text, "test.toml") {
        Err(Error::Config { field, message }) => (field, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn config_errors_name_the_field_and_line() {
    let (field, message) = field_of(&format!("command = \"verify\"\nladder = [0.01, 0.02]\n{THETA}"));
    assert_eq!(field, "ladder");
    assert!(message.contains("test.toml:2"), "{message}");

    let (field, _) = field_of(&format!("command = \"verify\"\nk_max = 0\n{THETA}"));
    assert_eq!(field, "k_max");

    let (field, _) = field_of("command = \"verify\"\n");
    assert_eq!(field, "domain");

    let (field, message) = field_of(&format!("command = \"verify\"\ncheks = []\n{THETA}"));
    assert_eq!(field, "cheks");
    assert!(message.contains("test.toml:2"), "{message}");

    let (field, _) = field_of(&format!("command = \"verify\"\nchecks = [\"no-such\"]\n{THETA}"));
    assert_eq!(field, "checks");

    let (field, _) = field_of("command = \"sharpness\"\n[sharpness]\ndoubling_k = 0\n");
    assert_eq!(field, "sharpness.doubling_k");

    let (field, _) = field_of("command = \"eig\"\n[tolerances]\neigen = -1.0\n[[domain]]\nlabel = \"d\"\nfamily = \"volume-split\"\nt = 0.1\n");
    assert_eq!(field, "tolerances.eigen");
}

#[test]
fn check_names_match_the_report_names() {
    let cfg = RunConfig::from_toml(
        &format!("command = \"verify\"\nchecks = [\"theorem-1\", \"kohler-jobin-2\"]\n{THETA}"),
        "test.toml",
    )
    .unwrap();
    assert_eq!(cfg.checks, vec![InequalityId::Theorem1, InequalityId::KohlerJobin2]);
    assert_eq!(cfg.command, Command::Verify);
    assert_eq!(serde_json::to_string(&InequalityId::Theorem2bis).unwrap(), "\"theorem-2bis\"");
}

#[test]
fn eig_run_writes_records_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_toml(
        "command = \"eig\"\nladder = [0.0625, 0.03125]\nk_max = 3\n[[domain]]\nlabel = \"disk\"\nshape = { kind = \"ball\", center = [0.0, 0.0], radius = 1.0 }\n",
        "test.toml",
    )
    .unwrap();
    let outcome = run(&cfg, Some(dir.path())).unwrap();
    assert_eq!(outcome.exit_code, 0);
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("domain,k,h,lambda,error_estimate,multiplicity,extrapolated,ball_lambda"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "eig");
    assert_eq!(manifest["exit_code"], 0);
    assert!(outcome.files.iter().all(|f| f.exists()));
}

#[test]
fn verify_on_theta_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_toml(
        &format!("command = \"verify\"\nchecks = [\"theorem-2bis\", \"cheng-yang\"]\nk_max = 3\n{THETA}"),
        "test.toml",
    )
    .unwrap();
    let outcome = run(&cfg, Some(dir.path())).unwrap();
    assert_eq!(outcome.exit_code, 0);
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let lhs = headers.iter().position(|h| h == "lhs").unwrap();
    let id = headers.iter().position(|h| h == "inequality_id").unwrap();
    let mut n = 0;
    for row in rdr.records() {
        let row = row.unwrap();
        if &row[id] == "theorem-2bis" {
            assert_eq!(row[lhs].parse::<f64>().unwrap(), 0.0);
            n += 1;
        }
    }
    assert_eq!(n, 3);
}
