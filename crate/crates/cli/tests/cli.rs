use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn darkport() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_darkport"));
    c.env_remove("DARKPORT_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    darkport().args(args).output().expect("spawn darkport")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn validated(name: &str, text: &str) -> Value {
    let v: Value = serde_json::from_str(text).unwrap();
    if let Err(e) = jsonschema::validate(&schema(name), &v) {
        panic!("{name} output does not match schema: {e}");
    }
    v
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn schemas_are_valid() {
    for name in ["stats", "zeros", "fisher", "report", "manifest"] {
        jsonschema::validator_for(&schema(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn stats_near_a_zero_and_at_origin() {
    let csv = stdout_ok(&["stats", "--r", "1", "--x", "1.16"]);
    assert!(csv.starts_with("n,p\n"));
    let p: Vec<f64> = csv_rows(&csv).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(p[4] < 1e-3, "p4 = {}", p[4]);
    assert!(p[3] > 0.1);

    let json = stdout_ok(&["stats", "--r", "1", "--x", "0", "--format", "json"]);
    let v = validated("stats", &json);
    let probs: Vec<f64> = v["probs"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
    for (n, p) in probs.iter().enumerate() {
        if n % 2 == 1 {
            assert!(*p < 1e-15, "odd n={n} has p={p}");
        }
    }
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn zero_table_matches_reference_values() {
    let first_zero = |r: &str, n: usize| -> f64 {
        let csv = stdout_ok(&["zeros", "--r", r, "--n-max", "6"]);
        csv_rows(&csv)
            .iter()
            .find(|row| row[0] == n.to_string() && row[1] == "1")
            .map(|row| row[2].parse().unwrap())
            .unwrap()
    };
    assert!((first_zero("1", 4) - 1.16).abs() < 0.01);
    assert!((first_zero("1", 6) - 1.65).abs() < 0.01);
    assert!((first_zero("0.8", 4) - 1.14).abs() < 0.01);
    assert!((first_zero("0.8", 6) - 1.62).abs() < 0.01);

    let json = stdout_ok(&["zeros", "--r", "0", "--n-max", "5", "--format", "json"]);
    let v = validated("zeros", &json);
    let zeros = v["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 5);
    assert!(zeros.iter().all(|z| z["x"].as_f64().unwrap() == 0.0));
}

#[test]
fn lossless_fisher_is_flat() {
    let csv = stdout_ok(&["fisher", "--r", "1", "--eps", "0", "--x-min", "0.1", "--x-max", "3", "--points", "30"]);
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "x,cfi_exact,ifisher_approx,i_avg,qfi");
    let hf = 4.0 * 2f64.exp();
    for row in csv_rows(&csv) {
        let cfi: f64 = row[1].parse().unwrap();
        assert!((cfi - hf).abs() / hf < 1e-6, "x={} cfi={cfi}", row[0]);
    }

    let json = stdout_ok(&["fisher", "--eps", "0.002", "--points", "41", "--mode", "approx", "--format", "json"]);
    let v = validated("fisher", &json);
    assert!(v["cfi_exact"].is_null());
    assert_eq!(v["ifisher_approx"].as_array().unwrap().len(), 41);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nr = 0.8\nx = 2.0\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = validated("stats", &stdout_ok(&["--config", cfg, "stats"]));
    assert_eq!(v["r"].as_f64(), Some(0.8));
    assert_eq!(v["x"].as_f64(), Some(2.0));

    let v = validated("stats", &stdout_ok(&["--config", cfg, "stats", "--r", "0.5"]));
    assert_eq!(v["r"].as_f64(), Some(0.5));
    assert_eq!(v["x"].as_f64(), Some(2.0));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "n_samples = 10\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "stats"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_dir_env_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = darkport()
        .env("DARKPORT_OUT_DIR", dir.path())
        .args(["zeros", "--r", "1", "--n-max", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let data = dir.path().join("zeros.csv");
    assert!(std::fs::read_to_string(&data).unwrap().starts_with("n,k,x\n"));
    let manifest = std::fs::read_to_string(dir.path().join("zeros.csv.manifest.json")).unwrap();
    let m = validated("manifest", &manifest);
    assert_eq!(m["command"], "zeros");
    assert_eq!(m["parameters"]["n_max"], 4);
    assert_eq!(m["csv_schema"], "darkport-csv/1");

    let explicit = dir.path().join("nested").join("s.json");
    let out = run(&["stats", "--x", "1", "--format", "json", "--out", explicit.to_str().unwrap()]);
    assert!(out.status.success());
    validated("stats", &std::fs::read_to_string(&explicit).unwrap());
    assert!(dir.path().join("nested/s.json.manifest.json").exists());
}

#[test]
fn simulate_report() {
    let args = [
        "simulate", "--r", "1", "--eps", "0.002", "--x-true", "1.37", "--n-samples", "300", "--n-trials", "20",
        "--seed", "7",
    ];
    let a = stdout_ok(&args);
    let v = validated("report", &a);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["estimates"].as_array().unwrap().len(), 20);
    assert!(v["sensitivity"].as_f64().unwrap() > 0.0);
    assert_eq!(a, stdout_ok(&args), "same seed must reproduce the report");

    let mut avg = args.to_vec();
    avg.extend(["--estimator", "avg", "--format", "csv"]);
    let csv = stdout_ok(&avg);
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn figure_writes_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig3", "--gnuplot", "--outdir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["fig3_pn.csv", "fig3_zeros.csv", "fig3_dist.csv", "fig3.gp"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let m = validated("manifest", &std::fs::read_to_string(dir.path().join("fig3.manifest.json")).unwrap());
    assert_eq!(m["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn unknown_figure_lists_ids() {
    let out = run(&["figure", "fig99"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fig7b") && err.contains("fig8b"), "{err}");
}

#[test]
fn bad_parameters_fail() {
    for args in [
        &["stats", "--r", "-1"][..],
        &["stats", "--eps", "1.5"],
        &["fisher", "--x-min", "3", "--x-max", "1"],
        &["simulate", "--x-true", "1", "--x-lo", "0"],
        &["simulate"],
        &["simulate", "--x-true", "1", "--n-trials", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["stats", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["stats", "--format", "xml"]).status.code(), Some(2));
}
