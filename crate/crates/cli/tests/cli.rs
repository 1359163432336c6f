//! End-to-end runs of the `gfi` binary.

use std::path::Path;
use std::process::Command;

fn gfi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gfi"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn bounds_lattice_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(&cfg, "delta_list = 0.5, 1, 2\nr_list = 0.5, 1, 2\nd_list = 1\n");
    let out = dir.path().join("out");
    let status = gfi()
        .args(["bounds", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&out.join("bounds.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "name,delta,R,d,N,value,valid,dimension_free,source");
    // 9 lattice points x 10 catalog rows (no N list)
    assert_eq!(lines.len() - 1, 9 * 10);
    assert!(csv.contains("poincare"));
    assert!(read(&out.join("manifest.json")).contains("\"command\": \"bounds\""));
}

#[test]
fn estimate_gaussian_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("gaussian.txt");
    write(&measure, "1 1 1\n1 0\n");
    let cfg = dir.path().join("run.cfg");
    write(
        &cfg,
        &format!("measure = {}\nmethod = poincare\n", measure.display()),
    );
    let out = dir.path().join("out");
    let status = gfi()
        .args(["estimate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&read(&out.join("estimate.json"))).unwrap();
    let est = json["estimate"].as_f64().unwrap();
    assert!((est - 1.0).abs() < 0.01, "estimate {est}");
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(&cfg, "delta_list = 1\nr_list = 1\nd_list = 1\ntpyo = 3\n");
    let status = gfi()
        .args(["bounds", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn malformed_measure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("bad.txt");
    write(&measure, "1 2 0.5\n0.5 0.0\n"); // promises 2 atoms, has 1
    let cfg = dir.path().join("run.cfg");
    write(&cfg, &format!("measure = {}\n", measure.display()));
    let status = gfi()
        .args(["estimate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn repeat_runs_are_byte_identical_outside_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(
        &cfg,
        "d_list = 1, 3\nn_schedule = d\ntrials = 2\nmc_samples = 20000\nr = 1.0\ndelta = 0.8\n",
    );
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out_a, &out_b] {
        let status = gfi()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .args(["--seed", "42"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read(&out_a.join("sweep.csv")), read(&out_b.join("sweep.csv")));
    // manifests differ only in the timestamp field
    let norm = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.contains("timestamp_unix"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        norm(&read(&out_a.join("manifest.json"))),
        norm(&read(&out_b.join("manifest.json")))
    );
}

#[test]
fn transport_failing_calibration_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("m.txt");
    write(&measure, "1 2 0.6\n0.5 -0.5\n0.5 0.5\n");
    let cfg = dir.path().join("run.cfg");
    // impossible c' budget forces the assertion to fail
    write(
        &cfg,
        &format!(
            "measure = {}\ngrid_n = 101\nfamily_size = 4\nc_prime_limit = 1e-6\n",
            measure.display()
        ),
    );
    let status = gfi()
        .args(["transport", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_all_passes_on_calibration_battery() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = gfi()
        .arg("verify-all")
        .arg("--out")
        .arg(&out)
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("[PASS] gaussian_poincare"));
    assert!(!stdout.contains("[FAIL]"));
    let json: serde_json::Value = serde_json::from_str(&read(&out.join("verify.json"))).unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(true));
}

#[test]
fn decompose_emits_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("m.txt");
    write(&measure, "1 2 0.6\n0.5 -0.8\n0.5 0.8\n");
    let cfg = dir.path().join("run.cfg");
    write(&cfg, &format!("measure = {}\ngrid_n = 201\n", measure.display()));
    let out = dir.path().join("out");
    let status = gfi()
        .args(["decompose", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&read(&out.join("decompose.json"))).unwrap();
    assert_eq!(json["certificates_pass"], serde_json::Value::Bool(true));
    assert!(json["assembled_bound"].as_f64().unwrap() > 0.0);
}
