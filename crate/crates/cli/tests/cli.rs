//! End-to-end tests of the `vexpdo` binary: exit codes, report formats,
//! JSON round-trip stability, and determinism.

use std::path::Path;
use std::process::{Command, Output};

use vexpdo_core::fredholm::FredholmReport;
use vexpdo_core::modular::NormResult;
use vexpdo_core::verify::VerifyReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vexpdo"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

#[test]
fn norm_json_reports_value_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "norm.toml",
        r#"
[exponent]
name = "constant"
p = 2.0

[function]
kind = "bump"
center = [0.0]
width = 2.0
"#,
    );
    let out = bin().args(["norm", "--config", &config]).output().unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));

    let text = stdout_str(&out);
    let result: NormResult = serde_json::from_str(&text).unwrap();
    assert!(result.value > 0.0);
    assert!(result.iterations > 0);
    assert!(result.modular_at_value <= 1.0 + 1e-10);

    let reemitted = format!("{}\n", serde_json::to_string_pretty(&result).unwrap());
    assert_eq!(text, reemitted, "JSON must round-trip byte-identically");
}

#[test]
fn norm_csv_has_pinned_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "norm.toml", "[exponent]\nname = \"constant\"\n");
    let out = bin()
        .args(["norm", "--config", &config, "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "value,iterations,modular_at_value"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn unknown_exponent_name_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.toml", "[exponent]\nname = \"mystery\"\n");
    let out = bin().args(["norm", "--config", &config]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("exponent.name"));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "typo.toml", "[grid]\npints = 64\n");
    let out = bin().args(["norm", "--config", &config]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("pints"));
}

#[test]
fn missing_config_file_exits_2() {
    let out = bin()
        .args(["norm", "--config", "/nonexistent/nowhere.toml"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn apply_identity_symbol_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "id.toml",
        r#"
[function]
kind = "bump"

[symbol]
name = "one"

[apply]
operator = "op"
"#,
    );
    let out = bin().args(["apply", "--config", &config]).output().unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(report["sup_deviation_from_input"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["values"].as_array().unwrap().len(), 128);
}

#[test]
fn apply_sharp_of_constant_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sharp.toml",
        r#"
[function]
kind = "constant"
re = 2.5
im = -1.0

[apply]
operator = "sharp"
"#,
    );
    let out = bin().args(["apply", "--config", &config]).output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["sup_norm"].as_f64().unwrap(), 0.0);
}

#[test]
fn apply_maximal_spot_value_matches_oracle() {
    // The indicator of [0, 1] on the 64-point grid: at the node nearest
    // x = 2 the maximal function equals 4 nodes of mass over a 7-node
    // window.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "hl.toml",
        r#"
[grid]
points = 64

[function]
kind = "indicator"
lo = 0.0
hi = 1.0

[apply]
operator = "hl"
"#,
    );
    let out = bin().args(["apply", "--config", &config]).output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let values = report["values"].as_array().unwrap();
    let spot = values[38][0].as_f64().unwrap();
    assert!((spot - 4.0 / 7.0).abs() <= 1e-12);
}

#[test]
fn check_exponent_constant_holds_with_zero_constants() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c2.toml",
        "[exponent]\nname = \"constant\"\np = 2.0\n",
    );
    let out = bin()
        .args(["check-exponent", "--config", &config])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let reports: Vec<serde_json::Value> = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(reports.len(), 5);
    for report in &reports {
        assert_eq!(report["holds"], true, "{report}");
        let condition = report["condition"].as_str().unwrap();
        if condition != "bounds" {
            assert_eq!(
                report["best_constant"].as_f64().unwrap(),
                0.0,
                "{condition}"
            );
        }
    }
}

#[test]
fn check_exponent_infeasible_split_names_the_node() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mstar.toml",
        r#"
[exponent]
name = "constant"
p = 2.0
checks = ["mstar"]
p0 = 1.2
theta = 0.9
"#,
    );
    let out = bin()
        .args(["check-exponent", "--config", &config])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["holds"], false);
    assert_eq!(reports[0]["witness"].as_array().unwrap().len(), 1);
    assert!(reports[0]["details"]["reciprocal"].as_f64().unwrap() < 0.0);
}

#[test]
fn fredholm_json_round_trips_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "fred.toml",
        r#"
[exponent]
name = "log_log_sine"

[symbol]
name = "one"

[fredholm]
"#,
    );
    let out = bin()
        .args(["fredholm", "--config", &config, "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));

    let text = stdout_str(&out);
    assert!(text.contains("Fredholm-consistent"));
    let report: FredholmReport = serde_json::from_str(&text).unwrap();
    let reemitted = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
    assert_eq!(text, reemitted, "JSON must round-trip byte-identically");
    // With an explicit [fredholm] section there is no defaulting note.
    assert!(!stderr_str(&out).contains("defaults applied"));
}

#[test]
fn fredholm_csv_is_the_decay_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "fred.toml",
        "[exponent]\nname = \"log_log_sine\"\n\n[symbol]\nname = \"one\"\n",
    );
    let out = bin()
        .args(["fredholm", "--config", &config, "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "index,family,description,right_ratio,left_ratio"
    );
    // 5 translated + 4 modulated probes under the default family.
    assert_eq!(text.lines().count(), 10);
    assert!(stderr_str(&out).contains("defaults applied"));
}

#[test]
fn fredholm_nonelliptic_symbol_exits_one_with_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "fred.toml",
        "[symbol]\nname = \"nonelliptic_demo\"\n\n[fredholm]\n",
    );
    let out = bin()
        .args(["fredholm", "--config", &config, "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(stdout_str(&out).contains("elliptic-fail"));
    assert!(stderr_str(&out).contains("elliptic-fail"));
}

#[test]
fn verify_module_filter_prints_table_and_passes() {
    let out = bin()
        .args(["verify", "--only", "modular"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    assert_eq!(text.matches("PASS [").count(), 3);
    assert!(text.contains("result: PASS (3/3 passed, seed 42)"));
}

#[test]
fn verify_unknown_module_exits_2() {
    let out = bin().args(["verify", "--only", "bogus"]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("unknown module"));
}

#[test]
fn verify_tightened_tolerance_forces_failure() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "tight.toml",
        "[tolerances]\nluxemburg_rel_tol = 1e-16\n",
    );
    let out = bin()
        .args(["verify", "--config", &config, "--only", "modular"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(stdout_str(&out).contains("FAIL [ 1/11]"));
    assert!(stderr_str(&out).contains("first failing check: 1 luxemburg-constant-p"));
}

#[test]
fn verify_json_round_trips() {
    let out = bin()
        .args(["verify", "--only", "exponent", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    let report: VerifyReport = serde_json::from_str(&text).unwrap();
    assert!(report.all_passed);
    let reemitted = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
    assert_eq!(text, reemitted, "JSON must round-trip byte-identically");
}

#[test]
fn seeded_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "rand.toml",
        r#"
[exponent]
name = "log_log_sine"

[function]
kind = "random"
"#,
    );
    let run = || bin().args(["norm", "--config", &config]).output().unwrap();
    let (a, b) = (run(), run());
    assert_eq!(exit_code(&a), 0);
    assert_eq!(
        a.stdout, b.stdout,
        "same seed must reproduce the same bytes"
    );
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "norm.toml", "[exponent]\nname = \"constant\"\n");
    let target = dir.path().join("report.json");
    let out = bin()
        .args([
            "norm",
            "--config",
            &config,
            "--out",
            target.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert!(stdout_str(&out).is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    let _: NormResult = serde_json::from_str(&written).unwrap();
}
