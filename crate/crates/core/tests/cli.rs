use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn penning(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_penning")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_ok(sub: &str, config: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = penning(&args);
    assert!(o.status.success(), "{sub} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn table1_csv_has_six_matching_rows() {
    let out = tempfile::tempdir().unwrap();
    run_ok("table1", &configs().join("table1.toml"), out.path(), &[]);
    let csv = fs::read_to_string(out.path().join("table1_rows.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("row,f_cp_minus_MHz,"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")), "{csv}");
}

#[test]
fn plasma_json_has_chain_values() {
    let out = tempfile::tempdir().unwrap();
    run_ok("plasma", &configs().join("plasma.toml"), out.path(), &[]);
    let text = fs::read_to_string(out.path().join("plasma_summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let get = |k: &str| v[k].as_f64().unwrap_or_else(|| panic!("missing {k}"));
    assert!((get("f_p_khz") - 386.0).abs() / 386.0 < 0.05);
    assert!((get("f_r_khz") - 27.8).abs() / 27.8 < 0.05);
    assert!((get("n0_per_cm3") - 1.3e8).abs() / 1.3e8 < 0.05);
    assert!(get("t_bound_mk") <= 5.0);
}

#[test]
fn missing_config_fails_with_diagnostic() {
    let out = tempfile::tempdir().unwrap();
    let o = penning(&["plasma", "--config", "/nonexistent/scenario.toml", "--out", out.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cannot read config"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[table1]\nf_c_mhz = 2.689370\nf_c_ghz = 1.0\n");
    let o = penning(&["table1", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("f_c_ghz"), "{err}");
}

#[test]
fn physics_violation_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[trap]\nf_c_mhz = 0.2\nf_z_khz = 170\n[modes]\nkind = \"balanced\"\n",
    );
    let o = penning(&["modes", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("radial instability"));
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("beamline_capture.toml");
    run_ok("beamline", &cfg, a.path(), &["--seed", "11"]);
    run_ok("beamline", &cfg, b.path(), &["--seed", "11"]);
    for name in ["beamline_summary.json", "beamline_e_trap_histogram.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn json_format_flag() {
    let out = tempfile::tempdir().unwrap();
    run_ok("modes", &configs().join("modes_thca.toml"), out.path(), &["--format", "json"]);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("modes_frequencies.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            penning::scenario::ScenarioConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e:#}", p.display()));
        }
    }
}
