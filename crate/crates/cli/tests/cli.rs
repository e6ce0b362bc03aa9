use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dualdesign"));
    c.env("DUALDESIGN_THREADS", "1");
    c
}

#[test]
fn fixtures_are_listed() {
    let out = bin().args(["fixtures", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sample_dual_unitary") && text.contains("sample_unitary"));
}

#[test]
fn validate_exit_codes() {
    let ok = bin()
        .args(["validate", "sample_dual_unitary", "--tol", "5e-4"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let strict = bin()
        .args(["validate", "sample_dual_unitary"])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(2));
    let polar = bin()
        .args(["validate", "sample_dual_unitary", "--polar", "--json"])
        .output()
        .unwrap();
    assert_eq!(polar.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&polar.stdout).unwrap();
    assert_eq!(report["checks"][1]["passed"], true);
}

#[test]
fn validate_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"q\": 2, \"entries\": [[1, 0],\n oops]}").unwrap();
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn budget_exceeded_exits_with_three() {
    let out = bin()
        .args(["run", "--preset", "fig1", "--memory-budget-mb", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plan:"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"preset": "custom", "gate": "cat_map:2", "N_A": 1, "N_B": 3, "t_max": 1, "k_max": 2}"#,
    )
    .unwrap();
    let out = bin()
        .args(["run", "--t-max", "0", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "experiment_id,preset,gate,scheme,N_A,N_B,q,t,k,delta,dropped_mass,seed,wall_ms"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(7) == Some("0")));
}

#[test]
fn probe_transfer_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = bin()
        .args([
            "probe-transfer",
            "--gate",
            "sample_dual_unitary",
            "--scheme",
            "bell",
            "--t",
            "1",
            "--m",
            "2",
            "-o",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["spec"]["m"], 2);
    assert!(report["gap"].as_f64().unwrap() > 0.0);
    assert_eq!(report["residuals"].as_array().unwrap().len(), 2);
}
