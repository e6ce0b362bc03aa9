use dualdesign::experiment::{
    run_experiment, to_csv, write_outputs, ExperimentConfig, Preset, Row, Sidecar,
};

fn strip_wall(rows: &[Row]) -> Vec<Row> {
    rows.iter()
        .cloned()
        .map(|r| Row { wall_ms: 0.0, ..r })
        .collect()
}

fn small(preset: Preset) -> ExperimentConfig {
    ExperimentConfig {
        n_a: 2,
        n_b: 6,
        k_max: 3,
        t_max: Some(3),
        seed: 11,
        ..ExperimentConfig::preset(preset)
    }
}

#[test]
fn runs_are_deterministic() {
    for preset in [Preset::Fig1, Preset::Fig2] {
        let a = run_experiment(&small(preset)).unwrap();
        let b = run_experiment(&small(preset)).unwrap();
        assert_eq!(
            to_csv(&strip_wall(&a.rows)).unwrap(),
            to_csv(&strip_wall(&b.rows)).unwrap()
        );
        assert_eq!(a.sidecar.config_hash, b.sidecar.config_hash);
    }
}

#[test]
fn solvable_bell_run_is_exact_on_the_subsystem() {
    let out = run_experiment(&small(Preset::Fig2)).unwrap();
    for r in out
        .rows
        .iter()
        .filter(|r| r.scheme == "bell" && r.k == 1 && r.t >= 1)
    {
        assert!(r.delta < 1e-10, "t = {}: {}", r.t, r.delta);
    }
}

#[test]
fn sidecar_is_written_next_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out").join("run.csv");
    let out = run_experiment(&small(Preset::Fig1)).unwrap();
    write_outputs(&out, &path).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("experiment_id,"));
    let side: Sidecar =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(side.rows, out.rows.len());
    assert_eq!(side.config_hash.len(), 64);
    assert_eq!(side.library_version, env!("CARGO_PKG_VERSION"));
}
