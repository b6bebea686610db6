use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sidelink-alloc"))
}

#[test]
fn solve_prints_assignment_and_value() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("weights.csv");
    std::fs::write(&weights, "5,1,2,3\n4,4,1,0\n").unwrap();
    let output = bin()
        .args([
            "solve",
            "--weights",
            weights.to_str().unwrap(),
            "--subframes",
            "2",
            "--per-subframe",
            "2",
            "--algo",
            "graph",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("vehicle 0 -> resource 3"), "{stdout}");
    assert!(stdout.contains("vehicle 1 -> resource 0"), "{stdout}");
    assert!(stdout.contains("total value: 7.000000"), "{stdout}");
}

#[test]
fn solve_pads_short_weight_files() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("weights.csv");
    std::fs::write(&weights, "1,9,4,2,8,6\n").unwrap();
    let output = bin()
        .args([
            "solve",
            "--weights",
            weights.to_str().unwrap(),
            "--subframes",
            "3",
            "--per-subframe",
            "2",
            "--algo",
            "exhaustive",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    // single real vehicle takes its global best, resource 1
    assert!(stdout.contains("vehicle 0 -> resource 1"), "{stdout}");
    assert!(stdout.contains("total value: 9.000000"), "{stdout}");
}

#[test]
fn solve_rejects_bad_dimensions_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("weights.csv");
    std::fs::write(&weights, "1,2,3\n").unwrap();
    let output = bin()
        .args([
            "solve",
            "--weights",
            weights.to_str().unwrap(),
            "--subframes",
            "2",
            "--per-subframe",
            "2",
            "--algo",
            "graph",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn simulate_rejects_unknown_config_keys_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"vehicles_per_cluster": 2, "n_clusters": 1, "n_subframes": 4,
            "resources_per_subframe": 2, "seed": 1, "typo_key": 3}"#,
    )
    .unwrap();
    let output = bin()
        .args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--trials",
            "1",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn simulate_missing_config_is_io_error_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "simulate",
            "--config",
            dir.path().join("nope.json").to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn validate_passes_on_random_instances() {
    let output = bin()
        .args([
            "validate",
            "--instances",
            "50",
            "--max-n",
            "5",
            "--max-k",
            "3",
            "--seed",
            "7",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("validation passed"), "{stdout}");
}

#[test]
fn usage_errors_exit_2() {
    let output = bin().args(["solve", "--algo", "nonsense"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}
