//! End-to-end checks of the binary: exit codes, schema strictness, output
//! determinism, and the CSV contracts, all through real process spawns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn oacfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oacfl"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn write_config(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn sweep_config(dir: &TempDir, t_max: u64) -> PathBuf {
    write_config(
        dir,
        "sweep.json",
        &format!(
            r#"{{
                "schema_version": 1,
                "accountant": {{
                    "sampling_rate": 1.0,
                    "noise_multiplier": 1.0,
                    "delta": 1e-5,
                    "alpha_min": 2,
                    "alpha_max": 64,
                    "t_max": {t_max}
                }}
            }}"#
        ),
    )
}

fn simulate_config(dir: &TempDir, name: &str, csi_factor: f64, rounds: u64) -> PathBuf {
    write_config(
        dir,
        name,
        &format!(
            r#"{{
                "schema_version": 1,
                "system": {{
                    "n_devices": 4,
                    "participation_prob": 0.7,
                    "batch_prob": 0.5,
                    "clip_norm": 1.0,
                    "device_noise_std": 1.0,
                    "channel_noise_var": 0.2,
                    "learning_rate": 0.05,
                    "rounds": {rounds},
                    "csi_factor": {csi_factor},
                    "seed": 7
                }},
                "task": {{"dim": 3, "samples_per_device": 6, "observation_noise_std": 0.1}},
                "accounting": {{"mode": "realized", "delta": 1e-5, "alpha_min": 2, "alpha_max": 32}}
            }}"#
        ),
    )
}

fn csv_column(contents: &str, header: &str, column: &str) -> Vec<String> {
    let mut lines = contents.lines();
    let names: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(names.join(","), header);
    let index = names.iter().position(|n| *n == column).unwrap();
    lines
        .map(|line| line.split(',').nth(index).unwrap().to_string())
        .collect()
}

#[test]
fn help_exits_zero() {
    assert_eq!(exit_code(&oacfl(&["--help"])), 0);
    assert_eq!(exit_code(&oacfl(&["account", "sweep", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(exit_code(&oacfl(&["account", "sweep"])), 1);
    assert_eq!(exit_code(&oacfl(&["no-such-command"])), 1);
    assert_eq!(
        exit_code(&oacfl(&[
            "rdp", "eval", "--rate", "x", "--noise", "1", "--alpha", "2"
        ])),
        1
    );
}

#[test]
fn malformed_config_exits_one_and_leaves_no_output() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "bad.json", "{ not json");
    let out = dir.path().join("out.csv");
    let output = oacfl(&[
        "account",
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(!out.exists());
}

#[test]
fn unknown_config_keys_exit_one() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "extra.json",
        r#"{"schema_version": 1, "accountant": {
            "sampling_rate": 1.0, "noise_multiplier": 1.0, "delta": 1e-5,
            "alpha_min": 2, "alpha_max": 64, "t_max": 10, "surprise": 1}}"#,
    );
    let out = dir.path().join("out.csv");
    let output = oacfl(&[
        "account",
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(!out.exists());
}

#[test]
fn wrong_schema_version_exits_one() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "v2.json",
        r#"{"schema_version": 2, "accountant": {
            "sampling_rate": 1.0, "noise_multiplier": 1.0, "delta": 1e-5,
            "alpha_min": 2, "alpha_max": 64, "t_max": 10}}"#,
    );
    let out = dir.path().join("out.csv");
    let output = oacfl(&[
        "account",
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(!out.exists());
}

#[test]
fn zero_rounds_exit_one() {
    let dir = TempDir::new().unwrap();
    let config = simulate_config(&dir, "t0.json", 1.0, 0);
    let out = dir.path().join("out.csv");
    let output = oacfl(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(!out.exists());
}

#[test]
fn missing_required_block_exits_one() {
    let dir = TempDir::new().unwrap();
    let config = sweep_config(&dir, 10);
    let out = dir.path().join("out.csv");
    let output = oacfl(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(!out.exists());
}

#[test]
fn out_of_range_rates_exit_one() {
    let dir = TempDir::new().unwrap();
    let config = sweep_config(&dir, 10);
    let out = dir.path().join("out.csv");
    let output = oacfl(&[
        "account",
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        "0.5,1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(!out.exists());
}

#[test]
fn alpha_below_the_grid_exits_two() {
    let output = oacfl(&["rdp", "eval", "--rate", "1", "--noise", "1", "--alpha", "1"]);
    assert_eq!(exit_code(&output), 2);
    assert!(!output.stderr.is_empty());
}

#[test]
fn rdp_eval_prints_one_json_object() {
    let output = oacfl(&[
        "rdp", "eval", "--rate", "0.01", "--noise", "4", "--alpha", "2",
    ]);
    assert_eq!(exit_code(&output), 0);
    let text = String::from_utf8(output.stdout).unwrap();
    let object: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(object["alpha"], 2);
    assert_eq!(object["conditions"]["rate_ok"], true);
    assert_eq!(object["conditions"]["noise_ok"], true);
    assert_eq!(object["bound"], 2.5e-5);
    assert!(object["epsilon"].as_f64().unwrap() <= 2.5e-5);
}

#[test]
fn sweep_emits_the_documented_rows() {
    let dir = TempDir::new().unwrap();
    let config = sweep_config(&dir, 50);
    let out = dir.path().join("sweep.csv");
    let output = oacfl(&[
        "account",
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        "1,0.5,0.1,0.05,0.01",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);

    let contents = fs::read_to_string(&out).unwrap();
    let methods = csv_column(
        &contents,
        "sampling_rate,t,alpha_star,epsilon,delta,noise_multiplier,method",
        "method",
    );
    assert_eq!(methods.len(), 6 * 50);
    assert_eq!(methods.iter().filter(|m| *m == "act").count(), 50);
    assert_eq!(methods.iter().filter(|m| *m == "rdp").count(), 5 * 50);

    let rates = csv_column(
        &contents,
        "sampling_rate,t,alpha_star,epsilon,delta,noise_multiplier,method",
        "sampling_rate",
    );
    for (rate, method) in rates.iter().zip(&methods) {
        if method == "act" {
            assert_eq!(rate.parse::<f64>().unwrap(), 1.0);
        }
    }

    let alpha_stars = csv_column(
        &contents,
        "sampling_rate,t,alpha_star,epsilon,delta,noise_multiplier,method",
        "alpha_star",
    );
    for (alpha_star, method) in alpha_stars.iter().zip(&methods) {
        assert_eq!(alpha_star.is_empty(), method == "act");
    }

    let mut keys = Vec::new();
    for (rate, (method, t)) in rates.iter().zip(methods.iter().zip(csv_column(
        &contents,
        "sampling_rate,t,alpha_star,epsilon,delta,noise_multiplier,method",
        "t",
    ))) {
        keys.push((
            rate.parse::<f64>().unwrap(),
            method.clone(),
            t.parse::<u64>().unwrap(),
        ));
    }
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
}

#[test]
fn zero_rate_sweeps_sit_at_the_conversion_floor() {
    let dir = TempDir::new().unwrap();
    let config = sweep_config(&dir, 20);
    let out = dir.path().join("zero.csv");
    let output = oacfl(&[
        "account",
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
    let contents = fs::read_to_string(&out).unwrap();
    let epsilons = csv_column(
        &contents,
        "sampling_rate,t,alpha_star,epsilon,delta,noise_multiplier,method",
        "epsilon",
    );
    assert_eq!(epsilons.len(), 20);
    let floor = (1e-5f64.recip()).ln() / 63.0;
    for value in &epsilons {
        assert_eq!(value.parse::<f64>().unwrap(), floor);
    }
}

fn run_simulate(config: &Path, out: &Path) {
    let output = oacfl(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0);
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = simulate_config(&dir, "sim.json", 1.0, 8);
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    run_simulate(&config, &out_a);
    run_simulate(&config, &out_b);
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.csv.meta.json")).unwrap(),
        fs::read(dir.path().join("b.csv.meta.json")).unwrap()
    );

    let sweep_cfg = sweep_config(&dir, 30);
    let sweep_a = dir.path().join("sa.csv");
    let sweep_b = dir.path().join("sb.csv");
    for out in [&sweep_a, &sweep_b] {
        let output = oacfl(&[
            "account",
            "sweep",
            "--config",
            sweep_cfg.to_str().unwrap(),
            "--rates",
            "1,0.1",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0);
    }
    assert_eq!(fs::read(&sweep_a).unwrap(), fs::read(&sweep_b).unwrap());
}

#[test]
fn pilot_manipulation_never_shows_in_the_epsilon_column() {
    let dir = TempDir::new().unwrap();
    let honest = simulate_config(&dir, "honest.json", 1.0, 10);
    let attacked = simulate_config(&dir, "attacked.json", 0.25, 10);
    let out_honest = dir.path().join("honest.csv");
    let out_attacked = dir.path().join("attacked.csv");
    run_simulate(&honest, &out_honest);
    run_simulate(&attacked, &out_attacked);

    let header = "round,loss,epsilon,delta,a_t,b_t,seed";
    let a = fs::read_to_string(&out_honest).unwrap();
    let b = fs::read_to_string(&out_attacked).unwrap();
    assert_eq!(
        csv_column(&a, header, "epsilon"),
        csv_column(&b, header, "epsilon")
    );
    assert_eq!(csv_column(&a, header, "a_t"), csv_column(&b, header, "a_t"));
    assert_eq!(csv_column(&a, header, "b_t"), csv_column(&b, header, "b_t"));
    assert_ne!(
        csv_column(&a, header, "loss"),
        csv_column(&b, header, "loss")
    );
}

#[test]
fn simulate_csv_numbers_parse_back_exactly() {
    let dir = TempDir::new().unwrap();
    let config = simulate_config(&dir, "sim.json", 1.0, 5);
    let out = dir.path().join("t.csv");
    run_simulate(&config, &out);
    let contents = fs::read_to_string(&out).unwrap();
    for line in contents.lines().skip(1) {
        for field in line.split(',') {
            assert!(field.parse::<f64>().is_ok());
        }
    }
    let header = "round,loss,epsilon,delta,a_t,b_t,seed";
    for value in csv_column(&contents, header, "loss") {
        let parsed: f64 = value.parse().unwrap();
        assert_eq!(format!("{parsed:.16e}"), value);
    }
}
