use std::fs;
use std::path::{Path, PathBuf};

use oac_sim::{run, DeviceState, LinearRegression};
use subsampled_gaussian::{bound_conditions, closed_form_bound, rdp, SampledGmSpec};

use crate::config_file::{self, RunConfigFile, SCHEMA_VERSION};
use crate::CliError;

/// 17 significant digits: enough for every f64 to parse back bit-exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn config_error(error: impl std::fmt::Display) -> CliError {
    CliError::Config(error.to_string())
}

fn domain_error(error: impl std::fmt::Display) -> CliError {
    CliError::Domain(error.to_string())
}

/// Writes every output file only after all computation succeeded, and
/// removes everything written so far if any single write fails.
fn write_outputs(files: &[(&Path, &str)]) -> Result<(), CliError> {
    for (index, (path, contents)) in files.iter().enumerate() {
        if let Err(error) = fs::write(path, contents) {
            for (written, _) in &files[..=index] {
                let _ = fs::remove_file(written);
            }
            return Err(CliError::Config(format!(
                "cannot write {}: {error}",
                path.display()
            )));
        }
    }
    Ok(())
}

struct SweepRow {
    sampling_rate: f64,
    t: u64,
    alpha_star: Option<u32>,
    epsilon: f64,
    method: &'static str,
}

pub fn account_sweep(
    config_path: &Path,
    rates: Option<Vec<f64>>,
    out: &Path,
) -> Result<(), CliError> {
    let file = config_file::load(config_path)?;
    let block = file.accountant.ok_or_else(|| {
        CliError::Config("account sweep needs an `accountant` block in the config file".into())
    })?;
    block
        .to_config(block.sampling_rate)
        .validate()
        .map_err(config_error)?;

    let mut rates = rates.unwrap_or_else(|| vec![block.sampling_rate]);
    for &rate in &rates {
        if !rate.is_finite() || !(0.0..=1.0).contains(&rate) {
            return Err(CliError::Config(format!(
                "sampling rates must lie in [0, 1], got {rate}"
            )));
        }
    }
    rates.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    rates.dedup();

    let mut rows = Vec::new();
    for &rate in &rates {
        let config = block.to_config(rate);
        let curve = accountant::sweep(&config).map_err(domain_error)?;
        rows.extend(curve.rows.iter().map(|row| SweepRow {
            sampling_rate: rate,
            t: row.t,
            alpha_star: row.alpha_star,
            epsilon: row.epsilon,
            method: "rdp",
        }));
        if rate == 1.0 {
            let baseline = accountant::act_sweep(&config).map_err(domain_error)?;
            rows.extend(baseline.rows.iter().map(|row| SweepRow {
                sampling_rate: rate,
                t: row.t,
                alpha_star: row.alpha_star,
                epsilon: row.epsilon,
                method: "act",
            }));
        }
    }
    rows.sort_by(|a, b| {
        a.sampling_rate
            .partial_cmp(&b.sampling_rate)
            .expect("finite rates")
            .then(a.method.cmp(b.method))
            .then(a.t.cmp(&b.t))
    });

    let mut csv =
        String::from("sampling_rate,t,alpha_star,epsilon,delta,noise_multiplier,method\n");
    for row in &rows {
        let alpha_star = row.alpha_star.map(|a| a.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(row.sampling_rate),
            row.t,
            alpha_star,
            fmt_f64(row.epsilon),
            fmt_f64(block.delta),
            fmt_f64(block.noise_multiplier),
            row.method
        ));
    }
    write_outputs(&[(out, &csv)])
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn simulate(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let file = config_file::load(config_path)?;
    let system = file.system.ok_or_else(|| {
        CliError::Config("simulate needs a `system` block in the config file".into())
    })?;
    let task_block = file.task.ok_or_else(|| {
        CliError::Config("simulate needs a `task` block in the config file".into())
    })?;
    let accounting = file.accounting.ok_or_else(|| {
        CliError::Config("simulate needs an `accounting` block in the config file".into())
    })?;
    let gains = file.channel_gains.unwrap_or_default();

    system.validate().map_err(config_error)?;
    task_block.validate()?;
    accounting.validate().map_err(config_error)?;
    gains.validate().map_err(config_error)?;

    let (_, datasets) = oac_sim::synthetic_regression_data(
        task_block.dim,
        system.n_devices,
        task_block.samples_per_device,
        task_block.observation_noise_std,
        system.seed,
    )
    .map_err(config_error)?;
    let mut devices = datasets
        .into_iter()
        .enumerate()
        .map(|(id, data)| DeviceState::new(id, data, 1.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(config_error)?;
    let task = LinearRegression::new(task_block.dim);

    let trajectory =
        run(&system, &task, &mut devices, &accounting, &gains).map_err(domain_error)?;

    let mut csv = String::from("round,loss,epsilon,delta,a_t,b_t,seed\n");
    for row in &trajectory.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.round,
            fmt_f64(row.loss),
            fmt_f64(row.epsilon),
            fmt_f64(row.delta),
            row.active_devices,
            row.batch_total,
            system.seed
        ));
    }

    let resolved = RunConfigFile {
        schema_version: SCHEMA_VERSION,
        accountant: file.accountant,
        system: Some(system),
        task: Some(task_block),
        accounting: Some(accounting),
        channel_gains: Some(gains),
    };
    let mut metadata =
        serde_json::to_string_pretty(&resolved).map_err(|e| CliError::Config(e.to_string()))?;
    metadata.push('\n');

    write_outputs(&[(out, &csv), (&sidecar_path(out), &metadata)])
}

pub fn rdp_eval(rate: f64, noise: f64, alpha: u32) -> Result<(), CliError> {
    let spec = SampledGmSpec::new(rate, noise).map_err(domain_error)?;
    let epsilon = rdp(&spec, alpha).map_err(domain_error)?;

    let mut object = serde_json::json!({
        "sampling_rate": rate,
        "noise_multiplier": noise,
        "alpha": alpha,
        "epsilon": epsilon,
        "conditions": serde_json::Value::Null,
    });
    if rate > 0.0 {
        let conditions = bound_conditions(&spec, f64::from(alpha)).map_err(domain_error)?;
        object["conditions"] = serde_json::json!({
            "rate_ok": conditions.rate_ok,
            "noise_ok": conditions.noise_ok,
            "cond1_ok": conditions.cond1_ok,
            "cond2_ok": conditions.cond2_ok,
        });
        if conditions.all_hold() {
            let bound = closed_form_bound(&spec, f64::from(alpha)).map_err(domain_error)?;
            object["bound"] = serde_json::json!(bound);
        }
    }
    println!("{object}");
    Ok(())
}
