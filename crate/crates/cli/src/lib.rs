//! Config-driven scenario runner for the `cqed` binary.

// `!(x > 0.0)` is used on purpose: it rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{Resolved, ScenarioConfig};
use error::CliError;
use output::{sha256_hex, write_outputs, RunManifest, ScenarioOutput};
use presets::Command;

/// Resolves `user` against its preset and runs it without writing files.
pub fn execute(
    command: Command,
    user: &ScenarioConfig,
    seed: Option<u64>,
) -> Result<(Resolved, ScenarioOutput), CliError> {
    let preset = presets::find(&user.scenario).ok_or_else(|| CliError::unknown_scenario(&user.scenario))?;
    if preset.command != command {
        return Err(CliError::validation(format!(
            "scenario `{}` belongs to `{}`, not `{}`",
            preset.name,
            preset.command.name(),
            command.name()
        )));
    }
    let mut resolved = Resolved::merge(&preset.config, user)?;
    if let Some(s) = seed {
        resolved.seed = s;
    }
    let out = scenarios::run_scenario(&resolved)?;
    Ok((resolved, out))
}

/// Runs a scenario and writes its CSV tables, report and manifest.
pub fn run(
    command: Command,
    user: &ScenarioConfig,
    seed: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<(RunManifest, PathBuf), CliError> {
    let start = Instant::now();
    let (resolved, out) = execute(command, user, seed)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| user.outputs.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let prefix = user.outputs.prefix.clone().unwrap_or_else(|| resolved.scenario.clone());
    let manifest = RunManifest {
        scenario: resolved.scenario.clone(),
        command: command.name().into(),
        config_hash: sha256_hex(resolved.canonical_json().as_bytes()),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: resolved.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: out.warnings.clone(),
        outputs: vec![],
    };
    write_outputs(&dir, &prefix, &out, manifest)
}
