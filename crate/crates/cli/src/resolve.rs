//! Builds the sweep config from a config file or preset plus flag overrides.

use std::fs::File;

use qaoae_core::experiments::{ExperimentConfig, Manifest, Mode, Preset};
use serde_json::{Map, Value};

use crate::{CliError, CliResult, SweepArgs};

fn load_config_file(path: &std::path::Path) -> CliResult<Value> {
    let value: Value = serde_json::from_reader(File::open(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if value.get("config").is_some() {
        let manifest: Manifest =
            serde_json::from_value(value).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        return Ok(serde_json::to_value(manifest.config)?);
    }
    Ok(value)
}

fn known_keys() -> Vec<String> {
    let probe = ExperimentConfig::new(Mode::Randomized, qaoae_core::GraphKind::Linear, vec![]);
    match serde_json::to_value(probe) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn parse_override(raw: &str) -> CliResult<(String, Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{raw}` is not of the form key=value")))?;
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.trim().to_string(), value))
}

/// Flags win over `--set`, which wins over the config file or preset.
pub fn resolve_config(mode: Mode, args: &SweepArgs) -> CliResult<ExperimentConfig> {
    let mut obj: Map<String, Value> = match (&args.config, &args.preset) {
        (Some(path), _) => match load_config_file(path)? {
            Value::Object(m) => m,
            _ => return Err(CliError::Validation(format!("{} is not a JSON object", path.display()))),
        },
        (None, Some(preset)) => {
            let preset: Preset = preset.parse()?;
            let kind = args
                .graph
                .as_deref()
                .ok_or_else(|| CliError::Usage("--preset needs --graph".into()))?
                .parse()?;
            match serde_json::to_value(ExperimentConfig::preset(mode, kind, preset))? {
                Value::Object(m) => m,
                _ => unreachable!("configs serialize to objects"),
            }
        }
        (None, None) => Map::new(),
    };
    if let Some(existing) = obj.get("mode") {
        if *existing != serde_json::to_value(mode)? {
            return Err(CliError::Validation(format!("config is for mode {existing}, subcommand runs {mode}")));
        }
    }
    obj.insert("mode".into(), serde_json::to_value(mode)?);

    let keys = known_keys();
    for raw in &args.overrides {
        let (key, value) = parse_override(raw)?;
        if !keys.contains(&key) {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        obj.insert(key, value);
    }
    let mut set = |key: &str, value: Value| {
        obj.insert(key.into(), value);
    };
    if let Some(g) = &args.graph {
        set("graph_kind", g.as_str().into());
    }
    if let Some(v) = &args.sizes {
        set("sizes", v.clone().into());
    }
    if let Some(v) = &args.depth {
        set("depths", v.clone().into());
    }
    if let Some(v) = &args.time_list {
        set("times", v.clone().into());
    }
    if let Some(v) = args.dt {
        set("dt", v.into());
    }
    if let Some(v) = args.problems {
        set("n_problems", v.into());
    }
    if let Some(v) = args.restarts {
        set("restarts", v.into());
    }
    if let Some(v) = args.seed {
        set("master_seed", v.into());
    }
    if let Some(v) = &args.bipartition {
        set("bipartition", v.as_str().into());
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| CliError::Validation(format!("config: {e}")))
}
