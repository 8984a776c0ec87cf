//! One-dimensional parameter sweeps.
//!
//! An axis is a dotted path into the configuration, e.g. `rates.gamma`.
//! Several paths joined by `+` move together; each sweep value then carries
//! one component per path separated by `:`, or a single number applied to
//! all of them. `model.delta+model.omega_drive` with values `35:20,90:50`
//! steps through two drive settings.
//!
//! Every point reuses the base master seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::output::{write_csv, write_outputs};
use super::run::{run_scenario, RunOptions, RunRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: String,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub axis: String,
    pub points: Vec<SweepPoint>,
}

/// Splits `a,b,c`, dropping empty items.
pub fn parse_values(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn set_path(root: &mut toml::Value, path: &str, raw: &str) -> Result<()> {
    let bad = |msg: String| Error::ConfigInvalid(msg);
    let mut keys: Vec<&str> = path.split('.').collect();
    let leaf = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| bad(format!("empty axis `{path}`")))?;
    let mut node = root;
    for k in keys {
        node = node
            .get_mut(k)
            .filter(|v| v.is_table())
            .ok_or_else(|| bad(format!("axis `{path}`: no section `{k}`")))?;
    }
    let table = node.as_table_mut().ok_or_else(|| bad(format!("axis `{path}` does not name a field")))?;
    let value = match table.get(leaf) {
        Some(toml::Value::Integer(_)) => raw
            .parse::<i64>()
            .map(toml::Value::Integer)
            .map_err(|_| bad(format!("axis `{path}` expects an integer, got `{raw}`")))?,
        Some(toml::Value::Float(_)) | None => raw
            .parse::<f64>()
            .map(toml::Value::Float)
            .map_err(|_| bad(format!("axis `{path}` expects a number, got `{raw}`")))?,
        Some(_) => return Err(bad(format!("axis `{path}` is not a numeric field"))),
    };
    table.insert(leaf.to_string(), value);
    Ok(())
}

/// `base` with the axis set to `value`.
pub fn apply_axis(base: &ScenarioConfig, axis: &str, value: &str) -> Result<ScenarioConfig> {
    let paths: Vec<&str> = axis.split('+').map(str::trim).collect();
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() != 1 && parts.len() != paths.len() {
        return Err(Error::ConfigInvalid(format!(
            "sweep value `{value}` has {} components, axis `{axis}` has {}",
            parts.len(),
            paths.len()
        )));
    }
    let mut doc = toml::Value::try_from(base).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    for (i, path) in paths.iter().enumerate() {
        set_path(&mut doc, path, parts[if parts.len() == 1 { 0 } else { i }])?;
    }
    let cfg: ScenarioConfig = doc.try_into().map_err(|e: toml::de::Error| Error::ConfigInvalid(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `base` once per value. All configurations are validated before the
/// first run starts.
pub fn run_sweep(base: &ScenarioConfig, axis: &str, values: &[String], options: &RunOptions) -> Result<SweepRecord> {
    base.validate()?;
    let configs = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut cfg = apply_axis(base, axis, v)?;
            cfg.name = format!("{}_{i}", base.name);
            cfg.output.csv = None;
            cfg.output.summary = None;
            Ok((v.clone(), cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    let points = configs
        .into_iter()
        .map(|(value, cfg)| Ok(SweepPoint { value, record: run_scenario(&cfg, options)? }))
        .collect::<Result<_>>()?;
    Ok(SweepRecord { axis: axis.to_string(), points })
}

/// Per-point outputs plus `<name>_sweep.csv` in long format with leading
/// `axis` and `value` columns.
pub fn write_sweep(sweep: &SweepRecord, base_name: &str, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    for p in &sweep.points {
        write_outputs(&p.record, dir)?;
    }
    let path = dir.join(format!("{base_name}_sweep.csv"));
    let file = std::fs::File::create(&path)?;
    let rows = sweep
        .points
        .iter()
        .flat_map(|p| p.record.rows().map(move |r| (vec![sweep.axis.clone(), p.value.clone()], r)));
    write_csv(std::io::BufWriter::new(file), &["axis", "value"], rows)?;
    Ok(path)
}
