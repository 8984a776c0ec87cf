use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Engine, ScenarioConfig};
use super::run::{RunRecord, SeriesRow};
use crate::error::{Error, Result};
use crate::model::{DerivedParams, RegimeReport};

/// Column order of every per-run CSV.
pub const CSV_COLUMNS: [&str; 14] = [
    "engine",
    "r",
    "t_in_inv_g",
    "V_ar",
    "V_ar_stderr",
    "dB",
    "theta",
    "theta_opt",
    "V_ar_min",
    "n_a",
    "n_b",
    "leak_a",
    "leak_b",
    "entangled",
];

fn num(x: f64) -> String {
    format!("{:?}", x + 0.0)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV cells of `row` in [`CSV_COLUMNS`] order. Floats use the shortest
/// representation that round-trips, switching to exponent notation for
/// very small or large magnitudes.
pub fn csv_fields(row: &SeriesRow) -> Vec<String> {
    let r = &row.record;
    vec![
        row.engine.name().to_string(),
        num(r.r),
        num(r.t),
        num(r.v_ar),
        opt(r.v_ar_stderr),
        num(r.db),
        num(r.theta),
        opt(r.theta_opt),
        opt(r.v_ar_min),
        num(row.n_a),
        num(row.n_b),
        num(row.leak_a),
        num(row.leak_b),
        r.entangled.to_string(),
    ]
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes rows with optional leading columns shared by every row.
pub fn write_csv<'a, W: Write>(
    out: W,
    leading: &[&str],
    rows: impl IntoIterator<Item = (Vec<String>, &'a SeriesRow)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(leading.iter().copied().chain(CSV_COLUMNS)).map_err(csv_error)?;
    for (lead, row) in rows {
        w.write_record(lead.into_iter().chain(csv_fields(row))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_csv_string(record: &RunRecord) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, &[], record.rows().map(|r| (Vec::new(), r)))?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSummary {
    pub engine: Engine,
    pub dim: usize,
    pub steps: usize,
    pub min_v_ar: Option<f64>,
    pub r_at_min: Option<f64>,
    pub max_db: Option<f64>,
    pub max_leak_a: f64,
    pub max_leak_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_jumped: Option<usize>,
    pub wall_clock_s: f64,
}

/// JSON summary written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub code_version: String,
    pub timestamp: u64,
    pub derived: DerivedParams,
    pub regime: RegimeReport,
    pub min_v_ar: Option<f64>,
    pub max_db: Option<f64>,
    pub engines: Vec<EngineSummary>,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

impl RunSummary {
    pub fn new(record: &RunRecord) -> Self {
        let engines = record
            .engines
            .iter()
            .map(|e| {
                let best = e.min_v_ar();
                EngineSummary {
                    engine: e.engine,
                    dim: e.dim,
                    steps: e.steps,
                    min_v_ar: best.map(|r| r.record.v_ar),
                    r_at_min: best.map(|r| r.record.r),
                    max_db: best.map(|r| r.record.db),
                    max_leak_a: e.truncation.max_leak_a,
                    max_leak_b: e.truncation.max_leak_b,
                    norm_drift: e.norm_drift,
                    trace_deviation: e.trace_deviation,
                    min_eigenvalue: e.min_eigenvalue,
                    n_traj: e.n_traj,
                    n_jumped: e.n_jumped,
                    wall_clock_s: e.wall_clock_s,
                }
            })
            .collect();
        RunSummary {
            config: record.config.clone(),
            code_version: record.code_version.clone(),
            timestamp: record.timestamp,
            derived: record.derived.clone(),
            regime: record.regime.clone(),
            min_v_ar: record.min_v_ar(),
            max_db: record.max_db(),
            engines,
            warnings: record.warnings.clone(),
            wall_clock_s: record.wall_clock_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Output directory: explicit override, then `output.dir`, then the working directory.
pub fn output_dir(config: &ScenarioConfig, overridden: Option<&Path>) -> PathBuf {
    overridden
        .map(Path::to_path_buf)
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes `<name>.csv` and `<name>.json` (or the configured file names) into `dir`.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<OutputPaths> {
    std::fs::create_dir_all(dir)?;
    let out = &record.config.output;
    let name = &record.config.name;
    let csv = dir.join(out.csv.clone().unwrap_or_else(|| format!("{name}.csv")));
    let summary = dir.join(out.summary.clone().unwrap_or_else(|| format!("{name}.json")));
    std::fs::write(&csv, run_csv_string(record)?)?;
    let json = serde_json::to_string_pretty(&RunSummary::new(record)).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&summary, json + "\n")?;
    Ok(OutputPaths { csv, summary })
}
