//! Bit-exact CSV emission and the JSON run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use loopid::{BoundCheck, ExperimentConfig, SweepRow};

use crate::CliError;

/// Column order is a stable external interface; do not reorder.
pub const CSV_HEADER: &str = "grid_value,T,N_eff,n_diverged,rate_bits_per_step,rate_stderr,\
L_T_bits,P_hat,J_hat,J_stderr,capacity_of_Phat_bits,sum_stepwise_capacity_bits,\
thm3_power_bound,det_PiT_mean,det_lower_bound";

/// Prints a float with 17 significant digits so parsing the text recovers
/// the exact bit pattern; unavailable values (single-run standard errors)
/// print as NaN.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Renders the full CSV text for a sweep, header first.
pub fn render_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Config("no sweep rows to write".to_string()));
    }
    let mut out = String::with_capacity(256 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let s = &row.stats;
        let horizon = s.horizon as f64;
        let fields = [
            format_float(row.grid_value),
            s.horizon.to_string(),
            s.runs_used.to_string(),
            s.diverged_runs.to_string(),
            format_float(s.rate_bits_per_step),
            format_float(opt(s.cumulative_bits_stderr.map(|se| se / horizon))),
            format_float(s.cumulative_bits),
            format_float(s.bounds.mean_power),
            format_float(s.mean_cost),
            format_float(opt(s.mean_cost_stderr)),
            format_float(s.bounds.capacity_of_mean_power),
            format_float(s.bounds.sum_step_capacity),
            format_float(s.bounds.cost_power_bound),
            format_float(s.mean_det_final),
            format_float(s.bounds.det_lower_bound),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Writes the sweep CSV to `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<(), CliError> {
    let text = render_csv(rows)?;
    std::fs::write(path, text).map_err(|source| CliError::Io {
        action: "write results",
        path: path.display().to_string(),
        source,
    })
}

/// Everything needed to reproduce and audit one invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub master_seed: u64,
    pub timestamp: String,
    /// Effective configuration (after any --seed override); feeding this
    /// back through the binary reproduces the run byte-for-byte.
    pub config: ExperimentConfig,
    pub rows: Vec<ManifestRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestRow {
    pub grid_value: f64,
    pub runs_used: usize,
    pub diverged_runs: usize,
    pub rate_bits_per_step: f64,
    pub cumulative_bits: f64,
    pub mean_power: f64,
    pub mean_cost: f64,
    pub capacity_bits: f64,
    pub cost_power_bound: f64,
    pub mean_det_final: f64,
    pub det_lower_bound: f64,
    pub checks: Vec<ManifestCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: Option<f64>,
    pub pass: bool,
    pub enforced: bool,
}

impl ManifestCheck {
    pub fn from_check(c: &BoundCheck) -> Self {
        ManifestCheck {
            name: c.name.to_string(),
            lhs: c.lhs,
            rhs: c.rhs,
            slack: c.slack,
            pass: c.pass,
            enforced: c.enforced,
        }
    }
}

impl ManifestRow {
    pub fn from_row(row: &SweepRow, checks: &[BoundCheck]) -> Self {
        let s = &row.stats;
        ManifestRow {
            grid_value: row.grid_value,
            runs_used: s.runs_used,
            diverged_runs: s.diverged_runs,
            rate_bits_per_step: s.rate_bits_per_step,
            cumulative_bits: s.cumulative_bits,
            mean_power: s.bounds.mean_power,
            mean_cost: s.mean_cost,
            capacity_bits: s.bounds.capacity_of_mean_power,
            cost_power_bound: s.bounds.cost_power_bound,
            mean_det_final: s.mean_det_final,
            det_lower_bound: s.bounds.det_lower_bound,
            checks: checks.iter().map(ManifestCheck::from_check).collect(),
        }
    }
}

/// The manifest sits next to the CSV as `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", out.display()))
}

/// Writes the manifest next to the result file.
pub fn emit_manifest(manifest: &RunManifest, out: &Path) -> Result<(), CliError> {
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text).map_err(|source| CliError::Io {
        action: "write manifest",
        path: path.display().to_string(),
        source,
    })
}
