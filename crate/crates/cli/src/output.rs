use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use beamband::scenarios::{Aggregate, RunTrace, StaticEvaluation};
use serde::Serialize;

#[derive(Debug, Serialize)]
struct Row<'a> {
    policy_label: &'a str,
    realization_id: usize,
    slot_index: usize,
    period_ms: u64,
    num_sectors: usize,
    #[serde(rename = "R")]
    ratio: String,
    effective_rate_gbps: f64,
    normalized_reward: f64,
    cumulative_regret: f64,
}

pub fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

/// Writes one row per (trace set, realization, slot), in the order given.
pub fn write_csv(path: &Path, sets: &[Vec<RunTrace>]) -> Result<usize> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut rows = 0;
    for trace in sets.iter().flatten() {
        for r in &trace.records {
            w.serialize(Row {
                policy_label: &trace.label,
                realization_id: trace.realization_id,
                slot_index: r.slot_index,
                period_ms: r.period_ms,
                num_sectors: r.num_sectors,
                ratio: r.ratio.to_string(),
                effective_rate_gbps: r.effective_rate_gbps,
                normalized_reward: r.normalized_reward,
                cumulative_regret: r.cumulative_regret.unwrap_or(0.0),
            })?;
            rows += 1;
        }
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub run: RunInfo,
    pub baselines: Baselines,
    pub summary: Vec<Summary>,
    pub config: toml::Table,
}

#[derive(Debug, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub scenario: u8,
    pub seed: u64,
    pub realizations: usize,
    pub slots: usize,
    pub policies: Vec<String>,
    pub ratios: Vec<String>,
    pub config_file: Option<String>,
    /// Config keys and flags that differ from the built-in defaults.
    pub overrides: Vec<String>,
    pub csv_rows: usize,
}

#[derive(Debug, Serialize)]
pub struct Baselines {
    pub genius: String,
    pub genius_rate_gbps: f64,
    pub worst: String,
    pub worst_rate_gbps: f64,
    pub arms: Vec<String>,
    pub arm_rates_gbps: Vec<f64>,
}

impl From<&StaticEvaluation> for Baselines {
    fn from(e: &StaticEvaluation) -> Self {
        Baselines {
            genius: e.genius_arm().to_string(),
            genius_rate_gbps: e.genius_rate_gbps(),
            worst: e.worst_arm().to_string(),
            worst_rate_gbps: e.worst_rate_gbps(),
            arms: e.arms.iter().map(ToString::to_string).collect(),
            arm_rates_gbps: e.mean_rate_gbps.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub label: String,
    pub tail_window: usize,
    pub tail_mean_gbps: f64,
    pub final_mean_rate_gbps: f64,
    pub final_mean_cumulative_regret: f64,
}

impl Summary {
    pub fn new(label: &str, agg: &Aggregate) -> Self {
        Summary {
            label: label.to_string(),
            tail_window: agg.window,
            tail_mean_gbps: agg.tail_mean_gbps,
            final_mean_rate_gbps: agg.mean_rate_gbps.last().copied().unwrap_or(0.0),
            final_mean_cumulative_regret: agg.mean_cumulative_regret.as_ref().and_then(|c| c.last().copied()).unwrap_or(0.0),
        }
    }
}

pub fn write_meta(path: &Path, meta: &Meta) -> Result<()> {
    create_parent(path)?;
    let text = toml::to_string(meta).context("serializing metadata")?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
