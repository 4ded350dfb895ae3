use serde::{Deserialize, Serialize};

use super::{RunTrace, ScenarioError};

/// Per-slot means across realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean_rate_gbps: Vec<f64>,
    pub mean_reward: Vec<f64>,
    /// Mean over the last `window` slots of `mean_rate_gbps`.
    pub tail_mean_gbps: f64,
    pub window: usize,
    /// Mean cumulative regret per slot, when every trace carries regret.
    pub mean_cumulative_regret: Option<Vec<f64>>,
}

pub fn aggregate(traces: &[RunTrace], window: usize) -> Result<Aggregate, ScenarioError> {
    let first = traces.first().ok_or(ScenarioError::Empty)?;
    let len = first.records.len();
    if let Some(bad) = traces.iter().find(|t| t.records.len() != len) {
        return Err(ScenarioError::LengthMismatch(len, bad.records.len()));
    }
    let n = traces.len() as f64;
    let mut mean_rate_gbps = vec![0.0; len];
    let mut mean_reward = vec![0.0; len];
    let mut regret = Some(vec![0.0; len]);
    for t in traces {
        for (i, r) in t.records.iter().enumerate() {
            mean_rate_gbps[i] += r.effective_rate_gbps;
            mean_reward[i] += r.normalized_reward;
            match (&mut regret, r.cumulative_regret) {
                (Some(acc), Some(c)) => acc[i] += c,
                _ => regret = None,
            }
        }
    }
    for v in mean_rate_gbps.iter_mut().chain(mean_reward.iter_mut()) {
        *v /= n;
    }
    if let Some(acc) = &mut regret {
        acc.iter_mut().for_each(|v| *v /= n);
    }
    let window = window.clamp(1, len.max(1));
    let tail = &mean_rate_gbps[len.saturating_sub(window)..];
    let tail_mean_gbps = if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
    Ok(Aggregate { mean_rate_gbps, mean_reward, tail_mean_gbps, window, mean_cumulative_regret: regret })
}

/// First slot whose trailing `smoothing`-slot average reaches `level`.
pub fn first_slot_reaching(curve: &[f64], level: f64, smoothing: usize) -> Option<usize> {
    let w = smoothing.max(1);
    (0..curve.len()).find(|&i| {
        let lo = (i + 1).saturating_sub(w);
        let slice = &curve[lo..=i];
        slice.iter().sum::<f64>() / slice.len() as f64 >= level
    })
}
