use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::controller::Controller;
use super::{Arm, PolicySpec, Scenario, ScenarioConfig, ScenarioError};
use crate::bandit::RegretLedger;
use crate::env::{self, BeamPair, Codebooks};
use crate::ratio::SweepRatio;
use crate::seed::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot_index: usize,
    pub period_ms: u64,
    pub num_sectors: usize,
    pub ratio: SweepRatio,
    pub swept_beams: usize,
    pub best_pair: (usize, usize),
    pub effective_rate_gbps: f64,
    pub normalized_reward: f64,
    /// Per-slot regret; `None` when the run had no static baseline.
    pub regret: Option<f64>,
    pub cumulative_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub label: String,
    pub realization_id: usize,
    pub records: Vec<SlotRecord>,
}

impl RunTrace {
    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.effective_rate_gbps)
    }
}

/// Mean performance of every fixed-arm policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticEvaluation {
    pub arms: Vec<Arm>,
    pub mean_rate_gbps: Vec<f64>,
    pub mean_reward: Vec<f64>,
    pub genius: usize,
    pub worst: usize,
}

impl StaticEvaluation {
    pub fn genius_arm(&self) -> Arm {
        self.arms[self.genius]
    }

    pub fn worst_arm(&self) -> Arm {
        self.arms[self.worst]
    }

    pub fn genius_rate_gbps(&self) -> f64 {
        self.mean_rate_gbps[self.genius]
    }

    pub fn worst_rate_gbps(&self) -> f64 {
        self.mean_rate_gbps[self.worst]
    }
}

/// Runs one realization of `spec` under `config`.
///
/// Environment randomness is drawn from streams keyed by (seed, realization,
/// slot), so every policy faces the same blockage, shadowing and rotation
/// draws in a given slot of a given realization.
pub fn run_realization(
    config: &ScenarioConfig,
    spec: PolicySpec,
    label: &str,
    realization: usize,
    baseline: Option<&StaticEvaluation>,
) -> Result<RunTrace, ScenarioError> {
    let params = &config.env;
    let r = realization as u64;
    let mut controller = Controller::new(spec, config)?;
    let mut world = env::init_realization(&params.mobility, &mut stream(config.seed, r, 0, Purpose::Init));
    let mut policy_rng = stream(config.seed, r, 0, Purpose::Policy);
    let mut codebooks: HashMap<usize, Codebooks> = HashMap::new();
    let max_rate = params.max_rate_bps();
    let mut ledger = baseline.map(|b| RegretLedger::new(b.mean_reward[b.genius]));
    let mut records = Vec::with_capacity(config.slots);

    for slot in 0..config.slots {
        let mut env_rng = stream(config.seed, r, slot as u64, Purpose::Environment);
        env::draw_slot_conditions(&mut world, params, &mut env_rng);

        let decision = controller.decide(&mut policy_rng)?;
        let n = decision.arm.num_sectors;
        let cbs = codebooks.entry(n).or_insert_with(|| params.codebooks(n));
        let all: Vec<usize>;
        let swept = match &decision.swept {
            Some(beams) => beams.as_slice(),
            None => {
                all = (0..n).collect();
                &all
            }
        };
        let result = env::sweep(&world, cbs, swept, params)?;
        let slot_s = decision.arm.period_ms as f64 * 1e-3;
        let rate = env::slot_effective_rate(&mut world, cbs, result.best_pair, slot_s, result.overhead_s, params, &mut env_rng)?;
        let reward = (rate * 1e9 / max_rate).clamp(0.0, 1.0);
        controller.learn(&decision, reward, &result.connects)?;

        let regret = match (&mut ledger, baseline) {
            (Some(ledger), Some(b)) => {
                let chosen = match decision.swept {
                    // Partial sweeps have no static counterpart; score the realized reward.
                    Some(_) => reward,
                    None => b.mean_reward[decision.arm_index],
                };
                Some(ledger.record_regret(chosen))
            }
            _ => None,
        };
        let BeamPair { bs_beam, ue_beam } = result.best_pair;
        records.push(SlotRecord {
            slot_index: slot,
            period_ms: decision.arm.period_ms,
            num_sectors: n,
            ratio: if config.scenario == Scenario::III { config.ratio } else { SweepRatio::FULL },
            swept_beams: swept.len(),
            best_pair: (bs_beam, ue_beam),
            effective_rate_gbps: rate,
            normalized_reward: reward,
            regret,
            cumulative_regret: ledger.as_ref().map(|l| l.cumulative()),
        });
    }
    Ok(RunTrace { label: label.to_string(), realization_id: realization, records })
}

/// Runs every realization of `spec` in parallel on the current rayon pool.
/// Traces come back in realization order regardless of scheduling.
pub fn run_policy(
    config: &ScenarioConfig,
    spec: PolicySpec,
    label: &str,
    baseline: Option<&StaticEvaluation>,
) -> Result<Vec<RunTrace>, ScenarioError> {
    config.validate()?;
    (0..config.realizations)
        .into_par_iter()
        .map(|r| run_realization(config, spec, label, r, baseline))
        .collect()
}

fn expect_scenario(config: &ScenarioConfig, expected: Scenario) -> Result<(), ScenarioError> {
    if config.scenario != expected {
        return Err(ScenarioError::Mismatch { expected, found: config.scenario });
    }
    Ok(())
}

/// Sweeping-period selection: the BS codebook is fixed and every slot sweeps it fully.
pub fn run_scenario_i(config: &ScenarioConfig, spec: PolicySpec, baseline: Option<&StaticEvaluation>) -> Result<Vec<RunTrace>, ScenarioError> {
    expect_scenario(config, Scenario::I)?;
    run_policy(config, spec, &spec.default_label(config), baseline)
}

/// Joint period and beamwidth selection, flat over 30 arms or through the tree.
pub fn run_scenario_ii(config: &ScenarioConfig, spec: PolicySpec, baseline: Option<&StaticEvaluation>) -> Result<Vec<RunTrace>, ScenarioError> {
    expect_scenario(config, Scenario::II)?;
    run_policy(config, spec, &spec.default_label(config), baseline)
}

/// Joint period, beamwidth and beam selection; only `N_s * R` beams are swept.
pub fn run_scenario_iii(config: &ScenarioConfig, spec: PolicySpec, baseline: Option<&StaticEvaluation>) -> Result<Vec<RunTrace>, ScenarioError> {
    expect_scenario(config, Scenario::III)?;
    run_policy(config, spec, &spec.default_label(config), baseline)
}

/// Runs each fixed arm over the full realization set with matched seeds.
///
/// Scenario III is evaluated over its `(period, sectors)` arms with full sweeps.
pub fn evaluate_static_policies(config: &ScenarioConfig) -> Result<StaticEvaluation, ScenarioError> {
    let mut config = config.clone();
    if config.scenario == Scenario::III {
        config.scenario = Scenario::II;
        config.ratio = SweepRatio::FULL;
    }
    let arms = config.arms();
    let max_rate_gbps = config.env.max_rate_bps() / 1e9;
    let mut mean_rate_gbps = Vec::with_capacity(arms.len());
    for i in 0..arms.len() {
        let traces = run_policy(&config, PolicySpec::Static(i), "static", None)?;
        let count = (traces.len() * config.slots) as f64;
        mean_rate_gbps.push(traces.iter().flat_map(|t| t.rates()).sum::<f64>() / count);
    }
    let mean_reward = mean_rate_gbps.iter().map(|r| r / max_rate_gbps).collect();
    let pick = |better: fn(f64, f64) -> bool| {
        (0..arms.len()).fold(0, |best, i| if better(mean_rate_gbps[i], mean_rate_gbps[best]) { i } else { best })
    };
    let genius = pick(|a, b| a > b);
    let worst = pick(|a, b| a < b);
    Ok(StaticEvaluation { arms, mean_rate_gbps, mean_reward, genius, worst })
}
