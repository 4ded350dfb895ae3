//! Experiment runners binding bandit policies to the mmWave environment.

mod aggregate;
mod controller;
mod runner;

pub use aggregate::{aggregate, first_slot_reaching, Aggregate};
pub use controller::{Arm, Decision, PolicySpec};
pub use runner::{
    evaluate_static_policies, run_policy, run_realization, run_scenario_i, run_scenario_ii, run_scenario_iii,
    RunTrace, SlotRecord, StaticEvaluation,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit::BanditError;
use crate::env::{EnvError, EnvParams};
use crate::mcts::MctsError;
use crate::ratio::SweepRatio;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("runner for scenario {expected} called with a scenario {found} config")]
    Mismatch { expected: Scenario, found: Scenario },
    #[error("policy `{policy}` is not available in scenario {scenario}")]
    UnsupportedPolicy { policy: String, scenario: Scenario },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("traces have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("no traces to aggregate")]
    Empty,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error(transparent)]
    Mcts(#[from] MctsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Sweeping-period selection.
    I,
    /// Joint period and beamwidth selection.
    II,
    /// Joint period, beamwidth and beam-direction selection.
    III,
}

impl Scenario {
    pub fn number(self) -> u8 {
        match self {
            Scenario::I => 1,
            Scenario::II => 2,
            Scenario::III => 3,
        }
    }
}

impl TryFrom<u8> for Scenario {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            1 => Ok(Scenario::I),
            2 => Ok(Scenario::II),
            3 => Ok(Scenario::III),
            other => Err(format!("unknown scenario {other} (expected 1, 2 or 3)")),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> Self {
        s.number()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A violated configuration constraint, named by its field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub periods_ms: Vec<u64>,
    /// Beamwidth levels as BS sector counts (scenarios II and III).
    pub sector_counts: Vec<usize>,
    /// BS codebook size when the beamwidth is not an action (scenario I).
    pub fixed_bs_sectors: usize,
    /// Fraction of the chosen codebook swept per slot (scenario III).
    pub ratio: SweepRatio,
    pub slots: usize,
    pub realizations: usize,
    pub seed: u64,
    pub env: EnvParams,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            periods_ms: vec![10, 20, 40, 80, 160],
            sector_counts: vec![16, 32, 64, 128, 256, 512],
            fixed_bs_sectors: 256,
            ratio: SweepRatio::FULL,
            slots: if scenario == Scenario::III { 300 } else { 500 },
            realizations: 500,
            seed: 0,
            env: EnvParams::default(),
        }
    }

    /// The `(period, sectors)` arms of the flat formulation, period-major.
    pub fn arms(&self) -> Vec<Arm> {
        match self.scenario {
            Scenario::I => self.periods_ms.iter().map(|&p| Arm { period_ms: p, num_sectors: self.fixed_bs_sectors }).collect(),
            Scenario::II | Scenario::III => self
                .periods_ms
                .iter()
                .flat_map(|&p| self.sector_counts.iter().map(move |&n| Arm { period_ms: p, num_sectors: n }))
                .collect(),
        }
    }

    pub fn active_sector_counts(&self) -> Vec<usize> {
        match self.scenario {
            Scenario::I => vec![self.fixed_bs_sectors],
            _ => self.sector_counts.clone(),
        }
    }

    /// Every violated invariant, each with its field path.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut bad = |path: &str, message: String| issues.push(ConfigIssue { path: path.into(), message });

        if self.periods_ms.is_empty() {
            bad("scenario.periods_ms", "at least one period is required".into());
        }
        if self.periods_ms.contains(&0) {
            bad("scenario.periods_ms", "periods must be positive".into());
        }
        let mut sorted = self.periods_ms.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.periods_ms.len() {
            bad("scenario.periods_ms", "periods must be distinct".into());
        }
        let sectors = self.active_sector_counts();
        if sectors.is_empty() {
            bad("scenario.sector_counts", "at least one sector count is required".into());
        }
        let sector_path = if self.scenario == Scenario::I { "scenario.fixed_bs_sectors" } else { "scenario.sector_counts" };
        if sectors.contains(&0) {
            bad(sector_path, "sector counts must be positive".into());
        }
        let mut uniq = sectors.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != sectors.len() {
            bad(sector_path, "sector counts must be distinct".into());
        }
        for &n in &sectors {
            if n > 0 && self.ratio.exact_beams(n).is_none() {
                bad(
                    "scenario.ratio",
                    format!("R = {} gives {} beams for {n} sectors; N_s * R must be an integer", self.ratio, n as f64 * self.ratio.value()),
                );
            }
        }
        if self.scenario != Scenario::III && !self.ratio.is_full() {
            bad("scenario.ratio", "partial sweeps are only defined for scenario 3".into());
        }
        if self.slots == 0 {
            bad("scenario.slots", "must be at least 1".into());
        }
        if self.realizations == 0 {
            bad("scenario.realizations", "must be at least 1".into());
        }

        let env = &self.env;
        let b = &env.budget;
        if !(0.0..=1.0).contains(&b.block_prob) {
            bad("link.block_prob", format!("{} is not a probability", b.block_prob));
        }
        for (path, v) in [
            ("link.carrier_ghz", b.carrier_ghz),
            ("link.bandwidth_hz", b.bandwidth_hz),
            ("link.se_cap_bps_hz", b.se_cap_bps_hz),
            ("environment.el_beamwidth_deg", env.el_beamwidth_deg),
            ("environment.measurement_s", env.measurement_s),
            ("environment.substep_s", env.substep_s),
            ("environment.min_distance_m", env.min_distance_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad(path, format!("must be positive and finite, got {v}"));
            }
        }
        for (path, v) in [
            ("link.block_loss_db", b.block_loss_db),
            ("link.implementation_loss_db", b.implementation_loss_db),
            ("environment.shadowing_std_db", env.shadowing_std_db),
            ("mobility.radius_m", env.mobility.radius_m),
            ("mobility.speed_min_mps", env.mobility.speed_min_mps),
            ("mobility.max_rotation_deg_s", env.mobility.max_rotation_deg_s),
            ("mobility.heading_noise_deg_sqrt_s", env.mobility.heading_noise_deg_sqrt_s),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                bad(path, format!("must be non-negative and finite, got {v}"));
            }
        }
        for (path, v) in [
            ("link.tx_power_dbm", b.tx_power_dbm),
            ("link.noise_figure_db", b.noise_figure_db),
            ("link.sidelobe_gain_dbi", b.sidelobe_gain_dbi),
            ("environment.quasi_omni_gain_dbi", env.quasi_omni_gain_dbi),
            ("environment.connect_threshold_db", env.connect_threshold_db),
        ] {
            if !v.is_finite() {
                bad(path, format!("must be finite, got {v}"));
            }
        }
        if env.mobility.speed_max_mps < env.mobility.speed_min_mps {
            bad("mobility.speed_max_mps", "must not be below speed_min_mps".into());
        }
        if env.ue_sectors == 0 {
            bad("environment.ue_sectors", "must be at least 1".into());
        }
        issues
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        match self.issues().as_slice() {
            [] => Ok(()),
            issues => Err(ScenarioError::Config(issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))),
        }
    }
}
