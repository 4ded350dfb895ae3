use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioConfig, ScenarioError};
use crate::bandit::{IndexKind, PolicyKind, PolicyState};
use crate::mcts::{DecisionTree, PathSelection};

/// A `(period, codebook size)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arm {
    pub period_ms: u64,
    pub num_sectors: usize,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms/{}", self.period_ms, self.num_sectors)
    }
}

/// How a run picks its configuration each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicySpec {
    /// Uniform choice of every sub-action each slot.
    Random,
    /// One bandit over the flat arm list of the scenario.
    Flat(PolicyKind),
    /// Tree search with the given index at the non-leaf layers.
    Tree(IndexKind),
    /// Always the same arm (position in [`ScenarioConfig::arms`]).
    Static(usize),
}

impl PolicySpec {
    pub fn default_label(&self, config: &ScenarioConfig) -> String {
        match self {
            PolicySpec::Random => "random".into(),
            PolicySpec::Flat(PolicyKind::Random) => "random".into(),
            PolicySpec::Flat(PolicyKind::Ucb1) => "ucb1".into(),
            PolicySpec::Flat(PolicyKind::KlUcb) => "klucb".into(),
            PolicySpec::Flat(PolicyKind::TsGaussian) => "ts".into(),
            PolicySpec::Flat(PolicyKind::TsBeta) => "ts-beta".into(),
            PolicySpec::Tree(IndexKind::KlUcb) => "mcts".into(),
            PolicySpec::Tree(IndexKind::Ucb1) => "mcts-ucb1".into(),
            PolicySpec::Static(i) => match config.arms().get(*i) {
                Some(arm) => format!("static {arm}"),
                None => format!("static #{i}"),
            },
        }
    }
}

/// One slot's configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub arm: Arm,
    /// Position of `arm` in the flat arm list.
    pub arm_index: usize,
    /// Swept BS beams; `None` sweeps the whole codebook.
    pub swept: Option<Vec<usize>>,
    path: Option<PathSelection>,
}

pub(crate) enum Controller {
    Flat { state: PolicyState, arms: Vec<Arm> },
    Tree { tree: DecisionTree, config_arms: Vec<Arm>, sectors: usize },
    Static { arm: Arm, index: usize },
    RandomSubset { config: ScenarioConfig },
}

impl Controller {
    pub(crate) fn new(spec: PolicySpec, config: &ScenarioConfig) -> Result<Self, ScenarioError> {
        let arms = config.arms();
        let unsupported = || ScenarioError::UnsupportedPolicy { policy: spec.default_label(config), scenario: config.scenario };
        Ok(match (spec, config.scenario) {
            (PolicySpec::Static(i), _) => {
                let arm = *arms.get(i).ok_or_else(unsupported)?;
                Controller::Static { arm, index: i }
            }
            (PolicySpec::Random, Scenario::III) => Controller::RandomSubset { config: config.clone() },
            (PolicySpec::Random, _) => Controller::Flat { state: PolicyState::new(PolicyKind::Random, arms.len())?, arms },
            (PolicySpec::Flat(_), Scenario::III) => return Err(unsupported()),
            (PolicySpec::Flat(kind), _) => Controller::Flat { state: PolicyState::new(kind, arms.len())?, arms },
            (PolicySpec::Tree(kind), scenario) => {
                let sectors = match scenario {
                    Scenario::I => Vec::new(),
                    _ => config.sector_counts.clone(),
                };
                let ratio = (scenario == Scenario::III).then_some(config.ratio);
                let tree = DecisionTree::new(&config.periods_ms, &sectors, ratio)?.with_node_policy(kind);
                Controller::Tree { tree, config_arms: arms, sectors: sectors.len() }
            }
        })
    }

    pub(crate) fn decide<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Decision, ScenarioError> {
        Ok(match self {
            Controller::Flat { state, arms } => {
                let i = state.select_arm(rng)?;
                Decision { arm: arms[i], arm_index: i, swept: None, path: None }
            }
            Controller::Static { arm, index } => Decision { arm: *arm, arm_index: *index, swept: None, path: None },
            Controller::Tree { tree, config_arms, sectors } => {
                let path = tree.select_path(rng)?;
                let arm_index = match path.beamwidth {
                    Some(b) => path.period * *sectors + b,
                    None => path.period,
                };
                Decision { arm: config_arms[arm_index], arm_index, swept: path.swept_beams.clone(), path: Some(path) }
            }
            Controller::RandomSubset { config } => {
                let p = rng.random_range(0..config.periods_ms.len());
                let s = rng.random_range(0..config.sector_counts.len());
                let n = config.sector_counts[s];
                let k = config.ratio.beams(n);
                let swept = if k == n {
                    None
                } else {
                    let mut beams = index::sample(rng, n, k).into_vec();
                    beams.sort_unstable();
                    Some(beams)
                };
                let arm_index = p * config.sector_counts.len() + s;
                Decision { arm: Arm { period_ms: config.periods_ms[p], num_sectors: n }, arm_index, swept, path: None }
            }
        })
    }

    pub(crate) fn learn(&mut self, decision: &Decision, reward: f64, connects: &[(usize, bool)]) -> Result<(), ScenarioError> {
        match self {
            Controller::Flat { state, .. } => state.update(decision.arm_index, reward)?,
            Controller::Tree { tree, .. } => {
                let path = decision.path.as_ref().expect("tree decisions carry their path");
                let feedback: &[(usize, bool)] = if path.swept_beams.is_some() { connects } else { &[] };
                tree.backpropagate(path, reward, feedback)?;
            }
            Controller::Static { .. } | Controller::RandomSubset { .. } => {}
        }
        Ok(())
    }
}
