//! Multi-armed bandit link configuration for a simulated mmWave link.
//!
//! * [`bandit`]: UCB1, KL-UCB, Thompson sampling and regret accounting.
//! * [`mcts`]: bandit-based tree search over period, beamwidth and beams.
//! * [`env`]: mobility, channel, beam sweeping and effective data rate.
//! * [`scenarios`]: experiment runners and baselines.

pub mod bandit;
pub mod env;
pub mod mcts;
pub mod ratio;
pub mod scenarios;
pub mod seed;

pub use bandit::{ArmEstimate, BanditError, IndexKind, PolicyKind, PolicyState, RegretLedger};
pub use env::{EnvError, EnvParams};
pub use ratio::SweepRatio;
