//! Stationary stochastic bandit policies.
//!
//! Rewards are normalized to `[0, 1]` by the caller. Every index policy
//! treats an unpulled arm as having an infinite index, so each arm is played
//! once before the confidence bounds take over.

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bisection tolerance for KL-UCB indices.
pub const DEFAULT_KL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BanditError {
    #[error("total pull count must be at least 1")]
    ZeroTotalPulls,
    #[error("arm has {pulls} pulls but only {total} pulls in total")]
    PullsExceedTotal { pulls: u64, total: u64 },
    #[error("reward {0} is outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("empirical mean {0} is outside [0, 1]")]
    MeanOutOfRange(f64),
    #[error("bisection tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("arm {index} does not exist (policy has {arms} arms)")]
    ArmOutOfRange { index: usize, arms: usize },
    #[error("policy {0:?} does not keep a posterior")]
    NotThompson(PolicyKind),
    #[error("a policy needs at least one arm")]
    NoArms,
}

/// Pull count and running mean reward of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArmEstimate {
    pub pulls: u64,
    /// Sentinel `0.0` while `pulls == 0`.
    pub mean_reward: f64,
}

impl ArmEstimate {
    pub fn with_stats(pulls: u64, mean_reward: f64) -> Self {
        Self { pulls, mean_reward: if pulls == 0 { 0.0 } else { mean_reward } }
    }

    pub fn is_unpulled(&self) -> bool {
        self.pulls == 0
    }

    /// Folds one observation into the running mean.
    pub fn observe(&mut self, reward: f64) {
        self.pulls += 1;
        self.mean_reward += (reward - self.mean_reward) / self.pulls as f64;
    }
}

/// Which optimistic index an index policy (or tree layer) maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexKind {
    Ucb1,
    KlUcb,
}

impl IndexKind {
    /// Index of `arm`, with `+inf` for unpulled arms.
    pub fn index(self, arm: &ArmEstimate, total_pulls: u64, kl_tolerance: f64) -> Result<f64, BanditError> {
        match self {
            IndexKind::Ucb1 => ucb1_index(arm, total_pulls),
            IndexKind::KlUcb => kl_ucb_index(arm, total_pulls, kl_tolerance),
        }
    }
}

/// UCB1: `mean + sqrt(2 ln(n) / n_i)`.
pub fn ucb1_index(arm: &ArmEstimate, total_pulls: u64) -> Result<f64, BanditError> {
    check_totals(arm, total_pulls)?;
    if arm.is_unpulled() {
        return Ok(f64::INFINITY);
    }
    let bonus = (2.0 * (total_pulls as f64).ln() / arm.pulls as f64).sqrt();
    Ok(arm.mean_reward + bonus)
}

/// Bernoulli KL divergence `kl(p || q)` with the `0 ln 0 = 0` convention.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    let mut d = 0.0;
    if p > 0.0 {
        d += p * (p / q).ln();
    }
    if p < 1.0 {
        d += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    d
}

/// KL-UCB: the largest `q` in `[mean, 1]` with `pulls * kl(mean, q) <= ln(total)`,
/// found by bisection to within `tolerance`.
pub fn kl_ucb_index(arm: &ArmEstimate, total_pulls: u64, tolerance: f64) -> Result<f64, BanditError> {
    if !(tolerance > 0.0) {
        return Err(BanditError::BadTolerance(tolerance));
    }
    check_totals(arm, total_pulls)?;
    if arm.is_unpulled() {
        return Ok(f64::INFINITY);
    }
    let mean = arm.mean_reward;
    if !(0.0..=1.0).contains(&mean) {
        return Err(BanditError::MeanOutOfRange(mean));
    }
    let budget = (total_pulls as f64).ln() / arm.pulls as f64;
    if kl_bernoulli(mean, 1.0) <= budget {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (mean, 1.0);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if kl_bernoulli(mean, mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_totals(arm: &ArmEstimate, total_pulls: u64) -> Result<(), BanditError> {
    if total_pulls == 0 {
        return Err(BanditError::ZeroTotalPulls);
    }
    if arm.pulls > total_pulls {
        return Err(BanditError::PullsExceedTotal { pulls: arm.pulls, total: total_pulls });
    }
    Ok(())
}

/// Position of the largest score; ties go to a uniformly drawn maximizer.
///
/// The RNG is consumed only when more than one score attains the maximum, so
/// every caller that scores arms the same way consumes randomness identically.
pub fn argmax_uniform_ties<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == best)
        .map(|(i, _)| i)
        .collect();
    match winners.len() {
        0 => 0,
        1 => winners[0],
        n => winners[rng.random_range(0..n)],
    }
}

/// Picks the arm with the largest index among `arms`, with `total_pulls` as `n`.
pub fn select_by_index<R: Rng + ?Sized>(
    arms: &[ArmEstimate],
    total_pulls: u64,
    kind: IndexKind,
    kl_tolerance: f64,
    rng: &mut R,
) -> Result<usize, BanditError> {
    if arms.is_empty() {
        return Err(BanditError::NoArms);
    }
    // With nothing pulled yet every index is the +inf sentinel.
    let n = total_pulls.max(1);
    let scores = arms
        .iter()
        .map(|a| kind.index(a, n, kl_tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(argmax_uniform_ties(&scores, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Random,
    Ucb1,
    KlUcb,
    TsGaussian,
    TsBeta,
}

impl PolicyKind {
    pub fn is_thompson(self) -> bool {
        matches!(self, PolicyKind::TsGaussian | PolicyKind::TsBeta)
    }
}

/// Per-arm posterior parameters for the Thompson-sampling kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Posterior {
    /// Flat prior, unit observation variance: `N(mean, 1 / (count + 1))`.
    Gaussian { mean: f64, count: f64 },
    /// `Beta(alpha, beta)`, starting from `Beta(1, 1)`.
    Beta { alpha: f64, beta: f64 },
}

impl Posterior {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Posterior::Gaussian { mean, count } => {
                let std = (1.0 / (count + 1.0)).sqrt();
                Normal::new(mean, std).expect("finite std").sample(rng)
            }
            Posterior::Beta { alpha, beta } => Beta::new(alpha, beta).expect("alpha, beta >= 1").sample(rng),
        }
    }

    fn observe(&mut self, reward: f64) {
        match self {
            Posterior::Gaussian { mean, count } => {
                *mean = (*count * *mean + reward) / (*count + 1.0);
                *count += 1.0;
            }
            Posterior::Beta { alpha, beta } => {
                *alpha += reward;
                *beta += 1.0 - reward;
            }
        }
    }
}

/// A named policy over a fixed set of `K >= 1` arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    kind: PolicyKind,
    arms: Vec<ArmEstimate>,
    total_pulls: u64,
    posteriors: Vec<Posterior>,
    kl_tolerance: f64,
}

impl PolicyState {
    pub fn new(kind: PolicyKind, num_arms: usize) -> Result<Self, BanditError> {
        if num_arms == 0 {
            return Err(BanditError::NoArms);
        }
        let prior = match kind {
            PolicyKind::TsGaussian => Some(Posterior::Gaussian { mean: 0.0, count: 0.0 }),
            PolicyKind::TsBeta => Some(Posterior::Beta { alpha: 1.0, beta: 1.0 }),
            _ => None,
        };
        Ok(Self {
            kind,
            arms: vec![ArmEstimate::default(); num_arms],
            total_pulls: 0,
            posteriors: prior.map(|p| vec![p; num_arms]).unwrap_or_default(),
            kl_tolerance: DEFAULT_KL_TOLERANCE,
        })
    }

    /// Builds a state from existing arm statistics (posteriors start from the prior).
    pub fn from_arms(kind: PolicyKind, arms: Vec<ArmEstimate>) -> Result<Self, BanditError> {
        let mut state = Self::new(kind, arms.len())?;
        state.total_pulls = arms.iter().map(|a| a.pulls).sum();
        state.arms = arms;
        Ok(state)
    }

    pub fn with_kl_tolerance(mut self, tolerance: f64) -> Result<Self, BanditError> {
        if !(tolerance > 0.0) {
            return Err(BanditError::BadTolerance(tolerance));
        }
        self.kl_tolerance = tolerance;
        Ok(self)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn arms(&self) -> &[ArmEstimate] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn total_pulls(&self) -> u64 {
        self.total_pulls
    }

    pub fn posteriors(&self) -> &[Posterior] {
        &self.posteriors
    }

    /// Overrides one arm's posterior; fails for non-Thompson kinds.
    pub fn set_posterior(&mut self, arm: usize, posterior: Posterior) -> Result<(), BanditError> {
        if !self.kind.is_thompson() {
            return Err(BanditError::NotThompson(self.kind));
        }
        let arms = self.arms.len();
        *self.posteriors.get_mut(arm).ok_or(BanditError::ArmOutOfRange { index: arm, arms })? = posterior;
        Ok(())
    }

    pub fn select_arm<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, BanditError> {
        match self.kind {
            PolicyKind::Random => Ok(rng.random_range(0..self.arms.len())),
            PolicyKind::Ucb1 => select_by_index(&self.arms, self.total_pulls, IndexKind::Ucb1, self.kl_tolerance, rng),
            PolicyKind::KlUcb => select_by_index(&self.arms, self.total_pulls, IndexKind::KlUcb, self.kl_tolerance, rng),
            PolicyKind::TsGaussian | PolicyKind::TsBeta => self.ts_sample_and_select(rng),
        }
    }

    /// Draws one posterior sample per arm and returns the argmax.
    pub fn ts_sample_and_select<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, BanditError> {
        if !self.kind.is_thompson() {
            return Err(BanditError::NotThompson(self.kind));
        }
        let samples: Vec<f64> = self.posteriors.iter().map(|p| p.sample(rng)).collect();
        Ok(argmax_uniform_ties(&samples, rng))
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<(), BanditError> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(BanditError::RewardOutOfRange(reward));
        }
        let arms = self.arms.len();
        let estimate = self.arms.get_mut(arm).ok_or(BanditError::ArmOutOfRange { index: arm, arms })?;
        estimate.observe(reward);
        self.total_pulls += 1;
        if let Some(post) = self.posteriors.get_mut(arm) {
            post.observe(reward);
        }
        Ok(())
    }
}

/// Per-slot and cumulative regret against the best static arm.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegretLedger {
    best_static_mean: f64,
    per_slot: Vec<f64>,
    cumulative: f64,
}

impl RegretLedger {
    pub fn new(best_static_mean: f64) -> Self {
        Self { best_static_mean, per_slot: Vec::new(), cumulative: 0.0 }
    }

    /// Appends `max(0, best - chosen)` and returns it.
    pub fn record_regret(&mut self, chosen_mean: f64) -> f64 {
        let regret = (self.best_static_mean - chosen_mean).max(0.0);
        self.per_slot.push(regret);
        self.cumulative += regret;
        regret
    }

    pub fn best_static_mean(&self) -> f64 {
        self.best_static_mean
    }

    pub fn per_slot(&self) -> &[f64] {
        &self.per_slot
    }

    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }
}
