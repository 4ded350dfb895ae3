//! Bandit-based tree search over a factored link configuration.
//!
//! The tree is layered: a root whose children are sweeping periods, each
//! period holding one child per beamwidth level, and (when beams are learned)
//! each beamwidth node holding one leaf per beam of its codebook. Non-leaf
//! layers are walked with an index policy (KL-UCB by default). At the leaf
//! layer the `k` beams with the largest UCB1 indices are swept together, and
//! each leaf learns from its own binary "connects" feedback while the slot
//! reward flows back up the path.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bandit::{select_by_index, ArmEstimate, BanditError, IndexKind, DEFAULT_KL_TOLERANCE};
use crate::ratio::SweepRatio;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MctsError {
    #[error("malformed tree: {0}")]
    Structure(String),
    #[error("cannot pick {k} beams out of {available}")]
    KOutOfRange { k: usize, available: usize },
    #[error("feedback for beam {0}, which was not swept")]
    FeedbackNotSwept(usize),
    #[error("slot reward {0} is outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error(transparent)]
    Bandit(#[from] BanditError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    PeriodRoot,
    Period,
    Beamwidth,
    BeamLeaf,
}

impl Layer {
    fn child(self) -> Option<Layer> {
        match self {
            Layer::PeriodRoot => Some(Layer::Period),
            Layer::Period => Some(Layer::Beamwidth),
            Layer::Beamwidth => Some(Layer::BeamLeaf),
            Layer::BeamLeaf => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub layer: Layer,
    /// Period in ms, sector count, or beam index depending on `layer`.
    pub action_value: u64,
    /// Slot-reward statistics; binary-feedback statistics on beam leaves.
    pub stats: ArmEstimate,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn new(layer: Layer, action_value: u64) -> Self {
        Self { layer, action_value, stats: ArmEstimate::default(), children: Vec::new() }
    }

    fn child_stats(&self) -> Vec<ArmEstimate> {
        self.children.iter().map(|c| c.stats).collect()
    }

    fn check_children(&self) -> Result<(), MctsError> {
        let expected = self.layer.child();
        match self.children.iter().find(|c| Some(c.layer) != expected) {
            Some(bad) => Err(MctsError::Structure(format!("{:?} node has a {:?} child", self.layer, bad.layer))),
            None => Ok(()),
        }
    }
}

/// The outcome of one descent: child positions along the path and, when the
/// tree learns beams, the beams to sweep this slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSelection {
    pub period: usize,
    pub beamwidth: Option<usize>,
    /// Ascending beam indices; `None` when the tree has no beam leaves.
    pub swept_beams: Option<Vec<usize>>,
}

/// Picks the `k` children of `node` with the largest leaf indices, ties broken
/// uniformly at random. Returns ascending beam positions.
///
/// A full selection (`k` equal to the child count) consumes no randomness.
pub fn select_best_k<R: Rng + ?Sized>(
    node: &TreeNode,
    k: usize,
    leaf_policy: IndexKind,
    rng: &mut R,
) -> Result<Vec<usize>, MctsError> {
    let available = node.children.len();
    if k == 0 || k > available {
        return Err(MctsError::KOutOfRange { k, available });
    }
    if k == available {
        return Ok((0..available).collect());
    }
    let total = node.stats.pulls.max(1);
    let scores = node
        .children
        .iter()
        .map(|c| leaf_policy.index(&c.stats, total, DEFAULT_KL_TOLERANCE))
        .collect::<Result<Vec<_>, _>>()?;
    let mut order: Vec<usize> = (0..available).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: TreeNode,
    node_policy: IndexKind,
    leaf_policy: IndexKind,
    ratio: Option<SweepRatio>,
    kl_tolerance: f64,
}

impl DecisionTree {
    /// Builds a tree over `periods_ms`, then `sector_counts` (skipped when
    /// empty), then one leaf per beam when `ratio` is given.
    pub fn new(periods_ms: &[u64], sector_counts: &[usize], ratio: Option<SweepRatio>) -> Result<Self, MctsError> {
        if periods_ms.is_empty() {
            return Err(MctsError::Structure("no periods".into()));
        }
        if ratio.is_some() && sector_counts.is_empty() {
            return Err(MctsError::Structure("beam leaves need a beamwidth layer".into()));
        }
        let mut root = TreeNode::new(Layer::PeriodRoot, 0);
        for &p in periods_ms {
            let mut period = TreeNode::new(Layer::Period, p);
            for &n in sector_counts {
                let mut bw = TreeNode::new(Layer::Beamwidth, n as u64);
                if ratio.is_some() {
                    bw.children = (0..n).map(|b| TreeNode::new(Layer::BeamLeaf, b as u64)).collect();
                }
                period.children.push(bw);
            }
            root.children.push(period);
        }
        Ok(Self::from_root(root, ratio))
    }

    pub fn from_root(root: TreeNode, ratio: Option<SweepRatio>) -> Self {
        Self { root, node_policy: IndexKind::KlUcb, leaf_policy: IndexKind::Ucb1, ratio, kl_tolerance: DEFAULT_KL_TOLERANCE }
    }

    pub fn with_node_policy(mut self, kind: IndexKind) -> Self {
        self.node_policy = kind;
        self
    }

    pub fn with_leaf_policy(mut self, kind: IndexKind) -> Self {
        self.leaf_policy = kind;
        self
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn ratio(&self) -> Option<SweepRatio> {
        self.ratio
    }

    pub fn period_node(&self, path: &PathSelection) -> &TreeNode {
        &self.root.children[path.period]
    }

    pub fn beamwidth_node(&self, path: &PathSelection) -> Option<&TreeNode> {
        path.beamwidth.map(|b| &self.root.children[path.period].children[b])
    }

    /// Walks from the root to a leaf configuration, picking each child with
    /// the node policy and finishing with a best-k beam choice if beams are learned.
    pub fn select_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PathSelection, MctsError> {
        if self.root.layer != Layer::PeriodRoot {
            return Err(MctsError::Structure(format!("root is a {:?} node", self.root.layer)));
        }
        self.root.check_children()?;
        let period = self.pick_child(&self.root, rng)?;
        let period_node = &self.root.children[period];
        if period_node.children.is_empty() {
            return Ok(PathSelection { period, beamwidth: None, swept_beams: None });
        }
        period_node.check_children()?;
        let beamwidth = self.pick_child(period_node, rng)?;
        let bw_node = &period_node.children[beamwidth];
        let swept_beams = match self.ratio {
            Some(ratio) => {
                bw_node.check_children()?;
                let k = ratio.beams(bw_node.children.len());
                Some(select_best_k(bw_node, k, self.leaf_policy, rng)?)
            }
            None => None,
        };
        Ok(PathSelection { period, beamwidth: Some(beamwidth), swept_beams })
    }

    fn pick_child<R: Rng + ?Sized>(&self, node: &TreeNode, rng: &mut R) -> Result<usize, MctsError> {
        if node.children.is_empty() {
            return Err(MctsError::Structure(format!("{:?} node has no children", node.layer)));
        }
        Ok(select_by_index(&node.child_stats(), node.stats.pulls, self.node_policy, self.kl_tolerance, rng)?)
    }

    /// Credits `slot_reward` to every node on the path and each swept beam's
    /// own binary feedback to its leaf.
    pub fn backpropagate(&mut self, path: &PathSelection, slot_reward: f64, beam_feedback: &[(usize, bool)]) -> Result<(), MctsError> {
        if !(0.0..=1.0).contains(&slot_reward) {
            return Err(MctsError::RewardOutOfRange(slot_reward));
        }
        let swept: &[usize] = path.swept_beams.as_deref().unwrap_or(&[]);
        if let Some(&(beam, _)) = beam_feedback.iter().find(|(b, _)| !swept.contains(b)) {
            return Err(MctsError::FeedbackNotSwept(beam));
        }
        let missing = || MctsError::Structure("path does not belong to this tree".into());
        let period = self.root.children.get_mut(path.period).ok_or_else(missing)?;
        let bw = match path.beamwidth {
            Some(b) => Some(period.children.get_mut(b).ok_or_else(missing)?),
            None => None,
        };
        if let Some(bw) = bw {
            for &(beam, connects) in beam_feedback {
                let leaf = bw.children.get_mut(beam).ok_or_else(missing)?;
                leaf.stats.observe(if connects { 1.0 } else { 0.0 });
            }
            bw.stats.observe(slot_reward);
        }
        self.root.children[path.period].stats.observe(slot_reward);
        self.root.stats.observe(slot_reward);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{PolicyKind, PolicyState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PERIODS: [u64; 5] = [10, 20, 40, 80, 160];

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn unique_path() {
        let tree = DecisionTree::new(&[40], &[64], None).unwrap();
        let path = tree.select_path(&mut rng(0)).unwrap();
        assert_eq!(path, PathSelection { period: 0, beamwidth: Some(0), swept_beams: None });
    }

    #[test]
    fn forced_exploration_visits_every_child_once() {
        let mut tree = DecisionTree::new(&PERIODS, &[], None).unwrap();
        let mut r = rng(3);
        let mut seen = Vec::new();
        for _ in 0..PERIODS.len() {
            let path = tree.select_path(&mut r).unwrap();
            seen.push(path.period);
            tree.backpropagate(&path, 0.5, &[]).unwrap();
        }
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn malformed_tree_is_rejected() {
        let mut root = TreeNode::new(Layer::PeriodRoot, 0);
        root.children.push(TreeNode::new(Layer::Beamwidth, 16));
        let tree = DecisionTree::from_root(root, None);
        assert!(matches!(tree.select_path(&mut rng(0)), Err(MctsError::Structure(_))));
        assert!(matches!(DecisionTree::new(&[10], &[], Some(SweepRatio::FULL)), Err(MctsError::Structure(_))));
    }

    #[test]
    fn single_layer_equals_flat_bandit() {
        // Reward tape indexed by [slot][arm], shared by both implementations.
        for seed in 0..3 {
            let mut tape_rng = rng(1000 + seed);
            let tape: Vec<[f64; 5]> = (0..2000).map(|_| std::array::from_fn(|a| if tape_rng.random::<f64>() < 0.15 * (a + 1) as f64 { 1.0 } else { 0.0 })).collect();
            let mut tree = DecisionTree::new(&PERIODS, &[], None).unwrap();
            let mut flat = PolicyState::new(PolicyKind::KlUcb, 5).unwrap();
            let (mut r_tree, mut r_flat) = (rng(seed), rng(seed));
            for rewards in &tape {
                let path = tree.select_path(&mut r_tree).unwrap();
                let arm = flat.select_arm(&mut r_flat).unwrap();
                assert_eq!(path.period, arm);
                tree.backpropagate(&path, rewards[arm], &[]).unwrap();
                flat.update(arm, rewards[arm]).unwrap();
            }
        }
    }

    #[test]
    fn best_k_full_selection() {
        let tree = DecisionTree::new(&[10], &[32], Some(SweepRatio::FULL)).unwrap();
        let bw = &tree.root().children[0].children[0];
        assert_eq!(select_best_k(bw, 32, IndexKind::Ucb1, &mut rng(0)).unwrap(), (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn best_k_prefers_connected_beam() {
        let mut bw = TreeNode::new(Layer::Beamwidth, 4);
        bw.stats = ArmEstimate::with_stats(100_000, 0.5);
        for (b, mean) in [1.0, 0.0, 0.0, 0.0].into_iter().enumerate() {
            let mut leaf = TreeNode::new(Layer::BeamLeaf, b as u64);
            leaf.stats = ArmEstimate::with_stats(100, mean);
            bw.children.push(leaf);
        }
        // Indices: 1 + sqrt(2 ln 1e5 / 100) = 1.4798 against 0.4798.
        for seed in 0..20 {
            assert_eq!(select_best_k(&bw, 1, IndexKind::Ucb1, &mut rng(seed)).unwrap(), vec![0]);
        }
        assert_eq!(select_best_k(&bw, 0, IndexKind::Ucb1, &mut rng(0)), Err(MctsError::KOutOfRange { k: 0, available: 4 }));
        assert_eq!(select_best_k(&bw, 5, IndexKind::Ucb1, &mut rng(0)), Err(MctsError::KOutOfRange { k: 5, available: 4 }));
    }

    #[test]
    fn quarter_of_512_sectors() {
        let tree = DecisionTree::new(&[10], &[512], Some(SweepRatio::new(1, 4).unwrap())).unwrap();
        let path = tree.select_path(&mut rng(0)).unwrap();
        assert_eq!(path.swept_beams.unwrap().len(), 128);
    }

    #[test]
    fn backpropagate_running_means() {
        let mut tree = DecisionTree::new(&PERIODS, &[16, 32], None).unwrap();
        let path = PathSelection { period: 2, beamwidth: Some(1), swept_beams: None };
        tree.backpropagate(&path, 0.6, &[]).unwrap();
        assert_eq!(tree.period_node(&path).stats, ArmEstimate { pulls: 1, mean_reward: 0.6 });
        assert_eq!(tree.beamwidth_node(&path).unwrap().stats, ArmEstimate { pulls: 1, mean_reward: 0.6 });

        let mut tree = DecisionTree::new(&PERIODS, &[16, 32], None).unwrap();
        tree.backpropagate(&path, 0.2, &[]).unwrap();
        tree.backpropagate(&path, 0.8, &[]).unwrap();
        assert_abs_diff_eq!(tree.period_node(&path).stats.mean_reward, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tree.beamwidth_node(&path).unwrap().stats.mean_reward, 0.5, epsilon = 1e-15);
        assert_eq!(tree.root().stats.pulls, 2);
    }

    #[test]
    fn backpropagate_beam_feedback() {
        let mut tree = DecisionTree::new(&[10], &[8], Some(SweepRatio::new(1, 4).unwrap())).unwrap();
        let path = PathSelection { period: 0, beamwidth: Some(0), swept_beams: Some(vec![3, 7]) };
        let before = tree.clone();
        tree.backpropagate(&path, 0.4, &[(3, true), (7, false)]).unwrap();
        let bw = tree.beamwidth_node(&path).unwrap();
        let old = before.beamwidth_node(&path).unwrap();
        assert_eq!(bw.children[3].stats, ArmEstimate { pulls: 1, mean_reward: 1.0 });
        assert_eq!(bw.children[7].stats, ArmEstimate { pulls: 1, mean_reward: 0.0 });
        for b in [0, 1, 2, 4, 5, 6] {
            assert_eq!(bw.children[b], old.children[b]);
        }
        assert_eq!(bw.stats, ArmEstimate { pulls: 1, mean_reward: 0.4 });
        assert_eq!(tree.backpropagate(&path, 0.4, &[(5, true)]), Err(MctsError::FeedbackNotSwept(5)));
        assert_eq!(tree.backpropagate(&path, 1.5, &[]), Err(MctsError::RewardOutOfRange(1.5)));
    }

    #[test]
    fn best_k_converges_on_the_good_beam() {
        // One beam connects with probability 0.9, the rest with 0.1.
        let (sectors, k, seeds) = (32usize, 8usize, 100u64);
        let best = 11;
        let mut hits = 0usize;
        let mut slots = 0usize;
        for seed in 0..seeds {
            let mut tree = DecisionTree::new(&[10], &[sectors], Some(SweepRatio::new(k as u64, sectors as u64).unwrap())).unwrap();
            let mut policy_rng = rng(seed);
            let mut env_rng = rng(10_000 + seed);
            for t in 0..1000 {
                let path = tree.select_path(&mut policy_rng).unwrap();
                let swept = path.swept_beams.clone().unwrap();
                assert_eq!(swept.len(), k);
                if t >= 200 {
                    slots += 1;
                    hits += swept.contains(&best) as usize;
                }
                let feedback: Vec<(usize, bool)> = swept
                    .iter()
                    .map(|&b| (b, env_rng.random::<f64>() < if b == best { 0.9 } else { 0.1 }))
                    .collect();
                tree.backpropagate(&path, 0.5, &feedback).unwrap();
            }
        }
        let frac = hits as f64 / slots as f64;
        assert!(frac > 0.95, "best beam swept in {frac} of slots");
    }

    proptest! {
        #[test]
        fn best_k_returns_k_distinct(stats in prop::collection::vec((0u64..50, 0.0f64..=1.0), 1..64), k_frac in 0.0f64..1.0, seed in 0u64..1000) {
            let mut bw = TreeNode::new(Layer::Beamwidth, stats.len() as u64);
            bw.stats.pulls = stats.iter().map(|s| s.0).max().unwrap_or(0);
            for (b, &(pulls, mean)) in stats.iter().enumerate() {
                let mut leaf = TreeNode::new(Layer::BeamLeaf, b as u64);
                leaf.stats = ArmEstimate::with_stats(pulls, mean);
                bw.children.push(leaf);
            }
            let k = 1 + (k_frac * stats.len() as f64) as usize;
            let k = k.min(stats.len());
            let chosen = select_best_k(&bw, k, IndexKind::Ucb1, &mut rng(seed)).unwrap();
            prop_assert_eq!(chosen.len(), k);
            prop_assert!(chosen.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(chosen.iter().all(|&b| b < stats.len()));
        }

        #[test]
        fn pulls_are_conserved(rewards in prop::collection::vec(0.0f64..=1.0, 1..300), seed in 0u64..100) {
            let mut tree = DecisionTree::new(&PERIODS, &[16, 32, 64], None).unwrap();
            let mut r = rng(seed);
            for &x in &rewards {
                let path = tree.select_path(&mut r).unwrap();
                tree.backpropagate(&path, x, &[]).unwrap();
            }
            let root = tree.root();
            prop_assert_eq!(root.stats.pulls, rewards.len() as u64);
            prop_assert_eq!(root.children.iter().map(|c| c.stats.pulls).sum::<u64>(), rewards.len() as u64);
            for p in &root.children {
                prop_assert_eq!(p.children.iter().map(|c| c.stats.pulls).sum::<u64>(), p.stats.pulls);
            }
        }
    }
}
