//! Active Lempel-Ziv control loop over a [`ContextTree`].
//!
//! Time is split into phrases. Within a phrase the learner walks the tree
//! one (observation, previous action) edge per step and acts
//! epsilon-greedily on the cost-to-go estimates. The first step that lands
//! on an unseen context is played uniformly at random; once its outcome is
//! known the whole phrase is credited to the tree, cost-to-go values are
//! backed up from the deepest node to the shallowest, and a new phrase
//! begins at the root.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::context_tree::{ContextTree, NodeId, PhraseStep, SymbolAlphabet, DEFAULT_DEPTH_CAP};
use crate::error::{Error, Result};
use crate::policy::{Policy, PolicyKind};
use crate::symbol::{Action, Obs};

/// Exploration rate `ε_k` as a function of the 1-based step index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExplorationSchedule {
    /// `min(1, initial / sqrt(k))`
    InverseSqrt {
        initial: f64,
    },
    Constant {
        rate: f64,
    },
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        ExplorationSchedule::InverseSqrt { initial: 1.0 }
    }
}

impl ExplorationSchedule {
    pub fn rate(&self, k: u64) -> f64 {
        match *self {
            ExplorationSchedule::InverseSqrt { initial } => {
                (initial / (k.max(1) as f64).sqrt()).min(1.0)
            }
            ExplorationSchedule::Constant { rate } => rate,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            ExplorationSchedule::InverseSqrt { initial } => initial,
            ExplorationSchedule::Constant { rate } => rate,
        };
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "exploration rate {v} outside [0, 1]"
            )))
        }
    }
}

/// Value assigned to a successor context that is not in the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessorValue {
    /// The initialization value, 0.
    Zero,
    /// The cost-to-go of the depth-1 context made of the successor's last
    /// (observation, action) pair, or 0 if that context is unseen too.
    ShortestSuffix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub discount: f64,
    pub exploration: ExplorationSchedule,
    pub seed: u64,
    pub depth_cap: u32,
    /// Costs outside `[-cost_bound, cost_bound]` are rejected.
    pub cost_bound: f64,
    pub unknown_successor: SuccessorValue,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            discount: 0.95,
            exploration: ExplorationSchedule::default(),
            seed: 0,
            depth_cap: DEFAULT_DEPTH_CAP,
            cost_bound: 100.0,
            unknown_successor: SuccessorValue::ShortestSuffix,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::Config(format!(
                "discount {} outside (0, 1)",
                self.discount
            )));
        }
        if !(self.cost_bound > 0.0 && self.cost_bound.is_finite()) {
            return Err(Error::Config(format!(
                "cost bound {} must be positive and finite",
                self.cost_bound
            )));
        }
        if self.depth_cap == 0 {
            return Err(Error::Config("depth cap must be at least 1".into()));
        }
        self.exploration.validate()
    }
}

/// Running empirical average of incurred costs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AverageCostTracker {
    running_sum: f64,
    steps: u64,
}

impl AverageCostTracker {
    pub fn push(&mut self, cost: f64) {
        self.running_sum += cost;
        self.steps += 1;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn running_sum(&self) -> f64 {
        self.running_sum
    }

    pub fn average(&self) -> Result<f64> {
        if self.steps == 0 {
            return Err(Error::UndefinedAverage);
        }
        Ok(self.running_sum / self.steps as f64)
    }

    fn mean_or_zero(&self) -> f64 {
        self.average().unwrap_or(0.0)
    }
}

/// Bookkeeping for the phrase currently being parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseState {
    /// 1-based phrase counter.
    pub index: u64,
    /// Step index at which the phrase began.
    pub start: u64,
    /// Action taken just before the phrase's first observation.
    pub entry: Action,
    pub steps: Vec<PhraseStep>,
    at: Option<NodeId>,
}

#[derive(Debug, Clone, Copy)]
struct Decision {
    obs: Obs,
    action: Action,
    node: Option<NodeId>,
}

#[derive(Debug, Clone)]
pub struct UniversalLearner {
    config: LearnerConfig,
    tree: ContextTree,
    rng: ChaCha8Rng,
    step: u64,
    costs: AverageCostTracker,
    phrase: PhraseState,
    pending: Option<Decision>,
}

impl UniversalLearner {
    pub fn new(alphabet: SymbolAlphabet, config: LearnerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            tree: ContextTree::new(alphabet, config.depth_cap)?,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            step: 0,
            costs: AverageCostTracker::default(),
            phrase: PhraseState {
                index: 1,
                start: 1,
                entry: Action(0),
                steps: Vec::new(),
                at: None,
            },
            pending: None,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn tree(&self) -> &ContextTree {
        &self.tree
    }

    /// Number of decisions made so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn phrase(&self) -> &PhraseState {
        &self.phrase
    }

    pub fn costs(&self) -> &AverageCostTracker {
        &self.costs
    }

    pub fn average_cost(&self) -> Result<f64> {
        self.costs.average()
    }

    /// Picks the waveform for observation `obs`.
    pub fn select_waveform(&mut self, obs: Obs) -> Result<Action> {
        self.tree.alphabet().check_obs(obs)?;
        if self.pending.is_some() {
            return Err(Error::Input(
                "select_waveform called twice without observe_and_update".into(),
            ));
        }
        self.step += 1;

        if self.phrase.steps.len() as u32 >= self.config.depth_cap {
            self.tree.note_truncation();
            self.end_phrase(self.step)?;
        }
        let prev = self.previous_action();
        let parent = match self.phrase.at {
            Some(id) => id,
            None => self.tree.root(),
        };
        let node = self
            .tree
            .child(parent, obs, prev)
            .filter(|&id| self.tree.node(id).visit_count() > 0);

        let action = match node {
            Some(id) => {
                let eps = self.config.exploration.rate(self.step);
                let explore = eps >= 1.0 || (eps > 0.0 && self.rng.random::<f64>() < eps);
                if explore {
                    self.uniform_action()
                } else {
                    self.greedy_action(id)
                }
            }
            None => self.uniform_action(),
        };
        self.pending = Some(Decision { obs, action, node });
        Ok(action)
    }

    /// Feeds back the outcome of the last decision.
    pub fn observe_and_update(
        &mut self,
        obs: Obs,
        action: Action,
        cost: f64,
        next_obs: Obs,
    ) -> Result<()> {
        let alphabet = *self.tree.alphabet();
        alphabet.check_obs(obs)?;
        alphabet.check_action(action)?;
        alphabet.check_obs(next_obs)?;
        let bound = self.config.cost_bound;
        if cost.is_nan() || cost.abs() > bound {
            return Err(Error::CostBound { cost, bound });
        }
        let decision = match self.pending {
            Some(d) if d.obs == obs && d.action == action => d,
            Some(d) => {
                return Err(Error::Input(format!(
                    "update for (obs {obs}, action {action}) does not match decision (obs {}, action {})",
                    d.obs, d.action
                )))
            }
            None => return Err(Error::Input("update without a pending decision".into())),
        };
        self.pending = None;
        self.costs.push(cost);
        self.phrase.steps.push(PhraseStep {
            obs,
            action,
            next_obs,
            cost,
        });
        match decision.node {
            Some(id) => self.phrase.at = Some(id),
            None => self.end_phrase(self.step + 1)?,
        }
        Ok(())
    }

    /// Expected discounted cost of each action at `node`, one-step lookahead
    /// on the KT transition estimates.
    pub fn action_values(&self, node: NodeId) -> Vec<f64> {
        (0..self.tree.alphabet().actions())
            .map(|a| self.action_value(node, Action(a)))
            .collect()
    }

    /// Lowest-valued action at `node`; ties go to the lowest index.
    pub fn greedy_action(&self, node: NodeId) -> Action {
        let mut best = Action(0);
        let mut best_value = f64::INFINITY;
        for a in 0..self.tree.alphabet().actions() {
            let v = self.action_value(node, Action(a));
            if v < best_value {
                best = Action(a);
                best_value = v;
            }
        }
        best
    }

    fn action_value(&self, node: NodeId, action: Action) -> f64 {
        let gamma = self.config.discount;
        let fallback_cost = self.costs.mean_or_zero();
        let tree = &self.tree;
        (0..tree.alphabet().observations())
            .map(|y| {
                let y = Obs(y);
                let p = tree.kt_estimate_unchecked(node, action, y);
                let g = tree.mean_cost(node, action, y).unwrap_or(fallback_cost);
                p * (g + gamma * self.successor_value(node, action, y))
            })
            .sum()
    }

    fn successor_value(&self, node: NodeId, action: Action, next_obs: Obs) -> f64 {
        if let Some(c) = self.tree.child(node, next_obs, action) {
            return self.tree.node(c).cost_to_go();
        }
        match self.config.unknown_successor {
            SuccessorValue::Zero => 0.0,
            SuccessorValue::ShortestSuffix => self
                .tree
                .child(self.tree.root(), next_obs, action)
                .map_or(0.0, |c| self.tree.node(c).cost_to_go()),
        }
    }

    fn previous_action(&self) -> Action {
        self.phrase
            .steps
            .last()
            .map_or(self.phrase.entry, |s| s.action)
    }

    fn uniform_action(&mut self) -> Action {
        Action(self.rng.random_range(0..self.tree.alphabet().actions()))
    }

    fn end_phrase(&mut self, next_start: u64) -> Result<()> {
        let recorded = self
            .tree
            .record_transition(self.phrase.entry, &self.phrase.steps)?;
        for &id in recorded.nodes.iter().rev() {
            let value = self
                .action_values(id)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            self.tree.set_cost_to_go(id, value);
        }
        self.phrase.entry = self.previous_action();
        self.phrase.index += 1;
        self.phrase.start = next_start;
        self.phrase.steps.clear();
        self.phrase.at = None;
        Ok(())
    }
}

impl Policy for UniversalLearner {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Universal
    }

    fn select(&mut self, obs: Obs) -> Result<Action> {
        self.select_waveform(obs)
    }

    fn observe(&mut self, obs: Obs, action: Action, cost: f64, next_obs: Obs) -> Result<()> {
        self.observe_and_update(obs, action, cost, next_obs)
    }
}
