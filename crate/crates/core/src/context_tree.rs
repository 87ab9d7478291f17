//! Variable-depth context tree over interleaved observation/action symbols.
//!
//! A node is an observation-terminated context. Its outgoing edges are
//! keyed by `(observation, action)` where the action is the one taken just
//! before that observation arrived, so a path from the root spells out
//! `(y_1, w_0), (y_2, w_1), ...`. Every node keeps, per action, the counts
//! of the observation that followed, a sequential KT probability of that
//! sequence, a context-tree weighted probability and a cost-to-go.
//!
//! Probabilities are stored as natural logarithms.
//!
//! Two update disciplines share the structure:
//!
//! * [`ContextTree::record_transition`] walks a Lempel-Ziv phrase, adds at
//!   most one new leaf, and credits each node on the phrase with the
//!   transition taken *from* it.
//! * [`ContextTree::observe_context`] is the classical CTW update, where a
//!   context is a suffix of the past (most recent pair first) and every node
//!   on the path is credited with the same symbol.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kt::kt_predictive;
use crate::symbol::{Action, Obs};

/// Tables indexed by `(action, observation)` are dense; this bounds their size.
pub const MAX_TABLE_ENTRIES: u64 = 1 << 16;

pub const DEFAULT_DEPTH_CAP: u32 = 16;

/// Arities of the observation and action alphabets the tree is built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolAlphabet {
    observations: u32,
    actions: u32,
}

impl SymbolAlphabet {
    pub fn new(observations: u32, actions: u32) -> Result<Self> {
        if observations == 0 || actions == 0 {
            return Err(Error::Parameter(format!(
                "alphabet arities must be >= 1 (got {observations} observations, {actions} actions)"
            )));
        }
        if observations as u64 * actions as u64 > MAX_TABLE_ENTRIES {
            return Err(Error::Parameter(format!(
                "alphabet {observations}x{actions} exceeds {MAX_TABLE_ENTRIES} table entries"
            )));
        }
        Ok(Self {
            observations,
            actions,
        })
    }

    pub fn observations(&self) -> u32 {
        self.observations
    }

    pub fn actions(&self) -> u32 {
        self.actions
    }

    pub fn check_obs(&self, obs: Obs) -> Result<()> {
        if obs.0 < self.observations {
            Ok(())
        } else {
            Err(Error::AlphabetViolation {
                symbol: obs.0,
                arity: self.observations,
            })
        }
    }

    pub fn check_action(&self, action: Action) -> Result<()> {
        if action.0 < self.actions {
            Ok(())
        } else {
            Err(Error::AlphabetViolation {
                symbol: action.0,
                arity: self.actions,
            })
        }
    }

    #[inline]
    fn slot(&self, action: Action, obs: Obs) -> usize {
        action.index() * self.observations as usize + obs.index()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct ContextNode {
    depth: u32,
    visit_count: u64,
    counts: Vec<u64>,
    totals: Vec<u64>,
    cost_sums: Vec<f64>,
    log_kt: Vec<f64>,
    log_weighted: Vec<f64>,
    cost_to_go: f64,
    children: BTreeMap<(Obs, Action), NodeId>,
}

impl ContextNode {
    fn new(alphabet: &SymbolAlphabet, depth: u32) -> Self {
        let actions = alphabet.actions as usize;
        let slots = actions * alphabet.observations as usize;
        Self {
            depth,
            visit_count: 0,
            counts: vec![0; slots],
            totals: vec![0; actions],
            cost_sums: vec![0.0; slots],
            log_kt: vec![0.0; actions],
            log_weighted: vec![0.0; actions],
            cost_to_go: 0.0,
            children: BTreeMap::new(),
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of transitions recorded at this node, over all actions.
    pub fn visit_count(&self) -> u64 {
        self.visit_count
    }

    pub fn action_total(&self, action: Action) -> u64 {
        self.totals[action.index()]
    }

    pub fn cost_to_go(&self) -> f64 {
        self.cost_to_go
    }

    pub fn log_kt(&self, action: Action) -> f64 {
        self.log_kt[action.index()]
    }

    pub fn log_weighted(&self, action: Action) -> f64 {
        self.log_weighted[action.index()]
    }

    pub fn children(&self) -> impl Iterator<Item = ((Obs, Action), NodeId)> + '_ {
        self.children.iter().map(|(k, v)| (*k, *v))
    }

    pub fn child_count(&self) -> usize {
        self.children.len()
    }
}

/// Outcome of recording one Lempel-Ziv phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedPhrase {
    /// Node visited at each phrase step, root side first.
    pub nodes: Vec<NodeId>,
    /// The leaf added for the phrase's final, previously unseen, context.
    pub created: Option<NodeId>,
}

/// One step of a phrase: at the context reached by `obs`, `action` was taken
/// and `next_obs` followed at `cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhraseStep {
    pub obs: Obs,
    pub action: Action,
    pub next_obs: Obs,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct ContextTree {
    alphabet: SymbolAlphabet,
    nodes: Vec<ContextNode>,
    depth_bound: u32,
    depth_cap: u32,
    truncations: u64,
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl ContextTree {
    pub fn new(alphabet: SymbolAlphabet, depth_cap: u32) -> Result<Self> {
        if depth_cap == 0 {
            return Err(Error::Parameter("depth cap must be at least 1".into()));
        }
        Ok(Self {
            nodes: vec![ContextNode::new(&alphabet, 0)],
            alphabet,
            depth_bound: 0,
            depth_cap,
            truncations: 0,
        })
    }

    pub fn alphabet(&self) -> &SymbolAlphabet {
        &self.alphabet
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: NodeId) -> &ContextNode {
        &self.nodes[id.index()]
    }

    /// Current depth bound D: the depth of the deepest node.
    pub fn depth_bound(&self) -> u32 {
        self.depth_bound
    }

    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    /// Number of times a node could not be added because of the depth cap.
    pub fn truncations(&self) -> u64 {
        self.truncations
    }

    pub(crate) fn note_truncation(&mut self) {
        self.truncations += 1;
    }

    pub fn child(&self, id: NodeId, obs: Obs, action: Action) -> Option<NodeId> {
        self.nodes[id.index()].children.get(&(obs, action)).copied()
    }

    /// Walks `pairs` from the root, returning `None` once the walk leaves the tree.
    pub fn lookup(&self, pairs: &[(Obs, Action)]) -> Option<NodeId> {
        pairs
            .iter()
            .try_fold(self.root(), |id, &(o, a)| self.child(id, o, a))
    }

    /// Looks up the context spelled by aligned histories, where
    /// `action_history[i]` is the action that preceded `obs_history[i]`.
    pub fn lookup_context(
        &self,
        obs_history: &[Obs],
        action_history: &[Action],
    ) -> Result<Option<NodeId>> {
        if obs_history.len() != action_history.len() {
            return Err(Error::Input(format!(
                "misaligned histories: {} observations, {} actions",
                obs_history.len(),
                action_history.len()
            )));
        }
        let mut id = self.root();
        for (&o, &a) in obs_history.iter().zip(action_history) {
            self.alphabet.check_obs(o)?;
            self.alphabet.check_action(a)?;
            match self.child(id, o, a) {
                Some(c) => id = c,
                None => return Ok(None),
            }
        }
        Ok(Some(id))
    }

    /// KT predictive probability of `next_obs` after `action` at `id`.
    pub fn kt_estimate(&self, id: NodeId, action: Action, next_obs: Obs) -> Result<f64> {
        self.alphabet.check_action(action)?;
        self.alphabet.check_obs(next_obs)?;
        Ok(self.kt_estimate_unchecked(id, action, next_obs))
    }

    #[inline]
    pub(crate) fn kt_estimate_unchecked(&self, id: NodeId, action: Action, next_obs: Obs) -> f64 {
        let node = &self.nodes[id.index()];
        kt_predictive(
            node.counts[self.alphabet.slot(action, next_obs)],
            node.totals[action.index()],
            self.alphabet.observations,
        )
    }

    /// Mean cost observed for `(action, next_obs)` at `id`, if any.
    #[inline]
    pub fn mean_cost(&self, id: NodeId, action: Action, next_obs: Obs) -> Option<f64> {
        let node = &self.nodes[id.index()];
        let slot = self.alphabet.slot(action, next_obs);
        let n = node.counts[slot];
        (n > 0).then(|| node.cost_sums[slot] / n as f64)
    }

    pub fn count(&self, id: NodeId, action: Action, next_obs: Obs) -> u64 {
        self.nodes[id.index()].counts[self.alphabet.slot(action, next_obs)]
    }

    /// Log of the context-tree weighted probability of the per-action
    /// sequence seen at `id`, evaluated from the stored child values.
    pub fn log_weighted_prob(&self, id: NodeId, action: Action) -> Result<f64> {
        self.alphabet.check_action(action)?;
        Ok(self.weigh(id, action))
    }

    pub fn ctw_weighted_prob(&self, id: NodeId, action: Action) -> Result<f64> {
        self.log_weighted_prob(id, action).map(f64::exp)
    }

    fn weigh(&self, id: NodeId, action: Action) -> f64 {
        let node = &self.nodes[id.index()];
        let a = action.index();
        if node.depth >= self.depth_bound {
            return node.log_kt[a];
        }
        let children: f64 = node
            .children
            .values()
            .map(|c| self.nodes[c.index()].log_weighted[a])
            .sum();
        log_add_exp(node.log_kt[a], children) - std::f64::consts::LN_2
    }

    /// Recomputes the stored weighted probabilities of `id` from its children.
    pub fn refresh_weighted(&mut self, id: NodeId) {
        for a in 0..self.alphabet.actions {
            let w = self.weigh(id, Action(a));
            self.nodes[id.index()].log_weighted[a as usize] = w;
        }
    }

    /// Recomputes every node bottom-up. Needed when the depth bound moves,
    /// since that changes which nodes count as leaves.
    pub fn refresh_all_weighted(&mut self) {
        // Children always have larger ids than their parents.
        for i in (0..self.nodes.len()).rev() {
            self.refresh_weighted(NodeId(i as u32));
        }
    }

    /// Adds the child `(obs, action)` below `parent`. Returns `None` and
    /// counts a truncation when the child would exceed the depth cap.
    pub fn add_child(
        &mut self,
        parent: NodeId,
        obs: Obs,
        action: Action,
    ) -> Result<Option<NodeId>> {
        self.alphabet.check_obs(obs)?;
        self.alphabet.check_action(action)?;
        if let Some(existing) = self.child(parent, obs, action) {
            return Ok(Some(existing));
        }
        let depth = self.nodes[parent.index()].depth + 1;
        if depth > self.depth_cap {
            self.truncations += 1;
            return Ok(None);
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(ContextNode::new(&self.alphabet, depth));
        self.nodes[parent.index()]
            .children
            .insert((obs, action), id);
        if depth > self.depth_bound {
            self.depth_bound = depth;
        }
        Ok(Some(id))
    }

    /// Credits `id` with one `(action, next_obs)` transition at `cost`,
    /// extending the node's sequential KT probability.
    pub fn record(&mut self, id: NodeId, action: Action, next_obs: Obs, cost: f64) -> Result<()> {
        self.alphabet.check_action(action)?;
        self.alphabet.check_obs(next_obs)?;
        let p = self.kt_estimate_unchecked(id, action, next_obs);
        let slot = self.alphabet.slot(action, next_obs);
        let node = &mut self.nodes[id.index()];
        node.log_kt[action.index()] += p.ln();
        node.counts[slot] += 1;
        node.cost_sums[slot] += cost;
        node.totals[action.index()] += 1;
        node.visit_count += 1;
        Ok(())
    }

    pub fn set_cost_to_go(&mut self, id: NodeId, value: f64) {
        self.nodes[id.index()].cost_to_go = value;
    }

    /// Records a Lempel-Ziv phrase.
    ///
    /// `entry` is the action taken just before the phrase's first
    /// observation. Every step but the last must reach an existing node; the
    /// last may reach a new context, which is added as a leaf (subject to the
    /// depth cap). Counts and KT estimates are then updated from the deepest
    /// node back to the first, refreshing weighted probabilities on the way.
    pub fn record_transition(
        &mut self,
        entry: Action,
        phrase: &[PhraseStep],
    ) -> Result<RecordedPhrase> {
        self.alphabet.check_action(entry)?;
        let mut nodes = Vec::with_capacity(phrase.len());
        let mut created = None;
        let mut at = self.root();
        let mut prev = entry;
        let bound_before = self.depth_bound;
        for (u, step) in phrase.iter().enumerate() {
            self.alphabet.check_obs(step.obs)?;
            self.alphabet.check_action(step.action)?;
            self.alphabet.check_obs(step.next_obs)?;
            at = match self.child(at, step.obs, prev) {
                Some(c) => c,
                None if u + 1 == phrase.len() => match self.add_child(at, step.obs, prev)? {
                    Some(c) => {
                        created = Some(c);
                        c
                    }
                    None => break,
                },
                None => {
                    return Err(Error::Input(format!(
                        "phrase leaves the tree at step {u} of {}",
                        phrase.len()
                    )))
                }
            };
            nodes.push(at);
            prev = step.action;
        }

        for (u, &id) in nodes.iter().enumerate().rev() {
            let step = &phrase[u];
            self.record(id, step.action, step.next_obs, step.cost)?;
            self.refresh_weighted(id);
        }
        if self.depth_bound != bound_before {
            self.refresh_all_weighted();
        } else {
            self.refresh_weighted(self.root());
        }
        Ok(RecordedPhrase { nodes, created })
    }

    /// Classical CTW update: `context` lists past pairs most recent first.
    /// Nodes are created along the whole path (up to the depth cap) and every
    /// node on it, root included, is credited with `(action, next_obs)`.
    pub fn observe_context(
        &mut self,
        context: &[(Obs, Action)],
        action: Action,
        next_obs: Obs,
    ) -> Result<()> {
        let mut path = vec![self.root()];
        let bound_before = self.depth_bound;
        for &(o, a) in context {
            match self.add_child(*path.last().unwrap(), o, a)? {
                Some(c) => path.push(c),
                None => break,
            }
        }
        for &id in path.iter().rev() {
            self.record(id, action, next_obs, 0.0)?;
            self.refresh_weighted(id);
        }
        if self.depth_bound != bound_before {
            self.refresh_all_weighted();
        }
        Ok(())
    }

    /// Deterministic line-oriented dump, depth first, children in symbol order.
    ///
    /// ```text
    /// tree obs=<|Y|> actions=<|W|> nodes=<n> depth=<D> cap=<cap> truncations=<t>
    /// node <y.w>/<y.w>/... depth=<d> visits=<n> J=<cost-to-go>
    ///   a=<w> n=<total> log_kt=<ln P_e> log_w=<ln P_w> next=<y:count,...>
    /// ```
    ///
    /// Action lines are written only for actions with recorded transitions.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "tree obs={} actions={} nodes={} depth={} cap={} truncations={}",
            self.alphabet.observations,
            self.alphabet.actions,
            self.nodes.len(),
            self.depth_bound,
            self.depth_cap,
            self.truncations
        );
        let mut stack: Vec<(NodeId, String)> = vec![(self.root(), String::from("/"))];
        while let Some((id, path)) = stack.pop() {
            let node = &self.nodes[id.index()];
            let _ = writeln!(
                out,
                "node {} depth={} visits={} J={:.9}",
                path, node.depth, node.visit_count, node.cost_to_go
            );
            for a in 0..self.alphabet.actions as usize {
                if node.totals[a] == 0 {
                    continue;
                }
                let base = a * self.alphabet.observations as usize;
                let next: Vec<String> = (0..self.alphabet.observations as usize)
                    .filter(|&y| node.counts[base + y] > 0)
                    .map(|y| format!("{}:{}", y, node.counts[base + y]))
                    .collect();
                let _ = writeln!(
                    out,
                    "  a={} n={} log_kt={:.9} log_w={:.9} next={}",
                    a,
                    node.totals[a],
                    node.log_kt[a],
                    node.log_weighted[a],
                    next.join(",")
                );
            }
            for (&(o, a), &c) in node.children.iter().rev() {
                let child_path = if path == "/" {
                    format!("/{o}.{a}")
                } else {
                    format!("{path}/{o}.{a}")
                };
                stack.push((c, child_path));
            }
        }
        out
    }
}
