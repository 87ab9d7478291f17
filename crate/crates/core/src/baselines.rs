//! Comparison policies: uniform random selection and a memoryless
//! Gaussian Thompson-sampling contextual bandit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Policy, PolicyKind};
use crate::symbol::{Action, Obs};

#[derive(Debug, Clone)]
pub struct RandomPolicy {
    actions: u32,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(actions: u32, seed: u64) -> Result<Self> {
        if actions == 0 {
            return Err(Error::Parameter(
                "catalog must hold at least one waveform".into(),
            ));
        }
        Ok(Self {
            actions,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn draw(&mut self) -> Action {
        Action(self.rng.random_range(0..self.actions))
    }
}

impl Policy for RandomPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Random
    }

    fn select(&mut self, _obs: Obs) -> Result<Action> {
        Ok(self.draw())
    }

    fn observe(&mut self, _: Obs, _: Action, _: f64, _: Obs) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThompsonConfig {
    pub prior_mean: f64,
    pub prior_variance: f64,
    pub observation_variance: f64,
}

impl Default for ThompsonConfig {
    fn default() -> Self {
        Self {
            prior_mean: 0.0,
            prior_variance: 1.0,
            observation_variance: 1.0,
        }
    }
}

/// Normal posterior over the mean (normalized) cost of one context/arm cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPosterior {
    pub mean: f64,
    pub variance: f64,
    pub observations: u64,
}

impl ArmPosterior {
    /// Conjugate update with known observation variance.
    pub fn update(&mut self, x: f64, observation_variance: f64) {
        let precision = 1.0 / self.variance + 1.0 / observation_variance;
        let variance = 1.0 / precision;
        self.mean = variance * (self.mean / self.variance + x / observation_variance);
        self.variance = variance;
        self.observations += 1;
    }
}

/// Thompson sampling keyed by the current observation symbol only; it never
/// sees the radar's own waveform history.
#[derive(Debug, Clone)]
pub struct ThompsonSampling {
    config: ThompsonConfig,
    contexts: u32,
    actions: u32,
    cost_scale: f64,
    posteriors: Vec<ArmPosterior>,
    rng: ChaCha8Rng,
}

impl ThompsonSampling {
    /// `cost_scale` maps raw costs into the unit range (costs are divided by it).
    pub fn new(
        contexts: u32,
        actions: u32,
        cost_scale: f64,
        config: ThompsonConfig,
        seed: u64,
    ) -> Result<Self> {
        if contexts == 0 || actions == 0 {
            return Err(Error::Parameter("contexts and actions must be >= 1".into()));
        }
        if !(config.prior_variance > 0.0 && config.observation_variance > 0.0) {
            return Err(Error::Config("Thompson variances must be positive".into()));
        }
        if !(cost_scale > 0.0 && cost_scale.is_finite()) {
            return Err(Error::Config(format!("invalid cost scale {cost_scale}")));
        }
        let prior = ArmPosterior {
            mean: config.prior_mean,
            variance: config.prior_variance,
            observations: 0,
        };
        Ok(Self {
            posteriors: vec![prior; contexts as usize * actions as usize],
            config,
            contexts,
            actions,
            cost_scale,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn cell(&self, context: Obs, action: Action) -> Result<usize> {
        if context.0 >= self.contexts {
            return Err(Error::AlphabetViolation {
                symbol: context.0,
                arity: self.contexts,
            });
        }
        if action.0 >= self.actions {
            return Err(Error::AlphabetViolation {
                symbol: action.0,
                arity: self.actions,
            });
        }
        Ok(context.index() * self.actions as usize + action.index())
    }

    pub fn posterior(&self, context: Obs, action: Action) -> Result<ArmPosterior> {
        Ok(self.posteriors[self.cell(context, action)?])
    }

    /// Samples a mean cost for every arm under `context`; returns the smallest.
    pub fn ts_select(&mut self, context: Obs) -> Result<Action> {
        let base = self.cell(context, Action(0))?;
        let mut best = Action(0);
        let mut best_draw = f64::INFINITY;
        for a in 0..self.actions {
            let post = self.posteriors[base + a as usize];
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let draw = post.mean + post.variance.sqrt() * z;
            if draw < best_draw {
                best_draw = draw;
                best = Action(a);
            }
        }
        Ok(best)
    }

    pub fn ts_update(&mut self, context: Obs, action: Action, cost: f64) -> Result<()> {
        let i = self.cell(context, action)?;
        let x = cost / self.cost_scale;
        self.posteriors[i].update(x, self.config.observation_variance);
        Ok(())
    }
}

impl Policy for ThompsonSampling {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Ts
    }

    fn select(&mut self, obs: Obs) -> Result<Action> {
        self.ts_select(obs)
    }

    fn observe(&mut self, obs: Obs, action: Action, cost: f64, _next_obs: Obs) -> Result<()> {
        self.ts_update(obs, action, cost)
    }
}
