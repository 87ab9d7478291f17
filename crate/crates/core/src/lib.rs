//! Universal-learning waveform selection for a tracking radar.
//!
//! A context tree built by Lempel-Ziv phrase parsing over (observation,
//! action) pairs models a target channel of unknown finite memory. Each
//! node carries Krichevsky-Trofimov transition estimates, context-tree
//! weighted probabilities and a cost-to-go, and the learner acts
//! epsilon-greedily on those cost-to-go estimates.
//!
//! Around the learner sit the pieces needed to exercise it on a simulated
//! radar scene: a waveform catalog, stochastic and adaptive interference,
//! a constant-velocity Kalman tracker, two cost objectives, random and
//! Thompson-sampling baselines, and a seeded multi-trial harness.

pub mod baselines;
pub mod context_tree;
pub mod cost;
pub mod error;
pub mod harness;
pub mod kt;
pub mod learner;
pub mod policy;
pub mod scene;
pub mod symbol;
pub mod tracking;

pub use error::{Error, Result};
pub use symbol::{Action, Obs};
