//! The interface shared by the universal learner and the baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{Action, Obs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Universal,
    Ts,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Universal, PolicyKind::Ts, PolicyKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Universal => "universal",
            PolicyKind::Ts => "ts",
            PolicyKind::Random => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy '{s}'")))
    }
}

/// A waveform-selection policy driven one CPI at a time: `select` for the
/// current observation, then `observe` with the outcome of that choice.
pub trait Policy {
    fn kind(&self) -> PolicyKind;

    fn select(&mut self, obs: Obs) -> Result<Action>;

    fn observe(&mut self, obs: Obs, action: Action, cost: f64, next_obs: Obs) -> Result<()>;
}
