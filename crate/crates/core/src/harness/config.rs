use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::ThompsonConfig;
use crate::cost::{CostSpec, Objective};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;
use crate::policy::PolicyKind;
use crate::scene::{Scenario, SceneConfig};

/// Kalman filter settings used by every track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// White-acceleration spectral density (m^2/s^3).
    pub process_noise: f64,
    pub initial_sigma_range_m: f64,
    pub initial_sigma_velocity_mps: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            process_noise: 1.0,
            initial_sigma_range_m: 10.0,
            initial_sigma_velocity_mps: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub objective: Objective,
    pub policy: PolicyKind,
    pub tracks: u32,
    pub cpis_per_track: u32,
    pub seeds: Vec<u64>,
    pub output_path: Option<PathBuf>,
    pub scene: SceneConfig,
    pub learner: LearnerConfig,
    pub cost: CostSpec,
    pub tracker: TrackerConfig,
    pub ts: ThompsonConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::StochasticOrder3,
            objective: Objective::Tracking,
            policy: PolicyKind::Universal,
            tracks: 100,
            cpis_per_track: 200,
            seeds: vec![0],
            output_path: None,
            scene: SceneConfig::default(),
            learner: LearnerConfig::default(),
            cost: CostSpec::default(),
            tracker: TrackerConfig::default(),
            ts: ThompsonConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.tracks == 0 || self.cpis_per_track == 0 {
            return Err(Error::Config(
                "tracks and cpis_per_track must be >= 1".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        self.scene.validate()?;
        self.learner.validate()?;
        self.cost_spec().validate()?;
        let t = &self.tracker;
        if !(t.process_noise > 0.0 && t.process_noise.is_finite()) {
            return Err(Error::Config(
                "tracker process_noise must be positive".into(),
            ));
        }
        if !(t.initial_sigma_range_m > 0.0 && t.initial_sigma_velocity_mps > 0.0) {
            return Err(Error::Config(
                "tracker initial sigmas must be positive".into(),
            ));
        }
        let alphabet = self.scene.observation_symbols() as u64 * 2 * self.scene.subchannels as u64;
        if alphabet > crate::context_tree::MAX_TABLE_ENTRIES {
            return Err(Error::Config(format!(
                "{} sub-channels give a learner table of {alphabet} entries",
                self.scene.subchannels
            )));
        }
        Ok(())
    }

    /// Cost settings with the experiment's objective applied.
    pub fn cost_spec(&self) -> CostSpec {
        CostSpec {
            objective: self.objective,
            ..self.cost
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(cfg.tracks, 100);
        assert_eq!(cfg.cpis_per_track, 200);
    }

    #[test]
    fn partial_file() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            scenario = "adaptive_order2"
            policy = "ts"
            seeds = [1, 2, 3]
            [scene]
            subchannels = 3
            [learner.exploration]
            kind = "constant"
            rate = 0.1
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::AdaptiveOrder2);
        assert_eq!(cfg.policy, PolicyKind::Ts);
        assert_eq!(cfg.scene.subchannels, 3);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("trakcs = 3"),
            Err(Error::Toml(_))
        ));
        assert!(ExperimentConfig::from_toml_str("[scene]\nsnr = 3.0").is_err());
        assert!(matches!(
            ExperimentConfig::from_toml_str("seeds = []"),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::from_toml_str("cpis_per_track = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("policy = \"greedy\"").is_err());
    }
}
