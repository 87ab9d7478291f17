//! Per-CPI costs: squared tracking innovation and delay-Doppler entropy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Tracking,
    Entropy,
}

impl Objective {
    pub const ALL: [Objective; 2] = [Objective::Tracking, Objective::Entropy];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Tracking => "tracking",
            Objective::Entropy => "entropy",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown objective {s:?}")))
    }
}

/// Sign convention of the entropy cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropySign {
    /// `-sum p ln p`: lower cost means less positional uncertainty.
    #[default]
    Shannon,
    /// `sum p ln p` taken literally.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSpec {
    /// Chosen per experiment rather than in the cost section of a config.
    #[serde(skip)]
    pub objective: Objective,
    /// Clip bound for the tracking objective.
    pub g_max: f64,
    /// Clip bound for the entropy objective; `None` means `ln(gate cells)`.
    pub entropy_g_max: Option<f64>,
    pub entropy_sign: EntropySign,
    /// Softmax sharpness per dB of energy margin.
    pub beta: f64,
    /// Half width of the square gate in cells (5x5 for 2).
    pub gate_half_width: u32,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            objective: Objective::Tracking,
            g_max: 100.0,
            entropy_g_max: None,
            entropy_sign: EntropySign::Shannon,
            beta: 1.0,
            gate_half_width: 2,
        }
    }
}

impl CostSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_max > 0.0 && self.g_max.is_finite()) {
            return Err(Error::Config(format!(
                "g_max must be positive, got {}",
                self.g_max
            )));
        }
        if let Some(g) = self.entropy_g_max {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Config(format!(
                    "entropy_g_max must be positive, got {g}"
                )));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn gate_size(&self) -> usize {
        let w = 2 * self.gate_half_width as usize + 1;
        w * w
    }

    /// Clip bound that applies to the active objective.
    pub fn bound(&self) -> f64 {
        match self.objective {
            Objective::Tracking => self.g_max,
            Objective::Entropy => self
                .entropy_g_max
                .unwrap_or_else(|| (self.gate_size() as f64).ln().max(f64::MIN_POSITIVE)),
        }
    }
}

fn clip(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}

/// `||Z - X||^2` clipped to the bound; a missed detection costs the bound.
pub fn g_track(measurement: Option<&[f64]>, estimate: &[f64], spec: &CostSpec) -> f64 {
    let bound = spec.g_max;
    match measurement {
        None => bound,
        Some(z) => {
            debug_assert_eq!(z.len(), estimate.len());
            let sq: f64 = z.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
            if sq.is_nan() {
                bound
            } else {
                clip(sq, bound)
            }
        }
    }
}

/// Normalized target-presence probabilities over a gate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProbabilityMap {
    probs: Vec<f64>,
}

impl CellProbabilityMap {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Input("empty probability map".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::Input(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!("probabilities sum to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `-sum p ln p` in nats with `0 ln 0 = 0`.
    pub fn shannon_entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }
}

/// Softmax of `beta * (E - threshold)` over the gate cells.
pub fn cell_probabilities(
    energies_db: &[f64],
    threshold_db: f64,
    beta: f64,
) -> Result<CellProbabilityMap> {
    if energies_db.is_empty() {
        return Err(Error::Input("gate is empty".into()));
    }
    let logits: Vec<f64> = energies_db
        .iter()
        .map(|e| beta * (e - threshold_db))
        .collect();
    if logits.iter().any(|l| l.is_nan()) {
        return Err(Error::Input("cell energy is NaN".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    CellProbabilityMap::new(weights.into_iter().map(|w| w / total).collect())
}

pub fn g_entropy(map: &CellProbabilityMap, spec: &CostSpec) -> f64 {
    let h = map.shannon_entropy();
    let signed = match spec.entropy_sign {
        EntropySign::Shannon => h,
        EntropySign::Literal => -h,
    };
    let bound = CostSpec {
        objective: Objective::Entropy,
        ..*spec
    }
    .bound();
    clip(signed, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tracking_examples() {
        let spec = CostSpec::default();
        assert_eq!(g_track(Some(&[1.0, 2.0]), &[1.0, 2.0], &spec), 0.0);
        assert_eq!(g_track(Some(&[4.0, 6.0]), &[1.0, 2.0], &spec), 25.0);
        assert_eq!(g_track(Some(&[1e6, 0.0]), &[0.0, 0.0], &spec), 100.0);
        assert_eq!(g_track(None, &[0.0, 0.0], &spec), 100.0);
    }

    #[test]
    fn softmax_examples() {
        let mut e = vec![-20.0; 25];
        e[7] = 30.0;
        let m = cell_probabilities(&e, 10.0, 1.0).unwrap();
        assert!(m.probs()[7] >= 0.999);
        let flat = cell_probabilities(&[3.0; 9], 10.0, 1.0).unwrap();
        assert!(flat.probs().iter().all(|p| (p - 1.0 / 9.0).abs() < 1e-15));
        let cold = cell_probabilities(&[1.0, 50.0, -4.0, 2.0], 10.0, 0.0).unwrap();
        assert!(cold.probs().iter().all(|p| (p - 0.25).abs() < 1e-15));
        assert!(matches!(
            cell_probabilities(&[], 0.0, 1.0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let spec = CostSpec {
            objective: Objective::Entropy,
            ..CostSpec::default()
        };
        let point = CellProbabilityMap::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g_entropy(&point, &spec), 0.0);
        let uniform = CellProbabilityMap::new(vec![0.25; 4]).unwrap();
        assert!((g_entropy(&uniform, &spec) - 4f64.ln()).abs() < 1e-12);
        let skew = CellProbabilityMap::new(vec![0.9, 0.1]).unwrap();
        let expected = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        assert!((g_entropy(&skew, &spec) - expected).abs() < 1e-12);
        assert!((expected - 0.3251).abs() < 1e-4);
        let literal = CostSpec {
            entropy_sign: EntropySign::Literal,
            ..spec
        };
        assert!((g_entropy(&skew, &literal) + expected).abs() < 1e-12);
    }

    #[test]
    fn bounds() {
        let spec = CostSpec::default();
        assert_eq!(spec.gate_size(), 25);
        assert_eq!(spec.bound(), 100.0);
        let ent = CostSpec {
            objective: Objective::Entropy,
            ..spec
        };
        assert!((ent.bound() - 25f64.ln()).abs() < 1e-15);
        assert!(CostSpec { g_max: 0.0, ..spec }.validate().is_err());
    }

    proptest! {
        #[test]
        fn tracking_cost_respects_clip(
            z in prop::array::uniform2(-1e8f64..1e8),
            x in prop::array::uniform2(-1e8f64..1e8),
            g in 1e-3f64..1e4,
        ) {
            let spec = CostSpec { g_max: g, ..CostSpec::default() };
            let c = g_track(Some(&z), &x, &spec);
            prop_assert!((0.0..=g).contains(&c));
            let swapped = g_track(Some(&[z[1], z[0]]), &[x[1], x[0]], &spec);
            prop_assert_eq!(c, swapped);
        }

        #[test]
        fn entropy_cost_in_range(energies in prop::collection::vec(-50f64..50.0, 1..49), beta in 0f64..5.0) {
            let spec = CostSpec { objective: Objective::Entropy, ..CostSpec::default() };
            let map = cell_probabilities(&energies, 10.0, beta).unwrap();
            let sum: f64 = map.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            let h = g_entropy(&map, &spec);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (energies.len() as f64).ln() + 1e-12);
            prop_assert!(h <= spec.bound());
        }
    }
}
