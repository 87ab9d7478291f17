//! Simulated radar scene: one constant-velocity target, a band-level
//! interferer, SINR and noisy measurements, and the quantizer that turns a
//! measurement into a learner observation symbol.

pub mod channel;
pub mod waveform;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

pub use channel::{adaptive_response, majority_band, ChannelState, Occupancy, TransitionTable};
pub use waveform::{gen_lfm, gen_zadoff_chu, Waveform, WaveformCatalog, WaveformClass};

use crate::error::{Error, Result};
use crate::symbol::Obs;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    StochasticOrder3,
    AdaptiveOrder2,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::StochasticOrder3, Scenario::AdaptiveOrder2];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::StochasticOrder3 => "stochastic_order3",
            Scenario::AdaptiveOrder2 => "adaptive_order2",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub carrier_hz: f64,
    pub pri_s: f64,
    pub pulses_per_cpi: u32,
    pub delay_cells: u32,
    pub doppler_cells: u32,
    /// Range extent of one delay cell.
    pub range_cell_m: f64,
    pub subchannels: u32,
    pub snr0_db: f64,
    pub inr_db: f64,
    pub detection_threshold_db: f64,
    /// Target motion memory. Only constant-velocity motion (1) is simulated.
    pub memory_l: u32,
    /// Order of the stochastic interferer.
    pub memory_j: u32,
    /// Probability mass the stochastic interferer puts on its majority band,
    /// on top of a uniform spread.
    pub interferer_stay: f64,
    /// Explicit interferer table (`S^J` rows of `S` entries), overriding the
    /// majority rule.
    pub transition_table: Option<Vec<Vec<f64>>>,
    /// Measurement noise at `snr0_db` for the LFM class.
    pub sigma_range_m: f64,
    pub sigma_velocity_mps: f64,
    /// Probability of flipping each sensed occupancy bit.
    pub sensing_flip_prob: f64,
    pub initial_range_m: f64,
    pub initial_velocity_mps: f64,
    pub range_jitter_m: f64,
    pub velocity_jitter_mps: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 2.5e9,
            pri_s: 4.96e-4,
            pulses_per_cpi: 128,
            delay_cells: 64,
            doppler_cells: 32,
            range_cell_m: 30.0,
            subchannels: 4,
            snr0_db: 15.0,
            inr_db: 20.0,
            detection_threshold_db: 10.0,
            memory_l: 1,
            memory_j: 3,
            interferer_stay: 0.8,
            transition_table: None,
            sigma_range_m: 3.0,
            sigma_velocity_mps: 2.0,
            sensing_flip_prob: 0.0,
            initial_range_m: 1000.0,
            initial_velocity_mps: 50.0,
            range_jitter_m: 0.0,
            velocity_jitter_mps: 0.0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("pri_s", self.pri_s),
            ("range_cell_m", self.range_cell_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.pulses_per_cpi == 0 || self.delay_cells == 0 || self.doppler_cells == 0 {
            return Err(Error::Config("pulse and cell counts must be >= 1".into()));
        }
        if self.subchannels == 0 || self.subchannels > 10 {
            return Err(Error::Config(format!(
                "subchannels must be in 1..=10, got {}",
                self.subchannels
            )));
        }
        if self.memory_l != 1 {
            return Err(Error::Config(
                "only constant-velocity motion (memory_l = 1) is simulated".into(),
            ));
        }
        if self.memory_j == 0 {
            return Err(Error::Config("memory_j must be >= 1".into()));
        }
        for (name, v) in [
            ("snr0_db", self.snr0_db),
            ("detection_threshold_db", self.detection_threshold_db),
            ("initial_velocity_mps", self.initial_velocity_mps),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if self.inr_db.is_nan() || self.inr_db == f64::INFINITY {
            return Err(Error::Config("inr_db must be finite or -inf".into()));
        }
        for (name, v) in [
            ("sigma_range_m", self.sigma_range_m),
            ("sigma_velocity_mps", self.sigma_velocity_mps),
            ("range_jitter_m", self.range_jitter_m),
            ("velocity_jitter_mps", self.velocity_jitter_mps),
            ("initial_range_m", self.initial_range_m),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.sensing_flip_prob) {
            return Err(Error::Config("sensing_flip_prob must be in [0, 1]".into()));
        }
        self.transition_table()?;
        Ok(())
    }

    pub fn cpi_duration_s(&self) -> f64 {
        self.pulses_per_cpi as f64 * self.pri_s
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Width of one Doppler cell: the unambiguous velocity interval
    /// `lambda / (2 PRI)` split evenly over the Doppler cells.
    pub fn velocity_cell_mps(&self) -> f64 {
        self.wavelength_m() / (2.0 * self.pri_s * self.doppler_cells as f64)
    }

    /// Target hypotheses: every delay-Doppler cell plus "no target".
    pub fn hypothesis_count(&self) -> u64 {
        self.delay_cells as u64 * self.doppler_cells as u64 + 1
    }

    /// Observation alphabet size `2^S * 2`.
    pub fn observation_symbols(&self) -> u32 {
        (1u32 << self.subchannels) * 2
    }

    pub fn transition_table(&self) -> Result<TransitionTable> {
        match &self.transition_table {
            Some(rows) => TransitionTable::from_rows(self.memory_j, self.subchannels, rows.clone()),
            None => {
                TransitionTable::majority(self.memory_j, self.subchannels, self.interferer_stay)
            }
        }
    }

    /// Delay-Doppler cell of a state, or `None` for "no target" when it
    /// falls off the grid. Doppler cells are centred on zero velocity.
    pub fn cell_of(&self, state: &TargetState) -> Option<(u32, u32)> {
        cell_index(state.range_m, self.range_cell_m, 0.0, self.delay_cells).and_then(|i| {
            let half = self.doppler_cells as f64 / 2.0;
            cell_index(
                state.velocity_mps,
                self.velocity_cell_mps(),
                -half,
                self.doppler_cells,
            )
            .map(|j| (i, j))
        })
    }
}

fn cell_index(x: f64, width: f64, offset_cells: f64, cells: u32) -> Option<u32> {
    let c = (x / width - offset_cells).floor();
    (c >= 0.0 && c < cells as f64).then_some(c as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub range_m: f64,
    pub velocity_mps: f64,
}

impl TargetState {
    pub fn as_array(&self) -> [f64; 2] {
        [self.range_m, self.velocity_mps]
    }
}

/// Constant radial velocity for one CPI. Range is floored at zero.
pub fn advance_target(state: TargetState, config: &SceneConfig) -> TargetState {
    advance_by(state, config.cpi_duration_s())
}

pub fn advance_by(state: TargetState, dt: f64) -> TargetState {
    TargetState {
        range_m: (state.range_m + state.velocity_mps * dt).max(0.0),
        velocity_mps: state.velocity_mps,
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// SINR in dB: `snr0 / (1 + inr * overlap)`.
pub fn compute_sinr(waveform: Waveform, occupancy: &Occupancy, config: &SceneConfig) -> f64 {
    if occupancy.is_occupied(waveform.subchannel) {
        linear_to_db(db_to_linear(config.snr0_db) / (1.0 + db_to_linear(config.inr_db)))
    } else {
        config.snr0_db
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub detected: bool,
    /// `[range, velocity]` estimate; `None` on a missed detection.
    pub estimate: Option<[f64; 2]>,
    /// Standard deviations of the estimate, `[range, velocity]`.
    pub sigma: [f64; 2],
    pub observed_occupancy: Occupancy,
    pub sinr_db: f64,
    pub collision: bool,
}

/// Thresholded detection plus unbiased Gaussian range/velocity estimates
/// whose sigmas scale as amplitude SNR relative to `snr0_db`.
pub fn measure<R: Rng + ?Sized>(
    target: &TargetState,
    waveform: Waveform,
    occupancy: &Occupancy,
    config: &SceneConfig,
    rng: &mut R,
) -> Observation {
    let sinr_db = compute_sinr(waveform, occupancy, config);
    let detected = sinr_db >= config.detection_threshold_db;
    let scale = 10f64.powf((config.snr0_db - sinr_db) / 20.0);
    let (fr, fv) = waveform.class.sigma_factors();
    let sigma = [
        config.sigma_range_m * fr * scale,
        config.sigma_velocity_mps * fv * scale,
    ];
    let estimate = detected.then(|| {
        let zr: f64 = StandardNormal.sample(rng);
        let zv: f64 = StandardNormal.sample(rng);
        [
            target.range_m + sigma[0] * zr,
            target.velocity_mps + sigma[1] * zv,
        ]
    });
    let observed_occupancy = if config.sensing_flip_prob > 0.0 {
        Occupancy::from_bits(
            occupancy
                .bits()
                .iter()
                .map(|&b| b ^ rng.random_bool(config.sensing_flip_prob))
                .collect(),
        )
    } else {
        occupancy.clone()
    };
    Observation {
        detected,
        estimate,
        sigma,
        observed_occupancy,
        sinr_db,
        collision: occupancy.is_occupied(waveform.subchannel),
    }
}

/// Observation symbol `occupancy_index * 2 + detected`.
pub fn quantize(occupancy: &Occupancy, detected: bool) -> Obs {
    Obs(occupancy.index() * 2 + detected as u32)
}

pub fn quantize_observation(obs: &Observation) -> Obs {
    quantize(&obs.observed_occupancy, obs.detected)
}

pub fn dequantize(symbol: Obs, subchannels: u32) -> Result<(Occupancy, bool)> {
    let occ =
        Occupancy::from_index(subchannels, symbol.0 / 2).map_err(|_| Error::AlphabetViolation {
            symbol: symbol.0,
            arity: (1u32 << subchannels.min(31)) * 2,
        })?;
    Ok((occ, symbol.0 % 2 == 1))
}

/// Square window of delay-Doppler cells centred on `center`, clipped to the grid.
pub fn gate_cells(center: (u32, u32), half_width: u32, config: &SceneConfig) -> Vec<(u32, u32)> {
    let span = |c: u32, n: u32| c.saturating_sub(half_width)..=(c + half_width).min(n - 1);
    span(center.0, config.delay_cells)
        .flat_map(|i| span(center.1, config.doppler_cells).map(move |j| (i, j)))
        .collect()
}

/// Per-cell received energy in dB over `cells`, normalized to the
/// interference-plus-noise floor: exponential noise everywhere, plus the
/// target's SINR in the cell it occupies.
pub fn cell_energies<R: Rng + ?Sized>(
    cells: &[(u32, u32)],
    target_cell: Option<(u32, u32)>,
    sinr_db: f64,
    rng: &mut R,
) -> Vec<f64> {
    let signal = db_to_linear(sinr_db);
    cells
        .iter()
        .map(|&c| {
            let noise: f64 = Exp1.sample(rng);
            let power = noise + if Some(c) == target_cell { signal } else { 0.0 };
            linear_to_db(power.max(f64::MIN_POSITIVE))
        })
        .collect()
}

/// Everything that evolves inside one trial: target, channel and the
/// interferer law for the configured scenario.
#[derive(Debug, Clone)]
pub struct Scene {
    config: SceneConfig,
    scenario: Scenario,
    catalog: WaveformCatalog,
    table: TransitionTable,
    target: TargetState,
    channel: ChannelState,
}

impl Scene {
    pub fn new<R: Rng + ?Sized>(
        config: SceneConfig,
        scenario: Scenario,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let table = config.transition_table()?;
        let catalog = WaveformCatalog::new(config.subchannels)?;
        let channel = ChannelState::new(config.subchannels, config.memory_j, 0)?;
        let mut scene = Self {
            target: TargetState {
                range_m: config.initial_range_m,
                velocity_mps: config.initial_velocity_mps,
            },
            config,
            scenario,
            catalog,
            table,
            channel,
        };
        scene.reset_track(rng)?;
        Ok(scene)
    }

    pub fn config(&self) -> &SceneConfig {
        &self.config
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn catalog(&self) -> &WaveformCatalog {
        &self.catalog
    }

    pub fn target(&self) -> &TargetState {
        &self.target
    }

    pub fn channel(&self) -> &ChannelState {
        &self.channel
    }

    /// New target and a fresh random interferer band; radar history is cleared.
    pub fn reset_track<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let c = &self.config;
        let jitter = |s: f64, rng: &mut R| {
            if s > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                s * z
            } else {
                0.0
            }
        };
        self.target = TargetState {
            range_m: (c.initial_range_m + jitter(c.range_jitter_m, rng)).max(0.0),
            velocity_mps: c.initial_velocity_mps + jitter(c.velocity_jitter_mps, rng),
        };
        let band = rng.random_range(0..c.subchannels);
        self.channel = ChannelState::new(c.subchannels, c.memory_j, band)?;
        Ok(())
    }

    /// One CPI of scene evolution: the target moves and the interferer picks
    /// the band it will occupy during the coming transmission.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        self.target = advance_target(self.target, &self.config);
        match self.scenario {
            Scenario::StochasticOrder3 => self.channel.step_stochastic(&self.table, rng)?,
            Scenario::AdaptiveOrder2 => self.channel.step_adaptive(),
        }
        Ok(())
    }

    /// Transmits `waveform` into the current channel and returns the measurement.
    pub fn transmit<R: Rng + ?Sized>(&mut self, waveform: Waveform, rng: &mut R) -> Observation {
        let obs = measure(
            &self.target,
            waveform,
            self.channel.occupancy(),
            &self.config,
            rng,
        );
        self.channel.record_transmission(waveform.subchannel);
        obs
    }

    /// Observation available before the first decision of a track: the
    /// sensed occupancy with the detection bit set.
    pub fn initial_symbol(&self) -> Obs {
        quantize(self.channel.occupancy(), true)
    }
}
