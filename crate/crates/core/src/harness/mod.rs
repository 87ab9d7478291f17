//! Seeded multi-trial experiments: one trial per seed, each owning its
//! scene, policy, tracker and RNG streams, merged in seed order.

mod config;
mod output;
mod plot;

pub use config::{ExperimentConfig, TrackerConfig};
pub use output::{
    read_records, read_summary, summarize, track_summaries, write_records, write_summary,
    CpiRecord, SummaryRow, TrackSummary,
};
pub use plot::{emit_plots, render_plot};

use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{RandomPolicy, ThompsonSampling};
use crate::context_tree::SymbolAlphabet;
use crate::cost::{cell_probabilities, g_entropy, g_track, Objective};
use crate::error::Result;
use crate::learner::{LearnerConfig, UniversalLearner};
use crate::policy::{Policy, PolicyKind};
use crate::scene::{
    cell_energies, gate_cells, quantize_observation, Observation, Scene, TargetState,
};
use crate::symbol::Obs;
use crate::tracking::{
    cv_process_noise, kalman_predict, kalman_update, RmseAccumulator, TrackEstimate,
};

/// Everything a run produces: per-CPI rows plus per-track aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<CpiRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Per-trial RNG seeds: one for the scene, one for the policy.
fn trial_seeds(seed: u64) -> (u64, u64) {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    (seeder.random(), seeder.random())
}

pub fn build_policy(config: &ExperimentConfig, seed: u64) -> Result<Box<dyn Policy + Send>> {
    let scene = &config.scene;
    let actions = 2 * scene.subchannels;
    let spec = config.cost_spec();
    Ok(match config.policy {
        PolicyKind::Universal => {
            let alphabet = SymbolAlphabet::new(scene.observation_symbols(), actions)?;
            let learner = LearnerConfig {
                seed,
                cost_bound: spec.bound(),
                ..config.learner.clone()
            };
            Box::new(UniversalLearner::new(alphabet, learner)?)
        }
        PolicyKind::Ts => Box::new(ThompsonSampling::new(
            scene.observation_symbols(),
            actions,
            spec.bound(),
            config.ts.clone(),
            seed,
        )?),
        PolicyKind::Random => Box::new(RandomPolicy::new(actions, seed)?),
    })
}

/// The filter starts from the nominal launch state, not the jittered truth.
fn initial_estimate(config: &ExperimentConfig) -> Result<TrackEstimate> {
    let t = &config.tracker;
    TrackEstimate::new(
        config.scene.initial_range_m,
        config.scene.initial_velocity_mps,
        Matrix2::new(
            t.initial_sigma_range_m.powi(2),
            0.0,
            0.0,
            t.initial_sigma_velocity_mps.powi(2),
        ),
    )
}

fn cpi_cost<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    scene: &Scene,
    predicted: &TrackEstimate,
    obs: &Observation,
    rng: &mut R,
) -> Result<f64> {
    let spec = config.cost_spec();
    match spec.objective {
        Objective::Tracking => Ok(g_track(
            obs.estimate.as_ref().map(|z| z.as_slice()),
            predicted.state.as_slice(),
            &spec,
        )),
        Objective::Entropy => {
            let prior = TargetState {
                range_m: predicted.range_m(),
                velocity_mps: predicted.velocity_mps(),
            };
            let Some(center) = scene.config().cell_of(&prior) else {
                return Ok(spec.bound());
            };
            let gate = gate_cells(center, spec.gate_half_width, scene.config());
            let truth = scene.config().cell_of(scene.target());
            let energies = cell_energies(&gate, truth, obs.sinr_db, rng);
            let map =
                cell_probabilities(&energies, scene.config().detection_threshold_db, spec.beta)?;
            Ok(g_entropy(&map, &spec))
        }
    }
}

/// One track of `cpis_per_track` CPIs. The scene is reset (new target, new
/// interferer band); the policy carries over from earlier tracks.
pub fn run_track<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    trial: u32,
    track: u32,
    policy: &mut dyn Policy,
    scene: &mut Scene,
    rng: &mut R,
) -> Result<Vec<CpiRecord>> {
    scene.reset_track(rng)?;
    let dt = scene.config().cpi_duration_s();
    let q = cv_process_noise(dt, config.tracker.process_noise);
    let mut estimate = initial_estimate(config)?;
    let mut rmse = RmseAccumulator::default();
    let mut y: Obs = scene.initial_symbol();
    let mut rows = Vec::with_capacity(config.cpis_per_track as usize);

    for cpi in 0..config.cpis_per_track {
        let action = policy.select(y)?;
        let waveform = scene.catalog().waveform(action)?;
        scene.advance(rng)?;
        let predicted = kalman_predict(&estimate, dt, &q);
        let obs = scene.transmit(waveform, rng);
        let cost = cpi_cost(config, scene, &predicted, &obs, rng)?;
        estimate = match obs.estimate {
            Some(z) => {
                let r = Matrix2::new(obs.sigma[0].powi(2), 0.0, 0.0, obs.sigma[1].powi(2));
                kalman_update(&predicted, &Vector2::new(z[0], z[1]), &r)?
            }
            None => predicted,
        };
        let next = quantize_observation(&obs);
        policy.observe(y, action, cost, next)?;
        rmse.push(
            scene.target().as_array(),
            [estimate.range_m(), estimate.velocity_mps()],
        );
        rows.push(CpiRecord {
            trial,
            track,
            cpi,
            policy: config.policy,
            objective: config.objective,
            scenario: config.scenario,
            wf_class: waveform.class,
            subchannel: waveform.subchannel,
            sinr_db: obs.sinr_db,
            cost,
            rmse: rmse.rmse().expect("one sample pushed"),
            collision: obs.collision as u8,
        });
        y = next;
    }
    Ok(rows)
}

/// All tracks for the seed at position `trial` of `config.seeds`.
pub fn run_trial(config: &ExperimentConfig, trial: u32) -> Result<Vec<CpiRecord>> {
    let seed = config.seeds[trial as usize];
    let (scene_seed, policy_seed) = trial_seeds(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(scene_seed);
    let mut scene = Scene::new(config.scene.clone(), config.scenario, &mut rng)?;
    let mut policy = build_policy(config, policy_seed)?;
    let mut rows = Vec::with_capacity(config.tracks as usize * config.cpis_per_track as usize);
    for track in 0..config.tracks {
        rows.extend(run_track(
            config,
            trial,
            track,
            policy.as_mut(),
            &mut scene,
            &mut rng,
        )?);
    }
    Ok(rows)
}

fn merge(trials: Vec<Result<Vec<CpiRecord>>>) -> Result<ExperimentResult> {
    let mut records = Vec::new();
    for t in trials {
        records.extend(t?);
    }
    let summary = summarize(&records);
    Ok(ExperimentResult { records, summary })
}

/// Runs every seed in parallel and merges trials in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let trials: Vec<_> = (0..config.seeds.len() as u32)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect();
    merge(trials)
}

/// Same output as [`run_experiment`], one trial at a time.
pub fn run_experiment_serial(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let trials = (0..config.seeds.len() as u32)
        .map(|t| run_trial(config, t))
        .collect();
    merge(trials)
}

/// Configs for every scenario x objective x policy combination.
pub fn sweep_configs(base: &ExperimentConfig) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for scenario in crate::scene::Scenario::ALL {
        for objective in Objective::ALL {
            for policy in PolicyKind::ALL {
                out.push(ExperimentConfig {
                    scenario,
                    objective,
                    policy,
                    ..base.clone()
                });
            }
        }
    }
    out
}

/// Runs each config (trials in parallel inside each) and concatenates.
pub fn run_sweep(base: &ExperimentConfig) -> Result<ExperimentResult> {
    let configs = sweep_configs(base);
    let results: Vec<_> = configs
        .par_iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<CpiRecord> = results.into_iter().flat_map(|r| r.records).collect();
    let summary = summarize(&records);
    Ok(ExperimentResult { records, summary })
}

/// Writes `cpi.csv`, `summary.csv` and the plots under `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let cpi = dir.join("cpi.csv");
    let summary = dir.join("summary.csv");
    write_records(&cpi, &result.records)?;
    write_summary(&summary, &result.summary)?;
    let mut files = vec![cpi, summary];
    files.extend(emit_plots(&result.summary, dir)?);
    Ok(files)
}
