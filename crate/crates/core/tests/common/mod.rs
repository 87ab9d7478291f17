//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the learner's internals.
#![allow(dead_code)]

use std::path::PathBuf;

use radar_lz::context_tree::SymbolAlphabet;
use radar_lz::harness::{self, ExperimentConfig};
use radar_lz::learner::{LearnerConfig, UniversalLearner};
use radar_lz::policy::PolicyKind;
use radar_lz::{Action, Obs};

/// Closed-form KT log-probability of a binary sequence with the given counts.
pub fn kt_block_log_prob(zeros: u64, ones: u64) -> f64 {
    // Gamma(n0 + 1/2) Gamma(n1 + 1/2) / (pi Gamma(n + 1))
    fn ln_gamma_half(n: u64) -> f64 {
        // ln Gamma(n + 1/2) = ln Gamma(1/2) + sum_{i<n} ln(i + 1/2)
        0.5 * std::f64::consts::PI.ln() + (0..n).map(|i| (i as f64 + 0.5).ln()).sum::<f64>()
    }
    let n = zeros + ones;
    let ln_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
    ln_gamma_half(zeros) + ln_gamma_half(ones) - std::f64::consts::PI.ln() - ln_fact
}

/// Bayes mixture over the five binary tree sources of depth <= 2, with
/// prior 1/2 on the memoryless source and 1/8 on each of the others.
/// Past symbols before the start are taken to be 0.
pub fn ctw_mixture_log_prob(seq: &[u32]) -> f64 {
    // counts[context] = (zeros, ones); context keys: "" | "x" | "xy" (most recent first)
    let past = |k: usize, d: usize| if k > d { seq[k - 1 - d] } else { 0 };
    let mut c0 = [0u64; 2];
    let mut c1 = [[0u64; 2]; 2];
    let mut c2 = [[[0u64; 2]; 2]; 2];
    for (k, &b) in seq.iter().enumerate() {
        let (x, y) = (past(k, 0) as usize, past(k, 1) as usize);
        c0[b as usize] += 1;
        c1[x][b as usize] += 1;
        c2[x][y][b as usize] += 1;
    }
    let leaf = |c: [u64; 2]| kt_block_log_prob(c[0], c[1]);
    let depth1 = |x: usize| leaf(c1[x]);
    let split = |x: usize| leaf(c2[x][0]) + leaf(c2[x][1]);
    let models = [
        (0.5f64.ln(), leaf(c0)),
        (0.125f64.ln(), depth1(0) + depth1(1)),
        (0.125f64.ln(), split(0) + depth1(1)),
        (0.125f64.ln(), depth1(0) + split(1)),
        (0.125f64.ln(), split(0) + split(1)),
    ];
    let m = models
        .iter()
        .map(|(p, l)| p + l)
        .fold(f64::NEG_INFINITY, f64::max);
    m + models
        .iter()
        .map(|(p, l)| (p + l - m).exp())
        .sum::<f64>()
        .ln()
}

/// Two-state, two-action average-cost MDP.
pub mod mdp {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub struct Mdp {
        /// p_next[s][a][s']
        pub p_next: [[[f64; 2]; 2]; 2],
        /// cost[s][a]
        pub cost: [[f64; 2]; 2],
    }

    /// Staying in state 0 is cheap today, but paying to move to state 1 is
    /// optimal in the long run, so the greedy one-step choice is wrong.
    pub fn two_state() -> Mdp {
        Mdp {
            p_next: [[[0.9, 0.1], [0.1, 0.9]], [[0.1, 0.9], [0.9, 0.1]]],
            cost: [[0.6, 1.0], [0.1, 0.5]],
        }
    }

    impl Mdp {
        /// Long-run average cost of a deterministic stationary policy.
        pub fn policy_cost(&self, policy: [usize; 2]) -> f64 {
            let p01 = self.p_next[0][policy[0]][1];
            let p10 = self.p_next[1][policy[1]][0];
            let pi1 = p01 / (p01 + p10);
            (1.0 - pi1) * self.cost[0][policy[0]] + pi1 * self.cost[1][policy[1]]
        }

        /// Optimal average cost by enumerating all four policies.
        pub fn optimal_average_cost(&self) -> (f64, [usize; 2]) {
            let mut best = (f64::INFINITY, [0, 0]);
            for a0 in 0..2 {
                for a1 in 0..2 {
                    let c = self.policy_cost([a0, a1]);
                    if c < best.0 {
                        best = (c, [a0, a1]);
                    }
                }
            }
            best
        }
    }

    /// Drives a fresh learner for `steps` and returns its running average cost.
    pub fn run_learner(model: &Mdp, seed: u64, steps: usize) -> f64 {
        let config = LearnerConfig {
            seed,
            ..LearnerConfig::default()
        };
        let mut learner =
            UniversalLearner::new(SymbolAlphabet::new(2, 2).unwrap(), config).unwrap();
        let mut env = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut s = 0usize;
        for _ in 0..steps {
            let a = learner.select_waveform(Obs(s as u32)).unwrap().index();
            let next = if env.random::<f64>() < model.p_next[s][a][1] {
                1
            } else {
                0
            };
            learner
                .observe_and_update(
                    Obs(s as u32),
                    Action(a as u32),
                    model.cost[s][a],
                    Obs(next as u32),
                )
                .unwrap();
            s = next;
        }
        learner.average_cost().unwrap()
    }
}

/// Deterministic three-band channel with order-2 action memory: the
/// interferer occupies the band the radar used two steps earlier, and the
/// radar only observes whether its last transmission collided.
pub mod emitter {
    use super::*;
    use std::collections::HashMap;

    pub const BANDS: usize = 3;
    pub const HIT: f64 = 1.0;
    pub const CLEAR: f64 = 0.1;

    fn cost(w: usize, w_prev2: usize) -> f64 {
        if w == w_prev2 {
            HIT
        } else {
            CLEAR
        }
    }

    /// Karp's minimum mean cycle over states (w_{k-1}, w_{k-2}).
    pub fn optimal_average_cost() -> f64 {
        let n = BANDS * BANDS;
        let id = |a: usize, b: usize| a * BANDS + b;
        let mut edges = Vec::new();
        for p1 in 0..BANDS {
            for p2 in 0..BANDS {
                for w in 0..BANDS {
                    edges.push((id(p1, p2), id(w, p1), cost(w, p2)));
                }
            }
        }
        // d[k][v]: min cost of a k-edge walk ending at v, from any start.
        let mut d = vec![vec![f64::INFINITY; n]; n + 1];
        d[0].iter_mut().for_each(|x| *x = 0.0);
        for k in 1..=n {
            for &(u, v, c) in &edges {
                let cand = d[k - 1][u] + c;
                if cand < d[k][v] {
                    d[k][v] = cand;
                }
            }
        }
        (0..n)
            .filter(|&v| d[n][v].is_finite())
            .map(|v| {
                (0..n)
                    .filter(|&k| d[k][v].is_finite())
                    .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Best deterministic policy that maps the last observation (collided or
    /// not) to a band, from its most favourable starting state.
    pub fn best_order1_policy() -> (f64, [usize; 2]) {
        let mut best = (f64::INFINITY, [0, 0]);
        for f0 in 0..BANDS {
            for f1 in 0..BANDS {
                let f = [f0, f1];
                for p1 in 0..BANDS {
                    for p2 in 0..BANDS {
                        for y in 0..2 {
                            let c = cycle_cost(f, (p1, p2, y));
                            if c < best.0 {
                                best = (c, f);
                            }
                        }
                    }
                }
            }
        }
        best
    }

    fn cycle_cost(f: [usize; 2], mut state: (usize, usize, usize)) -> f64 {
        let mut seen = HashMap::new();
        let mut costs = Vec::new();
        loop {
            if let Some(&start) = seen.get(&state) {
                let cyc: &[f64] = &costs[start..];
                return cyc.iter().sum::<f64>() / cyc.len() as f64;
            }
            seen.insert(state, costs.len());
            let (p1, p2, y) = state;
            let w = f[y];
            costs.push(cost(w, p2));
            state = (w, p1, (w == p2) as usize);
        }
    }

    pub fn run_learner(seed: u64, steps: usize) -> f64 {
        let config = LearnerConfig {
            seed,
            ..LearnerConfig::default()
        };
        let mut learner =
            UniversalLearner::new(SymbolAlphabet::new(2, BANDS as u32).unwrap(), config).unwrap();
        let (mut p1, mut p2, mut y) = (0usize, 1usize, 0u32);
        for _ in 0..steps {
            let w = learner.select_waveform(Obs(y)).unwrap().index();
            let c = cost(w, p2);
            let next = (w == p2) as u32;
            learner
                .observe_and_update(Obs(y), Action(w as u32), c, Obs(next))
                .unwrap();
            (p1, p2, y) = (w, p1, next);
        }
        learner.average_cost().unwrap()
    }
}

pub fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/micro_cpi.csv")
}

/// 2 seeds x 2 tracks x 5 CPIs for every policy, stochastic scenario.
pub fn micro_config(policy: PolicyKind) -> ExperimentConfig {
    ExperimentConfig {
        policy,
        tracks: 2,
        cpis_per_track: 5,
        seeds: vec![11, 12],
        ..ExperimentConfig::default()
    }
}

pub fn micro_csv() -> String {
    let mut records = Vec::new();
    for policy in PolicyKind::ALL {
        records.extend(
            harness::run_experiment(&micro_config(policy))
                .unwrap()
                .records,
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cpi.csv");
    harness::write_records(&path, &records).unwrap();
    std::fs::read_to_string(path).unwrap()
}

/// Compares a fresh micro run with the checked-in golden CSV. Setting
/// `RADAR_LZ_BLESS=1` rewrites the golden file instead.
pub fn golden_matches() -> Result<(), String> {
    let fresh = micro_csv();
    let path = golden_path();
    if std::env::var_os("RADAR_LZ_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &fresh).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read_to_string(&path)
        .map_err(|e| format!("golden file {}: {e}", path.display()))?;
    if golden == fresh {
        Ok(())
    } else {
        let line = golden
            .lines()
            .zip(fresh.lines())
            .position(|(a, b)| a != b)
            .map_or(golden.lines().count().min(fresh.lines().count()), |i| i);
        Err(format!(
            "golden CSV differs from a fresh run at line {}",
            line + 1
        ))
    }
}
