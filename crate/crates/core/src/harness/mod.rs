//! Self-play runner, replays and analytics.

mod metrics;
mod record;

pub use metrics::{pair_metrics, vote_timeline, PairMatrices, VoteTimeline};
pub use record::{decode_actions, encode_actions, EpisodeRecord, Replayed, StepEvents, FORMAT_VERSION};

use crate::agents::{Roster, RosterError};
use crate::config::GameConfig;
use crate::engine::{EngineError, PlayerAction, WinCondition, WorldState};
use crate::observation::{observe, RenderMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("corrupt replay: {0}")]
    Corrupt(String),
    #[error("unsupported replay format version {0}")]
    Version(u32),
    #[error("replay digest mismatch (file says {expected}, body hashes to {actual})")]
    DigestMismatch { expected: String, actual: String },
    #[error("re-simulation diverged at step {step}: {detail}")]
    ReplayMismatch { step: u32, detail: String },
    #[error("no records given")]
    NoRecords,
    #[error("records do not share one config")]
    ConfigMismatch,
    #[error("voting round {round} requested, episode has {rounds}")]
    RoundOutOfRange { round: usize, rounds: usize },
    #[error("seed list is empty")]
    NoSeeds,
    #[error("image encoding failed: {0}")]
    Image(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpisodeOptions {
    /// Keep the action and event logs.
    pub record: bool,
    /// Form of the observations handed to policies.
    pub render: RenderMode,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        Self {
            record: true,
            render: RenderMode::Sprites,
        }
    }
}

/// Plays one episode to the end.
pub fn run_episode(
    config: &GameConfig,
    seed: u64,
    roster: &Roster,
    opts: EpisodeOptions,
) -> Result<EpisodeRecord, HarnessError> {
    let mut state = WorldState::reset(config.clone(), seed)?;
    let mut policies = roster.instantiate(&state, seed)?;
    let agents = roster.assign(&state.roles());
    let mut record = EpisodeRecord::new(&state, agents, Some(roster.clone()));
    let mut actions = vec![PlayerAction::Noop; state.num_players()];
    while !state.is_terminal() {
        for (p, policy) in policies.iter_mut().enumerate() {
            actions[p] = policy.act(&observe(&state, p, opts.render));
        }
        let outcome = state.step(&actions)?;
        record.push(&actions, &outcome, opts.record);
    }
    if opts.record {
        record.seal(&state);
    }
    Ok(record)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinHistogram {
    pub counts: [u64; 5],
}

impl WinHistogram {
    pub fn add(&mut self, w: WinCondition) {
        self.counts[w.index()] += 1;
    }

    pub fn count(&self, w: WinCondition) -> u64 {
        self.counts[w.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequency(&self, w: WinCondition) -> f64 {
        let t = self.total();
        if t == 0 {
            0.0
        } else {
            self.count(w) as f64 / t as f64
        }
    }

    pub fn merge(&mut self, other: &WinHistogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub episodes: usize,
    pub histogram: WinHistogram,
    pub mean_length: f64,
    /// Mean return of each roster agent.
    pub mean_agent_returns: Vec<f64>,
    pub elapsed_seconds: f64,
    pub episodes_per_second: f64,
    pub env_steps_per_second: f64,
    #[serde(skip)]
    pub records: Vec<EpisodeRecord>,
}

/// Runs one episode per seed on a pool of `parallelism` threads. Everything
/// except the timing fields depends only on the inputs.
pub fn run_batch(
    config: &GameConfig,
    seeds: &[u64],
    roster: &Roster,
    parallelism: usize,
    opts: EpisodeOptions,
) -> Result<BatchReport, HarnessError> {
    if seeds.is_empty() {
        return Err(HarnessError::NoSeeds);
    }
    roster.validate(config.num_players, config.num_impostors)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Io {
            path: "thread pool".into(),
            reason: e.to_string(),
        })?;
    let start = Instant::now();
    let results: Vec<Result<EpisodeRecord, HarnessError>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| run_episode(config, s, roster, opts))
            .collect()
    });
    let elapsed = start.elapsed().as_secs_f64();
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut histogram = WinHistogram::default();
    let mut steps = 0u64;
    let mut agent_returns = vec![0.0; roster.agents.len()];
    for r in &records {
        if let Some(w) = r.win {
            histogram.add(w);
        }
        steps += u64::from(r.steps);
        for (agent, &p) in r.agents.iter().enumerate() {
            agent_returns[agent] += r.returns[p];
        }
    }
    let n = records.len() as f64;
    Ok(BatchReport {
        episodes: records.len(),
        histogram,
        mean_length: steps as f64 / n,
        mean_agent_returns: agent_returns.iter().map(|r| r / n).collect(),
        elapsed_seconds: elapsed,
        episodes_per_second: n / elapsed.max(1e-9),
        env_steps_per_second: steps as f64 / elapsed.max(1e-9),
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub mode: RenderMode,
    pub env_steps: u64,
    pub agent_steps: u64,
    pub seconds: f64,
    pub env_steps_per_second: f64,
    pub agent_steps_per_second: f64,
}

/// Steps episodes with the given roster for at least `min_steps` env steps
/// on the calling thread, building observations in `mode`.
pub fn measure_throughput(
    config: &GameConfig,
    roster: &Roster,
    mode: RenderMode,
    min_steps: u64,
) -> Result<ThroughputReport, HarnessError> {
    let start = Instant::now();
    let mut env_steps = 0u64;
    let mut agent_steps = 0u64;
    let mut seed = 0u64;
    while env_steps < min_steps {
        let r = run_episode(
            config,
            seed,
            roster,
            EpisodeOptions {
                record: false,
                render: mode,
            },
        )?;
        env_steps += u64::from(r.steps);
        agent_steps += u64::from(r.steps) * r.roles.len() as u64;
        seed += 1;
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(ThroughputReport {
        mode,
        env_steps,
        agent_steps,
        seconds,
        env_steps_per_second: env_steps as f64 / seconds,
        agent_steps_per_second: agent_steps as f64 / seconds,
    })
}
