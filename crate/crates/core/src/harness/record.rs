//! Episode records and the replay file format.
//!
//! A record stores the config, seed, assignments and joint actions; the
//! event log and returns are kept so a re-simulation can be checked against
//! them. On disk a record is wrapped in an envelope carrying the format
//! version and the SHA-256 of the body text.

use super::HarnessError;
use crate::agents::Roster;
use crate::config::GameConfig;
use crate::engine::{hex, Event, PlayerAction, PlayerId, Role, StepOutcome, WinCondition, WorldState};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEvents {
    pub step: u32,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub format_version: u32,
    pub config: GameConfig,
    pub seed: u64,
    pub roles: Vec<Role>,
    pub colors: Vec<u8>,
    /// Player id controlled by each roster agent.
    pub agents: Vec<PlayerId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roster: Option<Roster>,
    /// One string per step; character `i` is player `i`'s action code.
    pub actions: Vec<String>,
    /// Events of every step that had any, in step order (steps count from 1).
    pub events: Vec<StepEvents>,
    pub win: Option<WinCondition>,
    pub returns: Vec<f64>,
    pub steps: u32,
    /// Hex state digest after the last logged step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_digest: Option<String>,
}

impl EpisodeRecord {
    pub fn new(state: &WorldState, agents: Vec<PlayerId>, roster: Option<Roster>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            config: state.config().clone(),
            seed: state.seed(),
            roles: state.roles(),
            colors: state.colors(),
            agents,
            roster,
            actions: Vec::new(),
            events: Vec::new(),
            win: None,
            returns: vec![0.0; state.num_players()],
            steps: 0,
            final_digest: None,
        }
    }

    /// Stamps the digest of `state`, which should be the state after the
    /// last pushed step.
    pub fn seal(&mut self, state: &WorldState) {
        self.final_digest = Some(hex(&state.digest()));
    }

    /// Appends one step.
    pub fn push(&mut self, actions: &[PlayerAction], outcome: &StepOutcome, keep_log: bool) {
        self.steps += 1;
        for (r, x) in self.returns.iter_mut().zip(&outcome.rewards) {
            *r += x;
        }
        if keep_log {
            self.actions.push(encode_actions(actions));
            if !outcome.events.is_empty() {
                self.events.push(StepEvents {
                    step: self.steps,
                    events: outcome.events.clone(),
                });
            }
        }
        if outcome.terminal.is_some() {
            self.win = outcome.terminal;
        }
    }

    /// Agent index controlling each player.
    pub fn seat_of_player(&self) -> Vec<usize> {
        let mut seat = vec![0; self.agents.len()];
        for (agent, &p) in self.agents.iter().enumerate() {
            seat[p] = agent;
        }
        seat
    }

    pub fn joint_actions(&self, step: usize) -> Result<Vec<PlayerAction>, HarnessError> {
        decode_actions(&self.actions[step], self.roles.len())
            .ok_or_else(|| HarnessError::Corrupt(format!("bad action string at step {}", step + 1)))
    }

    /// Re-runs the episode from its config, seed and actions, calling `visit`
    /// with the state after every step.
    pub fn replay_with(
        &self,
        mut visit: impl FnMut(&WorldState, &[PlayerAction], &StepOutcome),
    ) -> Result<Replayed, HarnessError> {
        let mut state = WorldState::reset(self.config.clone(), self.seed)?;
        if state.roles() != self.roles || state.colors() != self.colors {
            return Err(HarnessError::ReplayMismatch {
                step: 0,
                detail: "role or color assignment differs".into(),
            });
        }
        let mut out = Replayed {
            events: Vec::new(),
            returns: vec![0.0; self.roles.len()],
            win: None,
            steps: 0,
            digest: String::new(),
        };
        for i in 0..self.actions.len() {
            let actions = self.joint_actions(i)?;
            let outcome = state.step(&actions)?;
            out.steps += 1;
            for (r, x) in out.returns.iter_mut().zip(&outcome.rewards) {
                *r += x;
            }
            if !outcome.events.is_empty() {
                out.events.push(StepEvents {
                    step: out.steps,
                    events: outcome.events.clone(),
                });
            }
            out.win = outcome.terminal;
            visit(&state, &actions, &outcome);
        }
        out.digest = hex(&state.digest());
        Ok(out)
    }

    /// Re-simulates and compares events, returns and the win condition.
    pub fn verify(&self) -> Result<(), HarnessError> {
        let r = self.replay_with(|_, _, _| {})?;
        if r.steps != self.steps {
            return Err(HarnessError::ReplayMismatch {
                step: r.steps,
                detail: format!("replayed {} steps, record has {}", r.steps, self.steps),
            });
        }
        if let Some((a, b)) = r.events.iter().zip(&self.events).find(|(a, b)| a != b) {
            return Err(HarnessError::ReplayMismatch {
                step: a.step.min(b.step),
                detail: "event log differs".into(),
            });
        }
        if r.events.len() != self.events.len() {
            return Err(HarnessError::ReplayMismatch {
                step: r.steps,
                detail: "event log length differs".into(),
            });
        }
        if r.win != self.win {
            return Err(HarnessError::ReplayMismatch {
                step: r.steps,
                detail: format!("win {:?} vs {:?}", r.win, self.win),
            });
        }
        if r.returns != self.returns {
            return Err(HarnessError::ReplayMismatch {
                step: r.steps,
                detail: "returns differ".into(),
            });
        }
        if self.final_digest.as_ref().is_some_and(|d| *d != r.digest) {
            return Err(HarnessError::ReplayMismatch {
                step: r.steps,
                detail: "final state digest differs".into(),
            });
        }
        Ok(())
    }

    pub fn to_replay_string(&self) -> String {
        let body = serde_json::to_string(self).expect("records always serialize");
        let digest = hex(&Sha256::digest(body.as_bytes()));
        format!("{{\"format_version\":{FORMAT_VERSION},\"digest\":\"{digest}\",\"body\":{body}}}")
    }

    pub fn from_replay_str(text: &str) -> Result<Self, HarnessError> {
        #[derive(Deserialize)]
        struct Envelope<'a> {
            format_version: u32,
            digest: String,
            #[serde(borrow)]
            body: &'a RawValue,
        }
        let env: Envelope = serde_json::from_str(text).map_err(|e| HarnessError::Corrupt(e.to_string()))?;
        if env.format_version != FORMAT_VERSION {
            return Err(HarnessError::Version(env.format_version));
        }
        let actual = hex(&Sha256::digest(env.body.get().as_bytes()));
        if actual != env.digest {
            return Err(HarnessError::DigestMismatch {
                expected: env.digest,
                actual,
            });
        }
        let record: EpisodeRecord =
            serde_json::from_str(env.body.get()).map_err(|e| HarnessError::Corrupt(e.to_string()))?;
        if record.format_version != FORMAT_VERSION {
            return Err(HarnessError::Version(record.format_version));
        }
        Ok(record)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_replay_string()).map_err(|e| HarnessError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_replay_str(&text)
    }
}

/// What a re-simulation produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Replayed {
    pub events: Vec<StepEvents>,
    pub returns: Vec<f64>,
    pub win: Option<WinCondition>,
    pub steps: u32,
    /// Hex digest of the final state.
    pub digest: String,
}

pub fn encode_actions(actions: &[PlayerAction]) -> String {
    actions.iter().map(|a| a.code()).collect()
}

pub fn decode_actions(text: &str, n: usize) -> Option<Vec<PlayerAction>> {
    let v: Option<Vec<PlayerAction>> = text.chars().map(PlayerAction::from_code).collect();
    v.filter(|v| v.len() == n)
}
