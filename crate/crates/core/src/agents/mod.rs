//! Policy interface and scripted baselines.
//!
//! A policy sees its [`ObservationBundle`] each step plus a
//! [`PolicyContext`] fixed at construction: its own id and role, the public
//! seat-to-color table, the static map and the public rules. Nothing else
//! from the world state reaches it.

pub mod nav;
pub mod perception;
mod policies;

pub use nav::{Navigator, Room};
pub use perception::{Localizer, Perception, Pose, SeenPlayer};
pub use policies::{Chaser, Collector, Idle, RandomPolicy};

use crate::engine::{BeamShape, PlayerAction, PlayerId, Role, WorldState};
use crate::map::GameMap;
use crate::observation::ObservationBundle;
use crate::rng::derive_seed;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

/// Rules every player knows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublicRules {
    pub num_players: usize,
    pub inventory_capacity: u32,
    pub freeze_cooldown: u32,
    pub fuel_respawn_delay: u32,
    pub voting_phase_length: u32,
    pub beam: BeamShape,
}

#[derive(Clone, Debug)]
pub struct PolicyContext {
    pub self_id: PlayerId,
    pub role: Role,
    /// Avatar color of every player id.
    pub seat_colors: Vec<u8>,
    /// Fellow impostors, for impostors only.
    pub teammates: Vec<PlayerId>,
    pub partner: Option<PlayerId>,
    pub map: Arc<GameMap>,
    pub rules: PublicRules,
}

impl PolicyContext {
    /// Extracts the public part of `state` for player `id`.
    pub fn from_state(state: &WorldState, id: PlayerId, partner: Option<PlayerId>) -> Self {
        let cfg = state.config();
        let role = state.player(id).role;
        let teammates = if role == Role::Impostor {
            state
                .players()
                .iter()
                .filter(|p| p.role == Role::Impostor && p.id != id)
                .map(|p| p.id)
                .collect()
        } else {
            Vec::new()
        };
        Self {
            self_id: id,
            role,
            seat_colors: state.colors(),
            teammates,
            partner,
            map: state.shared_map(),
            rules: PublicRules {
                num_players: cfg.num_players,
                inventory_capacity: cfg.inventory_capacity,
                freeze_cooldown: cfg.freeze_cooldown,
                fuel_respawn_delay: cfg.fuel_respawn_delay,
                voting_phase_length: cfg.voting_phase_length,
                beam: state.beam_shape(),
            },
        }
    }
}

pub trait Policy: Send {
    fn act(&mut self, obs: &ObservationBundle) -> PlayerAction;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    CollectorCrew,
    PairedCollectorCrew,
    ChaserImpostor,
    CamperImpostor,
    Idle,
}

impl PolicyKind {
    pub fn fits(self, role: Role) -> bool {
        match self {
            PolicyKind::Random | PolicyKind::Idle => true,
            PolicyKind::CollectorCrew | PolicyKind::PairedCollectorCrew => role == Role::Crewmate,
            PolicyKind::ChaserImpostor | PolicyKind::CamperImpostor => role == Role::Impostor,
        }
    }
}

/// Per-kind tunables. Unused fields are ignored by other kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyParams {
    /// Roster index of the agent to pair with.
    pub partner: Option<usize>,
    pub camp_room: Room,
    /// Probability of a random situation action instead of the scripted one.
    pub distraction: f64,
    /// Crew: copy the leading published vote when holding no suspicion.
    pub follow_majority: bool,
    /// Impostor: probability of firing when a target is in the footprint.
    pub trigger_rate: f64,
    /// Turn to face the direction of travel before moving.
    pub face_travel: bool,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            partner: None,
            camp_room: Room::NorthWest,
            distraction: 0.0,
            follow_majority: false,
            trigger_rate: 1.0,
            face_travel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, flatten)]
    pub params: PolicyParams,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            seed: 0,
            params: PolicyParams::default(),
        }
    }

    pub fn with(mut self, f: impl FnOnce(&mut PolicyParams)) -> Self {
        f(&mut self.params);
        self
    }

    pub fn build(&self, ctx: PolicyContext, seed: u64) -> Box<dyn Policy> {
        match self.kind {
            PolicyKind::Idle => Box::new(Idle),
            PolicyKind::Random => Box::new(RandomPolicy::new(ctx, seed)),
            PolicyKind::CollectorCrew | PolicyKind::PairedCollectorCrew => {
                Box::new(Collector::new(ctx, self.params.clone(), seed))
            }
            PolicyKind::ChaserImpostor => Box::new(Chaser::new(ctx, self.params.clone(), None, seed)),
            PolicyKind::CamperImpostor => {
                Box::new(Chaser::new(ctx, self.params.clone(), Some(self.params.camp_room), seed))
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RosterError {
    #[error("roster has {got} agents, the game has {expected} seats")]
    Size { expected: usize, got: usize },
    #[error("agent {agent} ({kind:?}) cannot play a {role:?}")]
    RoleMismatch { agent: usize, kind: PolicyKind, role: Role },
    #[error("agent {agent} names partner {partner}, which is not a crew agent")]
    BadPartner { agent: usize, partner: usize },
    #[error("unknown roster preset `{0}`")]
    UnknownPreset(String),
    #[error("roster parse error: {0}")]
    Parse(String),
    #[error("cannot read roster {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Agents by role: the first `num_impostors` entries play impostors, the
/// rest play crewmates. Each episode maps agents onto players of the matching
/// role in ascending player id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Roster {
    #[serde(rename = "agent")]
    pub agents: Vec<PolicySpec>,
}

pub const PRESETS: [&str; 6] = [
    "collectors-vs-idle",
    "idle-vs-chaser",
    "mixed",
    "paired",
    "random",
    "camper",
];

impl Roster {
    pub fn new(agents: Vec<PolicySpec>) -> Self {
        Self { agents }
    }

    /// One impostor agent followed by four crew agents.
    pub fn one_vs_four(impostor: PolicySpec, crew: [PolicySpec; 4]) -> Self {
        let mut agents = vec![impostor];
        agents.extend(crew);
        for (i, a) in agents.iter_mut().enumerate() {
            if a.seed == 0 {
                a.seed = i as u64 + 1;
            }
        }
        Self { agents }
    }

    pub fn preset(name: &str) -> Result<Self, RosterError> {
        use PolicyKind::*;
        let s = PolicySpec::new;
        Ok(match name {
            "collectors-vs-idle" => Self::one_vs_four(
                s(Idle),
                [s(CollectorCrew), s(CollectorCrew), s(CollectorCrew), s(CollectorCrew)],
            ),
            "idle-vs-chaser" => Self::one_vs_four(s(ChaserImpostor), [s(Idle), s(Idle), s(Idle), s(Idle)]),
            "mixed" => Self::mixed(),
            "paired" => Self::one_vs_four(
                s(Idle),
                [
                    s(PairedCollectorCrew).with(|p| p.partner = Some(2)),
                    s(PairedCollectorCrew).with(|p| p.partner = Some(1)),
                    s(CollectorCrew),
                    s(CollectorCrew),
                ],
            ),
            "random" => Self::one_vs_four(s(Random), [s(Random), s(Random), s(Random), s(Random)]),
            "camper" => Self::one_vs_four(
                s(CamperImpostor).with(|p| p.camp_room = Room::Center),
                [s(CollectorCrew), s(CollectorCrew), s(CollectorCrew), s(CollectorCrew)],
            ),
            other => return Err(RosterError::UnknownPreset(other.to_string())),
        })
    }

    /// The pinned roster used for win-condition coverage: a hesitant chaser
    /// against distracted collectors, a pair that follows the published
    /// majority, and one random crewmate.
    pub fn mixed() -> Self {
        use PolicyKind::*;
        let s = PolicySpec::new;
        let paired = |partner| {
            s(PairedCollectorCrew).with(|p| {
                p.partner = Some(partner);
                p.distraction = 0.7;
                p.follow_majority = true;
            })
        };
        Self::one_vs_four(
            s(ChaserImpostor).with(|p| {
                p.trigger_rate = 0.3;
                p.distraction = 0.9;
            }),
            [
                paired(2),
                paired(1),
                s(CollectorCrew).with(|p| p.distraction = 0.65),
                s(Random),
            ],
        )
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RosterError> {
        toml::from_str(text).map_err(|e| RosterError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("rosters always serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RosterError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RosterError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    /// A preset name or a TOML file path.
    pub fn resolve(name_or_path: &str) -> Result<Self, RosterError> {
        if PRESETS.contains(&name_or_path) {
            Self::preset(name_or_path)
        } else {
            Self::load(name_or_path)
        }
    }

    pub fn validate(&self, num_players: usize, num_impostors: usize) -> Result<(), RosterError> {
        if self.agents.len() != num_players {
            return Err(RosterError::Size {
                expected: num_players,
                got: self.agents.len(),
            });
        }
        for (i, a) in self.agents.iter().enumerate() {
            let role = if i < num_impostors {
                Role::Impostor
            } else {
                Role::Crewmate
            };
            if !a.kind.fits(role) {
                return Err(RosterError::RoleMismatch {
                    agent: i,
                    kind: a.kind,
                    role,
                });
            }
            if let Some(p) = a.params.partner {
                if p == i || p < num_impostors || p >= num_players {
                    return Err(RosterError::BadPartner { agent: i, partner: p });
                }
            }
        }
        Ok(())
    }

    /// Player id controlled by each agent, given the episode's roles.
    pub fn assign(&self, roles: &[Role]) -> Vec<PlayerId> {
        let impostors = roles.iter().enumerate().filter(|(_, r)| **r == Role::Impostor).map(|(i, _)| i);
        let crew = roles.iter().enumerate().filter(|(_, r)| **r == Role::Crewmate).map(|(i, _)| i);
        impostors.chain(crew).collect()
    }

    /// Builds one policy per player, indexed by player id.
    pub fn instantiate(&self, state: &WorldState, episode_seed: u64) -> Result<Vec<Box<dyn Policy>>, RosterError> {
        let cfg = state.config();
        self.validate(cfg.num_players, cfg.num_impostors)?;
        let mapping = self.assign(&state.roles());
        let mut slots: Vec<Option<Box<dyn Policy>>> = (0..mapping.len()).map(|_| None).collect();
        for (agent, spec) in self.agents.iter().enumerate() {
            let player = mapping[agent];
            let partner = spec.params.partner.map(|a| mapping[a]);
            let ctx = PolicyContext::from_state(state, player, partner);
            let seed = derive_seed(&[spec.seed, episode_seed, agent as u64]);
            slots[player] = Some(spec.build(ctx, seed));
        }
        Ok(slots.into_iter().map(|p| p.expect("every player has an agent")).collect())
    }
}

#[cfg(test)]
mod tests;
