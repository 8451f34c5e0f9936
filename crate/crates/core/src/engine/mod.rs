//! Authoritative rules engine.
//!
//! A [`WorldState`] owns everything needed to continue an episode. Each call to
//! [`WorldState::step`] consumes one joint action and resolves it in a fixed
//! order. Situation steps run moves, fuel, the freeze beam, the situation clock,
//! the win check and finally the voting trigger. Voting steps record ballots,
//! advance the voting clock, tally on the last step and run the win check.

mod beam;
mod digest;
mod tally;
mod types;

pub use beam::{beam_footprint, BeamShape};
pub use digest::hex;
pub use tally::tally_votes;
pub use types::*;

use crate::config::{ConfigError, GameConfig};
use crate::geometry::{Cell, Direction};
use crate::map::{CellKind, GameMap, MapError};
use crate::observation::view::view_window;
use crate::rng::EpisodeRng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("map `{map}` has {seats} seats but the config asks for {players} players")]
    SeatMismatch {
        map: String,
        seats: usize,
        players: usize,
    },
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("episode already ended ({0})")]
    Terminal(WinCondition),
    #[error("bad scenario: {0}")]
    Scenario(String),
}

/// Explicit seat placement for hand-built scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Seat {
    pub role: Role,
    pub position: Cell,
    pub facing: Direction,
}

impl Seat {
    pub fn crew(x: i32, y: i32, facing: Direction) -> Self {
        Self {
            role: Role::Crewmate,
            position: Cell::new(x, y),
            facing,
        }
    }

    pub fn impostor(x: i32, y: i32, facing: Direction) -> Self {
        Self {
            role: Role::Impostor,
            position: Cell::new(x, y),
            facing,
        }
    }
}

/// Outcome of a witness check for one beam firing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub triggered: bool,
    pub witnesses: Vec<PlayerId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    config: Arc<GameConfig>,
    map: Arc<GameMap>,
    static_digest: [u8; 32],
    seed: u64,
    players: Vec<PlayerState>,
    pads: Vec<PadState>,
    phase: Phase,
    situation_clock: u32,
    voting_clock: u32,
    episode_clock: u32,
    progress: u32,
    ledger: Vec<VoteChoice>,
    rng: EpisodeRng,
    terminal: Option<WinCondition>,
    last_crew_inactivation: Option<InactivationCause>,
    voting_rounds: u32,
    recent_beams: Vec<(PlayerId, Vec<Cell>)>,
    final_ballots: Vec<VoteChoice>,
}

impl WorldState {
    /// Starts an episode on the map named by `config.map_name`.
    pub fn reset(config: GameConfig, seed: u64) -> Result<Self, EngineError> {
        config.validate()?;
        let map = GameMap::resolve(&config.map_name)?;
        Self::reset_with_map(config, map, seed)
    }

    /// Starts an episode on an already loaded map.
    ///
    /// Draws, in order: the role shuffle, the color shuffle, the spawn shuffle.
    pub fn reset_with_map(config: GameConfig, map: Arc<GameMap>, seed: u64) -> Result<Self, EngineError> {
        config.validate()?;
        check_seats(&config, &map)?;
        let n = config.num_players;
        let mut rng = EpisodeRng::from_seed(seed);
        let role_order = rng.permutation(n);
        let colors = rng.permutation(n);
        let spawn_order = rng.permutation(n);

        let mut roles = vec![Role::Crewmate; n];
        for &p in &role_order[..config.num_impostors] {
            roles[p] = Role::Impostor;
        }
        let players = (0..n)
            .map(|id| PlayerState {
                id,
                role: roles[id],
                color: colors[id] as u8,
                position: map.spawns()[spawn_order[id]],
                orientation: Direction::N,
                inventory: 0,
                status: Status::Active,
                cooldown_remaining: 0,
                pre_vote_position: None,
            })
            .collect();
        Ok(Self::assemble(config, map, seed, rng, players))
    }

    /// Builds a state with explicit roles and poses. Colors follow seat order
    /// and the RNG is seeded from `seed` without any reset draws.
    pub fn from_seats(
        config: GameConfig,
        map: Arc<GameMap>,
        seats: &[Seat],
        seed: u64,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        check_seats(&config, &map)?;
        if seats.len() != config.num_players {
            return Err(EngineError::Scenario(format!(
                "{} seats given for {} players",
                seats.len(),
                config.num_players
            )));
        }
        let impostors = seats.iter().filter(|s| s.role == Role::Impostor).count();
        if impostors != config.num_impostors {
            return Err(EngineError::Scenario(format!(
                "{impostors} impostor seats given, config wants {}",
                config.num_impostors
            )));
        }
        for (i, s) in seats.iter().enumerate() {
            if !map.is_playable(s.position) {
                return Err(EngineError::Scenario(format!(
                    "seat {i} at {} is not playable",
                    s.position
                )));
            }
            if seats[..i].iter().any(|o| o.position == s.position) {
                return Err(EngineError::Scenario(format!(
                    "seat {i} shares {} with another seat",
                    s.position
                )));
            }
        }
        let players = seats
            .iter()
            .enumerate()
            .map(|(id, s)| PlayerState {
                id,
                role: s.role,
                color: id as u8,
                position: s.position,
                orientation: s.facing,
                inventory: 0,
                status: Status::Active,
                cooldown_remaining: 0,
                pre_vote_position: None,
            })
            .collect();
        let rng = EpisodeRng::from_seed(seed);
        Ok(Self::assemble(config, map, seed, rng, players))
    }

    fn assemble(
        config: GameConfig,
        map: Arc<GameMap>,
        seed: u64,
        rng: EpisodeRng,
        players: Vec<PlayerState>,
    ) -> Self {
        let n = players.len();
        let static_digest = digest::static_digest(&config, &map);
        Self {
            pads: vec![PadState::Occupied; map.pads().len()],
            config: Arc::new(config),
            map,
            static_digest,
            seed,
            players,
            phase: Phase::Situation,
            situation_clock: 0,
            voting_clock: 0,
            episode_clock: 0,
            progress: 0,
            ledger: vec![VoteChoice::Abstain; n],
            rng,
            terminal: None,
            last_crew_inactivation: None,
            voting_rounds: 0,
            recent_beams: Vec::new(),
            final_ballots: Vec::new(),
        }
    }

    // ---- accessors -------------------------------------------------------

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn shared_config(&self) -> Arc<GameConfig> {
        self.config.clone()
    }

    pub fn map(&self) -> &GameMap {
        &self.map
    }

    pub fn shared_map(&self) -> Arc<GameMap> {
        self.map.clone()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[PlayerState] {
        &self.players
    }

    pub fn player(&self, id: PlayerId) -> &PlayerState {
        &self.players[id]
    }

    pub fn roles(&self) -> Vec<Role> {
        self.players.iter().map(|p| p.role).collect()
    }

    pub fn colors(&self) -> Vec<u8> {
        self.players.iter().map(|p| p.color).collect()
    }

    pub fn statuses(&self) -> Vec<Status> {
        self.players.iter().map(|p| p.status).collect()
    }

    pub fn pads(&self) -> &[PadState] {
        &self.pads
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn situation_clock(&self) -> u32 {
        self.situation_clock
    }

    pub fn voting_clock(&self) -> u32 {
        self.voting_clock
    }

    pub fn episode_clock(&self) -> u32 {
        self.episode_clock
    }

    pub fn progress(&self) -> u32 {
        self.progress
    }

    pub fn ledger(&self) -> &[VoteChoice] {
        &self.ledger
    }

    pub fn terminal(&self) -> Option<WinCondition> {
        self.terminal
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn voting_rounds(&self) -> u32 {
        self.voting_rounds
    }

    pub fn last_crew_inactivation(&self) -> Option<InactivationCause> {
        self.last_crew_inactivation
    }

    /// Ledger as it stood at the most recent tally; empty before the first.
    pub fn final_ballots(&self) -> &[VoteChoice] {
        &self.final_ballots
    }

    /// Beams fired during the most recent step, as `(firer, footprint)`.
    pub fn recent_beams(&self) -> &[(PlayerId, Vec<Cell>)] {
        &self.recent_beams
    }

    pub fn player_at(&self, cell: Cell) -> Option<PlayerId> {
        self.players.iter().position(|p| p.position == cell)
    }

    pub fn beam_shape(&self) -> BeamShape {
        BeamShape::from_config(&self.config)
    }

    /// SHA-256 over every dynamic field plus the config and map.
    pub fn digest(&self) -> [u8; 32] {
        digest::state_digest(self)
    }

    // ---- stepping --------------------------------------------------------

    pub fn step(&mut self, actions: &[PlayerAction]) -> Result<StepOutcome, EngineError> {
        if let Some(w) = self.terminal {
            return Err(EngineError::Terminal(w));
        }
        let n = self.players.len();
        if actions.len() != n {
            return Err(EngineError::ActionCount {
                expected: n,
                got: actions.len(),
            });
        }
        let mut out = StepOutcome {
            rewards: vec![0.0; n],
            events: Vec::new(),
            terminal: None,
        };
        self.recent_beams.clear();
        self.episode_clock += 1;
        match self.phase {
            Phase::Situation => self.situation_step(actions, &mut out),
            Phase::Voting => self.voting_step(actions, &mut out),
        }
        Ok(out)
    }

    fn situation_step(&mut self, actions: &[PlayerAction], out: &mut StepOutcome) {
        self.resolve_moves(actions);
        self.resolve_fuel(&mut out.events, &mut out.rewards);
        let witnessed = self.resolve_fire(actions, &mut out.events, &mut out.rewards);
        self.situation_clock += 1;
        if self.finish_step(out) {
            return;
        }
        let trigger = if witnessed {
            Some(VotingTrigger::Witness)
        } else if self.situation_clock >= self.config.situation_phase_length {
            Some(VotingTrigger::Timer)
        } else {
            None
        };
        if let Some(trigger) = trigger {
            self.begin_voting(trigger);
            out.events.push(Event::VotingStarted { trigger });
        }
    }

    fn voting_step(&mut self, actions: &[PlayerAction], out: &mut StepOutcome) {
        self.resolve_voting_step(actions, &mut out.events);
        if self.voting_clock >= self.config.voting_phase_length {
            let outcome = tally_votes(&self.ledger, &self.statuses());
            self.end_voting(outcome, &mut out.events, &mut out.rewards);
        }
        self.finish_step(out);
    }

    /// Runs the win check; on a terminal result pays the team rewards.
    fn finish_step(&mut self, out: &mut StepOutcome) -> bool {
        match self.check_win() {
            Some(win) => {
                self.terminal = Some(win);
                out.terminal = Some(win);
                let pay = terminal_rewards(win, &self.roles(), &self.config);
                for (r, p) in out.rewards.iter_mut().zip(pay) {
                    *r += p;
                }
                true
            }
            None => false,
        }
    }

    /// Turns first, then moves in an order drawn from the episode RNG. A move
    /// into a non-playable or occupied cell does nothing.
    pub fn resolve_moves(&mut self, actions: &[PlayerAction]) {
        for (p, a) in self.players.iter_mut().zip(actions) {
            if !p.is_active() {
                continue;
            }
            match a {
                PlayerAction::TurnLeft => p.orientation = p.orientation.turn_left(),
                PlayerAction::TurnRight => p.orientation = p.orientation.turn_right(),
                _ => {}
            }
        }
        let order = self.rng.permutation(self.players.len());
        for i in order {
            if !self.players[i].is_active() {
                continue;
            }
            let Some(dir) = actions[i].move_direction() else {
                continue;
            };
            let target = self.players[i].position.step(dir);
            if self.map.is_playable(target) && self.player_at(target).is_none() {
                self.players[i].position = target;
            }
        }
    }

    /// Respawn timers tick, then crewmates pick up from pads and deposit on
    /// grates, in player-id order.
    pub fn resolve_fuel(&mut self, events: &mut Vec<Event>, rewards: &mut [f64]) {
        for pad in &mut self.pads {
            if let PadState::Respawning(t) = *pad {
                *pad = if t <= 1 {
                    PadState::Occupied
                } else {
                    PadState::Respawning(t - 1)
                };
            }
        }
        let cfg = &self.config;
        for i in 0..self.players.len() {
            let p = &mut self.players[i];
            if !p.is_active() || p.role != Role::Crewmate {
                continue;
            }
            if let Some(k) = self.map.pad_index(p.position) {
                if self.pads[k] == PadState::Occupied && p.inventory < cfg.inventory_capacity {
                    p.inventory += 1;
                    self.pads[k] = PadState::Respawning(cfg.fuel_respawn_delay);
                    rewards[i] += cfg.reward_pickup;
                    events.push(Event::Pickup { player: i });
                }
            }
            if self.map.kind(p.position) == CellKind::Grate && p.inventory > 0 {
                let count = p.inventory.min(cfg.fuel_goal.saturating_sub(self.progress));
                if count > 0 {
                    p.inventory -= count;
                    self.progress += count;
                    rewards[i] += cfg.reward_deposit * f64::from(count);
                    events.push(Event::Deposit { player: i, count });
                }
            }
        }
    }

    /// Fires ready beams and ticks cooldowns. Returns whether any firing was
    /// witnessed.
    pub fn resolve_fire(
        &mut self,
        actions: &[PlayerAction],
        events: &mut Vec<Event>,
        rewards: &mut [f64],
    ) -> bool {
        let mut witnessed = false;
        let shape = self.beam_shape();
        for i in 0..self.players.len() {
            let p = &self.players[i];
            if p.role != Role::Impostor || !p.is_active() {
                continue;
            }
            if actions[i] != PlayerAction::Fire || p.cooldown_remaining > 0 {
                let p = &mut self.players[i];
                p.cooldown_remaining = p.cooldown_remaining.saturating_sub(1);
                continue;
            }
            let cells = beam_footprint(p.position, p.orientation, &self.map, shape);
            self.players[i].cooldown_remaining = self.config.freeze_cooldown;
            events.push(Event::FireBeam {
                player: i,
                cells: cells.clone(),
            });
            for j in 0..self.players.len() {
                let v = &mut self.players[j];
                if v.role == Role::Crewmate && v.is_active() && cells.contains(&v.position) {
                    v.status = Status::Frozen;
                    self.ledger[j] = VoteChoice::Inactive;
                    self.last_crew_inactivation = Some(InactivationCause::Freeze);
                    rewards[i] += self.config.reward_freeze;
                    rewards[j] += self.config.reward_frozen;
                    events.push(Event::Frozen { victim: j, by: i });
                }
            }
            witnessed |= self.check_witness(i, &cells).triggered;
            self.recent_beams.push((i, cells));
        }
        witnessed
    }

    /// Active crewmates outside the footprint who have the firer or any
    /// footprint cell inside their view window.
    pub fn check_witness(&self, firer: PlayerId, footprint: &[Cell]) -> WitnessReport {
        let origin = self.players[firer].position;
        let witnesses: Vec<PlayerId> = self
            .players
            .iter()
            .filter(|p| p.role == Role::Crewmate && p.is_active())
            .filter(|p| !footprint.contains(&p.position))
            .filter(|p| {
                let w = view_window(p.position, p.orientation);
                w.contains(origin) || footprint.iter().any(|c| w.contains(*c))
            })
            .map(|p| p.id)
            .collect();
        WitnessReport {
            triggered: !witnesses.is_empty(),
            witnesses,
        }
    }

    /// Teleports active players to their voting slots and opens the ballot.
    pub fn begin_voting(&mut self, _trigger: VotingTrigger) {
        for p in &mut self.players {
            if p.is_active() {
                p.pre_vote_position = Some(p.position);
                p.position = self.map.voting_slots()[p.id];
            }
        }
        self.phase = Phase::Voting;
        self.voting_clock = 0;
        self.voting_rounds += 1;
        self.reset_ledger();
    }

    pub fn resolve_voting_step(&mut self, actions: &[PlayerAction], events: &mut Vec<Event>) {
        let n = self.players.len();
        for (i, a) in actions.iter().enumerate() {
            if !self.players[i].is_active() {
                continue;
            }
            let choice = match *a {
                PlayerAction::VoteFor(t) if (t as usize) < n => VoteChoice::Target(t),
                PlayerAction::VoteAbstain => VoteChoice::Abstain,
                _ => continue,
            };
            self.ledger[i] = choice;
            events.push(Event::VoteCast { player: i, choice });
        }
        self.voting_clock += 1;
    }

    /// Applies a tally: jails the target (when still active), returns the
    /// other active players to where they stood, and reopens the situation
    /// phase.
    pub fn end_voting(&mut self, outcome: TallyOutcome, events: &mut Vec<Event>, rewards: &mut [f64]) {
        self.final_ballots = self.ledger.clone();
        if let TallyOutcome::Jailed(target) = outcome {
            if self.players[target].is_active() {
                let target_role = self.players[target].role;
                for (v, row) in self.ledger.iter().enumerate() {
                    if *row == VoteChoice::Target(target as u8) && self.players[v].is_active() {
                        rewards[v] += if self.players[v].role != target_role {
                            self.config.reward_vote_success
                        } else {
                            self.config.reward_vote_failure
                        };
                    }
                }
                let cell = self
                    .map
                    .jails()
                    .iter()
                    .copied()
                    .find(|c| self.player_at(*c).is_none())
                    .expect("maps hold one jail cell per seat");
                let p = &mut self.players[target];
                p.position = cell;
                p.status = Status::Jailed;
                p.pre_vote_position = None;
                if p.role == Role::Crewmate {
                    self.last_crew_inactivation = Some(InactivationCause::Vote);
                }
                events.push(Event::Jailed { player: target });
            }
        }
        for p in &mut self.players {
            if let Some(back) = p.pre_vote_position.take() {
                p.position = back;
            }
        }
        self.phase = Phase::Situation;
        self.situation_clock = 0;
        self.voting_clock = 0;
        self.reset_ledger();
        events.push(Event::PhaseEnded { outcome });
    }

    fn reset_ledger(&mut self) {
        for (row, p) in self.ledger.iter_mut().zip(&self.players) {
            *row = if p.is_active() {
                VoteChoice::Abstain
            } else {
                VoteChoice::Inactive
            };
        }
    }

    /// Win check in priority order: task, vote outcomes, freeze, timeout.
    pub fn check_win(&self) -> Option<WinCondition> {
        if self.progress >= self.config.fuel_goal {
            return Some(WinCondition::CrewWinByTask);
        }
        let impostors_jailed = self
            .players
            .iter()
            .filter(|p| p.role == Role::Impostor)
            .all(|p| p.status == Status::Jailed);
        if impostors_jailed {
            return Some(WinCondition::CrewWinByVote);
        }
        let active_crew = self
            .players
            .iter()
            .filter(|p| p.role == Role::Crewmate && p.is_active())
            .count();
        if active_crew <= 1 {
            match self.last_crew_inactivation {
                Some(InactivationCause::Vote) => return Some(WinCondition::ImpostorWinByVote),
                Some(InactivationCause::Freeze) => return Some(WinCondition::ImpostorWinByFreeze),
                None => {}
            }
        }
        if self.episode_clock >= self.config.episode_limit {
            return Some(WinCondition::DrawTimeout);
        }
        None
    }

    // ---- scenario editing --------------------------------------------------
    //
    // Direct setters for building test and tutorial scenarios. They bypass the
    // rules, so they only check the occupancy invariant.

    pub fn set_pose(&mut self, id: PlayerId, position: Cell, facing: Direction) -> Result<(), EngineError> {
        if let Some(other) = self.player_at(position) {
            if other != id {
                return Err(EngineError::Scenario(format!(
                    "{position} is occupied by player {other}"
                )));
            }
        }
        let p = &mut self.players[id];
        p.position = position;
        p.orientation = facing;
        Ok(())
    }

    pub fn set_inventory(&mut self, id: PlayerId, inventory: u32) {
        self.players[id].inventory = inventory.min(self.config.inventory_capacity);
    }

    pub fn set_progress(&mut self, progress: u32) {
        self.progress = progress.min(self.config.fuel_goal);
    }

    pub fn set_cooldown(&mut self, id: PlayerId, remaining: u32) {
        self.players[id].cooldown_remaining = remaining;
    }

    pub fn set_episode_clock(&mut self, clock: u32) {
        self.episode_clock = clock;
    }

    pub fn set_situation_clock(&mut self, clock: u32) {
        self.situation_clock = clock;
    }

    pub fn set_pad(&mut self, index: usize, state: PadState) {
        self.pads[index] = state;
    }
}

fn check_seats(config: &GameConfig, map: &GameMap) -> Result<(), EngineError> {
    if map.seat_count() != config.num_players {
        return Err(EngineError::SeatMismatch {
            map: map.name().to_string(),
            seats: map.seat_count(),
            players: config.num_players,
        });
    }
    Ok(())
}

/// End-of-episode team payouts. Draws pay nothing.
pub fn terminal_rewards(win: WinCondition, roles: &[Role], config: &GameConfig) -> Vec<f64> {
    match win.winner() {
        None => vec![0.0; roles.len()],
        Some(team) => roles
            .iter()
            .map(|r| {
                if *r == team {
                    config.reward_win
                } else {
                    config.reward_loss
                }
            })
            .collect(),
    }
}
