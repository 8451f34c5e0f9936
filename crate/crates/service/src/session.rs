//! One live episode: the engine, the bots, and the human's latched action.

use crate::protocol::{encode_seat_frame, encode_spectator_frame, Frame, FrameMode, NoticeCode};
use hidden_agenda::agents::{Policy, Roster, RosterError};
use hidden_agenda::harness::EpisodeRecord;
use hidden_agenda::observation::{observe, RenderMode};
use hidden_agenda::{EngineError, Event, GameConfig, PlayerAction, PlayerId, Role, WinCondition, WorldState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_TICK_RATE: u32 = 30;
pub const DEFAULT_TICK_RATE: u32 = 8;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error("tick rate {0} outside 1..={MAX_TICK_RATE}")]
    TickRate(u32),
    #[error("seat {seat} does not exist ({players} players)")]
    Seat { seat: usize, players: usize },
}

/// A roster preset name or an inline roster. File paths are not accepted
/// over the wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RosterChoice {
    Preset(String),
    Inline(Roster),
}

impl RosterChoice {
    pub fn resolve(&self) -> Result<Roster, RosterError> {
        match self {
            RosterChoice::Preset(name) => Roster::preset(name),
            RosterChoice::Inline(r) => Ok(r.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub game: GameConfig,
    pub seed: u64,
    /// Seat played by the human; `None` makes an all-bot session to watch.
    pub human_seat: Option<PlayerId>,
    /// Agents for the seats the human does not take.
    pub roster: RosterChoice,
    pub tick_rate: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            game: GameConfig::default(),
            seed: 0,
            human_seat: None,
            roster: RosterChoice::Preset("mixed".into()),
            tick_rate: DEFAULT_TICK_RATE,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<Roster, SessionError> {
        if !(1..=MAX_TICK_RATE).contains(&self.tick_rate) {
            return Err(SessionError::TickRate(self.tick_rate));
        }
        self.game.validate().map_err(EngineError::from)?;
        if let Some(seat) = self.human_seat {
            if seat >= self.game.num_players {
                return Err(SessionError::Seat {
                    seat,
                    players: self.game.num_players,
                });
            }
        }
        let roster = self.roster.resolve()?;
        roster.validate(self.game.num_players, self.game.num_impostors)?;
        Ok(roster)
    }
}

/// What the human learns about their own seat.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoleCard {
    pub seat: PlayerId,
    pub role: Role,
    pub color: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickReport {
    /// The tick reached by this step.
    pub tick: u64,
    pub events: Vec<Event>,
    pub terminal: Option<WinCondition>,
}

pub struct Session {
    config: SessionConfig,
    state: WorldState,
    bots: Vec<Option<Box<dyn Policy>>>,
    pending: Option<PlayerAction>,
    tick: u64,
    record: EpisodeRecord,
    last_events: Vec<Event>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("config", &self.config)
            .field("tick", &self.tick)
            .finish_non_exhaustive()
    }
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self, SessionError> {
        let roster = config.validate()?;
        let state = WorldState::reset(config.game.clone(), config.seed)?;
        let mut bots: Vec<Option<Box<dyn Policy>>> =
            roster.instantiate(&state, config.seed)?.into_iter().map(Some).collect();
        if let Some(seat) = config.human_seat {
            bots[seat] = None;
        }
        let record = EpisodeRecord::new(&state, roster.assign(&state.roles()), Some(roster));
        Ok(Self {
            config,
            state,
            bots,
            pending: None,
            tick: 0,
            record,
            last_events: Vec::new(),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn is_over(&self) -> bool {
        self.state.is_terminal()
    }

    pub fn human_seat(&self) -> Option<PlayerId> {
        self.config.human_seat
    }

    pub fn role_card(&self) -> Option<RoleCard> {
        self.config.human_seat.map(|seat| RoleCard {
            seat,
            role: self.state.player(seat).role,
            color: self.state.player(seat).color,
        })
    }

    /// Latches the human's action for the open tick. A later submission for
    /// the same tick replaces an earlier one.
    pub fn submit(&mut self, tick: u64, action: PlayerAction) -> Result<(), NoticeCode> {
        if tick < self.tick {
            return Err(NoticeCode::StaleTick);
        }
        if tick > self.tick {
            return Err(NoticeCode::FutureTick);
        }
        self.pending = Some(action);
        Ok(())
    }

    /// Closes the open tick: joins the latched (or default) human action
    /// with the bots' actions and steps the engine once.
    pub fn advance(&mut self) -> Result<TickReport, SessionError> {
        let n = self.state.num_players();
        let mut actions = Vec::with_capacity(n);
        for p in 0..n {
            actions.push(match &mut self.bots[p] {
                Some(bot) => bot.act(&observe(&self.state, p, RenderMode::Sprites)),
                // Noop moves nobody and leaves a standing vote in place.
                None => PlayerAction::Noop,
            });
        }
        if let Some(seat) = self.config.human_seat {
            actions[seat] = self.pending.take().unwrap_or(PlayerAction::Noop);
        }
        let outcome = self.state.step(&actions)?;
        self.record.push(&actions, &outcome, true);
        if outcome.terminal.is_some() {
            self.record.seal(&self.state);
        }
        self.tick += 1;
        self.last_events = outcome.events.clone();
        Ok(TickReport {
            tick: self.tick,
            events: outcome.events,
            terminal: outcome.terminal,
        })
    }

    /// The current frame for the human seat, or the spectator view.
    pub fn frame(&self, seat: Option<PlayerId>, mode: FrameMode) -> Frame {
        match seat {
            Some(p) => encode_seat_frame(&self.state, p, self.tick, &self.last_events, mode),
            None => encode_spectator_frame(&self.state, self.tick, &self.last_events, mode),
        }
    }

    pub fn record(&self) -> &EpisodeRecord {
        &self.record
    }

    pub fn returns(&self) -> &[f64] {
        &self.record.returns
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hidden_agenda::Phase;

    fn human(seat: usize) -> SessionConfig {
        SessionConfig {
            human_seat: Some(seat),
            seed: 3,
            ..SessionConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            Session::new(SessionConfig {
                tick_rate: 0,
                ..SessionConfig::default()
            }),
            Err(SessionError::TickRate(0))
        ));
        assert!(matches!(
            Session::new(SessionConfig {
                tick_rate: 31,
                ..SessionConfig::default()
            }),
            Err(SessionError::TickRate(31))
        ));
        assert!(matches!(Session::new(human(5)), Err(SessionError::Seat { seat: 5, .. })));
        assert!(matches!(
            Session::new(SessionConfig {
                roster: RosterChoice::Preset("nope".into()),
                ..SessionConfig::default()
            }),
            Err(SessionError::Roster(_))
        ));
        assert!(Session::new(human(4)).is_ok());
    }

    #[test]
    fn human_seat_is_not_botted() {
        let s = Session::new(human(2)).unwrap();
        let bots: Vec<bool> = s.bots.iter().map(Option::is_some).collect();
        assert_eq!(bots, [true, true, false, true, true]);
        let spectating = Session::new(SessionConfig::default()).unwrap();
        assert!(spectating.bots.iter().all(Option::is_some));
        assert!(spectating.role_card().is_none());
    }

    #[test]
    fn latching_rules() {
        let mut s = Session::new(human(0)).unwrap();
        assert_eq!(s.submit(1, PlayerAction::MoveN), Err(NoticeCode::FutureTick));
        s.submit(0, PlayerAction::MoveN).unwrap();
        s.submit(0, PlayerAction::TurnLeft).unwrap();
        s.advance().unwrap();
        assert_eq!(s.record().actions[0].chars().next(), Some(PlayerAction::TurnLeft.code()));
        assert_eq!(s.submit(0, PlayerAction::MoveS), Err(NoticeCode::StaleTick));
        // Nothing latched: Noop.
        s.advance().unwrap();
        assert_eq!(s.record().actions[1].chars().next(), Some('.'));
    }

    #[test]
    fn silence_during_a_vote_keeps_the_standing_ballot() {
        let mut s = Session::new(SessionConfig {
            roster: RosterChoice::Preset("collectors-vs-idle".into()),
            ..human(1)
        })
        .unwrap();
        while s.state().phase() != Phase::Voting {
            let t = s.tick();
            s.submit(t, PlayerAction::Noop).unwrap();
            s.advance().unwrap();
        }
        let t = s.tick();
        s.submit(t, PlayerAction::VoteFor(3)).unwrap();
        s.advance().unwrap();
        let cast = s.state().ledger()[1];
        for _ in 0..5 {
            s.advance().unwrap();
            assert_eq!(s.state().ledger()[1], cast);
        }
    }

    #[test]
    fn record_of_a_session_verifies() {
        let mut s = Session::new(SessionConfig {
            game: GameConfig {
                episode_limit: 260,
                ..GameConfig::default()
            },
            ..human(4)
        })
        .unwrap();
        let moves = [PlayerAction::MoveN, PlayerAction::MoveE, PlayerAction::TurnLeft, PlayerAction::MoveS];
        let mut k = 0;
        while !s.is_over() {
            let t = s.tick();
            s.submit(t, moves[k % 4]).unwrap();
            k += 1;
            s.advance().unwrap();
        }
        assert!(s.tick() <= 260);
        s.record().verify().unwrap();
        assert!(s.advance().is_err());
    }
}
