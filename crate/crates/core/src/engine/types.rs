use crate::geometry::{Cell, Direction};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type PlayerId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Crewmate,
    Impostor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Active,
    Frozen,
    Jailed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Situation,
    Voting,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayerState {
    pub id: PlayerId,
    pub role: Role,
    /// Palette index of the avatar color.
    pub color: u8,
    pub position: Cell,
    pub orientation: Direction,
    pub inventory: u32,
    pub status: Status,
    /// Situation steps left before the beam can fire again (impostors only).
    pub cooldown_remaining: u32,
    pub pre_vote_position: Option<Cell>,
}

impl PlayerState {
    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlayerAction {
    Noop,
    MoveN,
    MoveE,
    MoveS,
    MoveW,
    TurnLeft,
    TurnRight,
    Fire,
    VoteFor(u8),
    VoteAbstain,
}

impl PlayerAction {
    pub const SITUATION: [PlayerAction; 8] = [
        PlayerAction::Noop,
        PlayerAction::MoveN,
        PlayerAction::MoveE,
        PlayerAction::MoveS,
        PlayerAction::MoveW,
        PlayerAction::TurnLeft,
        PlayerAction::TurnRight,
        PlayerAction::Fire,
    ];

    /// Size of the flat discrete action space used by [`PlayerAction::from_index`].
    pub const COUNT: usize = 8 + crate::config::MAX_PLAYERS + 1;

    /// Flat discrete encoding: the eight situation actions, then one vote
    /// per seat, then abstain.
    pub fn from_index(i: usize) -> Option<Self> {
        const VOTES: usize = 8 + crate::config::MAX_PLAYERS;
        match i {
            0..8 => Some(Self::SITUATION[i]),
            8..VOTES => Some(PlayerAction::VoteFor((i - 8) as u8)),
            VOTES => Some(PlayerAction::VoteAbstain),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            PlayerAction::VoteFor(t) => 8 + t as usize,
            PlayerAction::VoteAbstain => Self::COUNT - 1,
            a => Self::SITUATION.iter().position(|x| *x == a).expect("situation action"),
        }
    }

    pub fn move_direction(self) -> Option<Direction> {
        match self {
            PlayerAction::MoveN => Some(Direction::N),
            PlayerAction::MoveE => Some(Direction::E),
            PlayerAction::MoveS => Some(Direction::S),
            PlayerAction::MoveW => Some(Direction::W),
            _ => None,
        }
    }

    pub fn move_toward(dir: Direction) -> Self {
        match dir {
            Direction::N => PlayerAction::MoveN,
            Direction::E => PlayerAction::MoveE,
            Direction::S => PlayerAction::MoveS,
            Direction::W => PlayerAction::MoveW,
        }
    }

    pub fn is_vote(self) -> bool {
        matches!(self, PlayerAction::VoteFor(_) | PlayerAction::VoteAbstain)
    }

    /// One-character code used by the replay format.
    pub fn code(self) -> char {
        match self {
            PlayerAction::Noop => '.',
            PlayerAction::MoveN => 'n',
            PlayerAction::MoveE => 'e',
            PlayerAction::MoveS => 's',
            PlayerAction::MoveW => 'w',
            PlayerAction::TurnLeft => 'l',
            PlayerAction::TurnRight => 'r',
            PlayerAction::Fire => 'f',
            PlayerAction::VoteAbstain => 'a',
            PlayerAction::VoteFor(i) => char::from_digit(u32::from(i), 10).unwrap_or('?'),
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        Some(match c {
            '.' => PlayerAction::Noop,
            'n' => PlayerAction::MoveN,
            'e' => PlayerAction::MoveE,
            's' => PlayerAction::MoveS,
            'w' => PlayerAction::MoveW,
            'l' => PlayerAction::TurnLeft,
            'r' => PlayerAction::TurnRight,
            'f' => PlayerAction::Fire,
            'a' => PlayerAction::VoteAbstain,
            d @ '0'..='9' => PlayerAction::VoteFor(d as u8 - b'0'),
            _ => return None,
        })
    }
}

/// One row of the vote ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoteChoice {
    Target(u8),
    Abstain,
    Inactive,
}

impl VoteChoice {
    /// Column of the one-hot vote-matrix row for `num_players` seats.
    pub fn column(self, num_players: usize) -> usize {
        match self {
            VoteChoice::Target(i) => i as usize,
            VoteChoice::Abstain => num_players,
            VoteChoice::Inactive => num_players + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PadState {
    Occupied,
    Respawning(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VotingTrigger {
    Witness,
    Timer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InactivationCause {
    Freeze,
    Vote,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WinCondition {
    CrewWinByTask,
    CrewWinByVote,
    ImpostorWinByFreeze,
    ImpostorWinByVote,
    DrawTimeout,
}

impl WinCondition {
    pub const ALL: [WinCondition; 5] = [
        WinCondition::CrewWinByTask,
        WinCondition::CrewWinByVote,
        WinCondition::ImpostorWinByFreeze,
        WinCondition::ImpostorWinByVote,
        WinCondition::DrawTimeout,
    ];

    pub fn winner(self) -> Option<Role> {
        match self {
            WinCondition::CrewWinByTask | WinCondition::CrewWinByVote => Some(Role::Crewmate),
            WinCondition::ImpostorWinByFreeze | WinCondition::ImpostorWinByVote => {
                Some(Role::Impostor)
            }
            WinCondition::DrawTimeout => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for WinCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Result of a voting round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TallyOutcome {
    Jailed(PlayerId),
    NoOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Event {
    Pickup { player: PlayerId },
    Deposit { player: PlayerId, count: u32 },
    FireBeam { player: PlayerId, cells: Vec<Cell> },
    Frozen { victim: PlayerId, by: PlayerId },
    VotingStarted { trigger: VotingTrigger },
    VoteCast { player: PlayerId, choice: VoteChoice },
    Jailed { player: PlayerId },
    PhaseEnded { outcome: TallyOutcome },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    pub events: Vec<Event>,
    pub terminal: Option<WinCondition>,
}
