//! Wire messages. Every message is one JSON text frame carrying `"v": 1`
//! and a `"type"` tag; see `PROTOCOL.md` for the schema with examples.

use crate::session::SessionConfig;
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use hidden_agenda::observation::{
    decode_png, encode_png, observe, spectator_frame, SpectatorOverlay, SpriteCell, SpriteSheet, VoteMatrix, ViewFrame,
    RenderMode, RGB_SIZE, SPRITE_SIZE,
};
use hidden_agenda::{Event, Phase, PlayerAction, PlayerId, Role, Status, TallyOutcome, VoteChoice, VotingTrigger, WinCondition, WorldState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unsupported protocol version {0}")]
    Version(u32),
    #[error("bad frame payload: {0}")]
    Payload(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    body: T,
}

/// How a client wants its view delivered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    /// A grid of sprite descriptions; the client paints them.
    #[default]
    Sprites,
    /// A base64 PNG of the rendered pixels.
    Png,
}

/// A seat index, or `"spectator"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeatRequest {
    Player(PlayerId),
    Spectator,
}

impl Serialize for SeatRequest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SeatRequest::Player(p) => s.serialize_u64(*p as u64),
            SeatRequest::Spectator => s.serialize_str("spectator"),
        }
    }
}

impl<'de> Deserialize<'de> for SeatRequest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Seat(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Seat(p) => Ok(SeatRequest::Player(p)),
            Raw::Word(w) if w == "spectator" => Ok(SeatRequest::Spectator),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a seat index or \"spectator\", got {w:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    CreateSession {
        #[serde(flatten)]
        config: SessionConfig,
    },
    Join {
        session: String,
        seat: SeatRequest,
        #[serde(default)]
        frame_mode: FrameMode,
    },
    Action {
        tick: u64,
        action: PlayerAction,
    },
    Leave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    UnsupportedVersion,
    InvalidConfig,
    UnknownSession,
    SeatTaken,
    BadSeat,
    NotJoined,
    AlreadyJoined,
    NotSeated,
    EpisodeOver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoticeCode {
    /// The action named a tick that has already been stepped.
    StaleTick,
    /// The action named a tick that has not opened yet.
    FutureTick,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    SessionCreated {
        session: String,
        seat: Option<PlayerId>,
        config: SessionConfig,
    },
    /// Sent to the joining client only. `role` is present for a seated
    /// human and names that seat's role alone.
    Joined {
        session: String,
        seat: SeatRequest,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        role: Option<Role>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        color: Option<u8>,
        tick_rate: u32,
        frame_mode: FrameMode,
    },
    Frame(Box<Frame>),
    EpisodeEnd {
        tick: u64,
        win: WinCondition,
        returns: Vec<f64>,
        /// Revealed once the episode is over.
        roles: Vec<Role>,
    },
    Notice {
        code: NoticeCode,
        detail: String,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            detail: detail.into(),
        }
    }
}

pub fn encode<T: Serialize + Clone>(body: &T) -> String {
    serde_json::to_string(&Envelope {
        v: PROTOCOL_VERSION,
        body: body.clone(),
    })
    .expect("wire messages always serialize")
}

fn decode<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ProtocolError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    match raw.get("v").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(PROTOCOL_VERSION) => {}
        Some(v) => return Err(ProtocolError::Version(v as u32)),
        None => return Err(ProtocolError::Malformed("missing protocol version `v`".into())),
    }
    serde_json::from_value::<Envelope<T>>(raw)
        .map(|e| e.body)
        .map_err(|e| ProtocolError::Malformed(e.to_string()))
}

pub fn decode_client(text: &str) -> Result<ClientMessage, ProtocolError> {
    decode(text)
}

pub fn decode_server(text: &str) -> Result<ServerMessage, ProtocolError> {
    decode(text)
}

/// The picture part of a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum View {
    /// Row-major sprites, `rows × cols`.
    Sprites { cols: usize, rows: usize, cells: Vec<SpriteCell> },
    /// Base64 PNG, `height × width` RGB pixels.
    Png { width: u32, height: u32, data: String },
}

impl View {
    fn from_cells(cells: Vec<SpriteCell>, cols: usize, mode: FrameMode) -> Self {
        let rows = cells.len() / cols;
        match mode {
            FrameMode::Sprites => View::Sprites { cols, rows, cells },
            FrameMode::Png => {
                let mut rgb = Vec::new();
                SpriteSheet::standard().paint(&cells, cols, &mut rgb);
                let (w, h) = ((cols * SPRITE_SIZE) as u32, (rows * SPRITE_SIZE) as u32);
                let png = encode_png(&rgb, w, h).expect("in-memory PNG encoding");
                View::Png {
                    width: w,
                    height: h,
                    data: B64.encode(png),
                }
            }
        }
    }

    /// Pixels as `height × width × 3` bytes, whichever form was sent.
    pub fn rgb(&self) -> Result<Vec<u8>, ProtocolError> {
        match self {
            View::Sprites { cols, rows, cells } => {
                if cells.len() != cols * rows {
                    return Err(ProtocolError::Payload(format!("{} cells for a {rows}x{cols} grid", cells.len())));
                }
                let mut out = Vec::new();
                SpriteSheet::standard().paint(cells, *cols, &mut out);
                Ok(out)
            }
            View::Png { width, height, data } => {
                let bytes = B64.decode(data).map_err(|e| ProtocolError::Payload(e.to_string()))?;
                let (w, h, rgb) = decode_png(&bytes).map_err(|e| ProtocolError::Payload(e.to_string()))?;
                if (w, h) != (*width, *height) {
                    return Err(ProtocolError::Payload(format!("PNG is {w}x{h}, header says {width}x{height}")));
                }
                Ok(rgb)
            }
        }
    }

    pub fn size(&self) -> (usize, usize) {
        match self {
            View::Sprites { cols, rows, .. } => (cols * SPRITE_SIZE, rows * SPRITE_SIZE),
            View::Png { width, height, .. } => (*width as usize, *height as usize),
        }
    }
}

/// The public trace of an engine event. Freezes do not name the firer and
/// beams do not name who fired; fuel events are only shown to their owner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PublicEvent {
    Pickup,
    Deposit { count: u32 },
    Frozen { victim: PlayerId },
    VotingStarted { trigger: VotingTrigger },
    VoteCast { player: PlayerId, choice: VoteChoice },
    Jailed { player: PlayerId },
    PhaseEnded { outcome: TallyOutcome },
}

/// Events `viewer` may learn about; `None` is a spectator.
pub fn public_events(events: &[Event], viewer: Option<PlayerId>) -> Vec<PublicEvent> {
    events
        .iter()
        .filter_map(|e| match *e {
            Event::Pickup { player } if Some(player) == viewer => Some(PublicEvent::Pickup),
            Event::Deposit { player, count } if Some(player) == viewer => Some(PublicEvent::Deposit { count }),
            Event::Pickup { .. } | Event::Deposit { .. } | Event::FireBeam { .. } => None,
            Event::Frozen { victim, .. } => Some(PublicEvent::Frozen { victim }),
            Event::VotingStarted { trigger } => Some(PublicEvent::VotingStarted { trigger }),
            Event::VoteCast { player, choice } => Some(PublicEvent::VoteCast { player, choice }),
            Event::Jailed { player } => Some(PublicEvent::Jailed { player }),
            Event::PhaseEnded { outcome } => Some(PublicEvent::PhaseEnded { outcome }),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeatScalars {
    pub status: Status,
    pub inventory_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// Engine steps taken so far; the next action should name this tick.
    pub tick: u64,
    pub phase: Phase,
    /// Steps left in the current vote.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voting_remaining: Option<u32>,
    pub progress_fraction: f64,
    pub vote_matrix: VoteMatrix,
    pub view: View,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat: Option<SeatScalars>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay: Option<SpectatorOverlay>,
    pub events: Vec<PublicEvent>,
}

fn voting_remaining(state: &WorldState) -> Option<u32> {
    (state.phase() == Phase::Voting).then(|| state.config().voting_phase_length - state.voting_clock())
}

/// The frame seen from `seat`: its egocentric view and scalars.
pub fn encode_seat_frame(state: &WorldState, seat: PlayerId, tick: u64, events: &[Event], mode: FrameMode) -> Frame {
    let obs = observe(state, seat, RenderMode::Sprites);
    let ViewFrame::Sprites(grid) = obs.frame else {
        unreachable!("symbolic observation requested")
    };
    Frame {
        tick,
        phase: state.phase(),
        voting_remaining: voting_remaining(state),
        progress_fraction: obs.progress_fraction,
        vote_matrix: obs.vote_matrix,
        view: View::from_cells(grid.cells().to_vec(), RGB_SIZE / SPRITE_SIZE, mode),
        seat: Some(SeatScalars {
            status: state.player(seat).status,
            inventory_fraction: obs.inventory_fraction,
        }),
        overlay: None,
        events: public_events(events, Some(seat)),
    }
}

/// The whole-map frame with per-player status overlay.
pub fn encode_spectator_frame(state: &WorldState, tick: u64, events: &[Event], mode: FrameMode) -> Frame {
    let f = spectator_frame(state);
    Frame {
        tick,
        phase: state.phase(),
        voting_remaining: voting_remaining(state),
        progress_fraction: f.overlay.progress_fraction,
        vote_matrix: f.overlay.vote_matrix,
        view: View::from_cells(f.cells, f.width / SPRITE_SIZE, mode),
        seat: None,
        overlay: Some(f.overlay),
        events: public_events(events, None),
    }
}
