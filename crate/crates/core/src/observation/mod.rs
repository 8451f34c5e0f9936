//! What each player sees.
//!
//! An [`ObservationBundle`] carries the egocentric 11×11 view, the inventory
//! and progress fractions and the public vote matrix. The view is kept in
//! symbolic form ([`SpriteGrid`]) or as painted RGB; both carry the same
//! information because painting is invertible.

pub mod sprites;
pub mod view;

pub use sprites::{PlayerSprite, RelFacing, SpriteCell, SpriteSheet, Tile, SPRITE_SIZE};
pub use view::{view_window, ViewWindow, OBSERVER_COL, OBSERVER_ROW, VIEW_CELLS, VIEW_SIZE};

use crate::config::MAX_PLAYERS;
use crate::engine::{PadState, Phase, PlayerId, Role, Status, WorldState};
use crate::geometry::{Cell, Direction};
use crate::map::CellKind;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use thiserror::Error;

/// Side length of the egocentric RGB frame in pixels.
pub const RGB_SIZE: usize = VIEW_SIZE * SPRITE_SIZE;
pub const RGB_BYTES: usize = RGB_SIZE * RGB_SIZE * 3;
pub const VOTE_ROWS: usize = MAX_PLAYERS;
/// One column per seat, then abstain, then inactive.
pub const VOTE_COLS: usize = MAX_PLAYERS + 2;
pub const ABSTAIN_COL: usize = MAX_PLAYERS;
pub const INACTIVE_COL: usize = MAX_PLAYERS + 1;

pub type VoteMatrix = [[u8; VOTE_COLS]; VOTE_ROWS];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObservationError {
    #[error("rgb frame is not a valid sprite rendering")]
    Undecodable,
    #[error("rgb frame has {0} bytes, expected {RGB_BYTES}")]
    BadLength(usize),
}

/// The 11×11 view in render order: row 0 is farthest ahead, the observer sits
/// at row 9, column 5.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpriteGrid {
    cells: Vec<SpriteCell>,
}

impl SpriteGrid {
    pub fn from_cells(cells: Vec<SpriteCell>) -> Option<Self> {
        (cells.len() == VIEW_CELLS).then_some(Self { cells })
    }

    pub fn cells(&self) -> &[SpriteCell] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> &SpriteCell {
        &self.cells[row * VIEW_SIZE + col]
    }

    /// Cell at egocentric offset (`fwd` ahead, `lat` to the right), if it is
    /// inside the window.
    pub fn at_offset(&self, fwd: i32, lat: i32) -> Option<&SpriteCell> {
        let row = OBSERVER_ROW as i32 - fwd;
        let col = OBSERVER_COL as i32 + lat;
        ((0..VIEW_SIZE as i32).contains(&row) && (0..VIEW_SIZE as i32).contains(&col))
            .then(|| self.get(row as usize, col as usize))
    }

    pub fn observer(&self) -> &SpriteCell {
        self.get(OBSERVER_ROW, OBSERVER_COL)
    }

    /// Iterates `(fwd, lat, cell)` over the whole window.
    pub fn iter_offsets(&self) -> impl Iterator<Item = (i32, i32, &SpriteCell)> {
        self.cells.iter().enumerate().map(|(i, c)| {
            let (row, col) = (i / VIEW_SIZE, i % VIEW_SIZE);
            (OBSERVER_ROW as i32 - row as i32, col as i32 - OBSERVER_COL as i32, c)
        })
    }

    pub fn paint(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(RGB_BYTES);
        SpriteSheet::standard().paint(&self.cells, VIEW_SIZE, &mut out);
        out
    }

    pub fn decode(rgb: &[u8]) -> Result<Self, ObservationError> {
        if rgb.len() != RGB_BYTES {
            return Err(ObservationError::BadLength(rgb.len()));
        }
        SpriteSheet::standard()
            .decode(rgb, VIEW_SIZE, VIEW_SIZE)
            .map(|cells| Self { cells })
            .ok_or(ObservationError::Undecodable)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    Sprites,
    Rgb,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewFrame {
    Sprites(SpriteGrid),
    /// 88×88×3 row-major bytes.
    Rgb(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationBundle {
    pub frame: ViewFrame,
    pub inventory_fraction: f64,
    pub progress_fraction: f64,
    pub vote_matrix: VoteMatrix,
}

impl ObservationBundle {
    /// The view as 88×88×3 bytes, painting it if the bundle is symbolic.
    pub fn rgb(&self) -> Cow<'_, [u8]> {
        match &self.frame {
            ViewFrame::Rgb(bytes) => Cow::Borrowed(bytes),
            ViewFrame::Sprites(grid) => Cow::Owned(grid.paint()),
        }
    }

    /// The view in symbolic form, decoding it if the bundle carries pixels.
    pub fn sprites(&self) -> Result<Cow<'_, SpriteGrid>, ObservationError> {
        match &self.frame {
            ViewFrame::Sprites(grid) => Ok(Cow::Borrowed(grid)),
            ViewFrame::Rgb(bytes) => SpriteGrid::decode(bytes).map(Cow::Owned),
        }
    }

    pub fn rgb_shape(&self) -> (usize, usize, usize) {
        (RGB_SIZE, RGB_SIZE, 3)
    }

    /// True when any tile next to the observer belongs to the voting room.
    pub fn in_voting_room(&self) -> Result<bool, ObservationError> {
        Ok(self.sprites()?.observer().tile == Tile::VotingSlot)
    }
}

/// Hindsight-only channel: roles and distances. Never part of a bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivilegedInfo {
    /// 1 for impostors, 0 for crewmates, by player id.
    pub identity: Vec<u8>,
    /// Euclidean cell distance from the observer to each player.
    pub distances: Vec<f64>,
}

fn tile_at(state: &WorldState, cell: Cell) -> Tile {
    match state.map().kind(cell) {
        CellKind::Void => Tile::Void,
        CellKind::Wall => Tile::Wall,
        CellKind::Floor | CellKind::Spawn(_) => Tile::Floor,
        CellKind::FuelPad => match state.map().pad_index(cell).map(|k| state.pads()[k]) {
            Some(PadState::Occupied) => Tile::PadFull,
            _ => Tile::PadEmpty,
        },
        CellKind::Grate => Tile::Grate,
        CellKind::Deliberation => Tile::Deliberation,
        CellKind::VotingSlot(_) => Tile::VotingSlot,
        CellKind::Jail => Tile::Jail,
    }
}

fn sprite_cell(state: &WorldState, cell: Cell, viewer: Direction) -> SpriteCell {
    let player = state.players().iter().find(|p| p.position == cell).map(|p| PlayerSprite {
        color: p.color,
        facing: RelFacing::between(viewer, p.orientation),
        frozen: p.status == Status::Frozen,
    });
    let beam = state.recent_beams().iter().any(|(_, cells)| cells.contains(&cell));
    SpriteCell {
        tile: tile_at(state, cell),
        player,
        beam,
    }
}

/// Symbolic view for `player`.
pub fn sprite_grid(state: &WorldState, player: PlayerId) -> SpriteGrid {
    let p = state.player(player);
    let window = view_window(p.position, p.orientation);
    let cells = (0..VIEW_CELLS)
        .map(|i| sprite_cell(state, window.cell(i / VIEW_SIZE, i % VIEW_SIZE), p.orientation))
        .collect();
    SpriteGrid { cells }
}

pub fn render_rgb(state: &WorldState, player: PlayerId) -> Vec<u8> {
    sprite_grid(state, player).paint()
}

/// Public ballot matrix. Outside voting the ledger already reads abstain for
/// active players and inactive for the rest; unused seats read inactive.
pub fn vote_matrix(state: &WorldState) -> VoteMatrix {
    let mut m = [[0u8; VOTE_COLS]; VOTE_ROWS];
    for (row, out) in m.iter_mut().enumerate() {
        let col = match state.ledger().get(row) {
            Some(choice) => choice.column(MAX_PLAYERS),
            None => INACTIVE_COL,
        };
        out[col] = 1;
    }
    m
}

pub fn observe(state: &WorldState, player: PlayerId, mode: RenderMode) -> ObservationBundle {
    let grid = sprite_grid(state, player);
    let frame = match mode {
        RenderMode::Sprites => ViewFrame::Sprites(grid),
        RenderMode::Rgb => ViewFrame::Rgb(grid.paint()),
    };
    let cfg = state.config();
    ObservationBundle {
        frame,
        inventory_fraction: f64::from(state.player(player).inventory) / f64::from(cfg.inventory_capacity),
        progress_fraction: f64::from(state.progress()) / f64::from(cfg.fuel_goal),
        vote_matrix: vote_matrix(state),
    }
}

pub fn observe_all(state: &WorldState, mode: RenderMode) -> Vec<ObservationBundle> {
    (0..state.num_players()).map(|p| observe(state, p, mode)).collect()
}

pub fn privileged_info(state: &WorldState, player: PlayerId) -> PrivilegedInfo {
    let me = state.player(player).position;
    PrivilegedInfo {
        identity: state
            .players()
            .iter()
            .map(|p| u8::from(p.role == Role::Impostor))
            .collect(),
        distances: state.players().iter().map(|p| me.distance(p.position)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectatorPlayer {
    pub id: PlayerId,
    pub color: u8,
    pub status: Status,
    pub position: Cell,
    pub orientation: Direction,
    pub inventory: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectatorOverlay {
    pub progress: u32,
    pub fuel_goal: u32,
    pub progress_fraction: f64,
    pub phase: Phase,
    pub situation_clock: u32,
    pub voting_clock: u32,
    pub episode_clock: u32,
    pub players: Vec<SpectatorPlayer>,
    pub vote_matrix: VoteMatrix,
}

/// Whole-map frame drawn north-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectatorFrame {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<SpriteCell>,
    pub overlay: SpectatorOverlay,
}

impl SpectatorFrame {
    /// `height × width × 3` bytes.
    pub fn rgb(&self) -> Vec<u8> {
        let mut out = Vec::new();
        SpriteSheet::standard().paint(&self.cells, self.width / SPRITE_SIZE, &mut out);
        out
    }
}

pub fn spectator_frame(state: &WorldState) -> SpectatorFrame {
    let map = state.map();
    let cells = (0..map.width() * map.height())
        .map(|i| sprite_cell(state, map.cell_at(i), Direction::N))
        .collect();
    SpectatorFrame {
        width: map.width() * SPRITE_SIZE,
        height: map.height() * SPRITE_SIZE,
        cells,
        overlay: SpectatorOverlay {
            progress: state.progress(),
            fuel_goal: state.config().fuel_goal,
            progress_fraction: f64::from(state.progress()) / f64::from(state.config().fuel_goal),
            phase: state.phase(),
            situation_clock: state.situation_clock(),
            voting_clock: state.voting_clock(),
            episode_clock: state.episode_clock(),
            players: state
                .players()
                .iter()
                .map(|p| SpectatorPlayer {
                    id: p.id,
                    color: p.color,
                    status: p.status,
                    position: p.position,
                    orientation: p.orientation,
                    inventory: p.inventory,
                })
                .collect(),
            vote_matrix: vote_matrix(state),
        },
    }
}

/// Lossless PNG of an RGB buffer.
pub fn encode_png(rgb: &[u8], width: u32, height: u32) -> Result<Vec<u8>, image::ImageError> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out).write_image(
        rgb,
        width,
        height,
        image::ExtendedColorType::Rgb8,
    )?;
    Ok(out)
}

pub fn decode_png(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), image::ImageError> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
    Ok((img.width(), img.height(), img.into_raw()))
}

#[cfg(test)]
mod tests;
