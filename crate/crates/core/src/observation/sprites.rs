//! Sprite sheet, palette and the symbolic form of a rendered view.
//!
//! Every 8×8 block of a rendered frame is one [`SpriteCell`]: a tile, at most
//! one avatar and an optional beam overlay. The sheet pre-paints every
//! combination so rendering is a block copy and decoding is an exact lookup.

use crate::geometry::Direction;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::OnceLock;
use thiserror::Error;

pub const SPRITE_SIZE: usize = 8;
pub const BLOCK_BYTES: usize = SPRITE_SIZE * SPRITE_SIZE * 3;

const PALETTE_TEXT: &str = include_str!("../../assets/sprites/palette.txt");
const SHEET_TEXT: &str = include_str!("../../assets/sprites/sheet.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tile {
    Void,
    Wall,
    Floor,
    PadFull,
    PadEmpty,
    Grate,
    Deliberation,
    VotingSlot,
    Jail,
}

impl Tile {
    pub const ALL: [Tile; 9] = [
        Tile::Void,
        Tile::Wall,
        Tile::Floor,
        Tile::PadFull,
        Tile::PadEmpty,
        Tile::Grate,
        Tile::Deliberation,
        Tile::VotingSlot,
        Tile::Jail,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_pad(self) -> bool {
        matches!(self, Tile::PadFull | Tile::PadEmpty)
    }

    /// Tiles that only exist inside the sealed voting room.
    pub fn is_deliberation(self) -> bool {
        matches!(self, Tile::Deliberation | Tile::VotingSlot | Tile::Jail)
    }

    pub fn is_walkable(self) -> bool {
        matches!(self, Tile::Floor | Tile::PadFull | Tile::PadEmpty | Tile::Grate)
    }

    fn sheet_name(self) -> &'static str {
        match self {
            Tile::Void => "void",
            Tile::Wall => "wall",
            Tile::Floor => "floor",
            Tile::PadFull => "pad_full",
            Tile::PadEmpty => "pad_empty",
            Tile::Grate => "grate",
            Tile::Deliberation => "deliberation",
            Tile::VotingSlot => "voting_slot",
            Tile::Jail => "jail",
        }
    }
}

/// Facing of an avatar relative to the viewer: `Up` means the same way the
/// viewer faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelFacing {
    Up,
    Right,
    Down,
    Left,
}

impl RelFacing {
    pub const ALL: [RelFacing; 4] = [RelFacing::Up, RelFacing::Right, RelFacing::Down, RelFacing::Left];

    pub fn between(viewer: Direction, other: Direction) -> Self {
        Self::ALL[viewer.right_turns_to(other)]
    }

    /// Absolute direction given the viewer's facing.
    pub fn absolute(self, viewer: Direction) -> Direction {
        Direction::from_index((viewer.index() + self as usize) % 4)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayerSprite {
    pub color: u8,
    pub facing: RelFacing,
    pub frozen: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpriteCell {
    pub tile: Tile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<PlayerSprite>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub beam: bool,
}

impl SpriteCell {
    pub const VOID: SpriteCell = SpriteCell {
        tile: Tile::Void,
        player: None,
        beam: false,
    };

    pub fn tile(tile: Tile) -> Self {
        Self {
            tile,
            player: None,
            beam: false,
        }
    }
}

pub const PLAYER_COLORS: usize = 5;
const PLAYER_VARIANTS: usize = 1 + PLAYER_COLORS * 4 * 2;
const VARIANTS: usize = Tile::ALL.len() * PLAYER_VARIANTS * 2;

fn variant_index(cell: &SpriteCell) -> usize {
    let pv = match cell.player {
        None => 0,
        Some(p) => 1 + (p.color as usize % PLAYER_COLORS) * 8 + p.facing.index() * 2 + p.frozen as usize,
    };
    (cell.tile.index() * PLAYER_VARIANTS + pv) * 2 + cell.beam as usize
}

fn variant_cell(index: usize) -> SpriteCell {
    let beam = index % 2 == 1;
    let rest = index / 2;
    let tile = Tile::ALL[rest / PLAYER_VARIANTS];
    let pv = rest % PLAYER_VARIANTS;
    let player = (pv > 0).then(|| {
        let k = pv - 1;
        PlayerSprite {
            color: (k / 8) as u8,
            facing: RelFacing::ALL[(k % 8) / 2],
            frozen: k % 2 == 1,
        }
    });
    SpriteCell { tile, player, beam }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SheetError {
    #[error("palette line {line}: {reason}")]
    Palette { line: usize, reason: String },
    #[error("sprite sheet line {line}: {reason}")]
    Sheet { line: usize, reason: String },
    #[error("sprite sheet has no `{0}` sprite")]
    Missing(String),
}

/// Named colors keyed by one character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    entries: Vec<(char, [u8; 3], String)>,
}

impl Palette {
    pub fn parse(text: &str) -> Result<Self, SheetError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| SheetError::Palette {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut parts = line.split_whitespace();
            let key = parts.next().ok_or_else(|| err("missing key"))?;
            let mut chars = key.chars();
            let (Some(key), None) = (chars.next(), chars.next()) else {
                return Err(err("key must be one character"));
            };
            let mut rgb = [0u8; 3];
            for c in &mut rgb {
                *c = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| err("expected three 0-255 channels"))?;
            }
            let name = parts.collect::<Vec<_>>().join(" ");
            if entries.iter().any(|(k, _, _)| *k == key) {
                return Err(err("duplicate key"));
            }
            entries.push((key, rgb, name));
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: char) -> Option<[u8; 3]> {
        self.entries.iter().find(|(k, _, _)| *k == key).map(|(_, c, _)| *c)
    }

    /// Avatar color for palette slot `index`.
    pub fn player(&self, index: u8) -> [u8; 3] {
        let key = char::from_digit(u32::from(index), 10).unwrap_or('0');
        self.get(key).unwrap_or([255, 255, 255])
    }

    pub fn entries(&self) -> impl Iterator<Item = (char, [u8; 3], &str)> {
        self.entries.iter().map(|(k, c, n)| (*k, *c, n.as_str()))
    }
}

type Mask = [[char; SPRITE_SIZE]; SPRITE_SIZE];

fn parse_masks(text: &str) -> Result<HashMap<String, Mask>, SheetError> {
    let mut out = HashMap::new();
    let mut current: Option<(String, Vec<Vec<char>>, usize)> = None;
    let mut finish = |entry: Option<(String, Vec<Vec<char>>, usize)>| -> Result<(), SheetError> {
        if let Some((name, rows, line)) = entry {
            if rows.len() != SPRITE_SIZE || rows.iter().any(|r| r.len() != SPRITE_SIZE) {
                return Err(SheetError::Sheet {
                    line,
                    reason: format!("sprite `{name}` is not 8x8"),
                });
            }
            let mut mask = [['-'; SPRITE_SIZE]; SPRITE_SIZE];
            for (y, row) in rows.iter().enumerate() {
                mask[y].copy_from_slice(row);
            }
            out.insert(name, mask);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            finish(current.take())?;
            current = Some((name.to_string(), Vec::new(), i + 1));
        } else if let Some((_, rows, _)) = current.as_mut() {
            rows.push(line.chars().collect());
        } else {
            return Err(SheetError::Sheet {
                line: i + 1,
                reason: "pixels before the first [name] header".into(),
            });
        }
    }
    finish(current.take())?;
    Ok(out)
}

fn rotate_right(m: &Mask) -> Mask {
    let mut r = [['-'; SPRITE_SIZE]; SPRITE_SIZE];
    for (y, row) in r.iter_mut().enumerate() {
        for (x, px) in row.iter_mut().enumerate() {
            *px = m[SPRITE_SIZE - 1 - x][y];
        }
    }
    r
}

type Block = [u8; BLOCK_BYTES];

/// Pre-painted blocks for every sprite combination.
pub struct SpriteSheet {
    palette: Palette,
    blocks: Vec<Block>,
    lookup: HashMap<Block, u16>,
}

impl std::fmt::Debug for SpriteSheet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpriteSheet")
            .field("variants", &self.blocks.len())
            .finish()
    }
}

impl SpriteSheet {
    /// The bundled sheet.
    pub fn standard() -> &'static SpriteSheet {
        static SHEET: OnceLock<SpriteSheet> = OnceLock::new();
        SHEET.get_or_init(|| {
            SpriteSheet::parse(PALETTE_TEXT, SHEET_TEXT).expect("bundled sprite sheet is valid")
        })
    }

    pub fn parse(palette_text: &str, sheet_text: &str) -> Result<Self, SheetError> {
        let palette = Palette::parse(palette_text)?;
        let masks = parse_masks(sheet_text)?;
        let get = |name: &str| masks.get(name).copied().ok_or_else(|| SheetError::Missing(name.into()));
        let color = |key: char, player: u8| -> Result<Option<[u8; 3]>, SheetError> {
            match key {
                '-' => Ok(None),
                'P' => Ok(Some(palette.player(player))),
                k => palette.get(k).map(Some).ok_or_else(|| SheetError::Sheet {
                    line: 0,
                    reason: format!("unknown palette key {k:?}"),
                }),
            }
        };

        let mut tiles = Vec::new();
        for t in Tile::ALL {
            tiles.push(if t == Tile::Void {
                [['.'; SPRITE_SIZE]; SPRITE_SIZE]
            } else {
                get(t.sheet_name())?
            });
        }
        let mut players = vec![get("player")?];
        for k in 1..4 {
            players.push(rotate_right(&players[k - 1]));
        }
        let frozen = get("frozen")?;
        let beam = get("beam")?;

        let mut blocks = Vec::with_capacity(VARIANTS);
        for v in 0..VARIANTS {
            let cell = variant_cell(v);
            let mut block = [0u8; BLOCK_BYTES];
            let mut layers: Vec<(&Mask, u8)> = vec![(&tiles[cell.tile.index()], 0)];
            if let Some(p) = cell.player {
                layers.push((&players[p.facing.index()], p.color));
                if p.frozen {
                    layers.push((&frozen, 0));
                }
            }
            if cell.beam {
                layers.push((&beam, 0));
            }
            for (mask, player) in layers {
                for y in 0..SPRITE_SIZE {
                    for x in 0..SPRITE_SIZE {
                        if let Some(rgb) = color(mask[y][x], player)? {
                            let o = (y * SPRITE_SIZE + x) * 3;
                            block[o..o + 3].copy_from_slice(&rgb);
                        }
                    }
                }
            }
            blocks.push(block);
        }
        let mut lookup = HashMap::with_capacity(VARIANTS);
        for (i, b) in blocks.iter().enumerate() {
            lookup.entry(*b).or_insert(i as u16);
        }
        Ok(Self {
            palette,
            blocks,
            lookup,
        })
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn variant_count(&self) -> usize {
        self.blocks.len()
    }

    /// Number of distinct painted blocks; equals [`Self::variant_count`] when
    /// every combination decodes unambiguously.
    pub fn distinct_count(&self) -> usize {
        self.lookup.len()
    }

    pub fn block(&self, cell: &SpriteCell) -> &[u8; BLOCK_BYTES] {
        &self.blocks[variant_index(cell)]
    }

    pub fn decode_block(&self, block: &[u8]) -> Option<SpriteCell> {
        let key: &Block = block.try_into().ok()?;
        self.lookup.get(key).map(|&i| variant_cell(i as usize))
    }

    /// Paints a grid of `cols` × `rows` cells into a row-major RGB buffer.
    pub fn paint(&self, cells: &[SpriteCell], cols: usize, out: &mut Vec<u8>) {
        let rows = cells.len() / cols;
        let stride = cols * SPRITE_SIZE * 3;
        out.clear();
        out.resize(rows * SPRITE_SIZE * stride, 0);
        for (i, cell) in cells.iter().enumerate() {
            let (r, c) = (i / cols, i % cols);
            let block = self.block(cell);
            for y in 0..SPRITE_SIZE {
                let dst = (r * SPRITE_SIZE + y) * stride + c * SPRITE_SIZE * 3;
                let src = y * SPRITE_SIZE * 3;
                out[dst..dst + SPRITE_SIZE * 3].copy_from_slice(&block[src..src + SPRITE_SIZE * 3]);
            }
        }
    }

    /// Inverse of [`Self::paint`]; `None` if any block is not a sheet sprite.
    pub fn decode(&self, rgb: &[u8], cols: usize, rows: usize) -> Option<Vec<SpriteCell>> {
        let stride = cols * SPRITE_SIZE * 3;
        if rgb.len() != rows * SPRITE_SIZE * stride {
            return None;
        }
        let mut block = [0u8; BLOCK_BYTES];
        let mut out = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                for y in 0..SPRITE_SIZE {
                    let src = (r * SPRITE_SIZE + y) * stride + c * SPRITE_SIZE * 3;
                    block[y * SPRITE_SIZE * 3..(y + 1) * SPRITE_SIZE * 3]
                        .copy_from_slice(&rgb[src..src + SPRITE_SIZE * 3]);
                }
                out.push(self.decode_block(&block)?);
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_variant_is_distinct() {
        let sheet = SpriteSheet::standard();
        assert_eq!(sheet.variant_count(), 9 * 41 * 2);
        assert_eq!(sheet.distinct_count(), sheet.variant_count());
    }

    #[test]
    fn variant_index_round_trips() {
        for v in 0..VARIANTS {
            assert_eq!(variant_index(&variant_cell(v)), v);
        }
    }

    #[test]
    fn void_is_black() {
        let sheet = SpriteSheet::standard();
        assert!(sheet.block(&SpriteCell::VOID).iter().all(|b| *b == 0));
    }

    #[test]
    fn palette_has_five_player_colors() {
        let sheet = SpriteSheet::standard();
        let mut colors: Vec<[u8; 3]> = (0..5).map(|i| sheet.palette().player(i)).collect();
        colors.sort();
        colors.dedup();
        assert_eq!(colors.len(), 5);
    }

    #[test]
    fn relative_facing() {
        use Direction::*;
        assert_eq!(RelFacing::between(N, N), RelFacing::Up);
        assert_eq!(RelFacing::between(N, E), RelFacing::Right);
        assert_eq!(RelFacing::between(E, N), RelFacing::Left);
        assert_eq!(RelFacing::between(S, N), RelFacing::Down);
        for v in Direction::ALL {
            for o in Direction::ALL {
                assert_eq!(RelFacing::between(v, o).absolute(v), o);
            }
        }
    }

    #[test]
    fn paint_then_decode() {
        let sheet = SpriteSheet::standard();
        let cells: Vec<SpriteCell> = (0..VARIANTS).map(variant_cell).take(120).collect();
        let mut rgb = Vec::new();
        sheet.paint(&cells, 12, &mut rgb);
        assert_eq!(rgb.len(), 10 * 8 * 12 * 8 * 3);
        assert_eq!(sheet.decode(&rgb, 12, 10).unwrap(), cells);
        rgb[5] ^= 1;
        assert!(sheet.decode(&rgb, 12, 10).is_none());
    }

    #[test]
    fn malformed_sheets_are_rejected() {
        assert!(matches!(
            Palette::parse("xy 1 2 3"),
            Err(SheetError::Palette { line: 1, .. })
        ));
        assert!(matches!(
            SpriteSheet::parse(PALETTE_TEXT, "[floor]\nfff\n"),
            Err(SheetError::Sheet { .. })
        ));
        assert!(matches!(
            SpriteSheet::parse(PALETTE_TEXT, "[floor]\nffffffff\nffffffff\nffffffff\nffffffff\nffffffff\nffffffff\nffffffff\nffffffff\n"),
            Err(SheetError::Missing(_))
        ));
    }
}
