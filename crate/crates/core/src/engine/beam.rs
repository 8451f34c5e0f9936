use crate::config::GameConfig;
use crate::geometry::{Cell, Direction};
use crate::map::{CellKind, GameMap};

/// Beam geometry taken from the rule config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeamShape {
    pub forward_span: i32,
    pub lateral_span: i32,
    pub include_own_row: bool,
}

impl BeamShape {
    pub fn from_config(config: &GameConfig) -> Self {
        Self {
            forward_span: config.beam_forward_span as i32,
            lateral_span: config.beam_lateral_span as i32,
            include_own_row: config.beam_include_own_row,
        }
    }
}

impl Default for BeamShape {
    fn default() -> Self {
        Self::from_config(&GameConfig::default())
    }
}

fn blocks(kind: CellKind) -> bool {
    matches!(kind, CellKind::Wall | CellKind::Void)
}

/// Cells hit by a beam fired from `position` facing `facing`.
///
/// Each lateral column is walked outward from the firer; the first wall (or
/// off-map cell) stops that column. Result is ordered by forward offset, then
/// lateral offset from left to right.
pub fn beam_footprint(position: Cell, facing: Direction, map: &GameMap, shape: BeamShape) -> Vec<Cell> {
    let mut hits: Vec<(i32, i32, Cell)> = Vec::with_capacity(
        ((2 * shape.lateral_span + 1) * (shape.forward_span + 1)) as usize,
    );
    for lat in -shape.lateral_span..=shape.lateral_span {
        if shape.include_own_row && lat != 0 {
            let c = position.relative(facing, 0, lat);
            if !blocks(map.kind(c)) {
                hits.push((0, lat, c));
            }
        }
        for fwd in 1..=shape.forward_span {
            let c = position.relative(facing, fwd, lat);
            if blocks(map.kind(c)) {
                break;
            }
            hits.push((fwd, lat, c));
        }
    }
    hits.sort_by_key(|&(fwd, lat, _)| (fwd, lat));
    hits.into_iter().map(|(_, _, c)| c).collect()
}
