//! Egocentric view-window geometry.
//!
//! The window is 11x11 cells: 5 to each side, 9 ahead and 1 behind the
//! observer. It is rotated so the observer's facing points up; the observer
//! sits at row 9, column 5 (0-indexed from the top-left). This module is the
//! single visibility predicate: the engine's witness check uses it too.

use crate::geometry::{Cell, Direction};

pub const VIEW_SIZE: usize = 11;
pub const VIEW_CELLS: usize = VIEW_SIZE * VIEW_SIZE;
pub const OBSERVER_ROW: usize = 9;
pub const OBSERVER_COL: usize = 5;
pub const VIEW_AHEAD: i32 = 9;
pub const VIEW_BEHIND: i32 = 1;
pub const VIEW_SIDE: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ViewWindow {
    pub origin: Cell,
    pub facing: Direction,
}

pub fn view_window(position: Cell, facing: Direction) -> ViewWindow {
    ViewWindow {
        origin: position,
        facing,
    }
}

impl ViewWindow {
    /// Map cell shown at `(row, col)` of the rendered window.
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        let fwd = OBSERVER_ROW as i32 - row as i32;
        let lat = col as i32 - OBSERVER_COL as i32;
        self.origin.relative(self.facing, fwd, lat)
    }

    /// All 121 cells in render order (row-major from the top-left).
    pub fn cells(&self) -> Vec<Cell> {
        (0..VIEW_SIZE)
            .flat_map(|r| (0..VIEW_SIZE).map(move |c| (r, c)))
            .map(|(r, c)| self.cell(r, c))
            .collect()
    }

    /// Render position of `cell`, if it falls inside the window.
    pub fn locate(&self, cell: Cell) -> Option<(usize, usize)> {
        let (fwd, lat) = self.origin.offsets_to(self.facing, cell);
        if (-VIEW_BEHIND..=VIEW_AHEAD).contains(&fwd) && (-VIEW_SIDE..=VIEW_SIDE).contains(&lat) {
            Some((
                (OBSERVER_ROW as i32 - fwd) as usize,
                (OBSERVER_COL as i32 + lat) as usize,
            ))
        } else {
            None
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.locate(cell).is_some()
    }
}
