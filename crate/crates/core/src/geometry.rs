//! Grid coordinates and facings. `x` grows eastward, `y` grows southward.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn step(self, dir: Direction) -> Self {
        let (dx, dy) = dir.forward();
        self.offset(dx, dy)
    }

    /// Cell reached by going `fwd` cells along `facing` and `lat` cells to its
    /// right (negative `lat` means left).
    pub fn relative(self, facing: Direction, fwd: i32, lat: i32) -> Self {
        let (fx, fy) = facing.forward();
        let (rx, ry) = facing.right();
        Self::new(self.x + fwd * fx + lat * rx, self.y + fwd * fy + lat * ry)
    }

    /// Inverse of [`Cell::relative`]: `(forward, lateral)` offsets of `other`
    /// as seen from `self` facing `facing`.
    pub fn offsets_to(self, facing: Direction, other: Cell) -> (i32, i32) {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        let (fx, fy) = facing.forward();
        let (rx, ry) = facing.right();
        (dx * fx + dy * fy, dx * rx + dy * ry)
    }

    pub fn distance(self, other: Cell) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn manhattan(self, other: Cell) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    pub fn forward(self) -> (i32, i32) {
        match self {
            Direction::N => (0, -1),
            Direction::E => (1, 0),
            Direction::S => (0, 1),
            Direction::W => (-1, 0),
        }
    }

    pub fn right(self) -> (i32, i32) {
        self.turn_right().forward()
    }

    pub fn turn_left(self) -> Self {
        match self {
            Direction::N => Direction::W,
            Direction::W => Direction::S,
            Direction::S => Direction::E,
            Direction::E => Direction::N,
        }
    }

    pub fn turn_right(self) -> Self {
        match self {
            Direction::N => Direction::E,
            Direction::E => Direction::S,
            Direction::S => Direction::W,
            Direction::W => Direction::N,
        }
    }

    pub fn opposite(self) -> Self {
        self.turn_right().turn_right()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 4]
    }

    /// Number of right turns from `self` to `other` (0..4).
    pub fn right_turns_to(self, other: Direction) -> usize {
        (other.index() + 4 - self.index()) % 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turns_cycle() {
        assert_eq!(Direction::N.turn_left(), Direction::W);
        assert_eq!(Direction::N.turn_right(), Direction::E);
        for d in Direction::ALL {
            assert_eq!(d.turn_left().turn_right(), d);
            assert_eq!(d.opposite().opposite(), d);
        }
    }

    #[test]
    fn relative_and_offsets_are_inverse() {
        let origin = Cell::new(10, 10);
        for d in Direction::ALL {
            for fwd in -3..=3 {
                for lat in -3..=3 {
                    let c = origin.relative(d, fwd, lat);
                    assert_eq!(origin.offsets_to(d, c), (fwd, lat));
                }
            }
        }
    }

    #[test]
    fn north_is_up() {
        let c = Cell::new(5, 5);
        assert_eq!(c.relative(Direction::N, 1, 0), Cell::new(5, 4));
        assert_eq!(c.relative(Direction::N, 0, 1), Cell::new(6, 5));
        assert_eq!(c.relative(Direction::E, 0, 1), Cell::new(5, 6));
    }

    #[test]
    fn three_four_five() {
        assert_eq!(Cell::new(0, 0).distance(Cell::new(3, 4)), 5.0);
    }
}
