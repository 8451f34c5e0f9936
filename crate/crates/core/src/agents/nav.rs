//! Static-map navigation shared by the scripted policies.
//!
//! A [`Navigator`] holds the all-pairs shortest-path table over walkable
//! cells plus the tile class of every cell, which the localizer matches
//! observations against. Tables are cached per map.

use crate::geometry::{Cell, Direction};
use crate::map::{CellKind, GameMap};
use crate::observation::Tile;
use std::collections::VecDeque;
use std::sync::{Arc, Mutex, OnceLock};

pub const FAR: u16 = u16::MAX;

/// Tile class as it appears in a view, with pad fullness folded away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TileClass {
    Void,
    Wall,
    Floor,
    Pad,
    Grate,
    Deliberation,
    VotingSlot,
    Jail,
}

impl TileClass {
    pub fn of_tile(t: Tile) -> Self {
        match t {
            Tile::Void => TileClass::Void,
            Tile::Wall => TileClass::Wall,
            Tile::Floor => TileClass::Floor,
            Tile::PadFull | Tile::PadEmpty => TileClass::Pad,
            Tile::Grate => TileClass::Grate,
            Tile::Deliberation => TileClass::Deliberation,
            Tile::VotingSlot => TileClass::VotingSlot,
            Tile::Jail => TileClass::Jail,
        }
    }

    fn of_kind(k: CellKind) -> Self {
        match k {
            CellKind::Void => TileClass::Void,
            CellKind::Wall => TileClass::Wall,
            CellKind::Floor | CellKind::Spawn(_) => TileClass::Floor,
            CellKind::FuelPad => TileClass::Pad,
            CellKind::Grate => TileClass::Grate,
            CellKind::Deliberation => TileClass::Deliberation,
            CellKind::VotingSlot(_) => TileClass::VotingSlot,
            CellKind::Jail => TileClass::Jail,
        }
    }

    /// Cells a player can ever occupy.
    pub fn standable(self) -> bool {
        !matches!(self, TileClass::Void | TileClass::Wall | TileClass::Deliberation)
    }
}

/// One of the five named regions: the corner rooms and the centre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Room {
    NorthWest,
    NorthEast,
    SouthWest,
    SouthEast,
    Center,
}

impl Room {
    pub const ALL: [Room; 5] = [
        Room::NorthWest,
        Room::NorthEast,
        Room::SouthWest,
        Room::SouthEast,
        Room::Center,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug)]
pub struct Navigator {
    map: Arc<GameMap>,
    classes: Vec<TileClass>,
    /// Map cell index -> dense walkable index.
    dense: Vec<Option<u32>>,
    walkable: Vec<Cell>,
    dist: Vec<u16>,
    room_centers: [Cell; 5],
}

impl Navigator {
    /// Shared navigator for `map`, built on first use.
    pub fn for_map(map: &Arc<GameMap>) -> Arc<Navigator> {
        static CACHE: OnceLock<Mutex<Vec<Arc<Navigator>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(nav) = guard
            .iter()
            .find(|n| Arc::ptr_eq(&n.map, map) || *n.map == **map)
        {
            return nav.clone();
        }
        let nav = Arc::new(Navigator::build(map.clone()));
        guard.push(nav.clone());
        nav
    }

    fn build(map: Arc<GameMap>) -> Self {
        let n = map.width() * map.height();
        let classes: Vec<TileClass> = (0..n).map(|i| TileClass::of_kind(map.kind(map.cell_at(i)))).collect();
        let mut dense = vec![None; n];
        let mut walkable = Vec::new();
        for i in 0..n {
            let c = map.cell_at(i);
            if map.is_playable(c) {
                dense[i] = Some(walkable.len() as u32);
                walkable.push(c);
            }
        }
        let m = walkable.len();
        let mut dist = vec![FAR; m * m];
        let mut queue = VecDeque::new();
        for s in 0..m {
            let row = &mut dist[s * m..(s + 1) * m];
            row[s] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let d = row[u];
                for dir in Direction::ALL {
                    let v = walkable[u].step(dir);
                    if let Some(j) = map.index(v).and_then(|i| dense[i]) {
                        let j = j as usize;
                        if row[j] == FAR {
                            row[j] = d + 1;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        let mut nav = Self {
            map,
            classes,
            dense,
            walkable,
            dist,
            room_centers: [Cell::new(0, 0); 5],
        };
        for r in Room::ALL {
            let (x0, y0, x1, y1) = nav.room_bounds(r);
            let centre = Cell::new((x0 + x1) / 2, (y0 + y1) / 2);
            let best = nav
                .walkable
                .iter()
                .copied()
                .filter(|c| nav.room_of(*c) == Some(r))
                .min_by_key(|c| (c.manhattan(centre), c.y, c.x))
                .unwrap_or(centre);
            nav.room_centers[r.index()] = best;
        }
        nav
    }

    pub fn map(&self) -> &Arc<GameMap> {
        &self.map
    }

    pub fn class(&self, c: Cell) -> TileClass {
        match self.map.index(c) {
            Some(i) => self.classes[i],
            None => TileClass::Void,
        }
    }

    pub fn walkable(&self, c: Cell) -> bool {
        self.map.index(c).is_some_and(|i| self.dense[i].is_some())
    }

    pub fn walkable_cells(&self) -> &[Cell] {
        &self.walkable
    }

    /// Every cell a player could stand on, including voting seats and jail.
    pub fn standable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.classes.len())
            .filter(|&i| self.classes[i].standable())
            .map(|i| self.map.cell_at(i))
    }

    /// Shortest walking distance, [`FAR`] if either end is not walkable.
    pub fn distance(&self, a: Cell, b: Cell) -> u16 {
        match (self.dense_of(a), self.dense_of(b)) {
            (Some(i), Some(j)) => self.dist[i * self.walkable.len() + j],
            _ => FAR,
        }
    }

    pub fn distance_to_any(&self, a: Cell, goals: &[Cell]) -> u16 {
        goals.iter().map(|g| self.distance(a, *g)).min().unwrap_or(FAR)
    }

    fn dense_of(&self, c: Cell) -> Option<usize> {
        self.map.index(c).and_then(|i| self.dense[i]).map(|j| j as usize)
    }

    /// Moves from `from` that strictly shorten the walk to the nearest goal,
    /// best first. Directions equal to `prefer` win ties.
    pub fn improving_moves(&self, from: Cell, goals: &[Cell], prefer: Direction) -> Vec<Direction> {
        let here = self.distance_to_any(from, goals);
        let mut opts: Vec<(u16, bool, Direction)> = Direction::ALL
            .iter()
            .filter_map(|&d| {
                let n = from.step(d);
                let dd = self.distance_to_any(n, goals);
                (dd < here).then_some((dd, d != prefer, d))
            })
            .collect();
        opts.sort_by_key(|(d, p, dir)| (*d, *p, dir.index()));
        opts.into_iter().map(|(_, _, d)| d).collect()
    }

    fn room_bounds(&self, r: Room) -> (i32, i32, i32, i32) {
        let (w, h) = (self.map.width() as i32, self.map.height() as i32);
        let (tx, ty) = (w / 3, h / 3);
        match r {
            Room::NorthWest => (0, 0, tx - 1, ty - 1),
            Room::NorthEast => (w - tx, 0, w - 1, ty - 1),
            Room::SouthWest => (0, h - ty, tx - 1, h - 1),
            Room::SouthEast => (w - tx, h - ty, w - 1, h - 1),
            Room::Center => (tx, ty, w - tx - 1, h - ty - 1),
        }
    }

    pub fn room_of(&self, c: Cell) -> Option<Room> {
        Room::ALL.into_iter().find(|&r| {
            let (x0, y0, x1, y1) = self.room_bounds(r);
            (x0..=x1).contains(&c.x) && (y0..=y1).contains(&c.y)
        })
    }

    /// A walkable cell near the middle of the room.
    pub fn room_center(&self, r: Room) -> Cell {
        self.room_centers[r.index()]
    }
}
