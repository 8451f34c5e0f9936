//! Static map data and the text-grid loader.

use crate::geometry::Cell;
use std::collections::VecDeque;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

pub const CANONICAL_MAP_NAME: &str = "canonical";
const CANONICAL_MAP: &str = include_str!("../assets/maps/canonical.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Wall,
    Floor,
    FuelPad,
    Grate,
    Deliberation,
    VotingSlot(u8),
    Jail,
    Spawn(u8),
    Void,
}

impl CellKind {
    fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '#' => CellKind::Wall,
            '.' => CellKind::Floor,
            'F' => CellKind::FuelPad,
            'G' => CellKind::Grate,
            'd' => CellKind::Deliberation,
            'J' => CellKind::Jail,
            '~' => CellKind::Void,
            '0'..='4' => CellKind::VotingSlot(c as u8 - b'0'),
            '5'..='9' => CellKind::Spawn(c as u8 - b'5'),
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            CellKind::Wall => '#',
            CellKind::Floor => '.',
            CellKind::FuelPad => 'F',
            CellKind::Grate => 'G',
            CellKind::Deliberation => 'd',
            CellKind::Jail => 'J',
            CellKind::Void => '~',
            CellKind::VotingSlot(i) => (b'0' + i) as char,
            CellKind::Spawn(i) => (b'5' + i) as char,
        }
    }

    /// Cells players may walk on during the situation phase.
    pub fn is_playable(self) -> bool {
        matches!(
            self,
            CellKind::Floor | CellKind::FuelPad | CellKind::Grate | CellKind::Spawn(_)
        )
    }

    pub fn is_deliberation(self) -> bool {
        matches!(
            self,
            CellKind::Deliberation | CellKind::VotingSlot(_) | CellKind::Jail
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("cannot read map file {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("map is empty")]
    Empty,
    #[error("row {row} has width {got}, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("unknown map character {ch:?} at ({x},{y})")]
    BadChar { ch: char, x: usize, y: usize },
    #[error("{what} {index} appears more than once")]
    DuplicateIndex { what: &'static str, index: u8 },
    #[error("{what} indices must cover 0..{count} exactly")]
    MissingIndex { what: &'static str, count: usize },
    #[error("map has {spawns} spawn points, {slots} voting slots and {jails} jail cells; they must match")]
    SeatCountMismatch {
        spawns: usize,
        slots: usize,
        jails: usize,
    },
    #[error("layout: {0}")]
    Layout(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameMap {
    name: String,
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    pads: Vec<Cell>,
    grates: Vec<Cell>,
    spawns: Vec<Cell>,
    voting_slots: Vec<Cell>,
    jails: Vec<Cell>,
}

impl GameMap {
    /// The built-in 40x31 map.
    pub fn canonical() -> Arc<GameMap> {
        use std::sync::OnceLock;
        static MAP: OnceLock<Arc<GameMap>> = OnceLock::new();
        MAP.get_or_init(|| {
            Arc::new(
                GameMap::parse(CANONICAL_MAP_NAME, CANONICAL_MAP)
                    .expect("built-in canonical map must load"),
            )
        })
        .clone()
    }

    /// Resolves a map reference: a built-in name, or a path to a `.txt` grid.
    pub fn resolve(name: &str) -> Result<Arc<GameMap>, MapError> {
        if name == CANONICAL_MAP_NAME {
            return Ok(Self::canonical());
        }
        if name.ends_with(".txt") {
            return Self::load_file(name).map(Arc::new);
        }
        Err(MapError::UnknownMap(name.to_string()))
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<GameMap, MapError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| MapError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        GameMap::parse(&path.display().to_string(), &text)
    }

    /// Strict loader: structural checks plus room-layout checks.
    pub fn parse(name: &str, text: &str) -> Result<GameMap, MapError> {
        let map = Self::parse_lenient(name, text)?;
        map.check_layout()?;
        Ok(map)
    }

    /// Structural checks only (legend, rectangular grid, seat indices). Used
    /// for small fixture maps that do not follow the room layout.
    pub fn parse_lenient(name: &str, text: &str) -> Result<GameMap, MapError> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(MapError::Empty);
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut cells = Vec::with_capacity(width * height);
        for (y, row) in rows.iter().enumerate() {
            let got = row.chars().count();
            if got != width {
                return Err(MapError::RaggedRow {
                    row: y,
                    got,
                    expected: width,
                });
            }
            for (x, ch) in row.chars().enumerate() {
                cells.push(CellKind::from_char(ch).ok_or(MapError::BadChar { ch, x, y })?);
            }
        }

        let mut pads = Vec::new();
        let mut grates = Vec::new();
        let mut jails = Vec::new();
        let mut spawns: Vec<Option<Cell>> = vec![None; 5];
        let mut slots: Vec<Option<Cell>> = vec![None; 5];
        for (i, kind) in cells.iter().enumerate() {
            let c = Cell::new((i % width) as i32, (i / width) as i32);
            match *kind {
                CellKind::FuelPad => pads.push(c),
                CellKind::Grate => grates.push(c),
                CellKind::Jail => jails.push(c),
                CellKind::Spawn(k) => {
                    if spawns[k as usize].replace(c).is_some() {
                        return Err(MapError::DuplicateIndex {
                            what: "spawn point",
                            index: k,
                        });
                    }
                }
                CellKind::VotingSlot(k) => {
                    if slots[k as usize].replace(c).is_some() {
                        return Err(MapError::DuplicateIndex {
                            what: "voting slot",
                            index: k,
                        });
                    }
                }
                _ => {}
            }
        }
        let spawns = dense_indices(spawns, "spawn point")?;
        let voting_slots = dense_indices(slots, "voting slot")?;
        if spawns.len() != voting_slots.len() || spawns.len() != jails.len() {
            return Err(MapError::SeatCountMismatch {
                spawns: spawns.len(),
                slots: voting_slots.len(),
                jails: jails.len(),
            });
        }

        Ok(GameMap {
            name: name.to_string(),
            width,
            height,
            cells,
            pads,
            grates,
            spawns,
            voting_slots,
            jails,
        })
    }

    fn check_layout(&self) -> Result<(), MapError> {
        let (w, h) = (self.width as i32, self.height as i32);
        let low_x = |x: i32| x * 3 < w;
        let high_x = |x: i32| x * 3 >= 2 * w;
        let low_y = |y: i32| y * 3 < h;
        let high_y = |y: i32| y * 3 >= 2 * h;

        let mut corners = [0usize; 4];
        for p in &self.pads {
            let corner = match (low_x(p.x), high_x(p.x), low_y(p.y), high_y(p.y)) {
                (true, _, true, _) => 0,
                (_, true, true, _) => 1,
                (true, _, _, true) => 2,
                (_, true, _, true) => 3,
                _ => {
                    return Err(MapError::Layout(format!(
                        "fuel pad {p} lies outside the corner rooms"
                    )))
                }
            };
            corners[corner] += 1;
        }
        if corners.contains(&0) {
            return Err(MapError::Layout(
                "every corner room needs at least one fuel pad".into(),
            ));
        }
        if self.grates.is_empty() {
            return Err(MapError::Layout("map has no grate".into()));
        }
        for g in &self.grates {
            let central = !low_x(g.x) && !high_x(g.x) && !low_y(g.y) && !high_y(g.y);
            if !central {
                return Err(MapError::Layout(format!(
                    "grate {g} lies outside the central room"
                )));
            }
        }
        for (i, kind) in self.cells.iter().enumerate() {
            if !kind.is_deliberation() {
                continue;
            }
            let c = Cell::new((i % self.width) as i32, (i / self.width) as i32);
            for d in crate::geometry::Direction::ALL {
                if self.kind(c.step(d)).is_playable() {
                    return Err(MapError::Layout(format!(
                        "deliberation cell {c} touches the playable area"
                    )));
                }
            }
        }
        if self.spawns.is_empty() {
            return Ok(());
        }
        let dist = self.distances_from(&self.spawns[..1]);
        let unreachable = self
            .pads
            .iter()
            .chain(&self.grates)
            .chain(&self.spawns)
            .find(|c| dist[self.index(**c).unwrap()] == UNREACHABLE);
        if let Some(c) = unreachable {
            return Err(MapError::Layout(format!("{c} is unreachable from spawn 0")));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn index(&self, c: Cell) -> Option<usize> {
        self.contains(c)
            .then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    /// Kind of `c`; cells beyond the grid read as [`CellKind::Void`].
    pub fn kind(&self, c: Cell) -> CellKind {
        match self.index(c) {
            Some(i) => self.cells[i],
            None => CellKind::Void,
        }
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.kind(c) == CellKind::Wall
    }

    pub fn is_playable(&self, c: Cell) -> bool {
        self.kind(c).is_playable()
    }

    pub fn pads(&self) -> &[Cell] {
        &self.pads
    }

    pub fn grates(&self) -> &[Cell] {
        &self.grates
    }

    pub fn spawns(&self) -> &[Cell] {
        &self.spawns
    }

    pub fn voting_slots(&self) -> &[Cell] {
        &self.voting_slots
    }

    pub fn jails(&self) -> &[Cell] {
        &self.jails
    }

    pub fn seat_count(&self) -> usize {
        self.spawns.len()
    }

    pub fn pad_index(&self, c: Cell) -> Option<usize> {
        self.pads.iter().position(|p| *p == c)
    }

    /// Breadth-first step distances over playable cells from any of
    /// `sources`. Unreachable cells hold [`UNREACHABLE`].
    pub fn distances_from(&self, sources: &[Cell]) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.cells.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if let Some(i) = self.index(s) {
                if dist[i] == UNREACHABLE {
                    dist[i] = 0;
                    queue.push_back(s);
                }
            }
        }
        while let Some(c) = queue.pop_front() {
            let d = dist[self.index(c).unwrap()];
            for dir in crate::geometry::Direction::ALL {
                let n = c.step(dir);
                if let Some(j) = self.index(n) {
                    if dist[j] == UNREACHABLE && self.cells[j].is_playable() {
                        dist[j] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for row in self.cells.chunks(self.width) {
            s.extend(row.iter().map(|k| k.to_char()));
            s.push('\n');
        }
        s
    }
}

pub const UNREACHABLE: u32 = u32::MAX;

fn dense_indices(found: Vec<Option<Cell>>, what: &'static str) -> Result<Vec<Cell>, MapError> {
    let count = found.iter().filter(|c| c.is_some()).count();
    if found[..count].iter().any(Option::is_none) {
        return Err(MapError::MissingIndex { what, count });
    }
    Ok(found.into_iter().flatten().collect())
}
