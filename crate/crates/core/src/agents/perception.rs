//! Turning observations into a belief about the world.
//!
//! Policies are never told their own position. The [`Localizer`] keeps a set
//! of candidate poses consistent with every view so far: it predicts each
//! candidate forward from the last action (a move may or may not succeed),
//! keeps the ones whose expected tiles match the new view, and falls back to
//! a global search after teleports into or out of the voting room.

use super::nav::{Navigator, TileClass};
use super::PolicyContext;
use crate::engine::{PlayerAction, PlayerId};
use crate::geometry::{Cell, Direction};
use crate::observation::{
    ObservationBundle, SpriteGrid, ABSTAIN_COL, INACTIVE_COL, OBSERVER_COL, OBSERVER_ROW, VIEW_CELLS,
    VIEW_SIZE,
};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pose {
    pub cell: Cell,
    pub facing: Direction,
}

impl Pose {
    /// Possible poses after `action`, most likely first. A move that looked
    /// contested lists the unmoved pose first.
    fn after(self, action: PlayerAction, nav: &Navigator, contested: bool) -> [Option<Pose>; 2] {
        match action {
            PlayerAction::TurnLeft => [Some(Pose { facing: self.facing.turn_left(), ..self }), None],
            PlayerAction::TurnRight => [Some(Pose { facing: self.facing.turn_right(), ..self }), None],
            a => match a.move_direction() {
                Some(d) => {
                    let next = self.cell.step(d);
                    let moved = nav.walkable(next).then_some(Pose { cell: next, ..self });
                    if contested {
                        [Some(self), moved]
                    } else {
                        [moved, Some(self)]
                    }
                }
                None => [Some(self), None],
            },
        }
    }
}

/// Per-facing (dx, dy) of every view index, in render order.
fn view_offsets() -> &'static [[(i32, i32); VIEW_CELLS]; 4] {
    static OFFSETS: std::sync::OnceLock<[[(i32, i32); VIEW_CELLS]; 4]> = std::sync::OnceLock::new();
    OFFSETS.get_or_init(|| {
        let mut out = [[(0, 0); VIEW_CELLS]; 4];
        for (f, table) in out.iter_mut().enumerate() {
            let facing = Direction::from_index(f);
            for (i, slot) in table.iter_mut().enumerate() {
                let fwd = OBSERVER_ROW as i32 - (i / VIEW_SIZE) as i32;
                let lat = (i % VIEW_SIZE) as i32 - OBSERVER_COL as i32;
                let c = Cell::new(0, 0).relative(facing, fwd, lat);
                *slot = (c.x, c.y);
            }
        }
        out
    })
}

#[derive(Debug, Clone)]
pub struct Localizer {
    nav: Arc<Navigator>,
    candidates: Vec<Pose>,
    tracking: bool,
}

impl Localizer {
    pub fn new(nav: Arc<Navigator>) -> Self {
        Self {
            nav,
            candidates: Vec::new(),
            tracking: false,
        }
    }

    /// False right after a global search, when candidate order means nothing.
    pub fn tracking(&self) -> bool {
        self.tracking
    }

    pub fn candidates(&self) -> &[Pose] {
        &self.candidates
    }

    /// True when the view is what `pose` would see on the static map.
    pub fn matches(&self, pose: Pose, classes: &[TileClass; VIEW_CELLS]) -> bool {
        let offsets = &view_offsets()[pose.facing.index()];
        // The observer's own tile and its neighbours first; they reject most
        // wrong poses immediately.
        const FIRST: [usize; 5] = [
            OBSERVER_ROW * VIEW_SIZE + OBSERVER_COL,
            (OBSERVER_ROW - 1) * VIEW_SIZE + OBSERVER_COL,
            OBSERVER_ROW * VIEW_SIZE + OBSERVER_COL - 1,
            OBSERVER_ROW * VIEW_SIZE + OBSERVER_COL + 1,
            (OBSERVER_ROW + 1) * VIEW_SIZE + OBSERVER_COL,
        ];
        let check = |i: usize| {
            let (dx, dy) = offsets[i];
            self.nav.class(pose.cell.offset(dx, dy)) == classes[i]
        };
        FIRST.iter().all(|&i| check(i)) && (0..VIEW_CELLS).all(check)
    }

    /// Global search over every standable cell and facing.
    pub fn search(&self, classes: &[TileClass; VIEW_CELLS]) -> Vec<Pose> {
        let mut out = Vec::new();
        for cell in self.nav.standable_cells() {
            if self.nav.class(cell) != classes[OBSERVER_ROW * VIEW_SIZE + OBSERVER_COL] {
                continue;
            }
            for facing in Direction::ALL {
                let pose = Pose { cell, facing };
                if self.matches(pose, classes) {
                    out.push(pose);
                }
            }
        }
        out
    }

    /// Every pose reachable from the current candidates by `action`.
    pub fn predict(&self, action: PlayerAction, contested: bool) -> Vec<Pose> {
        let mut out = Vec::new();
        for cand in &self.candidates {
            for p in cand.after(action, &self.nav, contested).into_iter().flatten() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Advances the belief by one observation. `hints` are tried before a
    /// global search when tracking loses every candidate. `contested` says
    /// the last move probably failed.
    pub fn update(&mut self, grid: &SpriteGrid, last: PlayerAction, hints: &[Pose], contested: bool) {
        let mut classes = [TileClass::Void; VIEW_CELLS];
        for (c, cell) in classes.iter_mut().zip(grid.cells()) {
            *c = TileClass::of_tile(cell.tile);
        }
        let mut next = self.predict(last, contested);
        next.retain(|p| self.matches(*p, &classes));
        if next.is_empty() {
            next = hints.iter().copied().filter(|h| self.matches(*h, &classes)).collect();
        }
        self.tracking = !next.is_empty();
        if next.is_empty() {
            next = self.search(&classes);
        }
        self.candidates = next;
    }

    pub fn best(&self) -> Option<Pose> {
        self.candidates.first().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeenPlayer {
    pub player: Option<PlayerId>,
    pub color: u8,
    pub cell: Cell,
    pub facing: Direction,
    pub frozen: bool,
    /// Egocentric offsets.
    pub fwd: i32,
    pub lat: i32,
}

/// Everything a scripted policy believes, refreshed once per observation.
#[derive(Debug, Clone)]
pub struct Perception {
    pub nav: Arc<Navigator>,
    color_to_player: Vec<Option<PlayerId>>,
    self_id: PlayerId,
    capacity: u32,
    respawn_delay: u64,
    localizer: Localizer,
    pub pose: Option<Pose>,
    previous_pose: Option<Pose>,
    /// Where we may have stood when voting began, most likely first.
    pre_vote_poses: Vec<Pose>,
    pub voting: bool,
    /// 1 on the first voting step, 0 outside voting.
    pub voting_step: u32,
    pub situation_steps: u64,
    pub seen: Vec<SeenPlayer>,
    pub beam_cells: Vec<Cell>,
    pub frozen: bool,
    pub inventory: u32,
    /// Situation step at which each pad was last seen empty.
    pad_empty_since: Vec<Option<u64>>,
    /// Count of consecutive moves that left the pose unchanged.
    pub stuck: u32,
    pub grid: Option<SpriteGrid>,
    pub vote_matrix: crate::observation::VoteMatrix,
}

impl Perception {
    pub fn new(ctx: &PolicyContext) -> Self {
        let nav = Navigator::for_map(&ctx.map);
        let mut color_to_player = vec![None; 256];
        for (p, c) in ctx.seat_colors.iter().enumerate() {
            color_to_player[*c as usize] = Some(p);
        }
        Self {
            localizer: Localizer::new(nav.clone()),
            pad_empty_since: vec![None; ctx.map.pads().len()],
            nav,
            color_to_player,
            self_id: ctx.self_id,
            capacity: ctx.rules.inventory_capacity,
            respawn_delay: u64::from(ctx.rules.fuel_respawn_delay),
            pose: None,
            previous_pose: None,
            pre_vote_poses: Vec::new(),
            voting: false,
            voting_step: 0,
            situation_steps: 0,
            seen: Vec::new(),
            beam_cells: Vec::new(),
            frozen: false,
            inventory: 0,
            stuck: 0,
            grid: None,
            vote_matrix: [[0; crate::observation::VOTE_COLS]; crate::observation::VOTE_ROWS],
        }
    }

    pub fn update(&mut self, obs: &ObservationBundle, last: PlayerAction) {
        let grid = match obs.sprites() {
            Ok(g) => g.into_owned(),
            Err(_) => {
                self.grid = None;
                return;
            }
        };
        let voting = grid.observer().tile == crate::observation::Tile::VotingSlot;
        let contested = self.contested(&grid, last);
        let mut hints: &[Pose] = &[];
        if voting && !self.voting {
            self.pre_vote_poses = self.localizer.predict(last, contested);
        } else if !voting && self.voting {
            hints = &self.pre_vote_poses;
        }
        let hints = hints.to_vec();
        self.voting_step = if voting { self.voting_step + 1 } else { 0 };
        self.voting = voting;
        if !voting {
            self.situation_steps += 1;
        }

        self.previous_pose = self.pose;
        self.localizer.update(&grid, last, &hints, contested);
        self.pose = self.pick_pose();
        let moved_attempt = last.move_direction().is_some() && !voting;
        if moved_attempt && self.pose.map(|p| p.cell) == self.previous_pose.map(|p| p.cell) {
            self.stuck += 1;
        } else if moved_attempt || last == PlayerAction::Noop {
            self.stuck = 0;
        }

        self.frozen = grid.observer().player.is_some_and(|p| p.frozen);
        self.inventory = (obs.inventory_fraction * f64::from(self.capacity)).round() as u32;
        self.vote_matrix = obs.vote_matrix;

        self.seen.clear();
        self.beam_cells.clear();
        if let Some(pose) = self.pose {
            for (fwd, lat, cell) in grid.iter_offsets() {
                let abs = pose.cell.relative(pose.facing, fwd, lat);
                if cell.beam {
                    self.beam_cells.push(abs);
                }
                if cell.tile.is_pad() {
                    if let Some(k) = self.nav.map().pad_index(abs) {
                        self.pad_empty_since[k] = match cell.tile {
                            crate::observation::Tile::PadEmpty => {
                                Some(self.pad_empty_since[k].unwrap_or(self.situation_steps))
                            }
                            _ => None,
                        };
                    }
                }
                if let Some(p) = cell.player {
                    if fwd == 0 && lat == 0 {
                        continue;
                    }
                    self.seen.push(SeenPlayer {
                        player: self.color_to_player[p.color as usize],
                        color: p.color,
                        cell: abs,
                        facing: p.facing.absolute(pose.facing),
                        frozen: p.frozen,
                        fwd,
                        lat,
                    });
                }
            }
        }
        self.grid = Some(grid);
    }

    /// Did the move in `last` look likely to fail? True when its target was
    /// occupied in the previous frame or someone now stands there.
    fn contested(&self, grid: &SpriteGrid, last: PlayerAction) -> bool {
        let (Some(dir), Some(pose)) = (last.move_direction(), self.pose) else {
            return false;
        };
        let target = pose.cell.step(dir);
        if self.occupied(target) {
            return true;
        }
        let (fwd, lat) = pose.cell.offsets_to(pose.facing, target);
        grid.at_offset(fwd, lat).is_some_and(|c| c.player.is_some())
    }

    fn pick_pose(&self) -> Option<Pose> {
        let cands = self.localizer.candidates();
        match (cands.len(), self.previous_pose.or(self.pre_vote_poses.first().copied())) {
            (0, _) => None,
            (1, _) | (_, None) => cands.first().copied(),
            _ if self.localizer.tracking() => cands.first().copied(),
            (_, Some(prev)) => cands
                .iter()
                .copied()
                .min_by_key(|c| (c.cell.manhattan(prev.cell), c.facing != prev.facing)),
        }
    }

    pub fn candidate_count(&self) -> usize {
        self.localizer.candidates().len()
    }

    pub fn self_id(&self) -> PlayerId {
        self.self_id
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    /// Pads not known to be empty, allowing for the respawn delay.
    pub fn pads_believed_full(&self) -> Vec<Cell> {
        let now = self.situation_steps;
        self.nav
            .map()
            .pads()
            .iter()
            .zip(&self.pad_empty_since)
            .filter(|(_, since)| since.is_none_or(|t| now >= t + self.respawn_delay))
            .map(|(c, _)| *c)
            .collect()
    }

    /// Is `player` still able to act, judging by the public vote matrix?
    pub fn is_active(&self, player: PlayerId) -> bool {
        player < self.vote_matrix.len() && self.vote_matrix[player][INACTIVE_COL] == 0
    }

    /// Ballot of `player` as last published: `Some(target)`, or `None` for
    /// abstain and inactive rows.
    pub fn ballot(&self, player: PlayerId) -> Option<PlayerId> {
        let row = self.vote_matrix.get(player)?;
        (0..ABSTAIN_COL).find(|&c| row[c] == 1)
    }

    pub fn occupied(&self, cell: Cell) -> bool {
        self.seen.iter().any(|s| s.cell == cell)
    }
}
