use super::nav::Room;
use super::perception::{Perception, Pose};
use super::{Policy, PolicyContext, PolicyParams};
use crate::engine::{beam_footprint, PlayerAction, PlayerId, Role};
use crate::geometry::{Cell, Direction};
use crate::observation::ObservationBundle;
use crate::rng::EpisodeRng;

/// Always `Noop`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Idle;

impl Policy for Idle {
    fn act(&mut self, _obs: &ObservationBundle) -> PlayerAction {
        PlayerAction::Noop
    }
}

/// Uniform over the actions that make sense in the current phase.
pub struct RandomPolicy {
    role: Role,
    num_players: usize,
    rng: EpisodeRng,
}

impl RandomPolicy {
    pub fn new(ctx: PolicyContext, seed: u64) -> Self {
        Self {
            role: ctx.role,
            num_players: ctx.rules.num_players,
            rng: EpisodeRng::from_seed(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, obs: &ObservationBundle) -> PlayerAction {
        if obs.in_voting_room().unwrap_or(false) {
            let k = self.rng.below(self.num_players as u64 + 1) as usize;
            return if k < self.num_players {
                PlayerAction::VoteFor(k as u8)
            } else {
                PlayerAction::VoteAbstain
            };
        }
        let n = if self.role == Role::Impostor { 8 } else { 7 };
        PlayerAction::SITUATION[self.rng.below(n) as usize]
    }
}

fn turn_toward(facing: Direction, want: Direction) -> PlayerAction {
    if want == facing.turn_right() {
        PlayerAction::TurnRight
    } else {
        PlayerAction::TurnLeft
    }
}

fn random_walk(rng: &mut EpisodeRng) -> PlayerAction {
    PlayerAction::SITUATION[rng.below(7) as usize]
}

/// Moves one step toward the nearest goal, stepping around visible players
/// and sidestepping at random after repeated blocked moves.
fn travel(
    perc: &Perception,
    rng: &mut EpisodeRng,
    pose: Pose,
    goals: &[Cell],
    face_travel: bool,
) -> PlayerAction {
    let nav = &perc.nav;
    let moves = nav.improving_moves(pose.cell, goals, pose.facing);
    let free: Vec<Direction> = moves
        .iter()
        .copied()
        .filter(|d| !perc.occupied(pose.cell.step(*d)))
        .collect();
    let choice = if perc.stuck >= 2 || (free.is_empty() && !moves.is_empty()) {
        let side: Vec<Direction> = Direction::ALL
            .into_iter()
            .filter(|d| {
                let n = pose.cell.step(*d);
                nav.walkable(n) && !perc.occupied(n)
            })
            .collect();
        if side.is_empty() {
            None
        } else {
            Some(side[rng.below(side.len() as u64) as usize])
        }
    } else {
        free.first().copied()
    };
    match choice {
        None => PlayerAction::Noop,
        Some(d) if face_travel && d != pose.facing && perc.stuck < 2 => turn_toward(pose.facing, d),
        Some(d) => PlayerAction::move_toward(d),
    }
}

/// Fetches fuel from the nearest pad believed full and carries it to a grate.
/// With a partner it also stays close to that partner. Votes for the player
/// it most often saw next to a beam.
pub struct Collector {
    ctx: PolicyContext,
    params: PolicyParams,
    perc: Perception,
    rng: EpisodeRng,
    last: PlayerAction,
    suspicion: Vec<u32>,
}

impl Collector {
    pub fn new(ctx: PolicyContext, params: PolicyParams, seed: u64) -> Self {
        Self {
            perc: Perception::new(&ctx),
            suspicion: vec![0; ctx.rules.num_players],
            ctx,
            params,
            rng: EpisodeRng::from_seed(seed),
            last: PlayerAction::Noop,
        }
    }

    pub fn suspicion(&self) -> &[u32] {
        &self.suspicion
    }

    pub fn perception(&self) -> &Perception {
        &self.perc
    }

    fn note_beams(&mut self) {
        if self.perc.beam_cells.is_empty() {
            return;
        }
        let beams = &self.perc.beam_cells;
        let best = self
            .perc
            .seen
            .iter()
            .filter(|s| !s.frozen && !beams.contains(&s.cell))
            .filter_map(|s| {
                let d = beams.iter().map(|b| b.chebyshev(s.cell)).min()?;
                let facing_in = beams.contains(&s.cell.step(s.facing));
                (d <= 1).then_some((d, !facing_in, s.player?))
            })
            .min();
        if let Some((_, _, p)) = best {
            if p != self.ctx.self_id {
                self.suspicion[p] += 1;
            }
        }
    }

    fn vote(&mut self) -> PlayerAction {
        let me = self.ctx.self_id;
        let suspect = (0..self.suspicion.len())
            .filter(|&p| p != me && self.suspicion[p] > 0 && self.perc.is_active(p))
            .max_by_key(|&p| (self.suspicion[p], std::cmp::Reverse(p)));
        if let Some(p) = suspect {
            return PlayerAction::VoteFor(p as u8);
        }
        if let Some(partner) = self.ctx.partner {
            if let Some(t) = self.perc.ballot(partner) {
                if t != me && self.perc.is_active(t) {
                    return PlayerAction::VoteFor(t as u8);
                }
            }
        }
        if self.params.follow_majority {
            if let Some(t) = modal_ballot(&self.perc, me, &[]) {
                return PlayerAction::VoteFor(t as u8);
            }
        }
        PlayerAction::VoteAbstain
    }

    fn decide(&mut self) -> PlayerAction {
        let me = self.ctx.self_id;
        if self.perc.frozen || !self.perc.is_active(me) {
            return PlayerAction::Noop;
        }
        if self.perc.voting {
            return self.vote();
        }
        self.note_beams();
        let Some(pose) = self.perc.pose else {
            return random_walk(&mut self.rng);
        };
        if self.params.distraction > 0.0 && self.rng.unit() < self.params.distraction {
            return random_walk(&mut self.rng);
        }
        if let Some(partner) = self.ctx.partner {
            let seen = self.perc.seen.iter().find(|s| s.player == Some(partner) && !s.frozen);
            if let Some(s) = seen {
                if s.cell.chebyshev(pose.cell) > 2 {
                    let goal = [s.cell];
                    return travel(&self.perc, &mut self.rng, pose, &goal, self.params.face_travel);
                }
            }
        }
        let goals = if self.perc.inventory < self.perc.capacity() {
            let full = self.perc.pads_believed_full();
            if !full.is_empty() {
                full
            } else if self.perc.inventory > 0 {
                self.perc.nav.map().grates().to_vec()
            } else {
                self.perc.nav.map().pads().to_vec()
            }
        } else {
            self.perc.nav.map().grates().to_vec()
        };
        travel(&self.perc, &mut self.rng, pose, &goals, self.params.face_travel)
    }
}

impl Policy for Collector {
    fn act(&mut self, obs: &ObservationBundle) -> PlayerAction {
        self.perc.update(obs, self.last);
        let a = self.decide();
        self.last = a;
        a
    }
}

/// Most common published target among other players, ignoring `me`,
/// `exclude` and inactive players. Ties go to the lower id.
fn modal_ballot(perc: &Perception, me: PlayerId, exclude: &[PlayerId]) -> Option<PlayerId> {
    let n = perc.vote_matrix.len();
    let mut counts = vec![0u32; n];
    for voter in (0..n).filter(|&v| v != me) {
        if let Some(t) = perc.ballot(voter) {
            if t != me && !exclude.contains(&t) && perc.is_active(t) {
                counts[t] += 1;
            }
        }
    }
    (0..n)
        .filter(|&t| counts[t] > 0)
        .max_by_key(|&t| (counts[t], std::cmp::Reverse(t)))
}

/// Hunts the nearest visible crewmate and fires once one stands in the
/// footprint. With a camp room it stays there and only engages players
/// nearby.
pub struct Chaser {
    ctx: PolicyContext,
    params: PolicyParams,
    camp: Option<Room>,
    perc: Perception,
    rng: EpisodeRng,
    last: PlayerAction,
    steps_since_fire: u64,
    room_visits: [u64; 5],
    last_target: Option<(Cell, u64)>,
    waypoint: Option<Cell>,
}

impl Chaser {
    pub fn new(ctx: PolicyContext, params: PolicyParams, camp: Option<Room>, seed: u64) -> Self {
        Self {
            perc: Perception::new(&ctx),
            ctx,
            params,
            camp,
            rng: EpisodeRng::from_seed(seed),
            last: PlayerAction::Noop,
            steps_since_fire: u64::MAX / 2,
            room_visits: [0; 5],
            last_target: None,
            waypoint: None,
        }
    }

    pub fn perception(&self) -> &Perception {
        &self.perc
    }

    fn hits(&self, from: Cell, facing: Direction, target: Cell) -> bool {
        beam_footprint(from, facing, self.perc.nav.map(), self.ctx.rules.beam).contains(&target)
    }

    /// Cells from which some facing puts `target` in the footprint.
    fn firing_spots(&self, target: Cell) -> Vec<Cell> {
        let b = self.ctx.rules.beam;
        let first = if b.include_own_row { 0 } else { 1 };
        let mut out = Vec::new();
        for f in Direction::ALL {
            for fwd in first..=b.forward_span {
                for lat in -b.lateral_span..=b.lateral_span {
                    let c = target.relative(f, -fwd, -lat);
                    if c != target && self.perc.nav.walkable(c) && !out.contains(&c) && self.hits(c, f, target) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    fn vote(&mut self) -> PlayerAction {
        if self.perc.voting_step <= 1 {
            return PlayerAction::VoteAbstain;
        }
        match modal_ballot(&self.perc, self.ctx.self_id, &self.ctx.teammates) {
            Some(t) => PlayerAction::VoteFor(t as u8),
            None => PlayerAction::VoteAbstain,
        }
    }

    fn patrol(&mut self, pose: Pose) -> PlayerAction {
        let nav = self.perc.nav.clone();
        let goal = match self.camp {
            Some(room) if nav.room_of(pose.cell) != Some(room) => {
                self.waypoint = None;
                nav.room_center(room)
            }
            Some(room) => {
                if self.waypoint.is_none_or(|w| w == pose.cell) {
                    let cells: Vec<Cell> = nav
                        .walkable_cells()
                        .iter()
                        .copied()
                        .filter(|c| nav.room_of(*c) == Some(room))
                        .collect();
                    self.waypoint = Some(cells[self.rng.below(cells.len() as u64) as usize]);
                }
                self.waypoint.expect("set above")
            }
            None => {
                let here = nav.room_of(pose.cell);
                let room = Room::ALL
                    .into_iter()
                    .filter(|r| Some(*r) != here)
                    .min_by_key(|r| (self.room_visits[r.index()], r.index()))
                    .expect("five rooms");
                nav.room_center(room)
            }
        };
        travel(&self.perc, &mut self.rng, pose, &[goal], self.params.face_travel)
    }

    fn decide(&mut self) -> PlayerAction {
        let me = self.ctx.self_id;
        if !self.perc.is_active(me) || self.perc.frozen {
            return PlayerAction::Noop;
        }
        if self.perc.voting {
            return self.vote();
        }
        self.steps_since_fire = self.steps_since_fire.saturating_add(1);
        let now = self.perc.situation_steps;
        let Some(pose) = self.perc.pose else {
            return random_walk(&mut self.rng);
        };
        let nav = self.perc.nav.clone();
        if let Some(r) = nav.room_of(pose.cell) {
            self.room_visits[r.index()] = now;
        }
        if self.params.distraction > 0.0 && self.rng.unit() < self.params.distraction {
            return random_walk(&mut self.rng);
        }

        let camp = self.camp;
        let targets: Vec<Cell> = self
            .perc
            .seen
            .iter()
            .filter(|s| !s.frozen)
            .filter(|s| s.player.is_none_or(|p| p != me && !self.ctx.teammates.contains(&p)))
            .filter(|s| match camp {
                Some(room) => nav.room_of(s.cell) == Some(room) || s.cell.chebyshev(pose.cell) <= 4,
                None => true,
            })
            .map(|s| s.cell)
            .collect();

        let ready = self.steps_since_fire > u64::from(self.ctx.rules.freeze_cooldown);
        if ready && targets.iter().any(|t| self.hits(pose.cell, pose.facing, *t)) {
            if self.rng.unit() < self.params.trigger_rate {
                self.steps_since_fire = 0;
                return PlayerAction::Fire;
            }
            return PlayerAction::Noop;
        }

        let nearest = targets
            .iter()
            .copied()
            .min_by_key(|t| (nav.distance(pose.cell, *t), t.chebyshev(pose.cell), t.y, t.x));
        if let Some(t) = nearest {
            self.last_target = Some((t, now));
            if ready {
                for f in [pose.facing.turn_right(), pose.facing.turn_left(), pose.facing.opposite()] {
                    if self.hits(pose.cell, f, t) {
                        return turn_toward(pose.facing, f);
                    }
                }
            }
            let spots: Vec<Cell> = self
                .firing_spots(t)
                .into_iter()
                .filter(|c| !self.perc.occupied(*c))
                .collect();
            if !spots.is_empty() && !spots.contains(&pose.cell) {
                return travel(&self.perc, &mut self.rng, pose, &spots, false);
            }
            return PlayerAction::Noop;
        }
        if let Some((c, seen_at)) = self.last_target {
            if now.saturating_sub(seen_at) < 15 && c != pose.cell {
                return travel(&self.perc, &mut self.rng, pose, &[c], self.params.face_travel);
            }
            self.last_target = None;
        }
        self.patrol(pose)
    }
}

impl Policy for Chaser {
    fn act(&mut self, obs: &ObservationBundle) -> PlayerAction {
        self.perc.update(obs, self.last);
        let a = self.decide();
        self.last = a;
        a
    }
}
