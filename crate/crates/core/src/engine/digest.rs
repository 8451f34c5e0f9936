use super::{Phase, PadState, Role, Status, VoteChoice, WorldState};
use crate::config::GameConfig;
use crate::map::GameMap;
use sha2::{Digest, Sha256};

pub(super) fn static_digest(config: &GameConfig, map: &GameMap) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(config.to_toml_string().as_bytes());
    h.update([0u8]);
    h.update(map.to_text().as_bytes());
    h.finalize().into()
}

pub(super) fn state_digest(s: &WorldState) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(s.static_digest);
    h.update(s.seed.to_le_bytes());
    for p in &s.players {
        h.update((p.id as u32).to_le_bytes());
        h.update([
            match p.role {
                Role::Crewmate => 0,
                Role::Impostor => 1,
            },
            p.color,
            p.orientation.index() as u8,
            match p.status {
                Status::Active => 0,
                Status::Frozen => 1,
                Status::Jailed => 2,
            },
        ]);
        h.update(p.position.x.to_le_bytes());
        h.update(p.position.y.to_le_bytes());
        h.update(p.inventory.to_le_bytes());
        h.update(p.cooldown_remaining.to_le_bytes());
        match p.pre_vote_position {
            Some(c) => {
                h.update([1]);
                h.update(c.x.to_le_bytes());
                h.update(c.y.to_le_bytes());
            }
            None => h.update([0]),
        }
    }
    for pad in &s.pads {
        match pad {
            PadState::Occupied => h.update([0, 0, 0, 0, 0]),
            PadState::Respawning(t) => {
                h.update([1]);
                h.update(t.to_le_bytes());
            }
        }
    }
    h.update([match s.phase {
        Phase::Situation => 0,
        Phase::Voting => 1,
    }]);
    for v in [s.situation_clock, s.voting_clock, s.episode_clock, s.progress, s.voting_rounds] {
        h.update(v.to_le_bytes());
    }
    for row in &s.ledger {
        h.update(match row {
            VoteChoice::Target(t) => [0, *t],
            VoteChoice::Abstain => [1, 0],
            VoteChoice::Inactive => [2, 0],
        });
    }
    for row in &s.final_ballots {
        h.update(match row {
            VoteChoice::Target(t) => [0, *t],
            VoteChoice::Abstain => [1, 0],
            VoteChoice::Inactive => [2, 0],
        });
    }
    let (stream, pos) = s.rng.fingerprint();
    h.update(stream.to_le_bytes());
    h.update(pos.to_le_bytes());
    h.update([
        s.terminal.map_or(255, |w| w.index() as u8),
        s.last_crew_inactivation.map_or(255, |c| c as u8),
    ]);
    for (firer, cells) in &s.recent_beams {
        h.update((*firer as u32).to_le_bytes());
        for c in cells {
            h.update(c.x.to_le_bytes());
            h.update(c.y.to_le_bytes());
        }
        h.update([0xff]);
    }
    h.finalize().into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
