//! Pair distance / vote similarity matrices and vote timelines.

use super::{EpisodeRecord, HarnessError};
use crate::engine::{Event, Phase, Role, Status, VoteChoice};
use crate::observation::{encode_png, SpriteSheet};
use serde::{Deserialize, Serialize};

/// Matrices indexed by slot. `seat_order[slot]` is the roster agent in that
/// slot: impostors first, then the closest crew pair, then the other crew.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMatrices {
    pub seat_order: Vec<usize>,
    /// Mean Euclidean cell distance; `None` if the pair was never both active
    /// in a situation step.
    pub distance: Vec<Vec<Option<f64>>>,
    /// Share of tallies, with both players active, where the final votes
    /// matched; `None` without any such tally.
    pub vote_similarity: Vec<Vec<Option<f64>>>,
    pub distance_samples: Vec<Vec<u64>>,
    pub voting_rounds: usize,
}

impl PairMatrices {
    /// Distance between two roster agents, ignoring the slot order.
    pub fn seat_distance(&self, a: usize, b: usize) -> Option<f64> {
        let sa = self.seat_order.iter().position(|s| *s == a)?;
        let sb = self.seat_order.iter().position(|s| *s == b)?;
        self.distance[sa][sb]
    }

    pub fn seat_similarity(&self, a: usize, b: usize) -> Option<f64> {
        let sa = self.seat_order.iter().position(|s| *s == a)?;
        let sb = self.seat_order.iter().position(|s| *s == b)?;
        self.vote_similarity[sa][sb]
    }
}

pub fn pair_metrics(records: &[EpisodeRecord]) -> Result<PairMatrices, HarnessError> {
    let first = records.first().ok_or(HarnessError::NoRecords)?;
    if records.iter().any(|r| r.config != first.config) {
        return Err(HarnessError::ConfigMismatch);
    }
    let n = first.config.num_players;
    let ni = first.config.num_impostors;
    let mut dist_sum = vec![vec![0.0f64; n]; n];
    let mut dist_cnt = vec![vec![0u64; n]; n];
    let mut same = vec![vec![0u64; n]; n];
    let mut rounds = vec![vec![0u64; n]; n];
    let mut voting_rounds = 0usize;

    for rec in records {
        let seat = rec.seat_of_player();
        rec.replay_with(|state, _, outcome| {
            let players = state.players();
            if state.phase() == Phase::Situation {
                for p in 0..n {
                    for q in p + 1..n {
                        if players[p].status == Status::Active && players[q].status == Status::Active {
                            let d = players[p].position.distance(players[q].position);
                            let (a, b) = (seat[p], seat[q]);
                            dist_sum[a][b] += d;
                            dist_sum[b][a] += d;
                            dist_cnt[a][b] += 1;
                            dist_cnt[b][a] += 1;
                        }
                    }
                }
            }
            if outcome.events.iter().any(|e| matches!(e, Event::PhaseEnded { .. })) {
                voting_rounds += 1;
                let ballots = state.final_ballots();
                for p in 0..n {
                    for q in p + 1..n {
                        if ballots[p] != VoteChoice::Inactive && ballots[q] != VoteChoice::Inactive {
                            let (a, b) = (seat[p], seat[q]);
                            rounds[a][b] += 1;
                            rounds[b][a] += 1;
                            if ballots[p] == ballots[q] {
                                same[a][b] += 1;
                                same[b][a] += 1;
                            }
                        }
                    }
                }
            }
        })?;
    }

    let dist = |a: usize, b: usize| -> Option<f64> {
        if a == b {
            Some(0.0)
        } else {
            (dist_cnt[a][b] > 0).then(|| dist_sum[a][b] / dist_cnt[a][b] as f64)
        }
    };
    let sim = |a: usize, b: usize| -> Option<f64> {
        if a == b {
            Some(1.0)
        } else {
            (rounds[a][b] > 0).then(|| same[a][b] as f64 / rounds[a][b] as f64)
        }
    };

    // Roster agents are role-keyed, so seats below `ni` are the impostors.
    let crew: Vec<usize> = (ni..n).collect();
    let mut pair: Option<(f64, usize, usize)> = None;
    for (i, &a) in crew.iter().enumerate() {
        for &b in &crew[i + 1..] {
            if let Some(d) = dist(a, b) {
                if pair.is_none_or(|(best, _, _)| d < best) {
                    pair = Some((d, a, b));
                }
            }
        }
    }
    let mut seat_order: Vec<usize> = (0..ni).collect();
    if let Some((_, a, b)) = pair {
        seat_order.extend([a, b]);
    }
    seat_order.extend(crew.iter().filter(|s| !seat_order.contains(s)).copied().collect::<Vec<_>>());

    let matrix = |f: &dyn Fn(usize, usize) -> Option<f64>| -> Vec<Vec<Option<f64>>> {
        seat_order
            .iter()
            .map(|&a| seat_order.iter().map(|&b| f(a, b)).collect())
            .collect()
    };
    Ok(PairMatrices {
        distance: matrix(&dist),
        vote_similarity: matrix(&sim),
        distance_samples: seat_order
            .iter()
            .map(|&a| seat_order.iter().map(|&b| dist_cnt[a][b]).collect())
            .collect(),
        seat_order,
        voting_rounds,
    })
}

/// Ledger after each voting step of one round; `rows[t][p]` is player `p`
/// after step `t + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteTimeline {
    pub round: usize,
    pub colors: Vec<u8>,
    pub roles: Vec<Role>,
    pub rows: Vec<Vec<VoteChoice>>,
}

impl VoteTimeline {
    /// Whitespace table: one line per step, `A` abstain, `-` inactive,
    /// otherwise the target player id.
    pub fn to_table(&self) -> String {
        let mut out = String::from("step");
        for p in 0..self.colors.len() {
            out.push_str(&format!(" p{p}"));
        }
        out.push('\n');
        for (t, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{:>4}", t + 1));
            for v in row {
                let cell = match v {
                    VoteChoice::Target(i) => i.to_string(),
                    VoteChoice::Abstain => "A".into(),
                    VoteChoice::Inactive => "-".into(),
                };
                out.push_str(&format!(" {cell:>2}"));
            }
            out.push('\n');
        }
        out
    }

    /// One row per player: its own color, then one block per step colored by
    /// its target, grey for abstain and black for inactive.
    pub fn to_png(&self, block: u32) -> Result<Vec<u8>, HarnessError> {
        let palette = SpriteSheet::standard().palette();
        let n = self.colors.len();
        let cols = self.rows.len() + 1;
        let (w, h) = (cols as u32 * block, n as u32 * block);
        let mut rgb = vec![0u8; (w * h * 3) as usize];
        for p in 0..n {
            for c in 0..cols {
                let color = if c == 0 {
                    palette.player(self.colors[p])
                } else {
                    match self.rows[c - 1][p] {
                        VoteChoice::Target(t) => palette.player(self.colors[t as usize]),
                        VoteChoice::Abstain => [128, 128, 128],
                        VoteChoice::Inactive => [0, 0, 0],
                    }
                };
                for y in 0..block {
                    for x in 0..block {
                        let px = ((p as u32 * block + y) * w + c as u32 * block + x) as usize * 3;
                        rgb[px..px + 3].copy_from_slice(&color);
                    }
                }
            }
        }
        encode_png(&rgb, w, h).map_err(|e| HarnessError::Image(e.to_string()))
    }
}

/// Ledger trace of voting round `round` (counted from 0).
pub fn vote_timeline(record: &EpisodeRecord, round: usize) -> Result<VoteTimeline, HarnessError> {
    let mut seen_rounds = 0usize;
    let mut in_round = false;
    let mut rows = Vec::new();
    record.replay_with(|state, _, outcome| {
        if in_round {
            let ended = outcome.events.iter().any(|e| matches!(e, Event::PhaseEnded { .. }));
            rows.push(if ended {
                state.final_ballots().to_vec()
            } else {
                state.ledger().to_vec()
            });
            if ended || state.is_terminal() {
                in_round = false;
            }
        }
        if outcome.events.iter().any(|e| matches!(e, Event::VotingStarted { .. })) {
            in_round = seen_rounds == round;
            seen_rounds += 1;
        }
    })?;
    if round >= seen_rounds {
        return Err(HarnessError::RoundOutOfRange {
            round,
            rounds: seen_rounds,
        });
    }
    Ok(VoteTimeline {
        round,
        colors: record.colors.clone(),
        roles: record.roles.clone(),
        rows,
    })
}
