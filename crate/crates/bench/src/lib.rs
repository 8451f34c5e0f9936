//! Fixtures shared by the criterion benches in `benches/`.

use hidden_agenda::rng::EpisodeRng;
use hidden_agenda::{GameConfig, PlayerAction, WorldState};

/// A state `steps` random situation actions into an episode.
pub fn mid_game(seed: u64, steps: usize) -> WorldState {
    let mut s = WorldState::reset(GameConfig::default(), seed).expect("default config is valid");
    let mut rng = EpisodeRng::from_seed(seed ^ 0x5eed);
    for _ in 0..steps {
        if s.is_terminal() {
            break;
        }
        let acts = random_actions(&mut rng, s.num_players());
        s.step(&acts).expect("episode is live");
    }
    s
}

pub fn random_actions(rng: &mut EpisodeRng, n: usize) -> Vec<PlayerAction> {
    (0..n).map(|_| PlayerAction::SITUATION[rng.below(8) as usize]).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn mid_game_is_deterministic() {
        assert_eq!(super::mid_game(3, 150).digest(), super::mid_game(3, 150).digest());
    }
}
