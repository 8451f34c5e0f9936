//! Multi-seat episodic interface for in-process training code: per-player
//! observations out, joint actions in.

use crate::config::{ConfigError, GameConfig};
use crate::engine::{EngineError, Event, PlayerAction, WinCondition, WorldState};
use crate::observation::{observe_all, privileged_info, ObservationBundle, PrivilegedInfo, RenderMode};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("environment has not been reset")]
    NotReset,
    #[error("action index {0} is out of range")]
    BadAction(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvOptions {
    pub render: RenderMode,
    /// Attach hindsight identity and distance data to every step's info.
    pub privileged: bool,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            render: RenderMode::Rgb,
            privileged: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub events: Vec<Event>,
    pub win: Option<WinCondition>,
    /// Present only when the env was built with `privileged: true`.
    pub privileged: Option<Vec<PrivilegedInfo>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvStep {
    pub observations: Vec<ObservationBundle>,
    pub rewards: Vec<f64>,
    pub terminal: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct Env {
    config: GameConfig,
    opts: EnvOptions,
    state: Option<WorldState>,
}

impl Env {
    pub fn new(config: GameConfig, opts: EnvOptions) -> Result<Self, EnvError> {
        config.validate()?;
        Ok(Self {
            config,
            opts,
            state: None,
        })
    }

    /// Config from string pairs; errors name the offending field.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
        opts: EnvOptions,
    ) -> Result<Self, EnvError> {
        Self::new(GameConfig::from_pairs(pairs)?, opts)
    }

    pub fn from_config_file(path: impl AsRef<Path>, opts: EnvOptions) -> Result<Self, EnvError> {
        Self::new(GameConfig::load(path)?, opts)
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn state(&self) -> Option<&WorldState> {
        self.state.as_ref()
    }

    pub fn reset(&mut self, seed: u64) -> Result<Vec<ObservationBundle>, EnvError> {
        let state = WorldState::reset(self.config.clone(), seed)?;
        let obs = observe_all(&state, self.opts.render);
        self.state = Some(state);
        Ok(obs)
    }

    pub fn step(&mut self, actions: &[PlayerAction]) -> Result<EnvStep, EnvError> {
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;
        let out = state.step(actions)?;
        let privileged = self
            .opts
            .privileged
            .then(|| (0..state.num_players()).map(|p| privileged_info(state, p)).collect());
        Ok(EnvStep {
            observations: observe_all(state, self.opts.render),
            rewards: out.rewards,
            terminal: out.terminal.is_some(),
            info: StepInfo {
                events: out.events,
                win: out.terminal,
                privileged,
            },
        })
    }

    /// [`Env::step`] with flat action indices.
    pub fn step_indices(&mut self, actions: &[usize]) -> Result<EnvStep, EnvError> {
        let joint = actions
            .iter()
            .map(|&i| PlayerAction::from_index(i).ok_or(EnvError::BadAction(i)))
            .collect::<Result<Vec<_>, _>>()?;
        self.step(&joint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::{RGB_SIZE, VOTE_COLS, VOTE_ROWS};

    #[test]
    fn reset_matches_the_engine() {
        let mut env = Env::new(GameConfig::default(), EnvOptions::default()).unwrap();
        let obs = env.reset(7).unwrap();
        assert_eq!(obs.len(), 5);
        assert_eq!(env.state().unwrap().digest(), WorldState::reset(GameConfig::default(), 7).unwrap().digest());
        let rgb = obs[0].rgb();
        assert_eq!(rgb.len(), RGB_SIZE * RGB_SIZE * 3);
        assert_eq!(obs[0].vote_matrix.len(), VOTE_ROWS);
        assert_eq!(obs[0].vote_matrix[0].len(), VOTE_COLS);
    }

    #[test]
    fn config_errors_name_the_field() {
        let e = Env::from_pairs([("fuel_goal", "lots")], EnvOptions::default()).unwrap_err();
        assert!(e.to_string().contains("fuel_goal"), "{e}");
        let e = Env::from_pairs([("speed", "3")], EnvOptions::default()).unwrap_err();
        assert_eq!(e, EnvError::Config(ConfigError::UnknownKey("speed".into())));
    }

    #[test]
    fn step_before_reset_and_after_terminal_fail() {
        let mut env = Env::new(GameConfig::default(), EnvOptions::default()).unwrap();
        assert_eq!(env.step(&[PlayerAction::Noop; 5]).unwrap_err(), EnvError::NotReset);
        let mut env = Env::from_pairs([("episode_limit", "3")], EnvOptions::default()).unwrap();
        env.reset(1).unwrap();
        let mut last = None;
        for _ in 0..3 {
            last = Some(env.step_indices(&[0; 5]).unwrap());
        }
        let last = last.unwrap();
        assert!(last.terminal);
        assert_eq!(last.info.win, Some(WinCondition::DrawTimeout));
        assert!(matches!(env.step_indices(&[0; 5]), Err(EnvError::Engine(EngineError::Terminal(_)))));
        assert_eq!(env.step_indices(&[0, 0, 0, 0, 99]).unwrap_err(), EnvError::BadAction(99));
    }

    #[test]
    fn privileged_info_is_opt_in() {
        let mut plain = Env::new(GameConfig::default(), EnvOptions::default()).unwrap();
        plain.reset(3).unwrap();
        assert!(plain.step_indices(&[0; 5]).unwrap().info.privileged.is_none());
        let opts = EnvOptions {
            privileged: true,
            ..EnvOptions::default()
        };
        let mut hind = Env::new(GameConfig::default(), opts).unwrap();
        hind.reset(3).unwrap();
        let info = hind.step_indices(&[0; 5]).unwrap().info.privileged.unwrap();
        let roles = hind.state().unwrap().roles();
        for p in 0..5 {
            assert_eq!(info[p].identity.iter().sum::<u8>(), 1);
            assert_eq!(info[p].identity[p] == 1, roles[p] == crate::engine::Role::Impostor);
            assert_eq!(info[p].distances[p], 0.0);
        }
    }

    #[test]
    fn matches_a_direct_engine_run() {
        let mut env = Env::new(GameConfig::default(), EnvOptions::default()).unwrap();
        env.reset(11).unwrap();
        let mut s = WorldState::reset(GameConfig::default(), 11).unwrap();
        let mut rng = crate::rng::EpisodeRng::from_seed(4);
        for _ in 0..50 {
            let acts: Vec<usize> = (0..5).map(|_| rng.below(8) as usize).collect();
            let joint: Vec<PlayerAction> = acts.iter().map(|&i| PlayerAction::from_index(i).unwrap()).collect();
            let a = env.step_indices(&acts).unwrap();
            let b = s.step(&joint).unwrap();
            assert_eq!(a.rewards, b.rewards);
            assert_eq!(a.info.events, b.events);
            assert_eq!(a.observations, observe_all(&s, RenderMode::Rgb));
        }
    }
}
