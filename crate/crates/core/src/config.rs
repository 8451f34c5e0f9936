//! Game rule parameters and the flat key-value config file.

use crate::map::CANONICAL_MAP_NAME;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Most seats the map format and the observation layout support.
pub const MAX_PLAYERS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    pub num_players: usize,
    pub num_impostors: usize,
    pub fuel_goal: u32,
    pub situation_phase_length: u32,
    pub voting_phase_length: u32,
    pub freeze_cooldown: u32,
    pub episode_limit: u32,
    pub inventory_capacity: u32,
    pub beam_forward_span: u32,
    pub beam_lateral_span: u32,
    /// Alternate beam reading: also hit the cells directly beside the firer.
    pub beam_include_own_row: bool,
    pub fuel_respawn_delay: u32,
    pub reward_win: f64,
    pub reward_loss: f64,
    pub reward_pickup: f64,
    pub reward_deposit: f64,
    pub reward_freeze: f64,
    pub reward_frozen: f64,
    pub reward_vote_success: f64,
    pub reward_vote_failure: f64,
    pub map_name: String,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            num_players: 5,
            num_impostors: 1,
            fuel_goal: 32,
            situation_phase_length: 200,
            voting_phase_length: 25,
            freeze_cooldown: 50,
            episode_limit: 3000,
            inventory_capacity: 2,
            beam_forward_span: 2,
            beam_lateral_span: 1,
            beam_include_own_row: false,
            fuel_respawn_delay: 40,
            reward_win: 4.0,
            reward_loss: -4.0,
            reward_pickup: 0.25,
            reward_deposit: 0.25,
            reward_freeze: 1.0,
            reward_frozen: -1.0,
            reward_vote_success: 0.0,
            reward_vote_failure: 0.0,
            map_name: CANONICAL_MAP_NAME.to_string(),
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

impl GameConfig {
    pub fn num_crewmates(&self) -> usize {
        self.num_players.saturating_sub(self.num_impostors)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_players == 0 || self.num_players > MAX_PLAYERS {
            return Err(invalid(
                "num_players",
                format!("must be in 1..={MAX_PLAYERS}, got {}", self.num_players),
            ));
        }
        if self.num_impostors < 1 {
            return Err(invalid("num_impostors", "at least one impostor is required"));
        }
        if self.num_crewmates() <= self.num_impostors {
            return Err(invalid(
                "num_impostors",
                format!(
                    "crewmates ({}) must outnumber impostors ({})",
                    self.num_crewmates(),
                    self.num_impostors
                ),
            ));
        }
        let positive: [(&'static str, u32); 8] = [
            ("fuel_goal", self.fuel_goal),
            ("situation_phase_length", self.situation_phase_length),
            ("voting_phase_length", self.voting_phase_length),
            ("freeze_cooldown", self.freeze_cooldown),
            ("episode_limit", self.episode_limit),
            ("inventory_capacity", self.inventory_capacity),
            ("beam_forward_span", self.beam_forward_span),
            ("fuel_respawn_delay", self.fuel_respawn_delay),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(invalid(field, "must be strictly positive"));
            }
        }
        let rewards: [(&'static str, f64); 8] = [
            ("reward_win", self.reward_win),
            ("reward_loss", self.reward_loss),
            ("reward_pickup", self.reward_pickup),
            ("reward_deposit", self.reward_deposit),
            ("reward_freeze", self.reward_freeze),
            ("reward_frozen", self.reward_frozen),
            ("reward_vote_success", self.reward_vote_success),
            ("reward_vote_failure", self.reward_vote_failure),
        ];
        for (field, v) in rewards {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        if self.map_name.is_empty() {
            return Err(invalid("map_name", "must not be empty"));
        }
        Ok(())
    }

    /// Parses the TOML form. Missing keys take their defaults; unknown keys
    /// are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let known = Self::field_names();
        if let Some(k) = table.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let cfg: GameConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("GameConfig always serializes")
    }

    /// Builds a config from string key-value pairs (the shape foreign
    /// bindings hand over). Errors name the offending field.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = GameConfig::default();
        for (key, value) in pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<T, ConfigError> {
            v.trim()
                .parse()
                .map_err(|_| invalid(field, format!("cannot parse {v:?}")))
        }
        match key {
            "num_players" => self.num_players = num("num_players", value)?,
            "num_impostors" => self.num_impostors = num("num_impostors", value)?,
            "fuel_goal" => self.fuel_goal = num("fuel_goal", value)?,
            "situation_phase_length" => {
                self.situation_phase_length = num("situation_phase_length", value)?
            }
            "voting_phase_length" => self.voting_phase_length = num("voting_phase_length", value)?,
            "freeze_cooldown" => self.freeze_cooldown = num("freeze_cooldown", value)?,
            "episode_limit" => self.episode_limit = num("episode_limit", value)?,
            "inventory_capacity" => self.inventory_capacity = num("inventory_capacity", value)?,
            "beam_forward_span" => self.beam_forward_span = num("beam_forward_span", value)?,
            "beam_lateral_span" => self.beam_lateral_span = num("beam_lateral_span", value)?,
            "beam_include_own_row" => {
                self.beam_include_own_row = num("beam_include_own_row", value)?
            }
            "fuel_respawn_delay" => self.fuel_respawn_delay = num("fuel_respawn_delay", value)?,
            "reward_win" => self.reward_win = num("reward_win", value)?,
            "reward_loss" => self.reward_loss = num("reward_loss", value)?,
            "reward_pickup" => self.reward_pickup = num("reward_pickup", value)?,
            "reward_deposit" => self.reward_deposit = num("reward_deposit", value)?,
            "reward_freeze" => self.reward_freeze = num("reward_freeze", value)?,
            "reward_frozen" => self.reward_frozen = num("reward_frozen", value)?,
            "reward_vote_success" => self.reward_vote_success = num("reward_vote_success", value)?,
            "reward_vote_failure" => self.reward_vote_failure = num("reward_vote_failure", value)?,
            "map_name" => self.map_name = value.to_string(),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn field_names() -> &'static [&'static str] {
        &[
            "num_players",
            "num_impostors",
            "fuel_goal",
            "situation_phase_length",
            "voting_phase_length",
            "freeze_cooldown",
            "episode_limit",
            "inventory_capacity",
            "beam_forward_span",
            "beam_lateral_span",
            "beam_include_own_row",
            "fuel_respawn_delay",
            "reward_win",
            "reward_loss",
            "reward_pickup",
            "reward_deposit",
            "reward_freeze",
            "reward_frozen",
            "reward_vote_success",
            "reward_vote_failure",
            "map_name",
        ]
    }

    /// Flat view of every field, in declaration order.
    pub fn to_pairs(&self) -> BTreeMap<&'static str, String> {
        let table: toml::Table = toml::Table::try_from(self).expect("GameConfig always serializes");
        Self::field_names()
            .iter()
            .map(|k| {
                let v = match &table[*k] {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (*k, v)
            })
            .collect()
    }
}
