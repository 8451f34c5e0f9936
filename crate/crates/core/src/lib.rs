//! Hidden Agenda: a partially observable social-deduction gridworld.

pub mod agents;
pub mod config;
pub mod engine;
pub mod env;
pub mod geometry;
pub mod harness;
pub mod map;
pub mod observation;
pub mod rng;

pub use config::{ConfigError, GameConfig};
pub use engine::*;
pub use geometry::{Cell, Direction};
pub use map::{CellKind, GameMap, MapError};
