//! Lockstep play sessions served over WebSocket.
//!
//! [`Session`] is the synchronous core: it latches the human's action for
//! the open tick and steps the engine once per tick. [`server`] wraps
//! sessions in tasks and speaks the JSON protocol from [`protocol`].

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientMessage, Frame, FrameMode, SeatRequest, ServerMessage};
pub use server::{router, serve, AppState, ServerConfig};
pub use session::{RosterChoice, Session, SessionConfig, SessionError};
