//! Human play over the network: a session streams rendered frames and
//! running totals to one client, applies the client's held keys to the
//! environment and records each episode for exact replay.

pub mod keymap;
pub mod protocol;
pub mod recording;
pub mod server;

pub use keymap::{parse_buttons, resolve_keys, KeySnapshot};
pub use protocol::{ClientMsg, Frame, ProtocolError, ServerMsg, StateLine};
pub use recording::{EpisodeRecording, Footer, Recorder, RecordingError, ReplayError};
pub use server::{run_session, serve_one, Pacing, ServeConfig, SessionSummary, TcpClient, TransportKind};

use hasard_core::env::EnvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlayError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Recording(#[from] RecordingError),
    #[error("websocket: {0}")]
    WebSocket(#[from] tungstenite::Error),
    #[error("websocket handshake failed: {0}")]
    Handshake(String),
}
