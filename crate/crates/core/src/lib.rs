//! Deterministic, headless engine for the ML-Quest educational game.
//!
//! Three level state machines carry the game's machine-learning metaphors:
//! replaying a recorded path ([`supervised`]), steepest descent through a
//! junction maze ([`gradient`]) and a majority-vote race ([`knn`]).
//! [`levelgen`] builds and checks level files, [`session`] strings the
//! levels into a gated campaign with save files and scripted replay.

pub mod autoplay;
pub mod event;
pub mod geom;
pub mod gradient;
pub mod knn;
pub mod level;
pub mod levelgen;
pub mod model;
pub mod outcome;
pub mod rng;
pub mod session;
pub mod snapshot;
pub mod state;
pub mod supervised;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use event::{log_hash, EventKind, GameEvent};
pub use geom::{Direction, GridPos, TileGrid};
pub use level::{LevelFile, LevelSpec};
pub use model::{AgentState, InputCommand, InvalidCommand};
pub use rng::Rng;
pub use snapshot::StateSnapshot;
pub use session::Campaign;
pub use state::SessionState;

/// Distance meters at display precision.
pub type DistanceMeters = knn::DistanceMeters<f64>;
