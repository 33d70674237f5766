//! Agents, commands and modal prompts shared by all three levels.

use serde::{Deserialize, Serialize};

use crate::geom::{Direction, GridPos};

pub type AgentId = u32;

/// The player is always agent 0.
pub const PLAYER_ID: AgentId = 0;
pub const MAX_HEALTH: u8 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Player,
    RedMan,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentState {
    pub id: AgentId,
    pub kind: AgentKind,
    pub pos: GridPos,
    /// Players only.
    pub health: Option<u8>,
    /// Level 3 claimants only.
    pub votes: Option<u8>,
}

impl AgentState {
    pub fn player(pos: GridPos) -> Self {
        Self { id: PLAYER_ID, kind: AgentKind::Player, pos, health: Some(MAX_HEALTH), votes: None }
    }

    pub fn red_man(id: AgentId, pos: GridPos) -> Self {
        Self { id, kind: AgentKind::RedMan, pos, health: None, votes: None }
    }

    pub fn bob(id: AgentId, pos: GridPos) -> Self {
        Self { id, kind: AgentKind::Bob, pos, health: None, votes: None }
    }

    pub fn with_votes(mut self, votes: u8) -> Self {
        self.votes = Some(votes);
        self
    }
}

/// One quantized player action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputCommand {
    Move(Direction),
    /// Dismiss the open modal (warning, dialogue, heart pickup, outcome).
    Acknowledge,
    /// Voluntarily restart the current level attempt.
    Restart,
    /// The "Next" button: enter the following level.
    Next,
}

impl InputCommand {
    /// Script token form: `north`, `ack`, `restart`, `next`.
    pub fn token(self) -> &'static str {
        match self {
            InputCommand::Move(d) => d.as_str(),
            InputCommand::Acknowledge => "ack",
            InputCommand::Restart => "restart",
            InputCommand::Next => "next",
        }
    }

    pub fn parse(token: &str) -> Option<InputCommand> {
        match token.to_ascii_lowercase().as_str() {
            "ack" | "acknowledge" | "enter" | "space" => Some(InputCommand::Acknowledge),
            "restart" => Some(InputCommand::Restart),
            "next" => Some(InputCommand::Next),
            other => Direction::parse(other).map(InputCommand::Move),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Player,
    RedMen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModalKind {
    Warning,
    Dialogue,
    Heart,
    Loss,
    Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modal {
    pub kind: ModalKind,
    pub text: String,
}

impl Modal {
    pub fn new(kind: ModalKind, text: impl Into<String>) -> Self {
        Self { kind, text: text.into() }
    }
}

/// Why a tick was refused. The state is left untouched.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvalidCommand {
    #[error("no modal is open")]
    NoModal,
    #[error("a {0:?} modal must be acknowledged first")]
    ModalOpen(ModalKind),
    #[error("the way {0} is blocked")]
    Blocked(Direction),
    #[error("the level is already completed")]
    LevelCompleted,
    #[error("`next` is handled by the campaign, not the level")]
    NotALevelCommand,
}
