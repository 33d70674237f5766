//! Wire messages. One JSON object per line, tagged by `type`, each carrying
//! `"version": 1`.

use serde::{Deserialize, Serialize};

use mlquest_core::{GameEvent, InputCommand, StateSnapshot};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// Start a new campaign session.
    Open {
        version: u32,
        #[serde(default)]
        seed: u64,
    },
    Command {
        version: u32,
        session_id: String,
        seq: u64,
        command: InputCommand,
    },
    Close {
        version: u32,
        session_id: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    BadMessage,
    BadVersion,
    BadSeq,
    UnknownSession,
    InvalidCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServerMessage {
    Opened {
        version: u32,
        session_id: String,
        snapshot: Box<StateSnapshot>,
    },
    Update {
        version: u32,
        session_id: String,
        seq_ack: u64,
        snapshot: Box<StateSnapshot>,
        /// Events logged since the previous acknowledgement.
        events: Vec<GameEvent>,
    },
    Reject {
        version: u32,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        session_id: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        seq: Option<u64>,
        error: RejectReason,
        detail: String,
    },
    Closed {
        version: u32,
        session_id: String,
    },
}

impl ServerMessage {
    pub fn reject(session_id: Option<String>, seq: Option<u64>, error: RejectReason, detail: impl Into<String>) -> Self {
        ServerMessage::Reject { version: PROTOCOL_VERSION, session_id, seq, error, detail: detail.into() }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("messages serialize");
        s.push('\n');
        s
    }
}
