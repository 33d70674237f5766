//! Sessions behind the transports. Each session sits behind its own lock so
//! its commands apply strictly one at a time; sessions share nothing else.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use mlquest_core::{Campaign, LevelSpec};

use crate::protocol::{ClientMessage, RejectReason, ServerMessage, PROTOCOL_VERSION};

struct Session {
    campaign: Campaign,
    last_seq: Option<u64>,
    /// Campaign log length at the last acknowledgement.
    sent: usize,
}

pub struct SessionRegistry {
    levels: Vec<LevelSpec>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl SessionRegistry {
    pub fn new(levels: Vec<LevelSpec>) -> Self {
        Self { levels, sessions: Mutex::new(HashMap::new()), next_id: AtomicU64::new(1) }
    }

    fn session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().expect("registry lock").get(id).cloned()
    }

    /// Parse one line and answer it.
    pub fn handle_line(&self, line: &str) -> ServerMessage {
        match serde_json::from_str::<ClientMessage>(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => ServerMessage::reject(None, None, RejectReason::BadMessage, e.to_string()),
        }
    }

    pub fn handle(&self, msg: ClientMessage) -> ServerMessage {
        let version = match &msg {
            ClientMessage::Open { version, .. } | ClientMessage::Command { version, .. } | ClientMessage::Close { version, .. } => *version,
        };
        if version != PROTOCOL_VERSION {
            return ServerMessage::reject(None, None, RejectReason::BadVersion, format!("unsupported version {version}"));
        }
        match msg {
            ClientMessage::Open { seed, .. } => {
                let campaign = match Campaign::new(self.levels.clone(), seed) {
                    Ok(c) => c,
                    Err(e) => return ServerMessage::reject(None, None, RejectReason::BadMessage, e.to_string()),
                };
                let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
                let snapshot = Box::new(campaign.snapshot());
                let session = Session { campaign, last_seq: None, sent: 0 };
                self.sessions.lock().expect("registry lock").insert(id.clone(), Arc::new(Mutex::new(session)));
                ServerMessage::Opened { version: PROTOCOL_VERSION, session_id: id, snapshot }
            }
            ClientMessage::Command { session_id, seq, command, .. } => {
                let Some(entry) = self.session(&session_id) else {
                    return ServerMessage::reject(Some(session_id), Some(seq), RejectReason::UnknownSession, "no such session");
                };
                let mut s = entry.lock().expect("session lock");
                if s.last_seq.is_some_and(|last| seq <= last) {
                    let detail = format!("seq {seq} is not after {}", s.last_seq.unwrap_or(0));
                    return ServerMessage::reject(Some(session_id), Some(seq), RejectReason::BadSeq, detail);
                }
                if let Err(e) = s.campaign.apply(command) {
                    return ServerMessage::reject(Some(session_id), Some(seq), RejectReason::InvalidCommand, e.to_string());
                }
                s.last_seq = Some(seq);
                let log = s.campaign.log();
                let events = log[s.sent..].to_vec();
                s.sent = log.len();
                ServerMessage::Update {
                    version: PROTOCOL_VERSION,
                    session_id,
                    seq_ack: seq,
                    snapshot: Box::new(s.campaign.snapshot()),
                    events,
                }
            }
            ClientMessage::Close { session_id, .. } => {
                if self.sessions.lock().expect("registry lock").remove(&session_id).is_none() {
                    return ServerMessage::reject(Some(session_id), None, RejectReason::UnknownSession, "no such session");
                }
                ServerMessage::Closed { version: PROTOCOL_VERSION, session_id }
            }
        }
    }
}
