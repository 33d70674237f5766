//! Append-only game event log and its canonical digest.
//!
//! Canonical serialization: each event is written field by field in
//! declaration order; integers little-endian, enum variants as a one-byte
//! discriminant. The digest is 64-bit FNV-1a over the concatenation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::GridPos;
use crate::model::{AgentId, ModalKind, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningReason {
    /// Training move that leaves the red path.
    OffPath,
    /// Maze move that differs from the recorded instructions.
    WrongPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartReason {
    Deviation,
    HealthDepleted,
    BobLost,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    Move { agent: AgentId, from: GridPos, to: GridPos },
    Warning { reason: WarningReason },
    Restart { reason: RestartReason },
    DiamondCollected { pos: GridPos, points: u32, score: u64 },
    HealthChanged { agent: AgentId, delta: i32, health: u8 },
    BobClassified { bob: u8, side: Side },
    OutcomeDisplayed { level: u8 },
    LevelCompleted { level: u8, score: u64 },
    DialogueShown { bob: u8 },
    ModalAcknowledged { modal: ModalKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameEvent {
    pub level: u8,
    pub tick: u64,
    pub kind: EventKind,
}

pub const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(FNV_OFFSET_BASIS)
    }
}

impl Fnv1a {
    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a::default();
    h.write(bytes);
    h.finish()
}

fn pos_bytes(out: &mut Vec<u8>, p: GridPos) {
    out.extend_from_slice(&p.row.to_le_bytes());
    out.extend_from_slice(&p.col.to_le_bytes());
}

fn side_byte(s: Side) -> u8 {
    match s {
        Side::Player => 0,
        Side::RedMen => 1,
    }
}

fn modal_byte(m: ModalKind) -> u8 {
    match m {
        ModalKind::Warning => 0,
        ModalKind::Dialogue => 1,
        ModalKind::Heart => 2,
        ModalKind::Loss => 3,
        ModalKind::Outcome => 4,
    }
}

impl GameEvent {
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.level);
        out.extend_from_slice(&self.tick.to_le_bytes());
        match &self.kind {
            EventKind::Move { agent, from, to } => {
                out.push(0);
                out.extend_from_slice(&agent.to_le_bytes());
                pos_bytes(out, *from);
                pos_bytes(out, *to);
            }
            EventKind::Warning { reason } => {
                out.push(1);
                out.push(*reason as u8);
            }
            EventKind::Restart { reason } => {
                out.push(2);
                out.push(*reason as u8);
            }
            EventKind::DiamondCollected { pos, points, score } => {
                out.push(3);
                pos_bytes(out, *pos);
                out.extend_from_slice(&points.to_le_bytes());
                out.extend_from_slice(&score.to_le_bytes());
            }
            EventKind::HealthChanged { agent, delta, health } => {
                out.push(4);
                out.extend_from_slice(&agent.to_le_bytes());
                out.extend_from_slice(&delta.to_le_bytes());
                out.push(*health);
            }
            EventKind::BobClassified { bob, side } => {
                out.push(5);
                out.push(*bob);
                out.push(side_byte(*side));
            }
            EventKind::OutcomeDisplayed { level } => {
                out.push(6);
                out.push(*level);
            }
            EventKind::LevelCompleted { level, score } => {
                out.push(7);
                out.push(*level);
                out.extend_from_slice(&score.to_le_bytes());
            }
            EventKind::DialogueShown { bob } => {
                out.push(8);
                out.push(*bob);
            }
            EventKind::ModalAcknowledged { modal } => {
                out.push(9);
                out.push(modal_byte(*modal));
            }
        }
    }
}

/// Digest of a whole log; the empty log hashes to the FNV offset basis.
pub fn log_hash(log: &[GameEvent]) -> u64 {
    let mut h = Fnv1a::default();
    let mut buf = Vec::with_capacity(32);
    for ev in log {
        buf.clear();
        ev.encode(&mut buf);
        h.write(&buf);
    }
    h.finish()
}

impl fmt::Display for GameEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{} t={} ", self.level, self.tick)?;
        match &self.kind {
            EventKind::Move { agent, from, to } => write!(f, "move agent={agent} {from}->{to}"),
            EventKind::Warning { reason } => write!(f, "warning {reason:?}"),
            EventKind::Restart { reason } => write!(f, "restart {reason:?}"),
            EventKind::DiamondCollected { pos, points, score } => {
                write!(f, "diamond {pos} +{points} score={score}")
            }
            EventKind::HealthChanged { agent, delta, health } => {
                write!(f, "health agent={agent} {delta:+} -> {health}")
            }
            EventKind::BobClassified { bob, side } => write!(f, "bob_classified bob={bob} side={side:?}"),
            EventKind::OutcomeDisplayed { level } => write!(f, "outcome_displayed level={level}"),
            EventKind::LevelCompleted { level, score } => {
                write!(f, "level_completed level={level} score={score}")
            }
            EventKind::DialogueShown { bob } => write!(f, "dialogue bob={bob}"),
            EventKind::ModalAcknowledged { modal } => write!(f, "acknowledged {modal:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log_is_offset_basis() {
        assert_eq!(log_hash(&[]), FNV_OFFSET_BASIS);
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn single_field_change_changes_digest() {
        let a = GameEvent { level: 2, tick: 4, kind: EventKind::HealthChanged { agent: 0, delta: -10, health: 90 } };
        let mut b = a.clone();
        b.kind = EventKind::HealthChanged { agent: 0, delta: -10, health: 80 };
        assert_ne!(log_hash(&[a.clone()]), log_hash(&[b]));
        let mut c = a.clone();
        c.tick = 5;
        assert_ne!(log_hash(&[a]), log_hash(&[c]));
    }
}
