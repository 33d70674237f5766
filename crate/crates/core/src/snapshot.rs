//! Read-only projection of a session for renderers.

use serde::{Deserialize, Serialize};

use crate::geom::{Direction, GridPos};
use crate::model::{AgentId, AgentKind, ModalKind};
use crate::outcome::OutcomeContent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub level: u8,
    pub tick: u64,
    pub phase: String,
    /// Terrain of the area the player is in (`#` wall, `.` open).
    pub tiles: Vec<String>,
    /// Top view with markers; see [`MINIMAP_LEGEND`].
    pub minimap: Vec<String>,
    pub agents: Vec<AgentView>,
    pub items: Vec<ItemView>,
    pub hud: Hud,
    pub modal: Option<ModalView>,
}

pub const MINIMAP_LEGEND: &[(char, &str)] = &[
    ('#', "wall"),
    ('.', "open"),
    ('r', "red path"),
    ('o', "junction"),
    ('*', "diamond"),
    ('D', "magical door"),
    ('B', "active Bob"),
    ('b', "waiting Bob"),
    ('R', "red man"),
    ('P', "player"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentView {
    pub id: AgentId,
    pub kind: AgentKind,
    pub pos: GridPos,
    /// Name tag hovering over a Bob.
    pub tag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Diamond,
    Door,
    Heart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemView {
    pub kind: ItemKind,
    pub pos: GridPos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeReadout {
    pub edge: u32,
    /// First step of the corridor; `None` for the corridor currently walked.
    pub direction: Option<Direction>,
    pub slope: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceMeterView {
    pub player_to_bob: f64,
    pub nearest_enemy_to_bob: f64,
    pub player_label: String,
    pub enemy_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hud {
    pub score: u64,
    pub health: Option<u8>,
    /// Instruction board.
    pub instructions: Vec<Direction>,
    pub warning: Option<String>,
    pub slope_readouts: Vec<SlopeReadout>,
    pub distance_meters: Option<DistanceMeterView>,
    /// Name of the Bob to rescue.
    pub active_bob: Option<String>,
    pub red_men_reached: Option<u32>,
    pub population: Option<u32>,
    /// Whether the Next button is live.
    pub next_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalView {
    pub kind: ModalKind,
    pub text: String,
    /// Only present on the learning-outcome prompt.
    pub outcome: Option<OutcomeContent>,
}
