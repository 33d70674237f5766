//! Level 2: a maze of junctions joined by corridors. Every corridor carries
//! a slope label and the steepest descent at each junction leads to the
//! magical door at the lowest point. Red men wander and drain health.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::geom::{round1, Direction, GridPos, TileGrid};
use crate::model::AgentState;
use crate::outcome::OutcomeContent;
use crate::rng::Rng;

pub const DEFAULT_DAMAGE: u8 = 10;
pub const DEFAULT_DAMAGE_RADIUS: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Junction {
    pub id: u32,
    pub pos: GridPos,
    pub elevation: f64,
}

/// Directed corridor segment; `slope` is the elevation drop per tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    pub length: u32,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnemySpec {
    pub spawn: GridPos,
    pub domain: Vec<GridPos>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level2Spec {
    pub maze: TileGrid,
    pub junctions: Vec<Junction>,
    pub edges: Vec<Edge>,
    pub start: u32,
    pub goal: u32,
    pub enemies: Vec<EnemySpec>,
    pub damage: u8,
    /// Chebyshev radius, in tiles.
    pub damage_radius: u32,
    pub outcome: OutcomeContent,
}

/// Drop per tile from `from_elevation` to `to_elevation`.
pub fn slope<T: num_traits::Float>(from_elevation: T, to_elevation: T, length: u32) -> T {
    (from_elevation - to_elevation) / T::from(length).unwrap_or_else(T::one)
}

impl Level2Spec {
    pub fn junction(&self, id: u32) -> Option<&Junction> {
        self.junctions.iter().find(|j| j.id == id)
    }

    pub fn edge(&self, id: u32) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn outgoing(&self, junction: u32) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == junction)
    }

    pub fn start_pos(&self) -> GridPos {
        self.junction(self.start).map_or(GridPos::new(0, 0), |j| j.pos)
    }

    pub fn goal_pos(&self) -> GridPos {
        self.junction(self.goal).map_or(GridPos::new(0, 0), |j| j.pos)
    }
}

/// Corridor between two junction tiles, endpoints included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corridor {
    pub tiles: Vec<GridPos>,
}

impl Corridor {
    pub fn a(&self) -> GridPos {
        self.tiles[0]
    }

    pub fn b(&self) -> GridPos {
        self.tiles[self.tiles.len() - 1]
    }

    pub fn length(&self) -> u32 {
        (self.tiles.len() - 1) as u32
    }
}

/// Tiles that act as junctions: every open tile whose degree is not 2, plus `extra`.
pub fn junction_tiles(grid: &TileGrid, extra: &[GridPos]) -> BTreeSet<GridPos> {
    grid.open_tiles()
        .filter(|p| grid.degree(*p) != 2 || extra.contains(p))
        .collect()
}

/// Walk every corridor between junction tiles; each is reported once.
pub fn trace_corridors(grid: &TileGrid, junctions: &BTreeSet<GridPos>) -> Vec<Corridor> {
    let mut out = Vec::new();
    for &j in junctions {
        for (_, first) in grid.open_neighbors(j) {
            let mut tiles = vec![j, first];
            let mut prev = j;
            let mut cur = first;
            while !junctions.contains(&cur) {
                let Some((_, next)) = grid.open_neighbors(cur).find(|(_, n)| *n != prev) else {
                    break;
                };
                prev = cur;
                cur = next;
                tiles.push(cur);
            }
            let n = tiles.len();
            if (tiles[0], tiles[1]) <= (tiles[n - 1], tiles[n - 2]) {
                out.push(Corridor { tiles });
            }
        }
    }
    out
}

/// Geometry derived from a spec: which tiles belong to which edge.
#[derive(Debug, Clone)]
pub struct Level2Layout {
    junction_at: BTreeMap<GridPos, u32>,
    /// Edge id -> corridor tiles oriented from `from` to `to`.
    edge_tiles: BTreeMap<u32, Vec<GridPos>>,
    /// Interior tile -> edge id.
    tile_edge: BTreeMap<GridPos, u32>,
}

impl Level2Layout {
    pub fn new(spec: &Level2Spec) -> Self {
        let junction_at: BTreeMap<GridPos, u32> = spec.junctions.iter().map(|j| (j.pos, j.id)).collect();
        let set: BTreeSet<GridPos> = junction_at.keys().copied().collect();
        let corridors = trace_corridors(&spec.maze, &set);
        let mut edge_tiles = BTreeMap::new();
        let mut tile_edge = BTreeMap::new();
        for e in &spec.edges {
            let (Some(from), Some(to)) = (spec.junction(e.from), spec.junction(e.to)) else {
                continue;
            };
            let found = corridors.iter().find_map(|c| {
                if c.length() != e.length {
                    None
                } else if c.a() == from.pos && c.b() == to.pos {
                    Some(c.tiles.clone())
                } else if c.b() == from.pos && c.a() == to.pos {
                    Some(c.tiles.iter().rev().copied().collect())
                } else {
                    None
                }
            });
            if let Some(tiles) = found {
                for t in &tiles[1..tiles.len() - 1] {
                    tile_edge.insert(*t, e.id);
                }
                edge_tiles.insert(e.id, tiles);
            }
        }
        Self { junction_at, edge_tiles, tile_edge }
    }

    pub fn junction_at(&self, pos: GridPos) -> Option<u32> {
        self.junction_at.get(&pos).copied()
    }

    pub fn edge_tiles(&self, edge: u32) -> Option<&[GridPos]> {
        self.edge_tiles.get(&edge).map(Vec::as_slice)
    }

    /// Edge whose interior contains `pos`.
    pub fn edge_at(&self, pos: GridPos) -> Option<u32> {
        self.tile_edge.get(&pos).copied()
    }
}

/// One outgoing corridor as shown at a junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeOption {
    pub edge: u32,
    pub to: u32,
    pub direction: Direction,
    pub slope: f64,
    /// Slope rounded to one decimal.
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("the player is not standing on a junction")]
pub struct NotAtJunction;

pub fn slope_label(s: f64) -> String {
    format!("{:.1}", round1(s))
}

/// Outgoing corridors at the junction under `pos`, in edge-id order.
pub fn junction_options(spec: &Level2Spec, layout: &Level2Layout, pos: GridPos) -> Result<Vec<EdgeOption>, NotAtJunction> {
    let junction = layout.junction_at(pos).ok_or(NotAtJunction)?;
    Ok(spec
        .outgoing(junction)
        .filter_map(|e| {
            let tiles = layout.edge_tiles(e.id)?;
            let direction = tiles[0].direction_to(tiles[1])?;
            Some(EdgeOption { edge: e.id, to: e.to, direction, slope: e.slope, label: slope_label(e.slope) })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level2State {
    pub completed: bool,
}

impl Level2State {
    pub fn fresh() -> Self {
        Self { completed: false }
    }
}

pub fn fresh_agents(spec: &Level2Spec) -> Vec<AgentState> {
    let mut agents = vec![AgentState::player(spec.start_pos())];
    for (i, e) in spec.enemies.iter().enumerate() {
        agents.push(AgentState::red_man(i as u32 + 1, e.spawn));
    }
    agents
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnemyTick {
    pub moves: Vec<(u32, GridPos, GridPos)>,
    pub in_radius: bool,
}

/// Every red man takes one uniform step inside its walk domain, in id order,
/// then the damage radius around `player` is checked.
pub fn enemy_tick(spec: &Level2Spec, agents: &mut [AgentState], player: GridPos, rng: &mut Rng) -> EnemyTick {
    let mut tick = EnemyTick::default();
    let mut enemies: Vec<&mut AgentState> = agents.iter_mut().filter(|a| a.kind == crate::model::AgentKind::RedMan).collect();
    enemies.sort_by_key(|a| a.id);
    for agent in enemies {
        let Some(domain) = spec.enemies.get(agent.id as usize - 1).map(|e| &e.domain) else {
            continue;
        };
        let options: Vec<GridPos> = spec
            .maze
            .open_neighbors(agent.pos)
            .map(|(_, p)| p)
            .filter(|p| domain.contains(p))
            .collect();
        if options.is_empty() {
            continue;
        }
        let to = options[rng.index(options.len())];
        tick.moves.push((agent.id, agent.pos, to));
        agent.pos = to;
    }
    tick.in_radius = agents
            .iter()
            .any(|a| a.kind == crate::model::AgentKind::RedMan && a.pos.chebyshev(player) <= spec.damage_radius);
    tick
}
