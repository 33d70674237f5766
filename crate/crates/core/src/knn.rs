//! Level 3: race the red men to each Bob. The first side to hold a majority
//! of the k = 3 nearest claimants (the first arrivals) wins Bob over. The
//! player carries two votes and every red man one.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geom::{euclidean, Direction, GridPos, TileGrid};
use crate::model::{AgentId, AgentKind, AgentState, InvalidCommand, Side, PLAYER_ID};
use crate::outcome::OutcomeContent;

pub const DEFAULT_K: u32 = 3;
pub const PLAYER_VOTES: u8 = 2;
pub const ENEMY_VOTES: u8 = 1;
pub const DEFAULT_ARRIVAL_RADIUS: u32 = 1;
/// Red men move one tile every this many player moves.
pub const DEFAULT_TICKS_PER_STEP: u32 = 2;
pub const BOB_COUNT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bob {
    pub name: String,
    pub pos: GridPos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedManSpec {
    pub spawn: GridPos,
    /// Pursuit speed expressed as a period: one tile per `ticks_per_step` ticks.
    pub ticks_per_step: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level3Spec {
    pub town: TileGrid,
    pub player_spawn: GridPos,
    /// Activation order.
    pub bobs: Vec<Bob>,
    pub red_men: Vec<RedManSpec>,
    pub k: u32,
    pub player_votes: u8,
    pub enemy_votes: u8,
    /// Chebyshev radius, in tiles.
    pub arrival_radius: u32,
    pub outcome: OutcomeContent,
}

impl Level3Spec {
    /// Agent id of the `i`-th Bob; Bobs follow the red men.
    pub fn bob_agent_id(&self, i: usize) -> AgentId {
        (1 + self.red_men.len() + i) as AgentId
    }

    /// Open tiles within the arrival radius of `bob`.
    pub fn arrival_zone(&self, bob: usize) -> Vec<GridPos> {
        let Some(b) = self.bobs.get(bob) else { return Vec::new() };
        let r = self.arrival_radius;
        let r0 = b.pos.row.saturating_sub(r);
        let c0 = b.pos.col.saturating_sub(r);
        let mut zone = Vec::new();
        for row in r0..=b.pos.row + r {
            for col in c0..=b.pos.col + r {
                let p = GridPos::new(row, col);
                if self.town.is_open(p) {
                    zone.push(p);
                }
            }
        }
        zone
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum KnnError {
    #[error("k = {0} is even; majority ties would be undefined")]
    EvenK(u32),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("the active Bob has not been won and collected yet")]
    NotYetResolved,
}

/// Smallest vote count that is a strict majority of `k` neighbours.
pub fn majority_threshold(k: u32) -> Result<u32, KnnError> {
    match k {
        0 => Err(KnnError::ZeroK),
        k if k % 2 == 0 => Err(KnnError::EvenK(k)),
        k => Ok(k / 2 + 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arrival {
    pub agent: AgentId,
    pub side: Side,
    pub votes: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ArrivalError {
    #[error("agent {0} already reached this Bob")]
    AlreadyArrived(AgentId),
    #[error("this Bob has already been classified")]
    AlreadyResolved,
    #[error("agent {0} is outside the arrival radius")]
    NotInRange(AgentId),
    #[error("agent {0} cannot claim a Bob")]
    NotAClaimant(AgentId),
}

/// Arrival-ordered vote count for one Bob.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteTally {
    pub threshold: u32,
    pub arrivals: Vec<Arrival>,
    pub resolved: Option<Side>,
}

impl VoteTally {
    pub fn new(k: u32) -> Result<Self, KnnError> {
        Ok(Self { threshold: majority_threshold(k)?, arrivals: Vec::new(), resolved: None })
    }

    pub fn votes_for(&self, side: Side) -> u32 {
        self.arrivals.iter().filter(|a| a.side == side).map(|a| u32::from(a.votes)).sum()
    }

    /// Number of red men that have reached the Bob.
    pub fn red_men_reached(&self) -> usize {
        self.arrivals.iter().filter(|a| a.side == Side::RedMen).count()
    }

    /// Record an arrival; returns the winning side once a majority is reached.
    pub fn register(&mut self, agent: AgentId, side: Side, votes: u8) -> Result<Option<Side>, ArrivalError> {
        if self.resolved.is_some() {
            return Err(ArrivalError::AlreadyResolved);
        }
        if self.arrivals.iter().any(|a| a.agent == agent) {
            return Err(ArrivalError::AlreadyArrived(agent));
        }
        self.arrivals.push(Arrival { agent, side, votes });
        if self.votes_for(side) >= self.threshold {
            self.resolved = Some(side);
        }
        Ok(self.resolved)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level3State {
    pub active_bob: u8,
    pub tally: VoteTally,
    pub rescued: u8,
    /// Set while the loss message is showing after a restart.
    pub lost: bool,
    pub dialogue_pending: bool,
    pub heart_pending: bool,
    /// Player moves since the attempt started; drives red-man pacing.
    pub move_ticks: u64,
    pub completed: bool,
}

pub fn fresh_agents(spec: &Level3Spec) -> Vec<AgentState> {
    let mut agents = vec![AgentState::player(spec.player_spawn).with_votes(spec.player_votes)];
    for (i, r) in spec.red_men.iter().enumerate() {
        agents.push(AgentState::red_man(i as AgentId + 1, r.spawn).with_votes(spec.enemy_votes));
    }
    for (i, b) in spec.bobs.iter().enumerate() {
        agents.push(AgentState::bob(spec.bob_agent_id(i), b.pos));
    }
    agents
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnnTick {
    pub moves: Vec<(AgentId, GridPos, GridPos)>,
    pub arrivals: Vec<AgentId>,
    pub resolution: Option<Side>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceMeters<T> {
    pub player_to_bob: T,
    pub nearest_enemy_to_bob: T,
}

/// Euclidean distances from the player and the closest red man to the active Bob.
pub fn distance_meters<T: Float>(spec: &Level3Spec, agents: &[AgentState], active_bob: usize) -> Option<DistanceMeters<T>> {
    let bob = spec.bobs.get(active_bob)?.pos;
    let player = agents.iter().find(|a| a.id == PLAYER_ID)?.pos;
    let nearest = agents
        .iter()
        .filter(|a| a.kind == AgentKind::RedMan)
        .map(|a| euclidean::<T>(a.pos, bob))
        .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |m| m.min(d))))
        .unwrap_or_else(T::infinity);
    Some(DistanceMeters { player_to_bob: euclidean(player, bob), nearest_enemy_to_bob: nearest })
}

impl Level3State {
    pub fn fresh(spec: &Level3Spec) -> Result<Self, KnnError> {
        Ok(Self {
            active_bob: 0,
            tally: VoteTally::new(spec.k)?,
            rescued: 0,
            lost: false,
            dialogue_pending: false,
            heart_pending: false,
            move_ticks: 0,
            completed: false,
        })
    }

    fn side_of(spec: &Level3Spec, agent: &AgentState) -> Option<(Side, u8)> {
        match agent.kind {
            AgentKind::Player => Some((Side::Player, agent.votes.unwrap_or(spec.player_votes))),
            AgentKind::RedMan => Some((Side::RedMen, agent.votes.unwrap_or(spec.enemy_votes))),
            AgentKind::Bob => None,
        }
    }

    /// Register `agent` at the active Bob.
    pub fn register_arrival(&mut self, spec: &Level3Spec, agent: &AgentState) -> Result<Option<Side>, ArrivalError> {
        let (side, votes) = Self::side_of(spec, agent).ok_or(ArrivalError::NotAClaimant(agent.id))?;
        if self.tally.resolved.is_some() {
            return Err(ArrivalError::AlreadyResolved);
        }
        let bob = spec.bobs.get(self.active_bob as usize).ok_or(ArrivalError::AlreadyResolved)?;
        if agent.pos.chebyshev(bob.pos) > spec.arrival_radius {
            return Err(ArrivalError::NotInRange(agent.id));
        }
        self.tally.register(agent.id, side, votes)
    }

    fn try_arrive(&mut self, spec: &Level3Spec, agent: &AgentState, tick: &mut KnnTick) {
        if let Ok(res) = self.register_arrival(spec, agent) {
            tick.arrivals.push(agent.id);
            tick.resolution = res;
        }
    }

    /// Player step followed by red-man pursuit and arrival checks.
    /// On error nothing changes.
    pub fn move_tick(&mut self, spec: &Level3Spec, agents: &mut [AgentState], d: Direction) -> Result<KnnTick, InvalidCommand> {
        if self.completed {
            return Err(InvalidCommand::LevelCompleted);
        }
        let player_idx = agents.iter().position(|a| a.id == PLAYER_ID).expect("player present");
        let from = agents[player_idx].pos;
        let to = from.step(d).filter(|p| spec.town.is_open(*p)).ok_or(InvalidCommand::Blocked(d))?;
        let mut tick = KnnTick::default();
        agents[player_idx].pos = to;
        tick.moves.push((PLAYER_ID, from, to));
        self.move_ticks += 1;
        let player = agents[player_idx].clone();
        self.try_arrive(spec, &player, &mut tick);
        if self.tally.resolved.is_some() {
            return Ok(tick);
        }

        let zone = spec.arrival_zone(self.active_bob as usize);
        let dist = spec.town.distances_to_set(&zone);
        let mut ids: Vec<usize> = (0..agents.len()).filter(|i| agents[*i].kind == AgentKind::RedMan).collect();
        ids.sort_by_key(|i| agents[*i].id);
        for i in ids {
            let id = agents[i].id;
            if self.tally.arrivals.iter().any(|a| a.agent == id) {
                continue;
            }
            let period = spec.red_men.get(id as usize - 1).map_or(DEFAULT_TICKS_PER_STEP, |r| r.ticks_per_step.max(1));
            if self.move_ticks % u64::from(period) == 0 {
                if let Some(next) = pursuit_step(&spec.town, &dist, agents[i].pos) {
                    tick.moves.push((id, agents[i].pos, next));
                    agents[i].pos = next;
                }
            }
            let a = agents[i].clone();
            self.try_arrive(spec, &a, &mut tick);
            if self.tally.resolved.is_some() {
                break;
            }
        }
        Ok(tick)
    }

    /// Move on to the next Bob once the current one is won and its heart collected.
    /// Returns `true` when that was the last Bob.
    pub fn advance_rescue(&mut self, spec: &Level3Spec) -> Result<bool, KnnError> {
        if self.tally.resolved != Some(Side::Player) || self.dialogue_pending || self.heart_pending || self.completed {
            return Err(KnnError::NotYetResolved);
        }
        self.rescued += 1;
        if usize::from(self.rescued) >= spec.bobs.len() {
            self.completed = true;
        } else {
            self.active_bob += 1;
            self.tally = VoteTally::new(spec.k)?;
        }
        Ok(self.completed)
    }
}

/// One tile along a shortest path towards the zone described by `dist`.
/// Ties go to the first direction in N, S, E, W order.
pub fn pursuit_step(town: &TileGrid, dist: &crate::geom::DistanceMap, pos: GridPos) -> Option<GridPos> {
    let here = dist.get(pos)?;
    if here == 0 {
        return None;
    }
    town.open_neighbors(pos).map(|(_, p)| p).find(|p| dist.get(*p) == Some(here - 1))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::outcome::default_outcome;

    /// Open 11x11 town, player in a corner, red men far away.
    pub fn open_town() -> Level3Spec {
        Level3Spec {
            town: TileGrid::filled(11, 11, crate::geom::OPEN),
            player_spawn: GridPos::new(0, 0),
            bobs: vec![
                Bob { name: "Bob 1".into(), pos: GridPos::new(0, 4) },
                Bob { name: "Bob 2".into(), pos: GridPos::new(4, 4) },
                Bob { name: "Bob 3".into(), pos: GridPos::new(4, 0) },
            ],
            red_men: vec![
                RedManSpec { spawn: GridPos::new(10, 10), ticks_per_step: DEFAULT_TICKS_PER_STEP },
                RedManSpec { spawn: GridPos::new(10, 9), ticks_per_step: DEFAULT_TICKS_PER_STEP },
            ],
            k: DEFAULT_K,
            player_votes: PLAYER_VOTES,
            enemy_votes: ENEMY_VOTES,
            arrival_radius: DEFAULT_ARRIVAL_RADIUS,
            outcome: default_outcome(3),
        }
    }
}
