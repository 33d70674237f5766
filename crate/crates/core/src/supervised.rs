//! Level 1: follow the red path while the instruction board records each
//! direction, then solve the maze by replaying exactly that sequence.

use serde::{Deserialize, Serialize};

use crate::geom::{Direction, GridPos, TileGrid};
use crate::outcome::OutcomeContent;

pub const DEFAULT_DIAMOND_POINTS: u32 = 10;

/// Open desert with a red path from the spawn tile to the maze approach.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overworld {
    pub grid: TileGrid,
    /// Spawn first, maze approach last.
    pub red_path: Vec<GridPos>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Maze {
    pub grid: TileGrid,
    pub entrance: GridPos,
    /// The magical door.
    pub exit: GridPos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level1Spec {
    pub overworld: Overworld,
    pub maze: Maze,
    pub canonical_sequence: Vec<Direction>,
    pub diamonds: Vec<GridPos>,
    pub diamond_points: u32,
    pub outcome: OutcomeContent,
}

impl Level1Spec {
    pub fn spawn(&self) -> GridPos {
        self.overworld.red_path.first().copied().unwrap_or(GridPos::new(0, 0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Training,
    Inference,
    Completed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level1State {
    pub phase: Phase,
    /// Instruction board contents.
    pub recorded: Vec<Direction>,
    pub replay_index: usize,
    pub diamonds_collected: u32,
    pub collected: Vec<GridPos>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum Level1Error {
    #[error("move {0} leaves the red path")]
    OffPath(Direction),
    #[error("expected {expected}, got {got}")]
    Deviation { expected: Direction, got: Direction },
    #[error("command not valid in the {0:?} phase")]
    WrongPhase(Phase),
    #[error("the recorded move {0} runs into a wall")]
    Blocked(Direction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingStep {
    pub from: GridPos,
    pub to: GridPos,
    pub reached_entrance: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferenceStep {
    pub from: GridPos,
    pub to: GridPos,
    pub diamond: Option<GridPos>,
    pub completed: bool,
}

impl Level1State {
    pub fn fresh() -> Self {
        Self {
            phase: Phase::Training,
            recorded: Vec::new(),
            replay_index: 0,
            diamonds_collected: 0,
            collected: Vec::new(),
        }
    }

    /// Advance along the red path. Nothing changes on error.
    pub fn training_move(
        &mut self,
        spec: &Level1Spec,
        player: &mut GridPos,
        d: Direction,
    ) -> Result<TrainingStep, Level1Error> {
        if self.phase != Phase::Training {
            return Err(Level1Error::WrongPhase(self.phase));
        }
        let path = &spec.overworld.red_path;
        let i = self.recorded.len();
        let next = player.step(d);
        let on_path = path.get(i) == Some(player) && next.is_some() && next == path.get(i + 1).copied();
        let Some(to) = next.filter(|_| on_path) else {
            return Err(Level1Error::OffPath(d));
        };
        let from = *player;
        self.recorded.push(d);
        let reached_entrance = i + 2 == path.len();
        if reached_entrance {
            self.phase = Phase::Inference;
            *player = spec.maze.entrance;
        } else {
            *player = to;
        }
        Ok(TrainingStep { from, to, reached_entrance })
    }

    /// Replay one recorded direction inside the maze. Nothing changes on error.
    pub fn inference_move(
        &mut self,
        spec: &Level1Spec,
        player: &mut GridPos,
        d: Direction,
    ) -> Result<InferenceStep, Level1Error> {
        if self.phase != Phase::Inference {
            return Err(Level1Error::WrongPhase(self.phase));
        }
        let expected = self.recorded[self.replay_index];
        if d != expected {
            return Err(Level1Error::Deviation { expected, got: d });
        }
        let to = player
            .step(d)
            .filter(|p| spec.maze.grid.is_open(*p))
            .ok_or(Level1Error::Blocked(d))?;
        let from = *player;
        *player = to;
        self.replay_index += 1;
        let diamond = (spec.diamonds.contains(&to) && !self.collected.contains(&to)).then_some(to);
        if let Some(p) = diamond {
            self.collected.push(p);
            self.diamonds_collected += 1;
        }
        let completed = self.replay_index == self.recorded.len();
        if completed {
            self.phase = Phase::Completed;
        }
        Ok(InferenceStep { from, to, diamond, completed })
    }
}
