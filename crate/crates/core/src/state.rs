//! The session state machine: one accepted command per tick.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::event::{EventKind, GameEvent, RestartReason, WarningReason};
use crate::geom::{Direction, GridPos};
use crate::gradient::{self, junction_options, slope_label, Level2Layout, Level2Spec, Level2State};
use crate::knn::{self, distance_meters, KnnError, Level3Spec, Level3State};
use crate::level::LevelSpec;
use crate::model::{AgentKind, AgentState, InputCommand, InvalidCommand, Modal, ModalKind, Side, PLAYER_ID};
use crate::rng::Rng;
use crate::snapshot::{AgentView, DistanceMeterView, Hud, ItemKind, ItemView, ModalView, SlopeReadout, StateSnapshot};
use crate::supervised::{Level1Error, Level1Spec, Level1State, Phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelState {
    Supervised(Level1State),
    Gradient(Level2State),
    Knn(Level3State),
}

impl LevelState {
    fn fresh(spec: &LevelSpec) -> Result<Self, KnnError> {
        Ok(match spec {
            LevelSpec::Supervised(_) => LevelState::Supervised(Level1State::fresh()),
            LevelSpec::Gradient(_) => LevelState::Gradient(Level2State::fresh()),
            LevelSpec::Knn(s) => LevelState::Knn(Level3State::fresh(s)?),
        })
    }

    pub fn is_completed(&self) -> bool {
        match self {
            LevelState::Supervised(s) => s.phase == Phase::Completed,
            LevelState::Gradient(s) => s.completed,
            LevelState::Knn(s) => s.completed,
        }
    }
}

fn fresh_agents(spec: &LevelSpec) -> Vec<AgentState> {
    match spec {
        LevelSpec::Supervised(s) => vec![AgentState::player(s.spawn())],
        LevelSpec::Gradient(s) => gradient::fresh_agents(s),
        LevelSpec::Knn(s) => knn::fresh_agents(s),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionState {
    pub level: u8,
    pub tick: u64,
    pub score: u64,
    /// Score on entering the level; restored by every restart.
    pub entry_score: u64,
    pub agents: Vec<AgentState>,
    pub level_state: LevelState,
    pub modal: Option<Modal>,
    pub last_warning: Option<WarningReason>,
    pub rng: Rng,
    pub log: Vec<GameEvent>,
    pub spec: Arc<LevelSpec>,
}

/// Events of one tick before they are stamped.
#[derive(Default)]
struct Emitter(Vec<EventKind>);

impl Emitter {
    fn emit(&mut self, kind: EventKind) {
        self.0.push(kind);
    }
}

impl SessionState {
    pub fn new(spec: Arc<LevelSpec>, seed: u64, entry_score: u64) -> Result<Self, KnnError> {
        Ok(Self {
            level: spec.level(),
            tick: 0,
            score: entry_score,
            entry_score,
            agents: fresh_agents(&spec),
            level_state: LevelState::fresh(&spec)?,
            modal: None,
            last_warning: None,
            rng: Rng::seed_from_u64(seed),
            log: Vec::new(),
            spec,
        })
    }

    pub fn player(&self) -> &AgentState {
        self.agents.iter().find(|a| a.id == PLAYER_ID).expect("player present")
    }

    pub fn is_completed(&self) -> bool {
        self.level_state.is_completed()
    }

    /// Apply one command. Accepted commands advance the tick by one and append
    /// their events to the log; refused commands leave the state untouched.
    pub fn tick(&mut self, cmd: InputCommand) -> Result<Vec<GameEvent>, InvalidCommand> {
        let mut out = Emitter::default();
        match cmd {
            InputCommand::Next => return Err(InvalidCommand::NotALevelCommand),
            InputCommand::Acknowledge => {
                let kind = self.modal.as_ref().ok_or(InvalidCommand::NoModal)?.kind;
                self.acknowledge(kind, &mut out);
            }
            _ if self.modal.is_some() => {
                return Err(InvalidCommand::ModalOpen(self.modal.as_ref().map_or(ModalKind::Warning, |m| m.kind)));
            }
            InputCommand::Restart => {
                if self.is_completed() {
                    return Err(InvalidCommand::LevelCompleted);
                }
                self.restart(RestartReason::Manual, &mut out);
            }
            InputCommand::Move(d) => self.move_player(d, &mut out)?,
        }
        self.tick += 1;
        self.last_warning = out.0.iter().rev().find_map(|k| match k {
            EventKind::Warning { reason } => Some(*reason),
            _ => None,
        });
        let stamped: Vec<GameEvent> =
            out.0.into_iter().map(|kind| GameEvent { level: self.level, tick: self.tick, kind }).collect();
        self.log.extend(stamped.iter().cloned());
        Ok(stamped)
    }

    /// Pure form of [`SessionState::tick`].
    pub fn step(&self, cmd: InputCommand) -> Result<(SessionState, Vec<GameEvent>), InvalidCommand> {
        let mut next = self.clone();
        let events = next.tick(cmd)?;
        Ok((next, events))
    }

    fn restart(&mut self, reason: RestartReason, out: &mut Emitter) {
        out.emit(EventKind::Restart { reason });
        self.level_state = LevelState::fresh(&self.spec).expect("spec was accepted at session start");
        self.agents = fresh_agents(&self.spec);
        self.score = self.entry_score;
    }

    fn complete(&mut self, out: &mut Emitter) {
        out.emit(EventKind::OutcomeDisplayed { level: self.level });
        out.emit(EventKind::LevelCompleted { level: self.level, score: self.score });
        self.modal = Some(Modal::new(ModalKind::Outcome, self.spec.outcome().render()));
    }

    fn acknowledge(&mut self, kind: ModalKind, out: &mut Emitter) {
        out.emit(EventKind::ModalAcknowledged { modal: kind });
        self.modal = None;
        let spec = Arc::clone(&self.spec);
        if let (LevelSpec::Knn(s), LevelState::Knn(st)) = (spec.as_ref(), &mut self.level_state) {
            match kind {
                ModalKind::Loss => st.lost = false,
                ModalKind::Dialogue => {
                    st.dialogue_pending = false;
                    st.heart_pending = true;
                    self.modal = Some(Modal::new(ModalKind::Heart, "Collect Bob's heart to bring him to your side."));
                }
                ModalKind::Heart => {
                    st.heart_pending = false;
                    out.emit(EventKind::BobClassified { bob: st.active_bob, side: Side::Player });
                    if st.advance_rescue(s) == Ok(true) {
                        self.complete(out);
                    }
                }
                _ => {}
            }
        }
    }

    fn move_player(&mut self, d: Direction, out: &mut Emitter) -> Result<(), InvalidCommand> {
        let spec = Arc::clone(&self.spec);
        match spec.as_ref() {
            LevelSpec::Supervised(s) => self.move_level1(s, d, out),
            LevelSpec::Gradient(s) => self.move_level2(s, d, out),
            LevelSpec::Knn(s) => self.move_level3(s, d, out),
        }
    }

    fn move_level1(&mut self, s: &Level1Spec, d: Direction, out: &mut Emitter) -> Result<(), InvalidCommand> {
        let LevelState::Supervised(st) = &mut self.level_state else { unreachable!("level state matches spec") };
        let player = &mut self.agents[0].pos;
        match st.phase {
            Phase::Completed => Err(InvalidCommand::LevelCompleted),
            Phase::Training => {
                match st.training_move(s, player, d) {
                    Ok(step) => out.emit(EventKind::Move { agent: PLAYER_ID, from: step.from, to: step.to }),
                    Err(_) => out.emit(EventKind::Warning { reason: WarningReason::OffPath }),
                }
                Ok(())
            }
            Phase::Inference => match st.inference_move(s, player, d) {
                Ok(step) => {
                    out.emit(EventKind::Move { agent: PLAYER_ID, from: step.from, to: step.to });
                    if let Some(pos) = step.diamond {
                        self.score += u64::from(s.diamond_points);
                        out.emit(EventKind::DiamondCollected { pos, points: s.diamond_points, score: self.score });
                    }
                    if step.completed {
                        self.complete(out);
                    }
                    Ok(())
                }
                Err(Level1Error::Blocked(d)) => Err(InvalidCommand::Blocked(d)),
                Err(_) => {
                    out.emit(EventKind::Warning { reason: WarningReason::WrongPath });
                    self.restart(RestartReason::Deviation, out);
                    self.modal = Some(Modal::new(
                        ModalKind::Warning,
                        "Wrong path! Those are not the directions you noted down. The level restarts.",
                    ));
                    Ok(())
                }
            },
        }
    }

    fn move_level2(&mut self, s: &Level2Spec, d: Direction, out: &mut Emitter) -> Result<(), InvalidCommand> {
        let LevelState::Gradient(st) = &mut self.level_state else { unreachable!("level state matches spec") };
        if st.completed {
            return Err(InvalidCommand::LevelCompleted);
        }
        let from = self.agents[0].pos;
        let to = from.step(d).filter(|p| s.maze.is_open(*p)).ok_or(InvalidCommand::Blocked(d))?;
        self.agents[0].pos = to;
        out.emit(EventKind::Move { agent: PLAYER_ID, from, to });
        if to == s.goal_pos() {
            st.completed = true;
            self.complete(out);
            return Ok(());
        }
        let t = gradient::enemy_tick(s, &mut self.agents, to, &mut self.rng);
        for (agent, from, to) in t.moves {
            out.emit(EventKind::Move { agent, from, to });
        }
        if t.in_radius {
            let player = &mut self.agents[0];
            let health = player.health.unwrap_or(0).saturating_sub(s.damage);
            player.health = Some(health);
            out.emit(EventKind::HealthChanged { agent: PLAYER_ID, delta: -i32::from(s.damage), health });
            if health == 0 {
                self.restart(RestartReason::HealthDepleted, out);
                self.modal = Some(Modal::new(ModalKind::Warning, "Your health ran out. The level restarts."));
            }
        }
        Ok(())
    }

    fn move_level3(&mut self, s: &Level3Spec, d: Direction, out: &mut Emitter) -> Result<(), InvalidCommand> {
        let LevelState::Knn(st) = &mut self.level_state else { unreachable!("level state matches spec") };
        let t = st.move_tick(s, &mut self.agents, d)?;
        for (agent, from, to) in t.moves {
            out.emit(EventKind::Move { agent, from, to });
        }
        let bob = st.active_bob;
        let name = s.bobs.get(bob as usize).map_or("Bob", |b| b.name.as_str()).to_string();
        match t.resolution {
            Some(Side::Player) => {
                st.dialogue_pending = true;
                out.emit(EventKind::DialogueShown { bob });
                self.modal = Some(Modal::new(
                    ModalKind::Dialogue,
                    format!("{name}: You reached me before the red men, so your two votes win me over."),
                ));
            }
            Some(Side::RedMen) => {
                out.emit(EventKind::BobClassified { bob, side: Side::RedMen });
                self.restart(RestartReason::BobLost, out);
                if let LevelState::Knn(st) = &mut self.level_state {
                    st.lost = true;
                }
                self.modal = Some(Modal::new(
                    ModalKind::Loss,
                    format!("Two red men reached {name} first, so he took their side. The level restarts."),
                ));
            }
            None => {}
        }
        Ok(())
    }

    /// Render-side projection; never mutates and never reveals hidden solution data.
    pub fn snapshot(&self) -> StateSnapshot {
        let mut hud = Hud {
            score: self.score,
            health: self.player().health,
            instructions: Vec::new(),
            warning: self.last_warning.map(|w| match w {
                WarningReason::OffPath => "Stay on the red path.".to_string(),
                WarningReason::WrongPath => "Wrong path!".to_string(),
            }),
            slope_readouts: Vec::new(),
            distance_meters: None,
            active_bob: None,
            red_men_reached: None,
            population: None,
            next_enabled: false,
        };
        let mut items = Vec::new();
        let (tiles, phase, mut minimap) = match (self.spec.as_ref(), &self.level_state) {
            (LevelSpec::Supervised(s), LevelState::Supervised(st)) => {
                if st.phase == Phase::Training {
                    hud.instructions = st.recorded.clone();
                    let mut map = s.overworld.grid.rows.clone();
                    for p in &s.overworld.red_path {
                        mark(&mut map, *p, 'r');
                    }
                    (s.overworld.grid.rows.clone(), "training", map)
                } else {
                    for d in s.diamonds.iter().filter(|d| !st.collected.contains(d)) {
                        items.push(ItemView { kind: ItemKind::Diamond, pos: *d });
                    }
                    items.push(ItemView { kind: ItemKind::Door, pos: s.maze.exit });
                    let phase = if st.phase == Phase::Completed { "completed" } else { "inference" };
                    (s.maze.grid.rows.clone(), phase, s.maze.grid.rows.clone())
                }
            }
            (LevelSpec::Gradient(s), LevelState::Gradient(st)) => {
                let layout = Level2Layout::new(s);
                let pos = self.player().pos;
                if let Ok(opts) = junction_options(s, &layout, pos) {
                    hud.slope_readouts = opts
                        .into_iter()
                        .map(|o| SlopeReadout { edge: o.edge, direction: Some(o.direction), slope: o.slope, label: o.label })
                        .collect();
                } else if let Some(e) = layout.edge_at(pos).and_then(|id| s.edge(id)) {
                    hud.slope_readouts =
                        vec![SlopeReadout { edge: e.id, direction: None, slope: e.slope, label: slope_label(e.slope) }];
                }
                items.push(ItemView { kind: ItemKind::Door, pos: s.goal_pos() });
                let mut map = s.maze.rows.clone();
                for j in &s.junctions {
                    mark(&mut map, j.pos, 'o');
                }
                (s.maze.rows.clone(), if st.completed { "completed" } else { "descending" }, map)
            }
            (LevelSpec::Knn(s), LevelState::Knn(st)) => {
                let active = st.active_bob as usize;
                if !st.completed {
                    hud.active_bob = s.bobs.get(active).map(|b| b.name.clone());
                    hud.red_men_reached = Some(st.tally.red_men_reached() as u32);
                    if st.tally.resolved.is_none() {
                        if let Some(m) = distance_meters::<f64>(s, &self.agents, active) {
                            hud.distance_meters = Some(DistanceMeterView {
                                player_to_bob: m.player_to_bob,
                                nearest_enemy_to_bob: m.nearest_enemy_to_bob,
                                player_label: format!("{:.1}", m.player_to_bob),
                                enemy_label: format!("{:.1}", m.nearest_enemy_to_bob),
                            });
                        }
                    }
                    if st.heart_pending {
                        if let Some(b) = s.bobs.get(active) {
                            items.push(ItemView { kind: ItemKind::Heart, pos: b.pos });
                        }
                    }
                }
                hud.population = Some(u32::from(st.rescued));
                (s.town.rows.clone(), if st.completed { "completed" } else { "rescuing" }, s.town.rows.clone())
            }
            _ => unreachable!("level state always matches its spec"),
        };
        for it in &items {
            let c = match it.kind {
                ItemKind::Diamond => '*',
                ItemKind::Door => 'D',
                ItemKind::Heart => continue,
            };
            mark(&mut minimap, it.pos, c);
        }
        let mut agents = Vec::new();
        for a in &self.agents {
            let mut tag = None;
            if a.kind == AgentKind::Bob {
                if let (LevelSpec::Knn(s), LevelState::Knn(st)) = (self.spec.as_ref(), &self.level_state) {
                    let idx = s.bob_agent_id(0);
                    let i = (a.id - idx) as usize;
                    let active = !st.completed && i == st.active_bob as usize;
                    mark(&mut minimap, a.pos, if active { 'B' } else { 'b' });
                    if active {
                        tag = s.bobs.get(i).map(|b| b.name.clone());
                    }
                }
            }
            agents.push(AgentView { id: a.id, kind: a.kind, pos: a.pos, tag });
        }
        for a in self.agents.iter().filter(|a| a.kind == AgentKind::RedMan) {
            mark(&mut minimap, a.pos, 'R');
        }
        mark(&mut minimap, self.player().pos, 'P');
        let modal = self.modal.as_ref().map(|m| ModalView {
            kind: m.kind,
            text: m.text.clone(),
            outcome: (m.kind == ModalKind::Outcome).then(|| self.spec.outcome().clone()),
        });
        hud.next_enabled = self.is_completed() && self.modal.is_none();
        StateSnapshot { level: self.level, tick: self.tick, phase: phase.to_string(), tiles, minimap, agents, items, hud, modal }
    }
}

fn mark(rows: &mut [String], pos: GridPos, c: char) {
    if let Some(row) = rows.get_mut(pos.row as usize) {
        let col = pos.col as usize;
        if col < row.len() {
            row.replace_range(col..col + 1, c.encode_utf8(&mut [0; 4]));
        }
    }
}
