use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MAX_JUNCTIONS, SLOPE_MARGIN};
use crate::autoplay;
use crate::event::EventKind;
use crate::geom::{walk, GridPos, TileGrid};
use crate::gradient::{junction_tiles, slope, slope_label, trace_corridors, Level2Spec};
use crate::knn::{self, Level3Spec};
use crate::level::LevelSpec;
use crate::model::Side;
use crate::state::SessionState;
use crate::supervised::Level1Spec;

const SLOPE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Short kebab-case invariant name.
    pub invariant: String,
    /// Where or how it failed.
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub level: u8,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn new(level: u8) -> Self {
        Self { level, passed: true, violations: Vec::new() }
    }

    fn fail(&mut self, invariant: &str, witness: impl Into<String>) {
        self.passed = false;
        self.violations.push(Violation { invariant: invariant.to_owned(), witness: witness.into() });
    }

    pub fn has(&self, invariant: &str) -> bool {
        self.violations.iter().any(|v| v.invariant == invariant)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {}: {}", self.level, if self.passed { "PASSED" } else { "FAILED" })?;
        for v in &self.violations {
            write!(f, "\n  {}: {}", v.invariant, v.witness)?;
        }
        Ok(())
    }
}

/// Check `spec` against the invariants of `level`.
pub fn validate(spec: &LevelSpec, level: u8) -> ValidationReport {
    if spec.level() != level {
        let mut r = ValidationReport::new(level);
        r.fail("level-mismatch", format!("file holds a level-{} spec", spec.level()));
        return r;
    }
    match spec {
        LevelSpec::Supervised(s) => validate_level1(s),
        LevelSpec::Gradient(s) => validate_level2(s),
        LevelSpec::Knn(s) => validate_level3(s),
    }
}

/// Number of simple paths from `from` to `to`, counting no further than `cap`.
fn count_simple_paths(adj: &BTreeMap<GridPos, Vec<GridPos>>, from: GridPos, to: GridPos, cap: usize) -> usize {
    fn go(adj: &BTreeMap<GridPos, Vec<GridPos>>, at: GridPos, to: GridPos, seen: &mut BTreeSet<GridPos>, found: &mut usize, cap: usize) {
        if *found >= cap {
            return;
        }
        if at == to {
            *found += 1;
            return;
        }
        for next in adj.get(&at).into_iter().flatten() {
            if seen.insert(*next) {
                go(adj, *next, to, seen, found, cap);
                seen.remove(next);
            }
        }
    }
    let mut seen = BTreeSet::from([from]);
    let mut found = 0;
    go(adj, from, to, &mut seen, &mut found, cap);
    found
}

/// More than one simple route exists iff some edge of one route is not a bridge.
fn has_alternative_tile_route(grid: &TileGrid, path: &[GridPos]) -> Option<(GridPos, GridPos)> {
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut cut = grid.clone();
        // Remove the single edge a-b by checking reachability without it.
        let mut seen = BTreeSet::from([a]);
        let mut stack = vec![a];
        while let Some(p) = stack.pop() {
            for (_, q) in cut.open_neighbors(p) {
                if (p == a && q == b) || (p == b && q == a) {
                    continue;
                }
                if seen.insert(q) {
                    stack.push(q);
                }
            }
        }
        if seen.contains(&b) {
            return Some((a, b));
        }
        cut.rows.clear();
    }
    None
}

pub fn validate_level1(spec: &Level1Spec) -> ValidationReport {
    let mut r = ValidationReport::new(1);
    if let Err(e) = spec.maze.grid.check_shape() {
        r.fail("maze-malformed", e);
        return r;
    }
    if let Err(e) = spec.overworld.grid.check_shape() {
        r.fail("maze-malformed", format!("overworld: {e}"));
        return r;
    }
    let grid = &spec.maze.grid;
    for (name, p) in [("entrance", spec.maze.entrance), ("exit", spec.maze.exit)] {
        if !grid.is_open(p) {
            r.fail("maze-malformed", format!("{name} {p} is not an open tile"));
            return r;
        }
    }

    let tiles = walk(spec.maze.entrance, &spec.canonical_sequence)
        .filter(|t| t.iter().all(|p| grid.is_open(*p)));
    let solution = match tiles {
        None => {
            r.fail("canonical-sequence-invalid", "sequence walks into a wall or off the grid");
            None
        }
        Some(t) if t.last() != Some(&spec.maze.exit) => {
            r.fail("canonical-sequence-invalid", format!("sequence ends at {} instead of the exit", t.last().expect("walk includes start")));
            None
        }
        Some(t) if spec.canonical_sequence.is_empty() => {
            r.fail("canonical-sequence-invalid", "sequence is empty");
            drop(t);
            None
        }
        Some(t) => {
            let distinct: BTreeSet<GridPos> = t.iter().copied().collect();
            if distinct.len() != t.len() {
                r.fail("canonical-sequence-invalid", "sequence revisits a tile");
                None
            } else {
                Some(t)
            }
        }
    };

    if let Some(path) = grid.shortest_path(spec.maze.entrance, spec.maze.exit) {
        if let Some((a, b)) = has_alternative_tile_route(grid, &path) {
            r.fail("multiple-solutions", format!("a second route avoids the step {a}->{b}"));
        }
    }

    if let Some(path) = &solution {
        let on_path: BTreeSet<GridPos> = path[1..].iter().copied().collect();
        for d in &spec.diamonds {
            if !on_path.contains(d) {
                r.fail("diamond-off-path", format!("{d}"));
            }
        }
    }
    let mut seen = BTreeSet::new();
    for d in &spec.diamonds {
        if !seen.insert(*d) {
            r.fail("duplicate-diamond", format!("{d}"));
        }
    }

    let red = &spec.overworld.red_path;
    let mirrors = red.len() == spec.canonical_sequence.len() + 1
        && red.iter().all(|p| spec.overworld.grid.is_open(*p))
        && red.first().and_then(|s| walk(*s, &spec.canonical_sequence)).as_ref() == Some(red);
    if !mirrors {
        r.fail("red-path-mismatch", "overworld path does not repeat the canonical moves on open tiles");
    }
    if !spec.outcome.is_well_formed() {
        r.fail("outcome-empty", "outcome text is missing a field");
    }
    r
}

pub fn validate_level2(spec: &Level2Spec) -> ValidationReport {
    let mut r = ValidationReport::new(2);
    if let Err(e) = spec.maze.check_shape() {
        r.fail("maze-malformed", e);
        return r;
    }
    let mut ids = BTreeSet::new();
    for (i, j) in spec.junctions.iter().enumerate() {
        if j.id as usize != i || !ids.insert(j.id) {
            r.fail("maze-malformed", format!("junction ids must be 0..n in order, found {} at {i}", j.id));
            return r;
        }
        if !spec.maze.is_open(j.pos) {
            r.fail("maze-malformed", format!("junction {} at {} is a wall", j.id, j.pos));
            return r;
        }
    }
    let n = spec.junctions.len() as u32;
    if spec.start >= n || spec.goal >= n || spec.edges.iter().any(|e| e.from >= n || e.to >= n) {
        r.fail("maze-malformed", "start, goal or an edge names an unknown junction");
        return r;
    }
    if spec.junctions.len() > MAX_JUNCTIONS {
        r.fail("too-many-junctions", format!("{} > {MAX_JUNCTIONS}", spec.junctions.len()));
    }
    for j in &spec.junctions {
        if !(j.elevation > 0.0) {
            r.fail("non-positive-elevation", format!("junction {} at {}", j.id, j.elevation));
        }
    }
    for e in &spec.edges {
        let (a, b) = (&spec.junctions[e.from as usize], &spec.junctions[e.to as usize]);
        let expect = slope(a.elevation, b.elevation, e.length);
        if e.length == 0 || !((e.slope - expect).abs() <= SLOPE_TOLERANCE) {
            r.fail("slope-inconsistent", format!("edge {}: stored {} vs {}", e.id, e.slope, expect));
        }
    }

    // The declared graph must be exactly the corridor structure of the maze.
    let derived = junction_tiles(&spec.maze, &[spec.start_pos(), spec.goal_pos()]);
    let declared: BTreeSet<GridPos> = spec.junctions.iter().map(|j| j.pos).collect();
    if derived != declared {
        let diff: Vec<String> = derived.symmetric_difference(&declared).map(|p| p.to_string()).collect();
        r.fail("junction-graph-mismatch", format!("junction tiles differ at {}", diff.join(", ")));
    } else {
        let mut corridors: BTreeMap<(GridPos, GridPos, u32), usize> = BTreeMap::new();
        for c in trace_corridors(&spec.maze, &derived) {
            let key = if c.a() <= c.b() { (c.a(), c.b(), c.length()) } else { (c.b(), c.a(), c.length()) };
            *corridors.entry(key).or_default() += 1;
        }
        let mut edges: BTreeMap<(GridPos, GridPos, u32), usize> = BTreeMap::new();
        for e in &spec.edges {
            let (a, b) = (spec.junctions[e.from as usize].pos, spec.junctions[e.to as usize].pos);
            let key = if a <= b { (a, b, e.length) } else { (b, a, e.length) };
            *edges.entry(key).or_default() += 1;
        }
        if corridors != edges {
            r.fail("junction-graph-mismatch", format!("{} corridors vs {} declared edges", corridors.len(), spec.edges.len()));
        }
    }

    // Orientation: a tree rooted at the start, every edge pointing away from it.
    let mut incoming = vec![0u32; spec.junctions.len()];
    for e in &spec.edges {
        incoming[e.to as usize] += 1;
    }
    let bad_in = (0..n).find(|j| (*j == spec.start && incoming[*j as usize] != 0) || (*j != spec.start && incoming[*j as usize] != 1));
    if let Some(j) = bad_in {
        r.fail("edge-orientation", format!("junction {j} has {} incoming edges", incoming[j as usize]));
    }

    // Greedy descent from the start.
    let mut at = spec.start;
    let mut visited = BTreeSet::from([at]);
    let mut greedy = vec![at];
    loop {
        if at == spec.goal {
            break;
        }
        let mut out: Vec<_> = spec.outgoing(at).collect();
        if out.is_empty() {
            r.fail("greedy-misses-goal", format!("steepest descent stops at junction {at}"));
            break;
        }
        out.sort_by(|a, b| b.slope.total_cmp(&a.slope));
        if out.len() > 1 {
            if out[0].slope == out[1].slope {
                r.fail("non-unique-greedy-edge", format!("junction {at}: edges {} and {} tie at {}", out[0].id, out[1].id, out[0].slope));
                break;
            }
            let margin = out[0].slope - out[1].slope;
            if margin + SLOPE_TOLERANCE < SLOPE_MARGIN || slope_label(out[0].slope) == slope_label(out[1].slope) {
                r.fail("slope-margin", format!("junction {at}: {} vs {}", slope_label(out[0].slope), slope_label(out[1].slope)));
            }
        }
        if !(out[0].slope > 0.0) {
            r.fail("non-descending-path", format!("steepest edge {} from junction {at} climbs", out[0].id));
        }
        at = out[0].to;
        if !visited.insert(at) {
            r.fail("greedy-misses-goal", format!("steepest descent loops at junction {at}"));
            break;
        }
        greedy.push(at);
    }

    let goal_e = spec.junctions[spec.goal as usize].elevation;
    for j in &spec.junctions {
        if j.id != spec.goal && j.elevation <= goal_e {
            r.fail("goal-not-minimum", format!("junction {} at elevation {} is not above the goal", j.id, j.elevation));
        }
    }

    let mut adj: BTreeMap<GridPos, Vec<GridPos>> = BTreeMap::new();
    for e in &spec.edges {
        let (a, b) = (spec.junctions[e.from as usize].pos, spec.junctions[e.to as usize].pos);
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let routes = count_simple_paths(&adj, spec.start_pos(), spec.goal_pos(), 2);
    if routes > 1 {
        r.fail("alternative-goal-route", "more than one simple route reaches the goal");
    }

    for (i, en) in spec.enemies.iter().enumerate() {
        let ok = !en.domain.is_empty()
            && en.domain.iter().all(|p| spec.maze.is_open(*p))
            && en.domain.contains(&en.spawn)
            && {
                let set: BTreeSet<GridPos> = en.domain.iter().copied().collect();
                let mut seen = BTreeSet::from([en.spawn]);
                let mut stack = vec![en.spawn];
                while let Some(p) = stack.pop() {
                    for (_, q) in spec.maze.open_neighbors(p) {
                        if set.contains(&q) && seen.insert(q) {
                            stack.push(q);
                        }
                    }
                }
                seen.len() == set.len()
            };
        if !ok {
            r.fail("enemy-domain-invalid", format!("enemy {i}"));
        }
    }
    if spec.damage == 0 {
        r.fail("damage-config", "contact damage must be positive");
    }
    if !spec.outcome.is_well_formed() {
        r.fail("outcome-empty", "outcome text is missing a field");
    }
    r
}

/// How one Bob's race went when the reference player chased it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BobRace {
    pub bob: u8,
    /// Shortest-path distance from the player to the arrival zone at activation.
    pub player_distance: u32,
    /// Same for each red man.
    pub enemy_distances: Vec<u32>,
    /// Ticks until the second red man would arrive.
    pub second_enemy_ticks: u64,
    pub winner: Option<Side>,
}

/// Play the level with the reference bot and record every race.
pub fn race_report(spec: &Level3Spec) -> Vec<BobRace> {
    let level = Arc::new(LevelSpec::Knn(spec.clone()));
    let Ok(mut state) = SessionState::new(level, 0, 0) else { return Vec::new() };
    let mut races = Vec::new();
    let limit = 4 * (spec.town.width() as usize * spec.town.height() as usize + 8);
    'bobs: for bob in 0..spec.bobs.len() as u8 {
        let zone = spec.arrival_zone(bob as usize);
        let dist = spec.town.distances_to_set(&zone);
        let d = |p: GridPos| dist.get(p).unwrap_or(u32::MAX);
        let player_distance = d(state.player().pos);
        let reds: Vec<(u32, u32)> = state
            .agents
            .iter()
            .filter(|a| a.kind == crate::model::AgentKind::RedMan)
            .map(|a| {
                let period = spec.red_men.get(a.id as usize - 1).map_or(knn::DEFAULT_TICKS_PER_STEP, |m| m.ticks_per_step.max(1));
                (d(a.pos), period)
            })
            .collect();
        let mut arrival: Vec<u64> = reds.iter().map(|(dd, p)| u64::from(*dd).saturating_mul(u64::from(*p))).collect();
        arrival.sort_unstable();
        let mut race = BobRace {
            bob,
            player_distance,
            enemy_distances: reds.iter().map(|(dd, _)| *dd).collect(),
            second_enemy_ticks: arrival.get(1).copied().unwrap_or(u64::MAX),
            winner: None,
        };
        for _ in 0..limit {
            let Some(cmd) = autoplay::next_command(&state) else { break };
            let Ok(events) = state.tick(cmd) else { break };
            for ev in events {
                if let EventKind::BobClassified { bob: b, side } = ev.kind {
                    if b == bob {
                        race.winner = Some(side);
                    }
                }
            }
            if race.winner == Some(Side::RedMen) {
                races.push(race);
                break 'bobs;
            }
            let moved_on = match &state.level_state {
                crate::state::LevelState::Knn(k) => k.active_bob != bob || k.completed,
                _ => true,
            };
            if race.winner.is_some() && moved_on {
                break;
            }
        }
        let done = race.winner != Some(Side::Player);
        races.push(race);
        if done {
            break;
        }
    }
    races
}

pub fn validate_level3(spec: &Level3Spec) -> ValidationReport {
    let mut r = ValidationReport::new(3);
    if let Err(e) = spec.town.check_shape() {
        r.fail("town-malformed", e);
        return r;
    }
    let mut structural = false;
    if spec.bobs.len() != knn::BOB_COUNT {
        r.fail("bob-count", format!("{} Bobs, expected {}", spec.bobs.len(), knn::BOB_COUNT));
        structural = true;
    }
    if spec.k == 0 || spec.k % 2 == 0 {
        r.fail("even-k", format!("k = {}", spec.k));
        structural = true;
    } else if spec.k != knn::DEFAULT_K || spec.player_votes != knn::PLAYER_VOTES || spec.enemy_votes != knn::ENEMY_VOTES {
        r.fail("vote-config", format!("k={} player={} enemy={}", spec.k, spec.player_votes, spec.enemy_votes));
        structural = true;
    }
    if spec.red_men.len() < 2 {
        r.fail("too-few-red-men", format!("{}", spec.red_men.len()));
        structural = true;
    }
    if let Some((i, _)) = spec.red_men.iter().enumerate().find(|(_, m)| m.ticks_per_step < 2) {
        r.fail("pursuit-too-fast", format!("red man {} steps every {} ticks", i + 1, spec.red_men[i].ticks_per_step));
        structural = true;
    }
    let mut everyone = vec![("player".to_owned(), spec.player_spawn)];
    everyone.extend(spec.bobs.iter().map(|b| (b.name.clone(), b.pos)));
    everyone.extend(spec.red_men.iter().enumerate().map(|(i, m)| (format!("red man {}", i + 1), m.spawn)));
    let mut seen = BTreeSet::new();
    for (who, p) in &everyone {
        if !spec.town.is_open(*p) {
            r.fail("blocked-position", format!("{who} at {p}"));
            structural = true;
        } else if !seen.insert(*p) {
            r.fail("overlapping-positions", format!("{who} at {p}"));
            structural = true;
        }
    }
    if !structural {
        let dist = spec.town.distances_from(spec.player_spawn);
        for (who, p) in &everyone {
            if dist.get(*p).is_none() {
                r.fail("unreachable", format!("{who} at {p}"));
                structural = true;
            }
        }
    }
    if !spec.outcome.is_well_formed() {
        r.fail("outcome-empty", "outcome text is missing a field");
    }
    if structural {
        return r;
    }

    for race in race_report(spec) {
        let bob = race.bob + 1;
        let closed_form = u64::from(race.player_distance.max(1)) < race.second_enemy_ticks;
        if race.winner != Some(Side::Player) || !closed_form {
            r.fail(
                "unwinnable",
                format!("Bob {bob}: player needs {} steps, second red man arrives after {} ticks", race.player_distance, race.second_enemy_ticks),
            );
            break;
        }
        let nearest = race.enemy_distances.iter().copied().min().unwrap_or(u32::MAX);
        if f64::from(nearest) > 1.5 * f64::from(race.player_distance) {
            r.fail("trivial", format!("Bob {bob}: nearest red man {nearest} tiles away, player {}", race.player_distance));
        }
    }
    r
}
