//! Fixtures shared by the test suites of this workspace: hand-broken level
//! specs, one per validator invariant, and a tree-maze level builder.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::geom::{GridPos, TileGrid, OPEN, WALL};
use crate::gradient::{junction_tiles, slope, trace_corridors, Edge, Junction, Level2Spec};
use crate::level::LevelSpec;
use crate::levelgen::{generate_level1, generate_level2, generate_level3, validate, GenConfig};
use crate::outcome::default_outcome;

/// A spec broken on purpose.
#[derive(Debug, Clone)]
pub struct Broken {
    pub invariant: &'static str,
    pub spec: LevelSpec,
    /// Whether the intended violation is the only one reported.
    pub exact: bool,
}

/// Level-2 spec over any tree-shaped maze. Elevation is one plus the tile
/// distance to the goal, so every step towards the goal descends by one.
pub fn level2_from_tree(maze: TileGrid, start: GridPos, goal: GridPos) -> Level2Spec {
    let tiles = junction_tiles(&maze, &[start, goal]);
    let to_goal = maze.distances_from(goal);
    let mut adj: BTreeMap<GridPos, Vec<(GridPos, u32)>> = BTreeMap::new();
    for c in trace_corridors(&maze, &tiles) {
        adj.entry(c.a()).or_default().push((c.b(), c.length()));
        adj.entry(c.b()).or_default().push((c.a(), c.length()));
    }
    let mut order = vec![start];
    let mut seen = BTreeSet::from([start]);
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for (v, len) in adj.get(&u).cloned().unwrap_or_default() {
            if seen.insert(v) {
                tree.push((u, v, len));
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    let id: BTreeMap<GridPos, u32> = order.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
    let elevation = |p: GridPos| 1.0 + f64::from(to_goal.get(p).expect("tree is connected"));
    Level2Spec {
        junctions: order.iter().map(|p| Junction { id: id[p], pos: *p, elevation: elevation(*p) }).collect(),
        edges: tree
            .iter()
            .enumerate()
            .map(|(i, (u, v, len))| Edge { id: i as u32, from: id[u], to: id[v], length: *len, slope: slope(elevation(*u), elevation(*v), *len) })
            .collect(),
        start: 0,
        goal: id[&goal],
        maze,
        enemies: Vec::new(),
        damage: crate::gradient::DEFAULT_DAMAGE,
        damage_radius: crate::gradient::DEFAULT_DAMAGE_RADIUS,
        outcome: default_outcome(2),
    }
}

/// A corridor along row 1 with a two-tile tooth hanging below every odd
/// column. `teeth` teeth give `2 * teeth - 1` junctions.
pub fn comb(teeth: u32) -> Level2Spec {
    let width = 2 * teeth + 1;
    let mut maze = TileGrid::filled(width, 5, WALL);
    for c in 1..width - 1 {
        maze.set(GridPos::new(1, c), OPEN);
    }
    for c in (1..width - 1).step_by(2) {
        maze.set(GridPos::new(2, c), OPEN);
        maze.set(GridPos::new(3, c), OPEN);
    }
    level2_from_tree(maze, GridPos::new(1, 1), GridPos::new(3, width - 2))
}

fn one_violation(spec: &LevelSpec, invariant: &str) -> bool {
    let r = validate(spec, spec.level());
    r.violations.len() == 1 && r.has(invariant)
}

fn recompute_slopes(s: &mut Level2Spec) {
    for e in &mut s.edges {
        e.slope = slope(s.junctions[e.from as usize].elevation, s.junctions[e.to as usize].elevation, e.length);
    }
}

/// First seed in `0..64` whose level, after `mutate`, breaks exactly `invariant`.
fn search<F>(level: u8, invariant: &'static str, mutate: F) -> Broken
where
    F: Fn(&mut LevelSpec) -> bool,
{
    for seed in 0..64 {
        let cfg = GenConfig::with_seed(seed);
        let mut spec = match level {
            1 => LevelSpec::Supervised(generate_level1(&cfg).expect("default config")),
            2 => LevelSpec::Gradient(generate_level2(&cfg).expect("default config")),
            _ => LevelSpec::Knn(generate_level3(&cfg).expect("default config")),
        };
        if mutate(&mut spec) && one_violation(&spec, invariant) {
            return Broken { invariant, spec, exact: true };
        }
    }
    panic!("no seed yields a clean {invariant} counterexample");
}

fn l1(spec: &mut LevelSpec) -> &mut crate::supervised::Level1Spec {
    match spec {
        LevelSpec::Supervised(s) => s,
        _ => unreachable!(),
    }
}

fn l2(spec: &mut LevelSpec) -> &mut Level2Spec {
    match spec {
        LevelSpec::Gradient(s) => s,
        _ => unreachable!(),
    }
}

fn l3(spec: &mut LevelSpec) -> &mut crate::knn::Level3Spec {
    match spec {
        LevelSpec::Knn(s) => s,
        _ => unreachable!(),
    }
}

/// Greedy junctions with at least one alternative, as (junction, greedy edge index, other edge index).
fn forks(s: &Level2Spec) -> Vec<(u32, usize, usize)> {
    let mut out = Vec::new();
    let mut at = s.start;
    while at != s.goal {
        let mut idx: Vec<usize> = (0..s.edges.len()).filter(|i| s.edges[*i].from == at).collect();
        idx.sort_by(|a, b| s.edges[*b].slope.total_cmp(&s.edges[*a].slope));
        if idx.is_empty() {
            break;
        }
        for other in &idx[1..] {
            out.push((at, idx[0], *other));
        }
        at = s.edges[idx[0]].to;
    }
    out
}

/// Set the elevation of `edges[other].to` so that edge's slope becomes `target`,
/// shifting its whole subtree along.
fn retarget(s: &mut Level2Spec, other: usize, target: f64) {
    let e = s.edges[other].clone();
    let want = s.junctions[e.from as usize].elevation - target * f64::from(e.length);
    let shift = want - s.junctions[e.to as usize].elevation;
    let mut stack = vec![e.to];
    while let Some(j) = stack.pop() {
        s.junctions[j as usize].elevation += shift;
        stack.extend(s.edges.iter().filter(|x| x.from == j).map(|x| x.to));
    }
    recompute_slopes(s);
}

fn fork_mutation(delta: f64) -> impl Fn(&mut LevelSpec) -> bool {
    move |spec| {
        let s = l2(spec);
        let Some(&(_, greedy, other)) = forks(s).first() else { return false };
        let target = s.edges[greedy].slope + delta;
        retarget(s, other, target);
        true
    }
}

/// One broken spec per invariant the validator knows.
pub fn broken_specs() -> Vec<Broken> {
    let mut all = vec![
        search(1, "maze-malformed", |s| {
            l1(s).maze.grid.rows[2].push('#');
            true
        }),
        search(1, "canonical-sequence-invalid", |s| {
            let s = l1(s);
            s.canonical_sequence.pop();
            s.overworld.red_path.pop();
            true
        }),
        search(1, "multiple-solutions", |s| {
            let s = l1(s);
            let (h, w) = (s.maze.grid.height(), s.maze.grid.width());
            let walls: Vec<GridPos> = (1..h - 1)
                .flat_map(|r| (1..w - 1).map(move |c| GridPos::new(r, c)))
                .filter(|p| !s.maze.grid.is_open(*p) && s.maze.grid.open_neighbors(*p).count() == 2)
                .collect();
            let base = LevelSpec::Supervised(s.clone());
            for p in walls {
                let mut trial = base.clone();
                l1(&mut trial).maze.grid.set(p, OPEN);
                if one_violation(&trial, "multiple-solutions") {
                    s.maze.grid.set(p, OPEN);
                    return true;
                }
            }
            false
        }),
        search(1, "diamond-off-path", |s| {
            let s = l1(s);
            let solution: BTreeSet<GridPos> =
                crate::geom::walk(s.maze.entrance, &s.canonical_sequence).unwrap_or_default().into_iter().collect();
            match s.maze.grid.open_tiles().find(|p| !solution.contains(p)) {
                Some(p) => {
                    s.diamonds[0] = p;
                    true
                }
                None => false,
            }
        }),
        search(1, "duplicate-diamond", |s| {
            let s = l1(s);
            let d = s.diamonds[0];
            s.diamonds.push(d);
            true
        }),
        search(1, "red-path-mismatch", |s| {
            l1(s).overworld.red_path.pop();
            true
        }),
        search(1, "outcome-empty", |s| {
            l1(s).outcome.concept_name.clear();
            true
        }),
        search(2, "maze-malformed", |s| {
            l2(s).maze.rows[1].pop();
            true
        }),
        search(2, "slope-inconsistent", |s| {
            l2(s).edges[0].slope += 1e-6;
            true
        }),
        search(2, "non-positive-elevation", |s| {
            let s = l2(s);
            let g = s.junctions[s.goal as usize].elevation;
            for j in &mut s.junctions {
                j.elevation -= g;
            }
            recompute_slopes(s);
            true
        }),
        search(2, "non-unique-greedy-edge", fork_mutation(0.0)),
        search(2, "slope-margin", fork_mutation(-0.05)),
        search(2, "greedy-misses-goal", fork_mutation(1.0)),
        search(2, "goal-not-minimum", |spec| {
            let s = l2(spec).clone();
            let g = s.junctions[s.goal as usize].elevation;
            let leaves: Vec<u32> = (0..s.junctions.len() as u32)
                .filter(|j| *j != s.goal && !s.edges.iter().any(|e| e.from == *j))
                .collect();
            // Sink one dead end to the goal's level without luring the greedy walk.
            for leaf in leaves {
                let mut trial = s.clone();
                trial.junctions[leaf as usize].elevation = g;
                recompute_slopes(&mut trial);
                let trial = LevelSpec::Gradient(trial);
                if one_violation(&trial, "goal-not-minimum") {
                    *spec = trial;
                    return true;
                }
            }
            false
        }),
        search(2, "junction-graph-mismatch", |s| {
            let s = l2(s);
            let (h, w) = (s.maze.height(), s.maze.width());
            let stub = (1..h - 1).flat_map(|r| (1..w - 1).map(move |c| GridPos::new(r, c))).find(|p| {
                !s.maze.is_open(*p)
                    && s.maze.open_neighbors(*p).count() == 1
                    && s.maze.open_neighbors(*p).all(|(_, q)| s.maze.degree(q) == 2 && !s.junctions.iter().any(|j| j.pos == q))
            });
            match stub {
                Some(p) => {
                    s.maze.set(p, OPEN);
                    true
                }
                None => false,
            }
        }),
        search(2, "edge-orientation", |s| {
            let s = l2(s);
            let goal = s.goal;
            let leaf = s.edges.iter().position(|e| e.to != goal && !s.edges.iter().any(|x| x.from == e.to));
            match leaf {
                Some(i) => {
                    let e = &mut s.edges[i];
                    std::mem::swap(&mut e.from, &mut e.to);
                    e.slope = -e.slope;
                    true
                }
                None => false,
            }
        }),
        search(2, "enemy-domain-invalid", |s| {
            l2(s).enemies[0].domain.clear();
            true
        }),
        search(2, "damage-config", |s| {
            l2(s).damage = 0;
            true
        }),
        search(2, "outcome-empty", |s| {
            l2(s).outcome.definition.clear();
            true
        }),
        search(3, "town-malformed", |s| {
            l3(s).town.rows.pop();
            l3(s).town.rows[0].pop();
            true
        }),
        search(3, "bob-count", |s| {
            l3(s).bobs.pop();
            true
        }),
        search(3, "even-k", |s| {
            l3(s).k = 4;
            true
        }),
        search(3, "vote-config", |s| {
            l3(s).player_votes = 1;
            true
        }),
        search(3, "too-few-red-men", |s| {
            l3(s).red_men.pop();
            true
        }),
        search(3, "pursuit-too-fast", |s| {
            l3(s).red_men[0].ticks_per_step = 1;
            true
        }),
        search(3, "blocked-position", |s| {
            let s = l3(s);
            let wall = (0..s.town.height())
                .flat_map(|r| (0..s.town.width()).map(move |c| GridPos::new(r, c)))
                .find(|p| !s.town.is_open(*p));
            match wall {
                Some(p) => {
                    s.bobs[1].pos = p;
                    true
                }
                None => false,
            }
        }),
        search(3, "overlapping-positions", |s| {
            let s = l3(s);
            s.bobs[1].pos = s.bobs[0].pos;
            true
        }),
        search(3, "unreachable", |s| {
            let s = l3(s);
            let bob = s.bobs[2].pos;
            let ring: Vec<GridPos> = s.town.open_neighbors(bob).map(|(_, p)| p).collect();
            let occupied: BTreeSet<GridPos> = std::iter::once(s.player_spawn)
                .chain(s.bobs.iter().map(|b| b.pos))
                .chain(s.red_men.iter().map(|m| m.spawn))
                .collect();
            if ring.iter().any(|p| occupied.contains(p)) {
                return false;
            }
            for p in ring {
                s.town.set(p, WALL);
            }
            true
        }),
        search(3, "unwinnable", |s| {
            let s = l3(s);
            let zone = s.arrival_zone(0);
            let taken: BTreeSet<GridPos> =
                std::iter::once(s.player_spawn).chain(s.bobs.iter().map(|b| b.pos)).collect();
            let free: Vec<GridPos> = zone.into_iter().filter(|p| !taken.contains(p)).collect();
            if free.len() < 2 || s.player_spawn.chebyshev(s.bobs[0].pos) <= s.arrival_radius + 1 {
                return false;
            }
            s.red_men[0].spawn = free[0];
            s.red_men[1].spawn = free[1];
            true
        }),
        search(3, "trivial", |s| {
            let s = l3(s);
            let zone = s.arrival_zone(0);
            let dist = s.town.distances_to_set(&zone);
            let taken: BTreeSet<GridPos> =
                std::iter::once(s.player_spawn).chain(s.bobs.iter().map(|b| b.pos)).collect();
            let mut far: Vec<GridPos> = s.town.open_tiles().filter(|p| !taken.contains(p)).collect();
            far.sort_by_key(|p| std::cmp::Reverse(dist.get(*p).unwrap_or(0)));
            s.red_men[0].spawn = far[0];
            s.red_men[1].spawn = far[1];
            true
        }),
        search(3, "outcome-empty", |s| {
            l3(s).outcome.mapping.clear();
            true
        }),
    ];

    // Cycles always break the tree orientation too, so this one is not exact.
    let mut cyc = generate_level2(&GenConfig::with_seed(0)).expect("default config");
    let spare = cyc.edges[0].clone();
    cyc.edges.push(Edge { id: cyc.edges.len() as u32, ..spare });
    all.push(Broken { invariant: "alternative-goal-route", spec: LevelSpec::Gradient(cyc), exact: false });
    all.push(Broken { invariant: "too-many-junctions", spec: LevelSpec::Gradient(comb(26)), exact: true });
    all
}
