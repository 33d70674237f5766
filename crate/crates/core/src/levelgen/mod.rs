//! Seeded level generation. Every generator output is expected to pass
//! [`validate`] for its level.

mod maze;
mod validate;

pub use maze::carve_perfect_maze;
pub use validate::{race_report, validate, validate_level1, validate_level2, validate_level3, BobRace, ValidationReport, Violation};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geom::{path_directions, walk, Direction, GridPos, TileGrid, OPEN, WALL};
use crate::gradient::{self, junction_tiles, trace_corridors, Edge, EnemySpec, Junction, Level2Spec};
use crate::knn::{self, Bob, Level3Spec, RedManSpec};
use crate::level::LevelSpec;
use crate::outcome::default_outcome;
use crate::rng::{derive_seed, Rng};
use crate::supervised::{self, Level1Spec, Maze, Overworld};

/// Upper bound on junctions in a level-2 graph.
pub const MAX_JUNCTIONS: usize = 50;
/// Greedy slope must beat every alternative by this much at display precision.
pub const SLOPE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub seed: u64,
    /// Maze size in tiles, walls included; odd and at least 5.
    pub width: u32,
    pub height: u32,
    pub diamonds: u32,
    /// Most junctions a level-2 graph may have.
    pub junctions: u32,
    /// Wandering red men in level 2.
    pub enemies: u32,
    pub town_width: u32,
    pub town_height: u32,
    /// Racing red men in level 3.
    pub red_men: u32,
    pub red_man_ticks_per_step: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            width: 9,
            height: 9,
            diamonds: 3,
            junctions: MAX_JUNCTIONS as u32,
            enemies: 2,
            town_width: 15,
            town_height: 15,
            red_men: 2,
            red_man_ticks_per_step: knn::DEFAULT_TICKS_PER_STEP,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn check_maze(&self) -> Result<(), GenError> {
        for (name, v) in [("width", self.width), ("height", self.height)] {
            if v < 5 || v % 2 == 0 {
                return Err(GenError::ConfigInvalid(format!("{name} must be odd and at least 5, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    ConfigInvalid(String),
}

fn invalid(msg: impl Into<String>) -> GenError {
    GenError::ConfigInvalid(msg.into())
}

pub fn generate(level: u8, cfg: &GenConfig) -> Result<LevelSpec, GenError> {
    match level {
        1 => generate_level1(cfg).map(LevelSpec::Supervised),
        2 => generate_level2(cfg).map(LevelSpec::Gradient),
        3 => generate_level3(cfg).map(LevelSpec::Knn),
        other => Err(invalid(format!("there is no level {other}"))),
    }
}

/// All three levels from one seed, each with its own derived stream.
pub fn generate_campaign(seed: u64) -> Result<[LevelSpec; 3], GenError> {
    let cfg = |level: u64| GenConfig::with_seed(derive_seed(seed, level));
    Ok([generate(1, &cfg(1))?, generate(2, &cfg(2))?, generate(3, &cfg(3))?])
}

fn cell_col(rng: &mut Rng, width: u32) -> u32 {
    let cells = (width - 1) / 2;
    2 * rng.below(u64::from(cells)) as u32 + 1
}

pub fn generate_level1(cfg: &GenConfig) -> Result<Level1Spec, GenError> {
    cfg.check_maze()?;
    if cfg.diamonds == 0 {
        return Err(invalid("diamond count must be positive"));
    }
    let mut rng = Rng::seed_from_u64(cfg.seed);
    let entrance = GridPos::new(1, cell_col(&mut rng, cfg.width));
    let exit = GridPos::new(cfg.height - 1, cell_col(&mut rng, cfg.width));
    let mut grid = carve_perfect_maze(cfg.width, cfg.height, entrance, &mut rng);
    grid.set(exit, OPEN);
    let path = grid.shortest_path(entrance, exit).expect("perfect mazes are connected");
    let moves = path_directions(&path).expect("BFS paths are 4-connected");

    let steps = path.len() - 1;
    if cfg.diamonds as usize > steps {
        return Err(invalid(format!("{} diamonds do not fit on a {steps}-tile solution path", cfg.diamonds)));
    }
    let mut slots: Vec<usize> = (1..=steps).collect();
    rng.shuffle(&mut slots);
    let mut chosen: Vec<usize> = slots[..cfg.diamonds as usize].to_vec();
    chosen.sort_unstable();
    let diamonds = chosen.into_iter().map(|i| path[i]).collect();

    let overworld = overworld_for(&moves);
    Ok(Level1Spec {
        overworld,
        maze: Maze { grid, entrance, exit },
        canonical_sequence: moves,
        diamonds,
        diamond_points: supervised::DEFAULT_DIAMOND_POINTS,
        outcome: default_outcome(1),
    })
}

/// Open desert whose red path repeats `moves`, with a two-tile margin.
fn overworld_for(moves: &[Direction]) -> Overworld {
    const MARGIN: i64 = 2;
    let (mut r, mut c) = (0i64, 0i64);
    let (mut min_r, mut max_r, mut min_c, mut max_c) = (0, 0, 0, 0);
    for d in moves {
        let (dr, dc) = d.delta();
        r += i64::from(dr);
        c += i64::from(dc);
        min_r = min_r.min(r);
        max_r = max_r.max(r);
        min_c = min_c.min(c);
        max_c = max_c.max(c);
    }
    let spawn = GridPos::new((MARGIN - min_r) as u32, (MARGIN - min_c) as u32);
    let height = (max_r - min_r + 1 + 2 * MARGIN) as u32;
    let width = (max_c - min_c + 1 + 2 * MARGIN) as u32;
    Overworld {
        grid: TileGrid::filled(width, height, OPEN),
        red_path: walk(spawn, moves).expect("spawn offset keeps the path non-negative"),
    }
}

struct RootedTree {
    positions: Vec<GridPos>,
    /// (parent, child, corridor length)
    edges: Vec<(usize, usize, u32)>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
}

fn rooted_tree(grid: &TileGrid, start: GridPos) -> RootedTree {
    let tiles = junction_tiles(grid, &[start]);
    let positions: Vec<GridPos> = tiles.iter().copied().collect();
    let index: BTreeMap<GridPos, usize> = positions.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); positions.len()];
    for c in trace_corridors(grid, &tiles) {
        let (a, b) = (index[&c.a()], index[&c.b()]);
        adj[a].push((b, c.length()));
        adj[b].push((a, c.length()));
    }
    let root = index[&start];
    let mut order = vec![root];
    let mut seen = vec![false; positions.len()];
    seen[root] = true;
    let mut depth = vec![0u32; positions.len()];
    let mut edges = Vec::new();
    let mut children = vec![Vec::new(); positions.len()];
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let mut next = adj[u].clone();
        next.sort_by_key(|(v, _)| positions[*v]);
        for (v, len) in next {
            if !seen[v] {
                seen[v] = true;
                depth[v] = depth[u] + len;
                edges.push((u, v, len));
                children[u].push(v);
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    // Renumber in BFS order so junction ids read top-down from the start.
    let mut renum = vec![0usize; positions.len()];
    for (new, old) in order.iter().enumerate() {
        renum[*old] = new;
    }
    let positions_new: Vec<GridPos> = order.iter().map(|o| positions[*o]).collect();
    let mut children_new = vec![Vec::new(); positions.len()];
    for (old, ch) in children.iter().enumerate() {
        children_new[renum[old]] = ch.iter().map(|c| renum[*c]).collect();
    }
    let depth_new = order.iter().map(|o| depth[*o]).collect();
    let edges_new = edges.into_iter().map(|(u, v, l)| (renum[u], renum[v], l)).collect();
    RootedTree { positions: positions_new, edges: edges_new, children: children_new, depth: depth_new }
}

fn round_elevation(e: f64) -> f64 {
    (e * 1000.0).round() / 1000.0
}

pub fn generate_level2(cfg: &GenConfig) -> Result<Level2Spec, GenError> {
    cfg.check_maze()?;
    if cfg.junctions < 2 {
        return Err(invalid("a descent needs at least two junctions (start and goal)"));
    }
    if cfg.junctions as usize > MAX_JUNCTIONS {
        return Err(invalid(format!("at most {MAX_JUNCTIONS} junctions are supported")));
    }
    if cfg.enemies == 0 {
        return Err(invalid("enemy count must be positive"));
    }
    let mut rng = Rng::seed_from_u64(cfg.seed);
    const ATTEMPTS: usize = 64;
    for _ in 0..ATTEMPTS {
        let start = GridPos::new(1, cell_col(&mut rng, cfg.width));
        let grid = carve_perfect_maze(cfg.width, cfg.height, start, &mut rng);
        let tree = rooted_tree(&grid, start);
        let n = tree.positions.len();
        if n < 2 || n > cfg.junctions as usize {
            continue;
        }
        let goal = (1..n)
            .filter(|v| tree.children[*v].is_empty())
            .max_by(|a, b| tree.depth[*a].cmp(&tree.depth[*b]).then(tree.positions[*b].cmp(&tree.positions[*a])))
            .expect("a tree with two nodes has a leaf");
        return Ok(assign_slopes(cfg, &mut rng, grid, &tree, goal));
    }
    Err(invalid(format!("no maze with at most {} junctions after {ATTEMPTS} attempts", cfg.junctions)))
}

fn assign_slopes(cfg: &GenConfig, rng: &mut Rng, maze: TileGrid, tree: &RootedTree, goal: usize) -> Level2Spec {
    const GOAL_ELEVATION: f64 = 1.0;
    const FLOOR_GAP: f64 = 0.5;
    let n = tree.positions.len();
    let parent_edge: BTreeMap<usize, (usize, u32)> = tree.edges.iter().map(|(u, v, l)| (*v, (*u, *l))).collect();

    let mut canonical = vec![goal];
    while let Some((p, _)) = parent_edge.get(canonical.last().expect("non-empty")) {
        canonical.push(*p);
    }
    canonical.reverse();
    let on_path: BTreeSet<usize> = canonical.iter().copied().collect();
    let mut elevation = vec![0.0f64; n];
    let mut canonical_tenths: BTreeMap<usize, i64> = BTreeMap::new();
    elevation[goal] = GOAL_ELEVATION;
    for w in canonical.windows(2).rev() {
        let (u, v) = (w[0], w[1]);
        let len = parent_edge[&v].1;
        let k = rng.range_i64(15, 30);
        canonical_tenths.insert(u, k);
        elevation[u] = round_elevation(elevation[v] + k as f64 / 10.0 * f64::from(len));
    }

    // Off-path children in BFS order so parents are always assigned first.
    for &(u, v, len) in &tree.edges {
        if on_path.contains(&v) {
            continue;
        }
        let room = ((elevation[u] - GOAL_ELEVATION - FLOOR_GAP) * 10.0 / f64::from(len)).floor() as i64;
        let cap = match canonical_tenths.get(&u) {
            Some(kc) if on_path.contains(&u) => kc - 5,
            _ => 30,
        };
        let hi = cap.min(room).max(-10);
        let k = rng.range_i64(-10, hi);
        elevation[v] = round_elevation(elevation[u] - k as f64 / 10.0 * f64::from(len));
    }

    let junctions: Vec<Junction> = (0..n)
        .map(|i| Junction { id: i as u32, pos: tree.positions[i], elevation: elevation[i] })
        .collect();
    let edges: Vec<Edge> = tree
        .edges
        .iter()
        .enumerate()
        .map(|(id, &(u, v, len))| Edge {
            id: id as u32,
            from: u as u32,
            to: v as u32,
            length: len,
            slope: gradient::slope(elevation[u], elevation[v], len),
        })
        .collect();

    let mut spec = Level2Spec {
        maze,
        junctions,
        edges,
        start: 0,
        goal: goal as u32,
        enemies: Vec::new(),
        damage: gradient::DEFAULT_DAMAGE,
        damage_radius: gradient::DEFAULT_DAMAGE_RADIUS,
        outcome: default_outcome(2),
    };
    let layout = gradient::Level2Layout::new(&spec);
    let start_pos = spec.start_pos();
    for _ in 0..cfg.enemies {
        let mut placed = None;
        for _ in 0..50 {
            let e = rng.index(spec.edges.len());
            let domain = layout.edge_tiles(e as u32).expect("generated edges have corridors").to_vec();
            let spawn = domain[rng.index(domain.len())];
            if spawn.chebyshev(start_pos) >= 3 {
                placed = Some(EnemySpec { spawn, domain });
                break;
            }
        }
        if let Some(p) = placed {
            spec.enemies.push(p);
        }
    }
    spec
}

fn town_grid(cfg: &GenConfig, rng: &mut Rng) -> TileGrid {
    let mut town = TileGrid::filled(cfg.town_width, cfg.town_height, OPEN);
    let blocks = (cfg.town_width * cfg.town_height / 20).max(1);
    for _ in 0..blocks {
        let r = rng.below(u64::from(cfg.town_height - 1)) as u32;
        let c = rng.below(u64::from(cfg.town_width - 1)) as u32;
        for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            town.set(GridPos::new(r + dr, c + dc), WALL);
        }
    }
    town
}

fn connected(grid: &TileGrid) -> bool {
    let Some(first) = grid.open_tiles().next() else { return false };
    let dist = grid.distances_from(first);
    grid.open_tiles().all(|p| dist.get(p).is_some())
}

pub fn generate_level3(cfg: &GenConfig) -> Result<Level3Spec, GenError> {
    if cfg.red_men < 2 {
        return Err(invalid("two red men are needed for the loss condition"));
    }
    if cfg.town_width < 5 || cfg.town_height < 5 {
        return Err(invalid("the town must be at least 5x5"));
    }
    if cfg.red_man_ticks_per_step == 0 {
        return Err(invalid("red men need a positive step period"));
    }
    let mut rng = Rng::seed_from_u64(cfg.seed);
    const ATTEMPTS: usize = 500;
    for _ in 0..ATTEMPTS {
        let town = town_grid(cfg, &mut rng);
        if !connected(&town) {
            continue;
        }
        let mut open: Vec<GridPos> = town.open_tiles().collect();
        let needed = 1 + knn::BOB_COUNT + cfg.red_men as usize;
        if open.len() < needed {
            return Err(invalid("the town is too small for everyone"));
        }
        rng.shuffle(&mut open);
        let spec = Level3Spec {
            town,
            player_spawn: open[0],
            bobs: (0..knn::BOB_COUNT)
                .map(|i| Bob { name: format!("Bob {}", i + 1), pos: open[1 + i] })
                .collect(),
            red_men: open[1 + knn::BOB_COUNT..needed]
                .iter()
                .map(|p| RedManSpec { spawn: *p, ticks_per_step: cfg.red_man_ticks_per_step })
                .collect(),
            k: knn::DEFAULT_K,
            player_votes: knn::PLAYER_VOTES,
            enemy_votes: knn::ENEMY_VOTES,
            arrival_radius: knn::DEFAULT_ARRIVAL_RADIUS,
            outcome: default_outcome(3),
        };
        if validate_level3(&spec).passed {
            return Ok(spec);
        }
    }
    Err(invalid(format!("no winnable, non-trivial town after {ATTEMPTS} attempts")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::walk;

    #[test]
    fn level1_round_trip_seed_1() {
        let spec = generate_level1(&GenConfig::with_seed(1)).unwrap();
        let report = validate_level1(&spec);
        assert!(report.passed, "{report}");
    }

    #[test]
    fn level1_is_deterministic() {
        let a = generate_level1(&GenConfig::with_seed(5)).unwrap();
        let b = generate_level1(&GenConfig::with_seed(5)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn too_many_diamonds_is_invalid() {
        let cfg = GenConfig { diamonds: 100, ..GenConfig::with_seed(1) };
        assert!(matches!(generate_level1(&cfg), Err(GenError::ConfigInvalid(_))));
    }

    #[test]
    fn even_dimensions_are_invalid() {
        let cfg = GenConfig { width: 8, ..GenConfig::with_seed(1) };
        assert!(generate_level1(&cfg).is_err());
        let cfg = GenConfig { height: 3, ..GenConfig::with_seed(1) };
        assert!(generate_level2(&cfg).is_err());
    }

    #[test]
    fn level1_red_path_mirrors_maze_solution() {
        let spec = generate_level1(&GenConfig::with_seed(11)).unwrap();
        let tiles = walk(spec.maze.entrance, &spec.canonical_sequence).unwrap();
        assert_eq!(tiles.last(), Some(&spec.maze.exit));
        assert_eq!(path_directions(&spec.overworld.red_path).unwrap(), spec.canonical_sequence);
    }

    #[test]
    fn single_junction_is_degenerate() {
        let cfg = GenConfig { junctions: 1, ..GenConfig::with_seed(42) };
        assert!(matches!(generate_level2(&cfg), Err(GenError::ConfigInvalid(_))));
    }

    #[test]
    fn level2_seed_42_validates() {
        let spec = generate_level2(&GenConfig::with_seed(42)).unwrap();
        let report = validate_level2(&spec);
        assert!(report.passed, "{report}");
        assert_eq!(spec.enemies.len(), 2);
    }

    #[test]
    fn one_red_man_is_invalid() {
        let cfg = GenConfig { red_men: 1, ..GenConfig::with_seed(3) };
        assert!(matches!(generate_level3(&cfg), Err(GenError::ConfigInvalid(_))));
    }

    #[test]
    fn level3_seed_3_validates_and_repeats() {
        let a = generate_level3(&GenConfig::with_seed(3)).unwrap();
        assert!(validate_level3(&a).passed);
        assert_eq!(a, generate_level3(&GenConfig::with_seed(3)).unwrap());
    }
}
