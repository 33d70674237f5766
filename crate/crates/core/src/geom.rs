//! Grid positions, directions and tile maps.

use std::collections::VecDeque;
use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPos {
    pub row: u32,
    pub col: u32,
}

impl GridPos {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }

    /// One step in `dir`, or `None` when it would leave the non-negative quadrant.
    pub fn step(self, dir: Direction) -> Option<GridPos> {
        let (dr, dc) = dir.delta();
        let row = self.row.checked_add_signed(dr)?;
        let col = self.col.checked_add_signed(dc)?;
        Some(GridPos { row, col })
    }

    /// Direction of a unit step from `self` to `other`, if they are 4-adjacent.
    pub fn direction_to(self, other: GridPos) -> Option<Direction> {
        Direction::ALL.into_iter().find(|d| self.step(*d) == Some(other))
    }

    pub fn chebyshev(self, other: GridPos) -> u32 {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    pub fn manhattan(self, other: GridPos) -> u32 {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Euclidean distance in tile units.
pub fn euclidean<T: Float>(a: GridPos, b: GridPos) -> T {
    let dr = T::from(a.row.abs_diff(b.row)).unwrap_or_else(T::zero);
    let dc = T::from(a.col.abs_diff(b.col)).unwrap_or_else(T::zero);
    dr.hypot(dc)
}

/// Round to one decimal place for HUD labels.
pub fn round1<T: Float>(x: T) -> T {
    let ten = T::from(10.0).unwrap_or_else(T::one);
    (x * ten).round() / ten
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
        }
    }

    /// (row delta, column delta); north is towards row 0.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (-1, 0),
            Direction::South => (1, 0),
            Direction::East => (0, 1),
            Direction::West => (0, -1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::North => "north",
            Direction::South => "south",
            Direction::East => "east",
            Direction::West => "west",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::South => 'S',
            Direction::East => 'E',
            Direction::West => 'W',
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Direction::North => 0,
            Direction::South => 1,
            Direction::East => 2,
            Direction::West => 3,
        }
    }

    pub fn parse(token: &str) -> Option<Direction> {
        match token.to_ascii_lowercase().as_str() {
            "n" | "north" | "up" => Some(Direction::North),
            "s" | "south" | "down" => Some(Direction::South),
            "e" | "east" | "right" => Some(Direction::East),
            "w" | "west" | "left" => Some(Direction::West),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rectangular tile map: `#` is a wall, `.` is walkable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileGrid {
    pub rows: Vec<String>,
}

pub const WALL: char = '#';
pub const OPEN: char = '.';

impl TileGrid {
    pub fn filled(width: u32, height: u32, tile: char) -> Self {
        let row: String = std::iter::repeat(tile).take(width as usize).collect();
        Self { rows: vec![row; height as usize] }
    }

    pub fn height(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn width(&self) -> u32 {
        self.rows.first().map_or(0, |r| r.chars().count() as u32)
    }

    /// Checks the grid is non-empty, rectangular and uses only `#` and `.`.
    pub fn check_shape(&self) -> Result<(), String> {
        let width = self.width();
        if self.rows.is_empty() || width == 0 {
            return Err("grid is empty".into());
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.chars().count() as u32 != width {
                return Err(format!("row {i} has width {} (expected {width})", row.len()));
            }
            if let Some(c) = row.chars().find(|c| *c != WALL && *c != OPEN) {
                return Err(format!("row {i} contains unknown tile {c:?}"));
            }
        }
        Ok(())
    }

    pub fn in_bounds(&self, pos: GridPos) -> bool {
        pos.row < self.height() && pos.col < self.width()
    }

    pub fn tile(&self, pos: GridPos) -> Option<char> {
        self.rows
            .get(pos.row as usize)
            .and_then(|r| r.as_bytes().get(pos.col as usize))
            .map(|b| *b as char)
    }

    pub fn is_open(&self, pos: GridPos) -> bool {
        self.tile(pos) == Some(OPEN)
    }

    pub fn set(&mut self, pos: GridPos, tile: char) {
        let row = &mut self.rows[pos.row as usize];
        let mut bytes = std::mem::take(row).into_bytes();
        bytes[pos.col as usize] = tile as u8;
        *row = String::from_utf8(bytes).expect("ascii tiles");
    }

    /// Open 4-neighbours in `Direction::ALL` order.
    pub fn open_neighbors(&self, pos: GridPos) -> impl Iterator<Item = (Direction, GridPos)> + '_ {
        Direction::ALL.into_iter().filter_map(move |d| {
            let next = pos.step(d)?;
            self.is_open(next).then_some((d, next))
        })
    }

    pub fn degree(&self, pos: GridPos) -> usize {
        self.open_neighbors(pos).count()
    }

    pub fn open_tiles(&self) -> impl Iterator<Item = GridPos> + '_ {
        let w = self.width();
        (0..self.height())
            .flat_map(move |r| (0..w).map(move |c| GridPos::new(r, c)))
            .filter(|p| self.is_open(*p))
    }

    fn index(&self, pos: GridPos) -> usize {
        (pos.row * self.width() + pos.col) as usize
    }

    /// BFS step distances over open tiles from `from`.
    pub fn distances_from(&self, from: GridPos) -> DistanceMap {
        let mut dist = vec![None; (self.width() * self.height()) as usize];
        let mut queue = VecDeque::new();
        if self.is_open(from) {
            dist[self.index(from)] = Some(0);
            queue.push_back(from);
        }
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)].unwrap_or(0);
            for (_, n) in self.open_neighbors(p) {
                let i = self.index(n);
                if dist[i].is_none() {
                    dist[i] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        DistanceMap { width: self.width(), dist }
    }

    /// Multi-source BFS distances from every tile in `sources`.
    pub fn distances_to_set(&self, sources: &[GridPos]) -> DistanceMap {
        let mut dist = vec![None; (self.width() * self.height()) as usize];
        let mut queue = VecDeque::new();
        for &s in sources {
            if self.is_open(s) && dist[self.index(s)].is_none() {
                dist[self.index(s)] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)].unwrap_or(0);
            for (_, n) in self.open_neighbors(p) {
                let i = self.index(n);
                if dist[i].is_none() {
                    dist[i] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        DistanceMap { width: self.width(), dist }
    }

    /// A shortest open path from `from` to `to`, both ends included.
    pub fn shortest_path(&self, from: GridPos, to: GridPos) -> Option<Vec<GridPos>> {
        let dist = self.distances_from(to);
        dist.get(from)?;
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let d = dist.get(cur)?;
            cur = self
                .open_neighbors(cur)
                .map(|(_, n)| n)
                .find(|n| dist.get(*n) == Some(d - 1))?;
            path.push(cur);
        }
        Some(path)
    }
}

#[derive(Debug, Clone)]
pub struct DistanceMap {
    width: u32,
    dist: Vec<Option<u32>>,
}

impl DistanceMap {
    pub fn get(&self, pos: GridPos) -> Option<u32> {
        if pos.col >= self.width {
            return None;
        }
        self.dist
            .get((pos.row * self.width + pos.col) as usize)
            .copied()
            .flatten()
    }
}

/// Direction sequence of a path given as consecutive 4-adjacent tiles.
pub fn path_directions(path: &[GridPos]) -> Option<Vec<Direction>> {
    path.windows(2).map(|w| w[0].direction_to(w[1])).collect()
}

/// Tiles visited by walking `moves` from `start`, start included.
pub fn walk(start: GridPos, moves: &[Direction]) -> Option<Vec<GridPos>> {
    let mut out = Vec::with_capacity(moves.len() + 1);
    out.push(start);
    let mut cur = start;
    for &d in moves {
        cur = cur.step(d)?;
        out.push(cur);
    }
    Some(out)
}
