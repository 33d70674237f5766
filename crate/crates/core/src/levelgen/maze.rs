use crate::geom::{Direction, GridPos, TileGrid, OPEN, WALL};
use crate::rng::Rng;

/// Depth-first backtracker over the odd-coordinate cells of a `width` x
/// `height` grid. The result is a tree: one simple path between any two
/// open tiles.
pub fn carve_perfect_maze(width: u32, height: u32, start: GridPos, rng: &mut Rng) -> TileGrid {
    let mut grid = TileGrid::filled(width, height, WALL);
    let is_cell = |p: GridPos| p.row % 2 == 1 && p.col % 2 == 1 && p.row < height - 1 && p.col < width - 1;
    assert!(is_cell(start), "maze start {start} is not a cell");
    grid.set(start, OPEN);
    let mut stack = vec![start];
    while let Some(&here) = stack.last() {
        let fresh: Vec<(GridPos, GridPos)> = Direction::ALL
            .iter()
            .filter_map(|d| {
                let wall = here.step(*d)?;
                let cell = wall.step(*d)?;
                (is_cell(cell) && !grid.is_open(cell)).then_some((wall, cell))
            })
            .collect();
        if fresh.is_empty() {
            stack.pop();
            continue;
        }
        let (wall, cell) = fresh[rng.index(fresh.len())];
        grid.set(wall, OPEN);
        grid.set(cell, OPEN);
        stack.push(cell);
    }
    grid
}
