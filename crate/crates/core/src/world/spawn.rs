use super::{TileGrid, World};
use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("requested {requested} spawn tiles but only {available} are eligible")]
pub struct InsufficientSpace {
    pub requested: usize,
    pub available: usize,
}

/// Picks `n` distinct tiles satisfying `eligible` by rejection sampling over
/// the whole grid. Draws nothing from `rng` when `n == 0` or when there is
/// not enough space.
pub fn place_randomly<F>(grid: &TileGrid, rng: &mut Rng, n: usize, eligible: F) -> Result<Vec<(usize, usize)>, InsufficientSpace>
where
    F: Fn(usize, usize) -> bool,
{
    if n == 0 {
        return Ok(Vec::new());
    }
    let mask: Vec<bool> = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.coords(i);
            eligible(x, y)
        })
        .collect();
    let available = mask.iter().filter(|&&m| m).count();
    if available < n {
        return Err(InsufficientSpace { requested: n, available });
    }
    let mut taken = vec![false; grid.len()];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let i = rng.index(grid.len());
        if mask[i] && !taken[i] {
            taken[i] = true;
            out.push(grid.coords(i));
        }
    }
    Ok(out)
}

impl World {
    /// Open tiles whose center is at least `min_dist` from the agent.
    pub fn open_tile_away_from_agent(&self, x: usize, y: usize, min_dist: f64) -> bool {
        let t = self.grid.get(x, y);
        if t.is_wall() {
            return false;
        }
        let (cx, cy) = self.grid.tile_center(x, y);
        (cx - self.agent.pose.x).hypot(cy - self.agent.pose.y) >= min_dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Tile, TileKind};

    #[test]
    fn zero_requests_leave_rng_untouched() {
        let grid = TileGrid::filled(4, 4, 64.0, Tile::floor(0.0, 128.0));
        let mut rng = Rng::new(5);
        let before = rng.clone();
        assert_eq!(place_randomly(&grid, &mut rng, 0, |_, _| true).unwrap(), vec![]);
        assert_eq!(rng, before);
    }

    #[test]
    fn full_grid_is_covered_exactly_once() {
        let grid = TileGrid::filled(4, 4, 64.0, Tile::floor(0.0, 128.0));
        let mut rng = Rng::new(11);
        let mut tiles = place_randomly(&grid, &mut rng, 16, |_, _| true).unwrap();
        tiles.sort();
        let all: Vec<_> = (0..4).flat_map(|y| (0..4).map(move |x| (x, y))).collect();
        let mut expected = all.clone();
        expected.sort();
        assert_eq!(tiles, expected);
    }

    #[test]
    fn insufficient_space_is_reported() {
        let mut grid = TileGrid::filled(3, 3, 64.0, Tile::wall(128.0));
        for x in 0..3 {
            grid.set(x, 1, Tile::floor(0.0, 128.0));
        }
        let mut rng = Rng::new(1);
        let err = place_randomly(&grid, &mut rng, 5, |x, y| grid.get(x, y).kind == TileKind::Floor).unwrap_err();
        assert_eq!(err, InsufficientSpace { requested: 5, available: 3 });
    }

    #[test]
    fn same_rng_state_same_placement() {
        let grid = TileGrid::walled_room(10, 10, 64.0, 0.0, 128.0);
        let pick = |seed| place_randomly(&grid, &mut Rng::new(seed), 12, |x, y| !grid.get(x, y).is_wall()).unwrap();
        assert_eq!(pick(77), pick(77));
    }
}
