use std::fmt;

pub const DEFAULT_TILE_SIZE: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TileKind {
    Floor,
    Lava,
    Acid,
    Wall,
    DeliveryZone,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tile {
    pub kind: TileKind,
    pub floor_z: f64,
    pub ceiling_z: f64,
}

impl Tile {
    pub const fn floor(floor_z: f64, ceiling_z: f64) -> Self {
        Self { kind: TileKind::Floor, floor_z, ceiling_z }
    }

    pub const fn wall(ceiling_z: f64) -> Self {
        Self { kind: TileKind::Wall, floor_z: 0.0, ceiling_z }
    }

    pub fn is_wall(&self) -> bool {
        self.kind == TileKind::Wall
    }
}

/// Row-major tile map. Tile `(tx, ty)` covers world `[tx*s, (tx+1)*s) x [ty*s, (ty+1)*s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TileGrid {
    width: usize,
    height: usize,
    tile_size: f64,
    tiles: Vec<Tile>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridViolation {
    InvertedHeights { x: usize, y: usize },
    OpenBoundary { x: usize, y: usize },
}

impl fmt::Display for GridViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridViolation::InvertedHeights { x, y } => write!(f, "tile ({x}, {y}) has floor above ceiling or below 0"),
            GridViolation::OpenBoundary { x, y } => write!(f, "boundary tile ({x}, {y}) is not a wall"),
        }
    }
}

impl TileGrid {
    pub fn filled(width: usize, height: usize, tile_size: f64, tile: Tile) -> Self {
        assert!(width > 0 && height > 0, "grid must be non-empty");
        Self { width, height, tile_size, tiles: vec![tile; width * height] }
    }

    /// An open `interior_w x interior_h` room surrounded by a one-tile wall ring.
    pub fn walled_room(interior_w: usize, interior_h: usize, tile_size: f64, floor_z: f64, ceiling_z: f64) -> Self {
        let mut grid = Self::filled(interior_w + 2, interior_h + 2, tile_size, Tile::floor(floor_z, ceiling_z));
        for x in 0..grid.width {
            grid.set(x, 0, Tile::wall(ceiling_z));
            grid.set(x, grid.height - 1, Tile::wall(ceiling_z));
        }
        for y in 0..grid.height {
            grid.set(0, y, Tile::wall(ceiling_z));
            grid.set(grid.width - 1, y, Tile::wall(ceiling_z));
        }
        grid
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tile_size(&self) -> f64 {
        self.tile_size
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn get(&self, x: usize, y: usize) -> &Tile {
        &self.tiles[self.index(x, y)]
    }

    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut Tile {
        let i = self.index(x, y);
        &mut self.tiles[i]
    }

    pub fn set(&mut self, x: usize, y: usize, tile: Tile) {
        let i = self.index(x, y);
        self.tiles[i] = tile;
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    /// Tile under a world position; `None` outside the grid.
    pub fn tile_coords_at(&self, wx: f64, wy: f64) -> Option<(usize, usize)> {
        if wx < 0.0 || wy < 0.0 {
            return None;
        }
        let tx = (wx / self.tile_size) as usize;
        let ty = (wy / self.tile_size) as usize;
        (tx < self.width && ty < self.height).then_some((tx, ty))
    }

    pub fn tile_at(&self, wx: f64, wy: f64) -> Option<&Tile> {
        self.tile_coords_at(wx, wy).map(|(x, y)| self.get(x, y))
    }

    /// Same as [`tile_at`](Self::tile_at) but signed tile coordinates, for ray marching.
    pub fn tile_at_index(&self, tx: i64, ty: i64) -> Option<&Tile> {
        if tx < 0 || ty < 0 || tx as usize >= self.width || ty as usize >= self.height {
            return None;
        }
        Some(self.get(tx as usize, ty as usize))
    }

    pub fn tile_center(&self, x: usize, y: usize) -> (f64, f64) {
        ((x as f64 + 0.5) * self.tile_size, (y as f64 + 0.5) * self.tile_size)
    }

    /// Distance along the unit direction `(dx, dy)` from `(x, y)` to the first
    /// wall tile or the grid edge, capped at `max`.
    pub fn ray_wall_distance(&self, x: f64, y: f64, dx: f64, dy: f64, max: f64) -> f64 {
        let s = self.tile_size;
        let (mut tx, mut ty) = ((x / s).floor() as i64, (y / s).floor() as i64);
        let step_x = if dx > 0.0 { 1 } else { -1 };
        let step_y = if dy > 0.0 { 1 } else { -1 };
        let delta_x = if dx != 0.0 { (s / dx).abs() } else { f64::INFINITY };
        let delta_y = if dy != 0.0 { (s / dy).abs() } else { f64::INFINITY };
        let mut side_x = if dx > 0.0 {
            ((tx + 1) as f64 * s - x) / dx
        } else if dx < 0.0 {
            (x - tx as f64 * s) / -dx
        } else {
            f64::INFINITY
        };
        let mut side_y = if dy > 0.0 {
            ((ty + 1) as f64 * s - y) / dy
        } else if dy < 0.0 {
            (y - ty as f64 * s) / -dy
        } else {
            f64::INFINITY
        };
        loop {
            if self.tile_at_index(tx, ty).map_or(true, Tile::is_wall) {
                return 0.0;
            }
            let t = if side_x < side_y {
                let t = side_x;
                side_x += delta_x;
                tx += step_x;
                t
            } else {
                let t = side_y;
                side_y += delta_y;
                ty += step_y;
                t
            };
            if t >= max {
                return max;
            }
            if self.tile_at_index(tx, ty).map_or(true, Tile::is_wall) {
                return t;
            }
        }
    }

    pub fn max_ceiling(&self) -> f64 {
        self.tiles.iter().map(|t| t.ceiling_z).fold(0.0, f64::max)
    }

    pub fn count_kind(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|t| t.kind == kind).count()
    }

    /// Checks height ordering on open tiles and, when `require_walled` is set,
    /// that the outer ring is solid.
    pub fn validate(&self, require_walled: bool) -> Result<(), GridViolation> {
        for y in 0..self.height {
            for x in 0..self.width {
                let t = self.get(x, y);
                if !t.is_wall() && !(0.0 <= t.floor_z && t.floor_z <= t.ceiling_z) {
                    return Err(GridViolation::InvertedHeights { x, y });
                }
                let boundary = x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height;
                if require_walled && boundary && !t.is_wall() {
                    return Err(GridViolation::OpenBoundary { x, y });
                }
            }
        }
        Ok(())
    }
}
