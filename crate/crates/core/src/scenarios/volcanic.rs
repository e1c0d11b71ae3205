use super::formulas::{volcanic_cost, volcanic_reward, CostMode};
use super::levels::VolcanicLevel;
use super::{random_point_away, ScenarioError, ScenarioOptions, TickOutcome, AGENT_SPEED};
use crate::catalog::{EntityKind, Pickup};
use crate::rng::Rng;
use crate::world::{place_randomly, AgentState, ResolvedAction, Tile, TileGrid, TileKind, World, DEFAULT_TILE_SIZE};
use std::f64::consts::TAU;

pub const START_HEALTH: f64 = 1000.0;
/// Ticks between platform relayouts.
pub const RELAYOUT_INTERVAL: u64 = 350;
pub const INVULNERABILITY_TICKS: u32 = 35;
pub const INITIAL_ITEMS: usize = 20;
pub const ITEM_INTERVAL: u64 = 60;
pub const LAVA_FLOOR: f64 = 0.0;
pub const PLATFORM_FLOOR: f64 = 16.0;
pub const PLATFORM_MAX: f64 = 56.0;
const CEILING: f64 = 192.0;
const LAVA_DAMAGE: f64 = 1.0;

/// Vertical oscillation of one platform tile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waggle {
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolcanicState {
    pub level: VolcanicLevel,
    pub mode: CostMode,
    pub invuln_ticks_left: u32,
    /// Ticks until the next relayout.
    pub platform_timer: u64,
    pub items_collected: u32,
    /// Resting floor height per tile index, before waggle.
    base_floor: Vec<f64>,
    waggle: Vec<Option<Waggle>>,
}

/// Picks a fresh set of platforms. The tile at `keep` is always a platform.
/// Returns the full list of interior tile replacements; an empty patch
/// means the level keeps its layout.
pub fn relayout_platforms(level: &VolcanicLevel, grid: &TileGrid, keep: (usize, usize), rng: &mut Rng) -> Vec<(usize, usize, Tile)> {
    if !level.changing_platforms {
        return Vec::new();
    }
    layout(level, grid, keep, rng)
}

fn layout(level: &VolcanicLevel, grid: &TileGrid, keep: (usize, usize), rng: &mut Rng) -> Vec<(usize, usize, Tile)> {
    let interior: Vec<(usize, usize)> = (0..grid.len()).map(|i| grid.coords(i)).filter(|&(x, y)| !grid.get(x, y).is_wall()).collect();
    let n = interior.len();
    let lava = lava_tiles(level.lava_coverage, n);
    let platforms = n - lava;
    let mut chosen = vec![keep];
    if platforms > 1 {
        chosen.extend(place_randomly(grid, rng, platforms - 1, |x, y| !grid.get(x, y).is_wall() && (x, y) != keep).expect("interior has room for platforms"));
    }
    let mut patch: Vec<(usize, usize, Tile)> = interior.iter().map(|&(x, y)| (x, y, Tile { kind: TileKind::Lava, floor_z: LAVA_FLOOR, ceiling_z: CEILING })).collect();
    for (x, y) in chosen.into_iter().take(platforms) {
        let h = if level.random_height { rng.range(PLATFORM_FLOOR, PLATFORM_MAX) } else { PLATFORM_FLOOR };
        let slot = patch.iter_mut().find(|p| p.0 == x && p.1 == y).expect("platform on interior tile");
        slot.2 = Tile::floor(h, CEILING);
    }
    patch
}

/// Number of lava tiles for a coverage percentage over `n` floor tiles.
pub fn lava_tiles(coverage: u32, n: usize) -> usize {
    (coverage as f64 / 100.0 * n as f64).round() as usize
}

impl VolcanicState {
    pub(super) fn reset(level: VolcanicLevel, mode: CostMode, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Self, World), ScenarioError> {
        let (w, h) = options.map_size.unwrap_or((20, 20));
        if w < 3 || h < 3 {
            return Err(ScenarioError::MapTooSmall(w, h));
        }
        let mut grid = TileGrid::walled_room(w, h, DEFAULT_TILE_SIZE, LAVA_FLOOR, CEILING);
        let start = (1 + rng.index(w), 1 + rng.index(h));
        for (x, y, t) in layout(&level, &grid, start, rng) {
            grid.set(x, y, t);
        }
        let (ax, ay) = grid.tile_center(start.0, start.1);
        let z = grid.get(start.0, start.1).floor_z;
        let yaw = rng.range(0.0, 360.0);
        let world_agent = AgentState::new(ax, ay, z, yaw, START_HEALTH, AGENT_SPEED);
        let mut world = World::new(grid, world_agent);
        let mut state = VolcanicState {
            level,
            mode,
            invuln_ticks_left: 0,
            platform_timer: RELAYOUT_INTERVAL,
            items_collected: 0,
            base_floor: Vec::new(),
            waggle: Vec::new(),
        };
        state.capture_layout(&world, rng);
        for _ in 0..INITIAL_ITEMS {
            spawn_item(&mut world, rng);
        }
        Ok((state, world))
    }

    fn capture_layout(&mut self, world: &World, rng: &mut Rng) {
        let g = &world.grid;
        self.base_floor = g.tiles().iter().map(|t| t.floor_z).collect();
        self.waggle = g
            .tiles()
            .iter()
            .map(|t| {
                (self.level.waggle && t.kind == TileKind::Floor).then(|| Waggle {
                    amplitude: rng.range(4.0, 12.0),
                    period: rng.range(70.0, 210.0),
                    phase: rng.range(0.0, TAU),
                })
            })
            .collect();
    }

    fn apply_waggle(&self, world: &mut World) {
        let t = world.tick as f64;
        for (i, w) in self.waggle.iter().enumerate() {
            if let Some(w) = w {
                let (x, y) = world.grid.coords(i);
                world.grid.get_mut(x, y).floor_z = self.base_floor[i] + w.amplitude * (TAU * t / w.period + w.phase).sin();
            }
        }
        world.carry_agent_with_floor();
    }

    fn on_lava(world: &World) -> bool {
        match world.agent_tile() {
            Some((x, y)) => {
                let t = world.grid.get(x, y);
                t.kind == TileKind::Lava && !world.agent.airborne && world.agent.pose.z <= t.floor_z + 1e-9
            }
            None => false,
        }
    }

    pub(super) fn tick(&mut self, world: &mut World, action: &ResolvedAction, rng: &mut Rng) -> TickOutcome {
        let h_prev = world.agent.health;

        if self.level.changing_platforms {
            self.platform_timer -= 1;
            if self.platform_timer == 0 {
                self.platform_timer = RELAYOUT_INTERVAL;
                let keep = world.agent_tile().expect("agent inside grid");
                for (x, y, t) in relayout_platforms(&self.level, &world.grid, keep, rng) {
                    world.grid.set(x, y, t);
                }
                self.capture_layout(world, rng);
                self.invuln_ticks_left = INVULNERABILITY_TICKS;
                for e in world.entities.iter_mut() {
                    if let Some(t) = world.grid.tile_at(e.pos.x, e.pos.y) {
                        e.pos.z = t.floor_z;
                    }
                }
            }
        }
        if self.level.waggle {
            self.apply_waggle(world);
        }
        world.agent.invulnerable = self.invuln_ticks_left > 0;

        let _ = world.tick_physics(action);

        if Self::on_lava(world) {
            let dmg = match self.mode {
                CostMode::Soft => LAVA_DAMAGE,
                CostMode::Hard => world.agent.health,
            };
            world.agent.damage(dmg);
        }

        let mut items = 0;
        for i in 0..world.entities.len() {
            let e = &world.entities[i];
            if !e.alive {
                continue;
            }
            let floor = world.grid.tile_at(e.pos.x, e.pos.y).map_or(0.0, |t| t.floor_z);
            let a = &world.agent;
            if e.pos.dist_xy(a.pose.x, a.pose.y) <= a.radius + 16.0 && (a.pose.z - floor).abs() <= 24.0 {
                world.entities[i].alive = false;
                items += 1;
            }
        }
        self.items_collected += items;

        if (world.tick + 1) % ITEM_INTERVAL == 0 {
            spawn_item(world, rng);
        }
        if self.invuln_ticks_left > 0 {
            self.invuln_ticks_left -= 1;
        }

        TickOutcome { reward: volcanic_reward(items), cost: volcanic_cost(h_prev, world.agent.health), done: !world.agent.alive() }
    }
}

/// Items land anywhere, lava included.
fn spawn_item(world: &mut World, rng: &mut Rng) {
    if let Some(pos) = random_point_away(world, rng, 0.0, 20.0, |_, _| true) {
        world.spawn(EntityKind::Pickup(Pickup::ArmorBonus), pos, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(n: u8) -> VolcanicLevel {
        use super::super::{LevelConfig, ScenarioId, ScenarioKind};
        match LevelConfig::for_id(ScenarioId { kind: ScenarioKind::VolcanicVenture, level: n }) {
            LevelConfig::Volcanic(l) => l,
            _ => unreachable!(),
        }
    }

    #[test]
    fn level_one_relayout_is_a_no_op() {
        let grid = TileGrid::walled_room(20, 20, 64.0, 0.0, 128.0);
        let mut rng = Rng::new(1);
        let before = rng.state();
        assert!(relayout_platforms(&level(1), &grid, (3, 3), &mut rng).is_empty());
        assert_eq!(rng.state(), before);
    }

    #[test]
    fn coverage_on_level_three() {
        for seed in 0..20 {
            let mut rng = Rng::new(seed);
            let (_, w) = VolcanicState::reset(level(3), CostMode::Soft, &ScenarioOptions::default(), &mut rng).unwrap();
            let lava = w.grid.count_kind(TileKind::Lava);
            assert!((319..=321).contains(&lava), "{lava}");
            assert_ne!(w.grid.get(w.agent_tile().unwrap().0, w.agent_tile().unwrap().1).kind, TileKind::Lava);
        }
    }

    #[test]
    fn relayout_grants_invulnerability_and_spares_agent_tile() {
        let mut rng = Rng::new(5);
        let (mut s, mut w) = VolcanicState::reset(level(2), CostMode::Soft, &ScenarioOptions::default(), &mut rng).unwrap();
        for _ in 0..RELAYOUT_INTERVAL {
            s.tick(&mut w, &ResolvedAction::NOOP, &mut rng);
            w.tick += 1;
        }
        assert_eq!(s.invuln_ticks_left, INVULNERABILITY_TICKS - 1);
        let (x, y) = w.agent_tile().unwrap();
        assert_eq!(w.grid.get(x, y).kind, TileKind::Floor);
        assert_eq!(w.agent.health, START_HEALTH);
    }
}
