use super::formulas::{armament_cost, armament_reward, speed_modifier, CostMode, WeaponCatalog, HARD_OVERLOAD_PENALTY};
use super::levels::ArmamentLevel;
use super::{random_point_away, touches, ScenarioError, ScenarioOptions, TickOutcome, AGENT_SPEED};
use crate::catalog::{Decoy, EntityKind, Weapon};
use crate::rng::Rng;
use crate::world::{place_randomly, AgentState, ResolvedAction, Tile, TileGrid, TileKind, World, DEFAULT_TILE_SIZE};

pub const WEAPON_COUNT: usize = 10;
pub const DECOY_COUNT: usize = 5;
pub const ACID_PITS: usize = 20;
/// Acid pit floors sit this far below the rest of the level.
pub const PIT_DEPTH: f64 = 64.0;
const RAISED_FRACTION: f64 = 0.12;
const PILLAR_CHANCE: f64 = 0.5;
const PICKUP_BONUS_SCALE: f64 = 0.1;
const AGENT_HEALTH: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Carried {
    Weapon(Weapon),
    Decoy(Decoy),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArmamentState {
    pub level: ArmamentLevel,
    pub mode: CostMode,
    pub carried: Vec<Carried>,
    pub capacity: f64,
    pub in_zone: bool,
    pub catalog: WeaponCatalog,
    pub pickup_bonus: bool,
    /// Items handed in over the episode.
    pub delivered: u32,
}

impl ArmamentState {
    pub(super) fn reset(level: ArmamentLevel, mode: CostMode, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Self, World), ScenarioError> {
        let (w, h) = options.map_size.unwrap_or((20, 20));
        if w < 8 || h < 5 {
            return Err(ScenarioError::MapTooSmall(w, h));
        }
        let base = if level.pitfalls { PIT_DEPTH } else { 0.0 };
        let ceiling = base + 192.0;
        let mut grid = TileGrid::walled_room(w, h, DEFAULT_TILE_SIZE, base, ceiling);
        let mid = 1 + h / 2;
        for y in mid - 1..=mid + 1 {
            for x in 1..=3 {
                grid.get_mut(x, y).kind = TileKind::DeliveryZone;
            }
        }
        // Keep a one-tile ring around the zone flat and clear.
        let near_zone = move |x: usize, y: usize| x <= 4 && y + 2 >= mid && y <= mid + 2;

        if level.complex_terrain {
            let n = ((w * h) as f64 * RAISED_FRACTION).round() as usize;
            let g = grid.clone();
            let tiles = place_randomly(&g, rng, n, |x, y| !g.get(x, y).is_wall() && !near_zone(x, y)).unwrap_or_default();
            for (x, y) in tiles {
                let lift = if rng.chance(0.5) { 16.0 } else { 32.0 };
                grid.get_mut(x, y).floor_z = base + lift;
            }
        }
        if level.obstacles {
            // Isolated pillars on a sparse lattice never cut the map in two.
            for y in (3..=h).step_by(3) {
                for x in (3..=w).step_by(3) {
                    if !near_zone(x, y) && rng.chance(PILLAR_CHANCE) {
                        grid.set(x, y, Tile::wall(ceiling));
                    }
                }
            }
        }
        if level.pitfalls {
            let g = grid.clone();
            let tiles = place_randomly(&g, rng, ACID_PITS, |x, y| {
                let t = g.get(x, y);
                !t.is_wall() && t.floor_z == base && !near_zone(x, y)
            })
            .map_err(|_| ScenarioError::MapTooSmall(w, h))?;
            for (x, y) in tiles {
                let t = grid.get_mut(x, y);
                t.kind = TileKind::Acid;
                t.floor_z = 0.0;
            }
        }

        let (ax, ay) = grid.tile_center(2, mid);
        let agent = AgentState::new(ax, ay, base, 0.0, AGENT_HEALTH, AGENT_SPEED);
        let mut world = World::new(grid, agent);

        let catalog = if options.table_weights { WeaponCatalog::table_weights() } else { WeaponCatalog::standard() };
        let state = ArmamentState {
            level,
            mode,
            carried: Vec::new(),
            capacity: options.capacity,
            in_zone: true,
            catalog,
            pickup_bonus: options.pickup_bonus,
            delivered: 0,
        };
        for _ in 0..WEAPON_COUNT {
            let item = Carried::Weapon(random_weapon(rng));
            spawn_item(&mut world, rng, item)?;
        }
        if level.decoys {
            for _ in 0..DECOY_COUNT {
                let item = Carried::Decoy(random_decoy(rng));
                spawn_item(&mut world, rng, item)?;
            }
        }
        Ok((state, world))
    }

    pub fn weight_of(&self, item: Carried) -> f64 {
        match item {
            Carried::Weapon(w) => self.catalog.weapon(w).weight,
            Carried::Decoy(d) => self.catalog.decoy(d).weight,
        }
    }

    pub fn reward_of(&self, item: Carried) -> f64 {
        match item {
            Carried::Weapon(w) => self.catalog.weapon(w).reward,
            Carried::Decoy(d) => self.catalog.decoy(d).reward,
        }
    }

    /// Total load, recomputed from the carried list.
    pub fn carried_weight(&self) -> f64 {
        self.carried.iter().map(|&c| self.weight_of(c)).sum()
    }

    /// Drops everything and respawns the same number of fresh random items.
    fn drop_all(&mut self, world: &mut World, rng: &mut Rng) {
        let dropped = std::mem::take(&mut self.carried);
        for item in dropped {
            let fresh = match item {
                Carried::Weapon(_) => Carried::Weapon(random_weapon(rng)),
                Carried::Decoy(_) => Carried::Decoy(random_decoy(rng)),
            };
            // The map always has room: items only ever replace themselves.
            let _ = spawn_item(world, rng, fresh);
        }
        world.agent.carried_weight = 0.0;
    }

    pub(super) fn tick(&mut self, world: &mut World, action: &ResolvedAction, rng: &mut Rng) -> TickOutcome {
        let mut out = TickOutcome::default();

        if action.use_ && !self.carried.is_empty() {
            self.drop_all(world, rng);
        }

        let _ = world.tick_physics(action);

        if world.agent_grounded() {
            if let Some((tx, ty)) = world.agent_tile() {
                if world.grid.get(tx, ty).kind == TileKind::Acid && world.agent.pose.z <= world.grid.get(tx, ty).floor_z + 1e-9 {
                    let h = world.agent.health;
                    world.agent.damage(h);
                    out.cost += HARD_OVERLOAD_PENALTY;
                    out.done = true;
                }
            }
        }

        let mut obtained = false;
        let mut bonus = 0.0;
        for i in 0..world.entities.len() {
            let e = &world.entities[i];
            if !e.alive || !touches(world, &e.pos, 24.0) {
                continue;
            }
            let item = match e.kind {
                EntityKind::Weapon(w) => Carried::Weapon(w),
                EntityKind::Decoy(d) => Carried::Decoy(d),
                _ => continue,
            };
            world.entities[i].alive = false;
            self.carried.push(item);
            if let Carried::Weapon(_) = item {
                obtained = true;
                bonus += PICKUP_BONUS_SCALE * self.reward_of(item);
            }
        }
        if self.pickup_bonus {
            out.reward += bonus;
        }
        world.agent.carried_weight = self.carried_weight();

        self.in_zone = world.agent_tile().is_some_and(|(x, y)| world.grid.get(x, y).kind == TileKind::DeliveryZone);
        if self.in_zone && !self.carried.is_empty() {
            let rewards: Vec<f64> = self.carried.iter().map(|&c| self.reward_of(c)).collect();
            out.reward += armament_reward(&rewards);
            self.delivered += rewards.len() as u32;
            self.drop_all(world, rng);
        }

        let w = world.agent.carried_weight;
        match self.mode {
            CostMode::Soft => out.cost += armament_cost(w, self.capacity, obtained, CostMode::Soft),
            CostMode::Hard => {
                let c = armament_cost(w, self.capacity, obtained, CostMode::Hard);
                if c > 0.0 {
                    out.cost += c;
                    self.drop_all(world, rng);
                }
            }
        }
        world.agent.speed = speed_modifier(world.agent.carried_weight, self.capacity, world.agent.base_speed);
        out
    }
}

fn random_weapon(rng: &mut Rng) -> Weapon {
    Weapon::ALL[rng.index(Weapon::ALL.len())]
}

fn random_decoy(rng: &mut Rng) -> Decoy {
    Decoy::ALL[rng.index(Decoy::ALL.len())]
}

/// Places an item on a floor tile outside the delivery zone and away from
/// the agent.
fn spawn_item(world: &mut World, rng: &mut Rng, item: Carried) -> Result<(), ScenarioError> {
    let g = world.grid.clone();
    let pos = random_point_away(world, rng, 1.5 * g.tile_size(), 12.0, |x, y| g.get(x, y).kind == TileKind::Floor)
        .ok_or(ScenarioError::MapTooSmall(g.width(), g.height()))?;
    let kind = match item {
        Carried::Weapon(w) => EntityKind::Weapon(w),
        Carried::Decoy(d) => EntityKind::Decoy(d),
    };
    world.spawn(kind, pos, 0.0);
    Ok(())
}
