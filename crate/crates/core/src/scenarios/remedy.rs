use super::formulas::{remedy_cost, remedy_reward, RemedyPickups};
use super::levels::RemedyLevel;
use super::{random_point_away, touches, ScenarioError, ScenarioOptions, TickOutcome, AGENT_SPEED, FRAME_SKIP};
use crate::catalog::{EntityKind, Pickup};
use crate::rng::Rng;
use crate::world::{AgentState, ResolvedAction, TileGrid, World, DEFAULT_TILE_SIZE};

/// Ticks between item waves.
pub const WAVE_INTERVAL: u64 = 120;
/// Health bonuses per wave; each wave also brings one of every hazard.
pub const WAVE_HEALTH_BONUSES: u32 = 2;
/// Items never appear within this distance of the agent.
const SPAWN_CLEARANCE: f64 = 128.0;
/// Items are only grabbed by a body whose feet are this close to the floor.
const REACH_Z: f64 = 16.0;
const AGENT_HEALTH: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RemedyState {
    pub level: RemedyLevel,
    pub goggles_on: bool,
    /// Ticks into the current light cycle.
    pub darkness_timer: u64,
    /// Health items ever placed on the map.
    pub health_spawned: u64,
    pub health_collected: u64,
    pub hazards_collected: u64,
}

impl RemedyState {
    pub(super) fn reset(level: RemedyLevel, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Self, World), ScenarioError> {
        let (w, h) = options.map_size.unwrap_or((16, 16));
        if w < 5 || h < 5 {
            return Err(ScenarioError::MapTooSmall(w, h));
        }
        let grid = TileGrid::walled_room(w, h, DEFAULT_TILE_SIZE, 0.0, 128.0);
        let tx = 1 + rng.index(w);
        let ty = 1 + rng.index(h);
        let (ax, ay) = grid.tile_center(tx, ty);
        let yaw = rng.range(0.0, 360.0);
        let mut world = World::new(grid, AgentState::new(ax, ay, 0.0, yaw, AGENT_HEALTH, AGENT_SPEED));

        let mut state = RemedyState { level, goggles_on: false, darkness_timer: 0, health_spawned: 0, health_collected: 0, hazards_collected: 0 };
        for _ in 0..level.health_vials {
            state.place(&mut world, rng, Pickup::HealthBonus)?;
        }
        for i in 0..level.hazardous_items {
            state.place(&mut world, rng, Pickup::HAZARDS[i as usize % Pickup::HAZARDS.len()])?;
        }
        state.place(&mut world, rng, Pickup::Stimpack)?;
        state.place(&mut world, rng, Pickup::Medikit)?;
        for _ in 0..level.goggles.unwrap_or(0) {
            state.place(&mut world, rng, Pickup::Infrared)?;
        }
        state.update_light(&mut world);
        Ok((state, world))
    }

    fn place(&mut self, world: &mut World, rng: &mut Rng, item: Pickup) -> Result<(), ScenarioError> {
        let pos = random_point_away(world, rng, SPAWN_CLEARANCE, 24.0, |_, _| true)
            .ok_or(ScenarioError::MapTooSmall(world.grid.width(), world.grid.height()))?;
        world.spawn(EntityKind::Pickup(item), pos, 0.0);
        if item.is_health() {
            self.health_spawned += 1;
        }
        Ok(())
    }

    /// Health items currently lying on the map.
    pub fn health_on_map(world: &World) -> u64 {
        world.entities.iter().filter(|e| e.alive && matches!(e.kind, EntityKind::Pickup(p) if p.is_health())).count() as u64
    }

    /// Lights alternate bright and dark with the bright phase three times as long.
    pub fn is_dark(&self) -> bool {
        match self.level.darkness_duration {
            Some(d) => {
                let dark = d as u64 * FRAME_SKIP as u64;
                self.darkness_timer % (4 * dark) >= 3 * dark
            }
            None => false,
        }
    }

    fn update_light(&self, world: &mut World) {
        world.brightness = if self.is_dark() { 0.0 } else { 1.0 };
        world.night_vision = self.goggles_on;
    }

    pub(super) fn tick(&mut self, world: &mut World, action: &ResolvedAction, rng: &mut Rng) -> TickOutcome {
        let _ = world.tick_physics(action);

        let mut got = RemedyPickups::default();
        let mut respawn = Vec::new();
        for i in 0..world.entities.len() {
            let e = &world.entities[i];
            if !e.alive || !touches(world, &e.pos, REACH_Z) {
                continue;
            }
            let EntityKind::Pickup(p) = e.kind else { continue };
            world.entities[i].alive = false;
            match p {
                Pickup::HealthBonus => {
                    got.vials += 1;
                    world.agent.heal(1.0, 200.0);
                }
                Pickup::Stimpack => {
                    got.stimpacks += 1;
                    world.agent.heal(10.0, AGENT_HEALTH);
                    respawn.push(p);
                }
                Pickup::Medikit => {
                    got.medikits += 1;
                    world.agent.heal(25.0, AGENT_HEALTH);
                    respawn.push(p);
                }
                Pickup::Infrared => {
                    self.goggles_on = true;
                    respawn.push(p);
                }
                _ => got.hazards += 1,
            }
        }
        self.health_collected += (got.vials + got.stimpacks + got.medikits) as u64;
        self.hazards_collected += got.hazards as u64;
        for p in respawn {
            let _ = self.place(world, rng, p);
        }

        if (world.tick + 1) % WAVE_INTERVAL == 0 {
            for _ in 0..WAVE_HEALTH_BONUSES {
                let _ = self.place(world, rng, Pickup::HealthBonus);
            }
            for p in Pickup::HAZARDS {
                let _ = self.place(world, rng, p);
            }
        }

        self.darkness_timer += 1;
        self.update_light(world);
        TickOutcome { reward: remedy_reward(&got), cost: remedy_cost(&got), done: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Vec3;

    fn level(n: u8) -> RemedyLevel {
        use super::super::{LevelConfig, ScenarioId, ScenarioKind};
        match LevelConfig::for_id(ScenarioId { kind: ScenarioKind::RemedyRush, level: n }) {
            LevelConfig::Remedy(l) => l,
            _ => unreachable!(),
        }
    }

    #[test]
    fn initial_counts_follow_level() {
        let mut rng = Rng::new(1);
        let (_, w) = RemedyState::reset(level(2), &ScenarioOptions::default(), &mut rng).unwrap();
        let count = |k: Pickup| w.entities.iter().filter(|e| e.kind == EntityKind::Pickup(k)).count();
        assert_eq!(count(Pickup::HealthBonus), 20);
        assert_eq!(Pickup::HAZARDS.iter().map(|&p| count(p)).sum::<usize>(), 60);
        assert_eq!(count(Pickup::Infrared), 2);
        assert_eq!(count(Pickup::Stimpack), 1);
    }

    #[test]
    fn vial_and_medikit_in_one_tick() {
        let mut rng = Rng::new(2);
        let (mut s, mut w) = RemedyState::reset(level(1), &ScenarioOptions::default(), &mut rng).unwrap();
        w.entities.clear();
        let (x, y) = (w.agent.pose.x, w.agent.pose.y);
        w.spawn(EntityKind::Pickup(Pickup::HealthBonus), Vec3::new(x + 10.0, y, 0.0), 0.0);
        w.spawn(EntityKind::Pickup(Pickup::Medikit), Vec3::new(x - 10.0, y, 0.0), 0.0);
        let out = s.tick(&mut w, &ResolvedAction::NOOP, &mut rng);
        assert_eq!((out.reward, out.cost), (7.0, 0.0));
    }

    #[test]
    fn light_cycle_is_three_to_one() {
        let mut rng = Rng::new(3);
        let (mut s, _) = RemedyState::reset(level(2), &ScenarioOptions::default(), &mut rng).unwrap();
        let cycle = 4 * 20 * FRAME_SKIP as u64;
        let dark = (0..cycle)
            .filter(|&t| {
                s.darkness_timer = t;
                s.is_dark()
            })
            .count();
        assert_eq!(dark as u64, cycle / 4);
    }
}
