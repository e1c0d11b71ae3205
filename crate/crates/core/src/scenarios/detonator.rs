use super::blast::{detonate, DamageReport, BLAST_RADIUS};
use super::formulas::{detonator_cost, detonator_reward};
use super::levels::{detonator_creatures, DetonatorLevel};
use super::{random_point_away, ScenarioError, ScenarioOptions, TickOutcome, AGENT_SPEED};
use crate::catalog::{Allegiance, EntityKind};
use crate::rng::Rng;
use crate::world::{AgentState, ResolvedAction, TileGrid, World, DEFAULT_TILE_SIZE};

pub const PISTOL_DAMAGE: f64 = 10.0;
/// Ticks between pistol shots.
pub const PISTOL_COOLDOWN: u32 = 8;
pub const BARREL_HP: f64 = 20.0;
/// Units pick a new patrol point every five seconds.
pub const PATROL_INTERVAL: u64 = 175;
pub const UNITS_PER_TYPE: usize = 2;
const AGENT_HEALTH: f64 = 100.0;
const PISTOL_RANGE: f64 = 2048.0;
/// Patrol points as fractions of the interior extent.
const PATROL_POINTS: [(f64, f64); 7] = [(0.15, 0.5), (0.3, 0.2), (0.3, 0.8), (0.5, 0.5), (0.7, 0.2), (0.7, 0.8), (0.85, 0.5)];

#[derive(Clone, Debug, PartialEq)]
pub struct DetonatorState {
    pub level: DetonatorLevel,
    pub cooldown: u32,
    pub barrels_exploded: u32,
    pub neutrals_eliminated: u32,
    pub patrol_points: Vec<[f64; 2]>,
}

impl DetonatorState {
    pub(super) fn reset(level: DetonatorLevel, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Self, World), ScenarioError> {
        let (w, h) = options.map_size.unwrap_or((20, 20));
        if w < 8 || h < 8 {
            return Err(ScenarioError::MapTooSmall(w, h));
        }
        let s = DEFAULT_TILE_SIZE;
        let grid = TileGrid::walled_room(w, h, s, 0.0, 192.0);
        let (ax, ay) = grid.tile_center(1 + w / 2, 1);
        let mut world = World::new(grid, AgentState::new(ax, ay, 0.0, 90.0, AGENT_HEALTH, AGENT_SPEED));
        let patrol_points = PATROL_POINTS.iter().map(|&(fx, fy)| [s * (1.0 + fx * w as f64), s * (1.0 + fy * h as f64)]).collect();
        let state = DetonatorState { level, cooldown: 0, barrels_exploded: 0, neutrals_eliminated: 0, patrol_points };

        for _ in 0..level.barrels {
            spawn_barrel(&mut world, rng)?;
        }
        for creature in detonator_creatures(level.creature_types) {
            for _ in 0..UNITS_PER_TYPE {
                state.spawn_unit(&mut world, rng, EntityKind::Unit(creature, Allegiance::Neutral), creature.base_hp())?;
            }
        }
        Ok((state, world))
    }

    fn spawn_unit(&self, world: &mut World, rng: &mut Rng, kind: EntityKind, hp: f64) -> Result<u32, ScenarioError> {
        let pos = random_point_away(world, rng, 2.0 * world.grid.tile_size(), 16.0, |_, _| true)
            .ok_or(ScenarioError::MapTooSmall(world.grid.width(), world.grid.height()))?;
        let id = world.spawn(kind, pos, hp);
        let target = self.patrol_points[rng.index(self.patrol_points.len())];
        world.entities.last_mut().expect("just spawned").target = Some(target);
        Ok(id)
    }

    fn move_units(&self, world: &mut World, rng: &mut Rng) {
        let speed = self.level.creature_speed / 4.0;
        let reassign = (world.tick + 1) % PATROL_INTERVAL == 0;
        for e in world.entities.iter_mut() {
            if !e.alive || !matches!(e.kind, EntityKind::Unit(..)) {
                continue;
            }
            if reassign {
                e.target = Some(self.patrol_points[rng.index(self.patrol_points.len())]);
            }
            if let Some([tx, ty]) = e.target {
                let (dx, dy) = (tx - e.pos.x, ty - e.pos.y);
                let d = dx.hypot(dy);
                if d <= speed {
                    e.pos.x = tx;
                    e.pos.y = ty;
                } else {
                    e.pos.x += dx / d * speed;
                    e.pos.y += dy / d * speed;
                }
            }
        }
    }

    /// Hitscan along the view direction. Returns the id of the first barrel
    /// or unit struck before a wall.
    fn shoot(world: &World) -> Option<u32> {
        let a = &world.agent;
        let (dy, dx) = a.pose.yaw.to_radians().sin_cos();
        let wall = world.grid.ray_wall_distance(a.pose.x, a.pose.y, dx, dy, PISTOL_RANGE);
        let mut best: Option<(f64, u32)> = None;
        for e in &world.entities {
            if !e.alive || !e.kind.is_destructible() {
                continue;
            }
            let (fx, fy) = (e.pos.x - a.pose.x, e.pos.y - a.pose.y);
            let along = fx * dx + fy * dy;
            if along <= 0.0 || along > wall {
                continue;
            }
            let across = (fx * dy - fy * dx).abs();
            if across <= e.radius() && best.map_or(true, |(t, _)| along < t) {
                best = Some((along, e.id));
            }
        }
        best.map(|(_, id)| id)
    }

    pub(super) fn tick(&mut self, world: &mut World, action: &ResolvedAction, rng: &mut Rng) -> TickOutcome {
        let h_prev = world.agent.health;
        let _ = world.tick_physics(action);
        self.move_units(world, rng);

        let mut report = DamageReport::default();
        self.cooldown = self.cooldown.saturating_sub(1);
        if action.attack && self.cooldown == 0 {
            self.cooldown = PISTOL_COOLDOWN;
            if let Some(id) = Self::shoot(world) {
                let e = world.entity_mut(id).expect("target exists");
                if e.kind == EntityKind::Barrel {
                    report = detonate(world, id);
                } else {
                    let lost = PISTOL_DAMAGE.min(e.hp);
                    e.hp -= lost;
                    report.unit_hits.push((id, lost));
                    if e.hp <= 0.0 {
                        e.hp = 0.0;
                        e.alive = false;
                        report.eliminated.push(id);
                    }
                }
            }
        }

        let barrels = report.barrels.len() as u32;
        let neutrals = report.eliminated.len() as u32;
        for &id in &report.eliminated {
            let kind = world.entity(id).expect("eliminated unit exists").kind;
            if let EntityKind::Unit(c, _) = kind {
                let _ = self.spawn_unit(world, rng, kind, c.base_hp());
            }
        }
        for _ in 0..barrels {
            let _ = spawn_barrel(world, rng);
        }
        self.barrels_exploded += barrels;
        self.neutrals_eliminated += neutrals;
        TickOutcome {
            reward: detonator_reward(barrels),
            cost: detonator_cost(neutrals, h_prev, world.agent.health),
            done: !world.agent.alive(),
        }
    }
}

/// Barrels keep clear of the agent so standing still is always safe.
fn spawn_barrel(world: &mut World, rng: &mut Rng) -> Result<(), ScenarioError> {
    let pos = random_point_away(world, rng, BLAST_RADIUS + world.grid.tile_size(), 12.0, |_, _| true)
        .ok_or(ScenarioError::MapTooSmall(world.grid.width(), world.grid.height()))?;
    world.spawn(EntityKind::Barrel, pos, BARREL_HP);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Creature;
    use crate::world::Vec3;

    fn level(n: u8) -> DetonatorLevel {
        use super::super::{LevelConfig, ScenarioId, ScenarioKind};
        match LevelConfig::for_id(ScenarioId { kind: ScenarioKind::DetonatorsDilemma, level: n }) {
            LevelConfig::Detonator(l) => l,
            _ => unreachable!(),
        }
    }

    fn counts(w: &World) -> (usize, usize) {
        let units = w.entities.iter().filter(|e| e.alive && matches!(e.kind, EntityKind::Unit(..))).count();
        let barrels = w.entities.iter().filter(|e| e.alive && e.kind == EntityKind::Barrel).count();
        (units, barrels)
    }

    #[test]
    fn population_matches_level() {
        let mut rng = Rng::new(8);
        let (_, w) = DetonatorState::reset(level(2), &ScenarioOptions::default(), &mut rng).unwrap();
        assert_eq!(counts(&w), (10, 15));
    }

    #[test]
    fn shooting_a_barrel_near_a_neutral() {
        let mut rng = Rng::new(6);
        let (mut s, mut w) = DetonatorState::reset(level(1), &ScenarioOptions::default(), &mut rng).unwrap();
        w.entities.clear();
        let (ax, ay) = (w.agent.pose.x, w.agent.pose.y);
        // Agent faces +y. Barrel 300 ahead, a fragile neutral right beside it.
        w.spawn(EntityKind::Barrel, Vec3::new(ax, ay + 300.0, 0.0), BARREL_HP);
        let u = w.spawn(EntityKind::Unit(Creature::LostSoul, Allegiance::Neutral), Vec3::new(ax + 30.0, ay + 300.0, 0.0), 10.0);
        w.entity_mut(u).unwrap().target = None;
        let fire = ResolvedAction { attack: true, ..ResolvedAction::NOOP };
        let out = s.tick(&mut w, &fire, &mut rng);
        assert_eq!(out.reward, 1.0);
        assert_eq!(out.cost, 1.0);
        w.purge_dead();
        assert_eq!(counts(&w), (1, 1));
    }
}
