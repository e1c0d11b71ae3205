use super::blast::explode_at;
use super::formulas::{collateral_cost, collateral_reward};
use super::levels::CollateralLevel;
use super::{ScenarioError, ScenarioOptions, TickOutcome};
use crate::catalog::{Allegiance, Creature, EntityKind};
use crate::rng::Rng;
use crate::world::{AgentState, ResolvedAction, TileGrid, Vec3, World, DEFAULT_TILE_SIZE, EYE_HEIGHT, TICK_RATE};

/// Eight tiles per second.
pub const ROCKET_SPEED: f64 = 8.0 * DEFAULT_TILE_SIZE / TICK_RATE as f64;
/// Ticks between rockets.
pub const ROCKET_COOLDOWN: u32 = 8;
/// Extra damage to the unit a rocket strikes, on top of the blast.
pub const DIRECT_HIT_DAMAGE: f64 = 100.0;
pub const HOSTILE_HP: f64 = 100.0;
/// Neutrals amble at this many units per tick.
pub const NEUTRAL_SPEED: f64 = 1.0;
/// Hostiles patrol this far either side of the agent's line of sight.
const PATROL_HALF_WIDTH: f64 = 320.0;
const NEUTRAL_TURN_TICKS: u32 = 35;

#[derive(Clone, Debug, PartialEq)]
pub struct CollateralState {
    pub level: CollateralLevel,
    pub cooldown: u32,
    pub hostiles_eliminated: u32,
    pub neutrals_eliminated: u32,
    /// Agent line of sight; units stay inside this lateral band.
    lane_y: f64,
    agent_x: f64,
}

impl CollateralState {
    pub(super) fn reset(level: CollateralLevel, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Self, World), ScenarioError> {
        let (w, h) = options.map_size.unwrap_or((14, 13));
        let s = DEFAULT_TILE_SIZE;
        if (w as f64) * s < 64.0 + level.distance.1 || (h as f64) * s < 2.0 * PATROL_HALF_WIDTH + 2.0 * s {
            return Err(ScenarioError::MapTooSmall(w, h));
        }
        let grid = TileGrid::walled_room(w, h, s, 0.0, 256.0);
        let (ax, ay) = grid.tile_center(1, 1 + h / 2);
        let mut agent = AgentState::new(ax, ay, 0.0, 0.0, 100.0, 0.0);
        agent.mobile = false;
        agent.invulnerable = true;
        let mut world = World::new(grid, agent);
        let state = CollateralState { level, cooldown: 0, hostiles_eliminated: 0, neutrals_eliminated: 0, lane_y: ay, agent_x: ax };
        for _ in 0..level.hostile_targets {
            state.spawn_unit(&mut world, rng, Allegiance::Hostile);
        }
        for _ in 0..level.neutral_units {
            state.spawn_unit(&mut world, rng, Allegiance::Neutral);
        }
        Ok((state, world))
    }

    fn spawn_unit(&self, world: &mut World, rng: &mut Rng, side: Allegiance) {
        let (dmin, dmax) = self.level.distance;
        let x = self.agent_x + rng.range(dmin, dmax);
        let y = self.lane_y + rng.range(-PATROL_HALF_WIDTH, PATROL_HALF_WIDTH);
        let (creature, hp) = match side {
            Allegiance::Hostile => (Creature::Cacodemon, HOSTILE_HP),
            Allegiance::Neutral => (Creature::ZombieMan, self.level.neutral_health),
        };
        let id = world.spawn(EntityKind::Unit(creature, side), Vec3::new(x, y, 0.0), hp);
        let e = world.entities.last_mut().expect("just spawned");
        debug_assert_eq!(e.id, id);
        match side {
            Allegiance::Hostile => {
                let v = self.level.target_speed / 4.0;
                e.vel = if rng.chance(0.5) { [0.0, v] } else { [0.0, -v] };
            }
            Allegiance::Neutral => {
                let a = rng.range(0.0, std::f64::consts::TAU);
                e.vel = [NEUTRAL_SPEED * a.cos(), NEUTRAL_SPEED * a.sin()];
                e.timer = NEUTRAL_TURN_TICKS;
            }
        }
    }

    fn move_units(&self, world: &mut World, rng: &mut Rng) {
        let (dmin, dmax) = self.level.distance;
        let (xmin, xmax) = (self.agent_x + dmin, self.agent_x + dmax);
        let (ymin, ymax) = (self.lane_y - PATROL_HALF_WIDTH, self.lane_y + PATROL_HALF_WIDTH);
        for e in world.entities.iter_mut() {
            let EntityKind::Unit(_, side) = e.kind else { continue };
            if !e.alive {
                continue;
            }
            if side == Allegiance::Neutral {
                e.timer = e.timer.saturating_sub(1);
                if e.timer == 0 {
                    let a = rng.range(0.0, std::f64::consts::TAU);
                    e.vel = [NEUTRAL_SPEED * a.cos(), NEUTRAL_SPEED * a.sin()];
                    e.timer = NEUTRAL_TURN_TICKS;
                }
            }
            e.pos.x += e.vel[0];
            e.pos.y += e.vel[1];
            if e.pos.x < xmin || e.pos.x > xmax {
                e.vel[0] = -e.vel[0];
                e.pos.x = e.pos.x.clamp(xmin, xmax);
            }
            if e.pos.y < ymin || e.pos.y > ymax {
                e.vel[1] = -e.vel[1];
                e.pos.y = e.pos.y.clamp(ymin, ymax);
            }
        }
    }

    /// Advances rockets; returns explosion points paired with any unit
    /// struck directly.
    fn move_rockets(world: &mut World) -> Vec<(f64, f64, Option<u32>)> {
        let mut blasts = Vec::new();
        for i in 0..world.entities.len() {
            let r = &world.entities[i];
            if !r.alive || r.kind != EntityKind::Rocket {
                continue;
            }
            let (x0, y0) = (r.pos.x, r.pos.y);
            let (vx, vy) = (r.vel[0], r.vel[1]);
            let speed = vx.hypot(vy);
            let (dx, dy) = (vx / speed, vy / speed);
            let rr = EntityKind::Rocket.radius();

            let mut best: Option<(f64, u32)> = None;
            for u in &world.entities {
                if !u.alive || !matches!(u.kind, EntityKind::Unit(..)) {
                    continue;
                }
                if let Some(t) = segment_hit(x0, y0, dx, dy, speed, u.pos.x, u.pos.y, u.radius() + rr) {
                    if best.map_or(true, |(bt, _)| t < bt) {
                        best = Some((t, u.id));
                    }
                }
            }
            let wall = world.grid.ray_wall_distance(x0, y0, dx, dy, speed + rr);
            let wall_t = if wall < speed + rr { Some((wall - rr).max(0.0)) } else { None };

            let hit = match (best, wall_t) {
                (Some((t, id)), Some(wt)) if t <= wt => Some((t, Some(id))),
                (Some((t, id)), None) => Some((t, Some(id))),
                (_, Some(wt)) => Some((wt, None)),
                (None, None) => None,
            };
            let r = &mut world.entities[i];
            match hit {
                Some((t, id)) => {
                    r.alive = false;
                    blasts.push((x0 + dx * t, y0 + dy * t, id));
                }
                None => {
                    r.pos.x += vx;
                    r.pos.y += vy;
                }
            }
        }
        blasts
    }

    pub(super) fn tick(&mut self, world: &mut World, action: &ResolvedAction, rng: &mut Rng) -> TickOutcome {
        let _ = world.tick_physics(action);
        self.move_units(world, rng);

        self.cooldown = self.cooldown.saturating_sub(1);
        if action.attack && self.cooldown == 0 {
            self.cooldown = ROCKET_COOLDOWN;
            let a = &world.agent;
            let (sin, cos) = a.pose.yaw.to_radians().sin_cos();
            let start = Vec3::new(a.pose.x + cos * (a.radius + 8.0), a.pose.y + sin * (a.radius + 8.0), a.pose.z + EYE_HEIGHT - 8.0);
            world.spawn(EntityKind::Rocket, start, 0.0);
            world.entities.last_mut().expect("just spawned").vel = [ROCKET_SPEED * cos, ROCKET_SPEED * sin];
        }

        let mut hostiles = 0;
        let mut neutrals = 0;
        for (x, y, direct) in Self::move_rockets(world) {
            let mut dead = Vec::new();
            if let Some(id) = direct {
                let e = world.entity_mut(id).expect("struck unit exists");
                if e.alive {
                    e.hp = (e.hp - DIRECT_HIT_DAMAGE).max(0.0);
                    if e.hp == 0.0 {
                        e.alive = false;
                        dead.push(id);
                    }
                }
            }
            dead.extend(explode_at(world, x, y).eliminated);
            for id in dead {
                let e = world.entity(id).expect("eliminated unit exists");
                let EntityKind::Unit(_, side) = e.kind else { continue };
                match side {
                    Allegiance::Hostile => hostiles += 1,
                    Allegiance::Neutral => neutrals += 1,
                }
                self.spawn_unit(world, rng, side);
            }
        }
        self.hostiles_eliminated += hostiles;
        self.neutrals_eliminated += neutrals;
        TickOutcome { reward: collateral_reward(hostiles), cost: collateral_cost(neutrals), done: false }
    }
}

/// First parameter `t ∈ [0, len]` along the ray at which it comes within
/// `reach` of `(cx, cy)`.
fn segment_hit(x0: f64, y0: f64, dx: f64, dy: f64, len: f64, cx: f64, cy: f64, reach: f64) -> Option<f64> {
    let (fx, fy) = (x0 - cx, y0 - cy);
    let c = fx * fx + fy * fy - reach * reach;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = fx * dx + fy * dy;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0 && t <= len).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(n: u8) -> CollateralLevel {
        use super::super::{LevelConfig, ScenarioId, ScenarioKind};
        match LevelConfig::for_id(ScenarioId { kind: ScenarioKind::CollateralDamage, level: n }) {
            LevelConfig::Collateral(l) => l,
            _ => unreachable!(),
        }
    }

    #[test]
    fn units_spawn_inside_distance_band() {
        for n in 1..=3 {
            let mut rng = Rng::new(n as u64);
            let l = level(n);
            let (_, w) = CollateralState::reset(l, &ScenarioOptions::default(), &mut rng).unwrap();
            for e in &w.entities {
                let dx = e.pos.x - w.agent.pose.x;
                assert!(dx >= l.distance.0 && dx <= l.distance.1);
                assert!(!w.grid.tile_at(e.pos.x, e.pos.y).unwrap().is_wall());
            }
        }
    }

    #[test]
    fn rocket_kills_unit_dead_ahead() {
        let mut rng = Rng::new(4);
        let (mut s, mut w) = CollateralState::reset(level(1), &ScenarioOptions::default(), &mut rng).unwrap();
        w.entities.clear();
        let (ax, ay) = (w.agent.pose.x, w.agent.pose.y);
        w.spawn(EntityKind::Unit(Creature::Cacodemon, Allegiance::Hostile), Vec3::new(ax + 300.0, ay, 0.0), HOSTILE_HP);
        let fire = ResolvedAction { attack: true, ..ResolvedAction::NOOP };
        let mut reward = 0.0;
        for i in 0..40 {
            let a = if i == 0 { fire } else { ResolvedAction::NOOP };
            reward += s.tick(&mut w, &a, &mut rng).reward;
            w.purge_dead();
        }
        assert_eq!(reward, 1.0);
        // The replacement keeps the population constant.
        assert_eq!(w.entities.iter().filter(|e| matches!(e.kind, EntityKind::Unit(..))).count(), 1);
    }

    #[test]
    fn segment_hit_geometry() {
        assert_eq!(segment_hit(0.0, 0.0, 1.0, 0.0, 100.0, 50.0, 0.0, 10.0), Some(40.0));
        assert_eq!(segment_hit(0.0, 0.0, 1.0, 0.0, 30.0, 50.0, 0.0, 10.0), None);
        assert_eq!(segment_hit(0.0, 0.0, 1.0, 0.0, 100.0, 50.0, 20.0, 10.0), None);
    }
}
