use super::formulas::{compute_fall_damage, precipice_cost, precipice_reward};
use super::levels::PrecipiceLevel;
use super::{ScenarioError, ScenarioOptions, TickOutcome, AGENT_SPEED};
use crate::rng::Rng;
use crate::world::{AgentState, ResolvedAction, Tile, TileGrid, World, DEFAULT_TILE_SIZE};
use std::f64::consts::TAU;

const AGENT_HEALTH: f64 = 100.0;
/// Headroom above the starting platform.
const CAVE_HEADROOM: f64 = 1024.0;
/// Peak-to-peak travel range of a moving pillar.
const MOVE_RANGE: (f64, f64) = (128.0, 512.0);
const WAGGLE_FREQ: (f64, f64) = (12.0, 24.0);
/// A pillar with waggle frequency `f` completes a cycle every `WAGGLE_TICKS / f` ticks.
const WAGGLE_TICKS: f64 = 2240.0;

/// Pillar heights relative to the start, one per step of the descent.
/// Step 0 is the start at height 0; step `k` sits near `-k * delta`.
pub fn precipice_heights(level: &PrecipiceLevel, steps: usize, rng: &mut Rng) -> Vec<f64> {
    let delta = level.step_decrement;
    (0..steps)
        .map(|k| {
            let base = -(k as f64) * delta;
            if k == 0 || !level.randomized_terrain {
                base
            } else {
                base + rng.range(-delta / 2.0, delta / 2.0)
            }
        })
        .collect()
}

/// Interior tiles in descent order: a clockwise spiral from the outer
/// ring inward.
pub fn spiral_order(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(w * h);
    let (mut x0, mut y0, mut x1, mut y1) = (0i64, 0i64, w as i64 - 1, h as i64 - 1);
    while x0 <= x1 && y0 <= y1 {
        for x in x0..=x1 {
            out.push((x, y0));
        }
        for y in y0 + 1..=y1 {
            out.push((x1, y));
        }
        if y0 < y1 {
            for x in (x0..x1).rev() {
                out.push((x, y1));
            }
        }
        if x0 < x1 {
            for y in (y0 + 1..y1).rev() {
                out.push((x0, y));
            }
        }
        x0 += 1;
        y0 += 1;
        x1 -= 1;
        y1 -= 1;
    }
    out.into_iter().map(|(x, y)| (x as usize + 1, y as usize + 1)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PillarMotion {
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrecipiceState {
    pub level: PrecipiceLevel,
    pub prev_z: f64,
    /// Step index of every interior tile, by grid index.
    pub step_of: Vec<Option<usize>>,
    pub steps: usize,
    /// Floor offset that keeps every stored height non-negative.
    pub offset: f64,
    base_floor: Vec<f64>,
    motion: Vec<Option<PillarMotion>>,
}

impl PrecipiceState {
    pub(super) fn reset(level: PrecipiceLevel, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Self, World), ScenarioError> {
        let (w, h) = options.map_size.unwrap_or((12, 12));
        if w < 2 || h < 2 {
            return Err(ScenarioError::MapTooSmall(w, h));
        }
        let order = spiral_order(w, h);
        let steps = order.len();
        let rel = precipice_heights(&level, steps, rng);
        let delta = level.step_decrement;
        let swing = if level.moving_pillars { MOVE_RANGE.1 / 2.0 } else { 0.0 };
        let offset = (steps as f64 - 1.0) * delta + delta / 2.0 + swing + 64.0;
        let ceiling = offset + CAVE_HEADROOM;

        let mut grid = TileGrid::walled_room(w, h, DEFAULT_TILE_SIZE, offset, ceiling);
        let mut step_of = vec![None; grid.len()];
        for (k, &(x, y)) in order.iter().enumerate() {
            grid.set(x, y, Tile::floor(offset + rel[k], ceiling));
            step_of[grid.index(x, y)] = Some(k);
        }
        let base_floor: Vec<f64> = grid.tiles().iter().map(|t| t.floor_z).collect();
        let motion = step_of
            .iter()
            .map(|s| match s {
                Some(k) if level.moving_pillars && *k > 0 => Some(PillarMotion {
                    amplitude: rng.range(MOVE_RANGE.0, MOVE_RANGE.1) / 2.0,
                    period: WAGGLE_TICKS / rng.range(WAGGLE_FREQ.0, WAGGLE_FREQ.1),
                    phase: rng.range(0.0, TAU),
                }),
                _ => None,
            })
            .collect();

        let (sx, sy) = order[0];
        let (ax, ay) = grid.tile_center(sx, sy);
        // Face along the first run of the spiral.
        let agent = AgentState::new(ax, ay, offset, 0.0, AGENT_HEALTH, AGENT_SPEED);
        let world = World::new(grid, agent);
        let mut state = PrecipiceState { level, prev_z: offset, step_of, steps, offset, base_floor, motion };
        state.prev_z = world.agent.pose.z;
        let mut world = world;
        state.update_light(&mut world);
        Ok((state, world))
    }

    /// Descent step under the agent, if any.
    pub fn agent_step(&self, world: &World) -> Option<usize> {
        world.agent_tile().and_then(|(x, y)| self.step_of[world.grid.index(x, y)])
    }

    fn update_light(&self, world: &mut World) {
        let depth = ((self.offset - world.agent.pose.z) / (self.offset.max(1.0))).clamp(0.0, 1.0);
        let flicker = self.level.darkness_fluctuation as f64 / 100.0 * 0.5 * (1.0 + (TAU * world.tick as f64 / 70.0).sin());
        world.brightness = (1.0 - 0.6 * depth - 0.5 * flicker).clamp(0.05, 1.0);
    }

    pub(super) fn tick(&mut self, world: &mut World, action: &ResolvedAction, _rng: &mut Rng) -> TickOutcome {
        let h_prev = world.agent.health;
        if action.use_ {
            // Restart request.
            return TickOutcome { reward: 0.0, cost: 0.0, done: true };
        }

        if self.level.moving_pillars {
            let t = world.tick as f64;
            for (i, m) in self.motion.iter().enumerate() {
                if let Some(m) = m {
                    let (x, y) = world.grid.coords(i);
                    world.grid.get_mut(x, y).floor_z = self.base_floor[i] + m.amplitude * (TAU * t / m.period + m.phase).sin();
                }
            }
            world.carry_agent_with_floor();
        }

        let events = world.tick_physics(action);
        if let Some(d) = events.landed {
            world.agent.damage(compute_fall_damage(d));
        }

        let z = world.agent.pose.z;
        let reward = precipice_reward(self.prev_z, z);
        self.prev_z = z;
        self.update_light(world);

        let bottom = !world.agent.airborne && self.agent_step(world) == Some(self.steps - 1);
        TickOutcome { reward, cost: precipice_cost(h_prev, world.agent.health), done: bottom || !world.agent.alive() }
    }
}
