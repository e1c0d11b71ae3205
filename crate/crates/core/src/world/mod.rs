//! Simulation substrate: tile geometry, entities, the agent body, discrete
//! tick physics and the column raycaster.

mod grid;
mod physics;
mod render;
mod spawn;

pub use grid::{GridViolation, Tile, TileGrid, TileKind, DEFAULT_TILE_SIZE};
pub use physics::{
    ResolvedAction, TickEvents, AGENT_RADIUS, EYE_HEIGHT, GRAVITY, JUMP_VELOCITY, LOOK_RATE, PITCH_LIMIT,
    STEP_HEIGHT, TURN_RATE,
};
pub use render::{quantize_depth, raycast_render, FrameSet, HudBars, RenderSettings, MAX_DEPTH};
pub use spawn::{place_randomly, InsufficientSpace};

use crate::catalog::EntityKind;
use sha2::{Digest, Sha256};

/// In-game ticks per second of simulated time.
pub const TICK_RATE: u32 = 35;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dist_xy(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub id: u32,
    pub kind: EntityKind,
    pub pos: Vec3,
    pub hp: f64,
    /// Units per tick.
    pub vel: [f64; 2],
    pub alive: bool,
    /// Navigation goal for moving units.
    pub target: Option<[f64; 2]>,
    /// General purpose countdown owned by the scenario rules.
    pub timer: u32,
}

impl Entity {
    pub fn radius(&self) -> f64 {
        self.kind.radius()
    }
}

/// Camera placement: feet position, yaw and pitch in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub pitch: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub pose: Pose,
    pub health: f64,
    pub max_health: f64,
    /// v0, units per tick.
    pub base_speed: f64,
    /// Effective walking speed this tick, set by the scenario rules.
    pub speed: f64,
    pub carried_weight: f64,
    pub fall_origin_z: f64,
    pub airborne: bool,
    pub vz: f64,
    pub radius: f64,
    /// Stationary agents ignore translation and jumping.
    pub mobile: bool,
    /// Damage is ignored while set.
    pub invulnerable: bool,
}

impl AgentState {
    pub fn new(x: f64, y: f64, z: f64, yaw: f64, health: f64, base_speed: f64) -> Self {
        Self {
            pose: Pose { x, y, z, yaw: wrap_degrees(yaw), pitch: 0.0 },
            health,
            max_health: health,
            base_speed,
            speed: base_speed,
            carried_weight: 0.0,
            fall_origin_z: z,
            airborne: false,
            vz: 0.0,
            radius: AGENT_RADIUS,
            mobile: true,
            invulnerable: false,
        }
    }

    pub fn alive(&self) -> bool {
        self.health > 0.0
    }

    /// Applies damage, clamping at zero. Returns the health actually lost.
    pub fn damage(&mut self, amount: f64) -> f64 {
        if self.invulnerable || amount <= 0.0 {
            return 0.0;
        }
        let before = self.health;
        self.health = (self.health - amount).max(0.0);
        before - self.health
    }

    pub fn heal(&mut self, amount: f64, cap: f64) {
        self.health = (self.health + amount).min(cap.max(self.health));
    }
}

pub fn wrap_degrees(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub grid: TileGrid,
    pub entities: Vec<Entity>,
    pub agent: AgentState,
    pub tick: u64,
    /// Global light level in `[0, 1]`.
    pub brightness: f64,
    /// Green-tinted night vision.
    pub night_vision: bool,
    next_id: u32,
}

impl World {
    pub fn new(grid: TileGrid, agent: AgentState) -> Self {
        Self { grid, entities: Vec::new(), agent, tick: 0, brightness: 1.0, night_vision: false, next_id: 1 }
    }

    pub fn spawn(&mut self, kind: EntityKind, pos: Vec3, hp: f64) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        self.entities.push(Entity { id, kind, pos, hp, vel: [0.0, 0.0], alive: true, target: None, timer: 0 });
        id
    }

    /// Spawns at the center of tile `(tx, ty)`, resting on its floor.
    pub fn spawn_on_tile(&mut self, kind: EntityKind, tile: (usize, usize), hp: f64) -> u32 {
        let (x, y) = self.grid.tile_center(tile.0, tile.1);
        let z = self.grid.get(tile.0, tile.1).floor_z;
        self.spawn(kind, Vec3::new(x, y, z), hp)
    }

    pub fn entity(&self, id: u32) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn entity_mut(&mut self, id: u32) -> Option<&mut Entity> {
        self.entities.iter_mut().find(|e| e.id == id)
    }

    /// Drops dead entities from the list.
    pub fn purge_dead(&mut self) {
        self.entities.retain(|e| e.alive);
    }

    pub fn agent_tile(&self) -> Option<(usize, usize)> {
        self.grid.tile_coords_at(self.agent.pose.x, self.agent.pose.y)
    }

    /// Highest floor among the open tiles under a body of `radius` at `(x, y)`.
    pub fn support_floor(&self, x: f64, y: f64, radius: f64) -> f64 {
        let s = self.grid.tile_size();
        let x0 = ((x - radius) / s).floor() as i64;
        let x1 = ((x + radius) / s).floor() as i64;
        let y0 = ((y - radius) / s).floor() as i64;
        let y1 = ((y + radius) / s).floor() as i64;
        let mut best = f64::NEG_INFINITY;
        for ty in y0..=y1 {
            for tx in x0..=x1 {
                if let Some(t) = self.grid.tile_at_index(tx, ty) {
                    if !t.is_wall() {
                        best = best.max(t.floor_z);
                    }
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            self.grid.tile_at(x, y).map_or(0.0, |t| t.floor_z)
        }
    }

    pub fn agent_support_floor(&self) -> f64 {
        self.support_floor(self.agent.pose.x, self.agent.pose.y, self.agent.radius)
    }

    /// True when the agent stands (not airborne) exactly on its supporting floor.
    pub fn agent_grounded(&self) -> bool {
        !self.agent.airborne && (self.agent.pose.z - self.agent_support_floor()).abs() < 1e-9
    }

    /// Re-seats a grounded agent on its floor after the floor moved underneath it.
    pub fn carry_agent_with_floor(&mut self) {
        if !self.agent.airborne {
            let floor = self.agent_support_floor();
            self.agent.pose.z = floor;
            self.agent.fall_origin_z = floor;
        }
    }

    /// Digest of everything that evolves during an episode.
    pub fn state_hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.tick.to_le_bytes());
        let a = &self.agent;
        for v in [
            a.pose.x,
            a.pose.y,
            a.pose.z,
            a.pose.yaw,
            a.pose.pitch,
            a.health,
            a.speed,
            a.carried_weight,
            a.fall_origin_z,
            a.vz,
        ] {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update([a.airborne as u8]);
        for e in &self.entities {
            h.update(e.id.to_le_bytes());
            h.update(format!("{:?}", e.kind).as_bytes());
            for v in [e.pos.x, e.pos.y, e.pos.z, e.hp, e.vel[0], e.vel[1]] {
                h.update(v.to_bits().to_le_bytes());
            }
            h.update([e.alive as u8]);
        }
        for t in self.grid.tiles() {
            h.update([t.kind as u8]);
            h.update(t.floor_z.to_bits().to_le_bytes());
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}
