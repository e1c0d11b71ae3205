use super::{wrap_degrees, World};

/// Tallest ledge a grounded body walks up without jumping.
pub const STEP_HEIGHT: f64 = 24.0;
/// Units per tick squared.
pub const GRAVITY: f64 = 1.0;
/// Launch speed of a jump, units per tick. Apex is 8 + 7 + ... + 1 = 36 units.
pub const JUMP_VELOCITY: f64 = 8.0;
pub const AGENT_RADIUS: f64 = 16.0;
pub const EYE_HEIGHT: f64 = 41.0;
/// Degrees per tick.
pub const TURN_RATE: f64 = 7.5;
/// Degrees per tick.
pub const LOOK_RATE: f64 = 3.0;
pub const PITCH_LIMIT: f64 = 60.0;

/// Button state after decoding the multi-discrete action, in physical terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResolvedAction {
    /// +1 forward, -1 backward.
    pub forward: f64,
    /// +1 right, -1 left.
    pub strafe: f64,
    /// +1 turns left (counter-clockwise), -1 right.
    pub turn: f64,
    /// +1 looks up, -1 down.
    pub look: f64,
    pub jump: bool,
    pub speed: bool,
    pub attack: bool,
    pub use_: bool,
    pub crouch: bool,
    pub turn180: bool,
}

impl ResolvedAction {
    pub const NOOP: ResolvedAction = ResolvedAction {
        forward: 0.0,
        strafe: 0.0,
        turn: 0.0,
        look: 0.0,
        jump: false,
        speed: false,
        attack: false,
        use_: false,
        crouch: false,
        turn180: false,
    };
}

/// What the physics step observed; consumed by the scenario rules.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TickEvents {
    /// Fall distance `fall_origin_z - z` of a landing this tick.
    pub landed: Option<f64>,
    pub moved: bool,
    pub jumped: bool,
}

impl World {
    /// Advances the agent body by one tick.
    pub fn tick_physics(&mut self, action: &ResolvedAction) -> TickEvents {
        let mut events = TickEvents::default();
        let agent = &mut self.agent;

        agent.pose.yaw = wrap_degrees(agent.pose.yaw + action.turn * TURN_RATE + if action.turn180 { 180.0 } else { 0.0 });
        agent.pose.pitch = (agent.pose.pitch + action.look * LOOK_RATE).clamp(-PITCH_LIMIT, PITCH_LIMIT);

        if agent.mobile {
            let v = agent.speed * if action.speed { 2.0 } else { 1.0 };
            let (sin, cos) = agent.pose.yaw.to_radians().sin_cos();
            let dx = v * (cos * action.forward + sin * action.strafe);
            let dy = v * (sin * action.forward - cos * action.strafe);
            if dx != 0.0 || dy != 0.0 {
                events.moved = self.try_move(dx, dy);
            }
        }

        let floor = self.agent_support_floor();
        let agent = &mut self.agent;
        if action.jump && agent.mobile && !agent.airborne && agent.pose.z <= floor + 1e-9 {
            agent.airborne = true;
            agent.vz = JUMP_VELOCITY;
            agent.fall_origin_z = agent.pose.z;
            events.jumped = true;
        }

        if !agent.airborne {
            if agent.pose.z > floor + 1e-9 {
                // Walked off a ledge.
                agent.airborne = true;
                agent.vz = 0.0;
                agent.fall_origin_z = agent.pose.z;
            } else {
                // Stepped up, or the floor rose underneath.
                agent.pose.z = floor;
                agent.fall_origin_z = floor;
            }
        }

        if agent.airborne {
            agent.pose.z += agent.vz;
            agent.vz -= GRAVITY;
            agent.fall_origin_z = agent.fall_origin_z.max(agent.pose.z);
            if agent.pose.z <= floor {
                events.landed = Some(agent.fall_origin_z - floor);
                agent.pose.z = floor;
                agent.vz = 0.0;
                agent.airborne = false;
                agent.fall_origin_z = floor;
            }
        }

        events
    }

    /// Axis-separated move so the body slides along walls. Returns whether
    /// the agent's position changed.
    fn try_move(&mut self, dx: f64, dy: f64) -> bool {
        let (x0, y0) = (self.agent.pose.x, self.agent.pose.y);
        let z = self.agent.pose.z;
        let r = self.agent.radius;
        let nx = x0 + dx;
        if !self.body_blocked(nx, y0, z, r) {
            self.agent.pose.x = nx;
        }
        let ny = y0 + dy;
        if !self.body_blocked(self.agent.pose.x, ny, z, r) {
            self.agent.pose.y = ny;
        }
        self.agent.pose.x != x0 || self.agent.pose.y != y0
    }

    /// A body at `(x, y)` with feet at `z` overlaps a wall, leaves the grid,
    /// or overlaps a floor more than [`STEP_HEIGHT`] above its feet.
    pub fn body_blocked(&self, x: f64, y: f64, z: f64, radius: f64) -> bool {
        let s = self.grid.tile_size();
        let x0 = ((x - radius) / s).floor() as i64;
        let x1 = ((x + radius) / s).floor() as i64;
        let y0 = ((y - radius) / s).floor() as i64;
        let y1 = ((y + radius) / s).floor() as i64;
        for ty in y0..=y1 {
            for tx in x0..=x1 {
                match self.grid.tile_at_index(tx, ty) {
                    None => return true,
                    Some(t) if t.is_wall() || t.floor_z > z + STEP_HEIGHT => return true,
                    Some(_) => {}
                }
            }
        }
        false
    }
}
