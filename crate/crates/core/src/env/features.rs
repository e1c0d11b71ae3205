//! Fixed-length state summary for policies that do not look at pixels.
//!
//! Layout, in order:
//! - `COMMON` agent scalars
//! - `SCENARIO` scenario timers and flags
//! - `PROBES` directions x (wall distance, floor step, hazard flag)
//! - `SLOTS` nearest entities x `SLOT_WIDTH`

use crate::catalog::{Allegiance, EntityKind, Pickup};
use crate::scenarios::{Scenario, ScenarioState, PISTOL_COOLDOWN, ROCKET_COOLDOWN};
use crate::world::{TileKind, World};
use std::f64::consts::PI;

pub const COMMON: usize = 14;
pub const SCENARIO: usize = 4;
/// Probe directions relative to the view, degrees counter-clockwise.
pub const PROBE_ANGLES: [f64; 8] = [0.0, 22.5, -22.5, 45.0, -45.0, 90.0, -90.0, 180.0];
pub const PROBES: usize = 8;
pub const SLOTS: usize = 8;
/// presence, distance, bearing, height, six category flags, value.
pub const SLOT_WIDTH: usize = 11;
pub const FEATURE_LEN: usize = COMMON + SCENARIO + 3 * PROBES + SLOTS * SLOT_WIDTH;

/// Distances are divided by this before entering the vector.
pub const DISTANCE_SCALE: f64 = 1024.0;
const HEIGHT_SCALE: f64 = 64.0;
const PROBE_REACH: f64 = 48.0;

/// Coarse entity categories shared by every scenario.
fn category(kind: EntityKind) -> usize {
    match kind {
        EntityKind::Weapon(_) => 0,
        EntityKind::Pickup(p) if p.is_health() => 0,
        EntityKind::Decoy(_) => 1,
        EntityKind::Pickup(p) if p.is_hazard() => 1,
        EntityKind::Unit(_, Allegiance::Hostile) => 2,
        EntityKind::Unit(_, Allegiance::Neutral) => 3,
        EntityKind::Barrel => 4,
        _ => 5,
    }
}

fn value(scenario: &Scenario, kind: EntityKind) -> f64 {
    match (&scenario.state, kind) {
        (ScenarioState::Armament(s), EntityKind::Weapon(w)) => s.weight_of(crate::scenarios::Carried::Weapon(w)),
        (ScenarioState::Armament(s), EntityKind::Decoy(d)) => s.weight_of(crate::scenarios::Carried::Decoy(d)),
        (_, EntityKind::Pickup(Pickup::HealthBonus)) => 1.0 / 6.0,
        (_, EntityKind::Pickup(Pickup::Stimpack)) => 0.5,
        (_, EntityKind::Pickup(Pickup::Medikit)) => 1.0,
        (_, EntityKind::Unit(c, _)) => c.base_hp() / 100.0,
        _ => 0.0,
    }
}

/// Bearing of `(dx, dy)` seen from yaw `yaw_deg`, in `(-pi, pi]`; positive is to the left.
pub fn relative_bearing(dx: f64, dy: f64, yaw_deg: f64) -> f64 {
    let a = dy.atan2(dx) - yaw_deg.to_radians();
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn feature_observation(scenario: &Scenario, world: &World, steps: u32, max_steps: u32) -> Vec<f32> {
    let mut out = Vec::with_capacity(FEATURE_LEN);
    let a = &world.agent;
    let g = &world.grid;
    let yaw = a.pose.yaw.to_radians();
    let floor = world.agent_support_floor();
    let tile = world.agent_tile().map(|(x, y)| g.get(x, y).kind);
    let extent_x = g.width() as f64 * g.tile_size();
    let extent_y = g.height() as f64 * g.tile_size();

    out.extend([
        yaw.sin(),
        yaw.cos(),
        a.pose.pitch / 60.0,
        a.health / a.max_health,
        scenario.load_fraction(world),
        (a.pose.z - floor) / HEIGHT_SCALE,
        a.vz / 8.0,
        a.airborne as u8 as f64,
        if a.base_speed > 0.0 { a.speed / a.base_speed } else { 0.0 },
        steps as f64 / max_steps.max(1) as f64,
        world.brightness,
        a.pose.x / extent_x,
        a.pose.y / extent_y,
        matches!(tile, Some(TileKind::Lava | TileKind::Acid)) as u8 as f64,
    ]);

    let extra: [f64; SCENARIO] = match &scenario.state {
        ScenarioState::Armament(s) => [s.in_zone as u8 as f64, s.carried.len() as f64 / 5.0, 0.0, 0.0],
        ScenarioState::Remedy(s) => [s.is_dark() as u8 as f64, s.goggles_on as u8 as f64, 0.0, 0.0],
        ScenarioState::Collateral(s) => [s.cooldown as f64 / ROCKET_COOLDOWN as f64, 0.0, 0.0, 0.0],
        ScenarioState::Volcanic(s) => [
            s.invuln_ticks_left as f64 / crate::scenarios::INVULNERABILITY_TICKS as f64,
            s.platform_timer as f64 / crate::scenarios::RELAYOUT_INTERVAL as f64,
            0.0,
            0.0,
        ],
        ScenarioState::Precipice(s) => {
            let step = s.agent_step(world).map_or(0.0, |k| k as f64 / s.steps.max(1) as f64);
            [step, (s.offset - a.pose.z) / s.offset.max(1.0), 0.0, 0.0]
        }
        ScenarioState::Detonator(s) => [s.cooldown as f64 / PISTOL_COOLDOWN as f64, 0.0, 0.0, 0.0],
    };
    out.extend(extra);

    for offset in PROBE_ANGLES {
        let (dy, dx) = (a.pose.yaw + offset).to_radians().sin_cos();
        let wall = g.ray_wall_distance(a.pose.x, a.pose.y, dx, dy, DISTANCE_SCALE);
        let (px, py) = (a.pose.x + dx * PROBE_REACH, a.pose.y + dy * PROBE_REACH);
        let (step, hazard) = match g.tile_at(px, py) {
            Some(t) if !t.is_wall() => (((t.floor_z - a.pose.z) / HEIGHT_SCALE).clamp(-4.0, 4.0), matches!(t.kind, TileKind::Lava | TileKind::Acid)),
            _ => (4.0, false),
        };
        out.extend([wall / DISTANCE_SCALE, step, hazard as u8 as f64]);
    }

    let mut near: Vec<(f64, usize)> = world
        .entities
        .iter()
        .enumerate()
        .filter(|(_, e)| e.alive)
        .map(|(i, e)| (e.pos.dist_xy(a.pose.x, a.pose.y), i))
        .collect();
    near.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    for slot in 0..SLOTS {
        match near.get(slot) {
            Some(&(d, i)) => {
                let e = &world.entities[i];
                let bearing = relative_bearing(e.pos.x - a.pose.x, e.pos.y - a.pose.y, a.pose.yaw);
                let mut cat = [0.0; 6];
                cat[category(e.kind)] = 1.0;
                out.extend([1.0, d / DISTANCE_SCALE, bearing / PI, (e.pos.z - a.pose.z) / HEIGHT_SCALE]);
                out.extend(cat);
                out.push(value(scenario, e.kind));
            }
            None => out.extend([0.0; SLOT_WIDTH]),
        }
    }
    debug_assert_eq!(out.len(), FEATURE_LEN);
    out.into_iter().map(|v| v as f32).collect()
}
