use crate::catalog::EntityKind;
use crate::world::World;

pub const BLAST_RADIUS: f64 = 128.0;
/// Damage at the blast center; falls off linearly to zero at the radius.
pub const BLAST_DAMAGE: f64 = 60.0;

pub fn blast_damage(dist: f64) -> f64 {
    if dist < BLAST_RADIUS {
        BLAST_DAMAGE * (1.0 - dist / BLAST_RADIUS)
    } else {
        0.0
    }
}

/// Outcome of one explosion including every barrel it set off.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DamageReport {
    /// Ids of barrels destroyed, in detonation order.
    pub barrels: Vec<u32>,
    /// `(unit id, hp lost)` for every unit hit.
    pub unit_hits: Vec<(u32, f64)>,
    /// Unit ids whose hp reached zero.
    pub eliminated: Vec<u32>,
    /// Health the agent actually lost.
    pub agent_damage: f64,
}

impl DamageReport {
    pub fn is_empty(&self) -> bool {
        self.unit_hits.is_empty() && self.eliminated.is_empty() && self.agent_damage == 0.0
    }
}

/// Explodes a live barrel and every barrel reachable through overlapping
/// blast radii.
pub fn detonate(world: &mut World, barrel_id: u32) -> DamageReport {
    let mut report = DamageReport::default();
    let Some(b) = world.entities.iter_mut().find(|e| e.id == barrel_id && e.alive && e.kind == EntityKind::Barrel) else {
        return report;
    };
    b.alive = false;
    b.hp = 0.0;
    let center = (b.pos.x, b.pos.y);
    report.barrels.push(barrel_id);
    chain(world, vec![center], &mut report);
    report
}

/// Explosion at an arbitrary point, as from a rocket.
pub fn explode_at(world: &mut World, x: f64, y: f64) -> DamageReport {
    let mut report = DamageReport::default();
    chain(world, vec![(x, y)], &mut report);
    report
}

fn chain(world: &mut World, mut centers: Vec<(f64, f64)>, report: &mut DamageReport) {
    let mut i = 0;
    while i < centers.len() {
        let (cx, cy) = centers[i];
        for e in world.entities.iter_mut() {
            if e.alive && e.kind == EntityKind::Barrel && e.pos.dist_xy(cx, cy) < BLAST_RADIUS {
                e.alive = false;
                e.hp = 0.0;
                centers.push((e.pos.x, e.pos.y));
                report.barrels.push(e.id);
            }
        }
        i += 1;
    }

    for &(cx, cy) in &centers {
        for e in world.entities.iter_mut() {
            if !e.alive || !matches!(e.kind, EntityKind::Unit(..)) {
                continue;
            }
            let dmg = blast_damage(e.pos.dist_xy(cx, cy));
            if dmg > 0.0 {
                let lost = dmg.min(e.hp);
                e.hp -= lost;
                report.unit_hits.push((e.id, lost));
                if e.hp <= 0.0 {
                    e.hp = 0.0;
                    e.alive = false;
                    report.eliminated.push(e.id);
                }
            }
        }
        let a = &world.agent;
        let dmg = blast_damage((a.pose.x - cx).hypot(a.pose.y - cy));
        report.agent_damage += world.agent.damage(dmg);
    }
}
