//! Difficulty attributes for every scenario and level.

use super::{ScenarioId, ScenarioKind};
use crate::catalog::Creature;

/// Detonator creatures with their spawn health.
pub const UNIT_CATALOG: [(Creature, f64); 7] = [
    (Creature::LostSoul, 10.0),
    (Creature::ZombieMan, 25.0),
    (Creature::ShotgunGuy, 40.0),
    (Creature::ChaingunGuy, 55.0),
    (Creature::DoomImp, 70.0),
    (Creature::Demon, 85.0),
    (Creature::Revenant, 100.0),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmamentLevel {
    pub complex_terrain: bool,
    pub obstacles: bool,
    pub pitfalls: bool,
    pub decoys: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemedyLevel {
    pub health_vials: u32,
    pub hazardous_items: u32,
    /// Length of a dark phase in env steps; `None` keeps the lights on.
    pub darkness_duration: Option<u32>,
    pub goggles: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollateralLevel {
    pub hostile_targets: u32,
    pub target_speed: f64,
    pub neutral_units: u32,
    pub neutral_health: f64,
    /// Inclusive band of distances from the agent, world units.
    pub distance: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolcanicLevel {
    /// Percentage of floor tiles covered with lava.
    pub lava_coverage: u32,
    pub changing_platforms: bool,
    pub random_height: bool,
    pub waggle: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecipiceLevel {
    pub step_decrement: f64,
    pub darkness_fluctuation: u32,
    pub randomized_terrain: bool,
    pub moving_pillars: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetonatorLevel {
    pub creature_types: u32,
    pub creature_speed: f64,
    pub barrels: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelConfig {
    Armament(ArmamentLevel),
    Remedy(RemedyLevel),
    Collateral(CollateralLevel),
    Volcanic(VolcanicLevel),
    Precipice(PrecipiceLevel),
    Detonator(DetonatorLevel),
}

impl LevelConfig {
    pub fn for_id(id: ScenarioId) -> Self {
        let l = id.level as usize - 1;
        match id.kind {
            ScenarioKind::ArmamentBurden => LevelConfig::Armament(ArmamentLevel {
                complex_terrain: [false, true, true][l],
                obstacles: [false, true, true][l],
                pitfalls: [false, false, true][l],
                decoys: [false, false, true][l],
            }),
            ScenarioKind::RemedyRush => LevelConfig::Remedy(RemedyLevel {
                health_vials: [30, 20, 10][l],
                hazardous_items: [40, 60, 80][l],
                darkness_duration: [None, Some(20), Some(40)][l],
                goggles: [None, Some(2), Some(1)][l],
            }),
            ScenarioKind::CollateralDamage => LevelConfig::Collateral(CollateralLevel {
                hostile_targets: [4, 3, 2][l],
                target_speed: [10.0, 15.0, 20.0][l],
                neutral_units: [4, 5, 6][l],
                neutral_health: [60.0, 40.0, 20.0][l],
                distance: [(256.0, 456.0), (400.0, 600.0), (544.0, 744.0)][l],
            }),
            ScenarioKind::VolcanicVenture => LevelConfig::Volcanic(VolcanicLevel {
                lava_coverage: [60, 70, 80][l],
                changing_platforms: [false, true, true][l],
                random_height: [false, true, true][l],
                waggle: [false, false, true][l],
            }),
            ScenarioKind::PrecipicePlunge => LevelConfig::Precipice(PrecipiceLevel {
                step_decrement: [24.0, 128.0, 192.0][l],
                darkness_fluctuation: [30, 30, 50][l],
                randomized_terrain: [false, true, true][l],
                moving_pillars: [false, false, true][l],
            }),
            ScenarioKind::DetonatorsDilemma => LevelConfig::Detonator(DetonatorLevel {
                creature_types: [3, 5, 7][l],
                creature_speed: [8.0, 12.0, 16.0][l],
                barrels: [10, 15, 20][l],
            }),
        }
    }
}

/// Creature roster for a Detonator level: three types, then two more, then
/// the full catalog.
pub fn detonator_creatures(creature_types: u32) -> Vec<Creature> {
    let base = [Creature::ShotgunGuy, Creature::DoomImp, Creature::Revenant];
    let mut out: Vec<Creature> = UNIT_CATALOG.iter().map(|&(c, _)| c).collect();
    match creature_types {
        0..=3 => out.retain(|c| base.contains(c)),
        4 | 5 => out.retain(|c| base.contains(c) || matches!(c, Creature::LostSoul | Creature::ChaingunGuy)),
        _ => {}
    }
    out
}
