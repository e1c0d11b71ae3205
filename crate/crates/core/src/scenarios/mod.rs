//! The six rule-sets layered on top of the world simulation.

mod armament;
mod blast;
mod collateral;
mod detonator;
pub mod formulas;
mod levels;
mod precipice;
mod remedy;
mod volcanic;

pub use armament::{ArmamentState, Carried};
pub use blast::{blast_damage, detonate, explode_at, DamageReport, BLAST_DAMAGE, BLAST_RADIUS};
pub use collateral::{CollateralState, ROCKET_COOLDOWN, ROCKET_SPEED};
pub use detonator::{DetonatorState, PISTOL_COOLDOWN, PISTOL_DAMAGE};
pub use formulas::*;
pub use levels::*;
pub use precipice::{precipice_heights, PrecipiceState};
pub use remedy::RemedyState;
pub use volcanic::{relayout_platforms, VolcanicState, INVULNERABILITY_TICKS, RELAYOUT_INTERVAL};

use crate::rng::Rng;
use crate::world::{ResolvedAction, Vec3, World};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Ticks in one environment step.
pub const FRAME_SKIP: u32 = 4;
/// Ticks per episode: one minute at 35 ticks per second.
pub const EPISODE_TICKS: u32 = 2100;
/// Environment steps per episode.
pub const EPISODE_STEPS: u32 = EPISODE_TICKS / FRAME_SKIP;
/// Walking speed of every agent, units per tick.
pub const AGENT_SPEED: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    ArmamentBurden,
    RemedyRush,
    CollateralDamage,
    VolcanicVenture,
    PrecipicePlunge,
    DetonatorsDilemma,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::ArmamentBurden,
        ScenarioKind::RemedyRush,
        ScenarioKind::CollateralDamage,
        ScenarioKind::VolcanicVenture,
        ScenarioKind::PrecipicePlunge,
        ScenarioKind::DetonatorsDilemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::ArmamentBurden => "armament_burden",
            ScenarioKind::RemedyRush => "remedy_rush",
            ScenarioKind::CollateralDamage => "collateral_damage",
            ScenarioKind::VolcanicVenture => "volcanic_venture",
            ScenarioKind::PrecipicePlunge => "precipice_plunge",
            ScenarioKind::DetonatorsDilemma => "detonators_dilemma",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ScenarioError::UnknownScenario(s.to_string()))
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}` (expected one of armament_burden, remedy_rush, collateral_damage, volcanic_venture, precipice_plunge, detonators_dilemma)")]
    UnknownScenario(String),
    #[error("invalid level `{0}`, expected 1, 2 or 3")]
    InvalidLevel(String),
    #[error("map of {0}x{1} tiles is too small for this scenario")]
    MapTooSmall(usize, usize),
    #[error("carrying capacity must be positive, got {0}")]
    BadCapacity(f64),
}

/// Scenario plus difficulty level, written `remedy_rush-2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScenarioId {
    pub kind: ScenarioKind,
    pub level: u8,
}

impl ScenarioId {
    pub fn new(kind: ScenarioKind, level: u8) -> Result<Self, ScenarioError> {
        if (1..=3).contains(&level) {
            Ok(Self { kind, level })
        } else {
            Err(ScenarioError::InvalidLevel(level.to_string()))
        }
    }

    pub fn all() -> impl Iterator<Item = ScenarioId> {
        ScenarioKind::ALL.into_iter().flat_map(|kind| (1..=3).map(move |level| ScenarioId { kind, level }))
    }
}

impl FromStr for ScenarioId {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, level) = s.rsplit_once('-').ok_or_else(|| ScenarioError::InvalidLevel(s.to_string()))?;
        let kind: ScenarioKind = name.parse()?;
        let level: u8 = level.parse().map_err(|_| ScenarioError::InvalidLevel(level.to_string()))?;
        ScenarioId::new(kind, level)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind.name(), self.level)
    }
}

/// Knobs that are not part of the difficulty table.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOptions {
    /// Interior size in tiles (walls excluded); `None` picks the scenario default.
    pub map_size: Option<(usize, usize)>,
    /// Armament carrying capacity in load units.
    pub capacity: f64,
    /// Armament: weapons weigh what they pay.
    pub table_weights: bool,
    /// Armament: pay a tenth of a weapon's reward when it is picked up.
    pub pickup_bonus: bool,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self { map_size: None, capacity: 1.0, table_weights: false, pickup_bonus: false }
    }
}

/// Accounting for one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TickOutcome {
    pub reward: f64,
    pub cost: f64,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioState {
    Armament(ArmamentState),
    Remedy(RemedyState),
    Collateral(CollateralState),
    Volcanic(VolcanicState),
    Precipice(PrecipiceState),
    Detonator(DetonatorState),
}

/// Rules of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: ScenarioId,
    pub level: LevelConfig,
    pub mode: CostMode,
    pub state: ScenarioState,
}

impl Scenario {
    /// Builds the initial world. All draws come from `rng` in a fixed order:
    /// layout first, then the agent, then entities.
    pub fn reset(id: ScenarioId, mode: CostMode, options: &ScenarioOptions, rng: &mut Rng) -> Result<(Scenario, World), ScenarioError> {
        if !(options.capacity > 0.0) {
            return Err(ScenarioError::BadCapacity(options.capacity));
        }
        let level = LevelConfig::for_id(id);
        let (state, world) = match level {
            LevelConfig::Armament(l) => {
                let (s, w) = ArmamentState::reset(l, mode, options, rng)?;
                (ScenarioState::Armament(s), w)
            }
            LevelConfig::Remedy(l) => {
                let (s, w) = RemedyState::reset(l, options, rng)?;
                (ScenarioState::Remedy(s), w)
            }
            LevelConfig::Collateral(l) => {
                let (s, w) = CollateralState::reset(l, options, rng)?;
                (ScenarioState::Collateral(s), w)
            }
            LevelConfig::Volcanic(l) => {
                let (s, w) = VolcanicState::reset(l, mode, options, rng)?;
                (ScenarioState::Volcanic(s), w)
            }
            LevelConfig::Precipice(l) => {
                let (s, w) = PrecipiceState::reset(l, options, rng)?;
                (ScenarioState::Precipice(s), w)
            }
            LevelConfig::Detonator(l) => {
                let (s, w) = DetonatorState::reset(l, options, rng)?;
                (ScenarioState::Detonator(s), w)
            }
        };
        Ok((Scenario { id, level, mode, state }, world))
    }

    /// Runs one tick: rule pre-processing, physics, then the scenario rules.
    pub fn tick(&mut self, world: &mut World, action: &ResolvedAction, rng: &mut Rng) -> TickOutcome {
        let out = match &mut self.state {
            ScenarioState::Armament(s) => s.tick(world, action, rng),
            ScenarioState::Remedy(s) => s.tick(world, action, rng),
            ScenarioState::Collateral(s) => s.tick(world, action, rng),
            ScenarioState::Volcanic(s) => s.tick(world, action, rng),
            ScenarioState::Precipice(s) => s.tick(world, action, rng),
            ScenarioState::Detonator(s) => s.tick(world, action, rng),
        };
        world.tick += 1;
        world.purge_dead();
        out
    }

    /// Fraction of carrying capacity in use; zero outside Armament.
    pub fn load_fraction(&self, world: &World) -> f64 {
        match &self.state {
            ScenarioState::Armament(s) => world.agent.carried_weight / s.capacity,
            _ => 0.0,
        }
    }

    /// A policy that never incurs cost: turning in place. No scenario
    /// charges for rotating, and none spawns hazards under a stationary agent.
    pub fn safe_action(&self, _world: &World) -> ResolvedAction {
        ResolvedAction { turn: 1.0, ..ResolvedAction::NOOP }
    }
}

/// Uniform point inside a random open tile whose center is at least
/// `min_dist` from the agent, jittered up to `jitter` units from the center.
pub(crate) fn random_point_away(world: &World, rng: &mut Rng, min_dist: f64, jitter: f64, eligible: impl Fn(usize, usize) -> bool) -> Option<Vec3> {
    let g = &world.grid;
    let any = (0..g.len()).any(|i| {
        let (x, y) = g.coords(i);
        eligible(x, y) && world.open_tile_away_from_agent(x, y, min_dist)
    });
    if !any {
        return None;
    }
    loop {
        let i = rng.index(g.len());
        let (tx, ty) = g.coords(i);
        if eligible(tx, ty) && world.open_tile_away_from_agent(tx, ty, min_dist) {
            let (cx, cy) = g.tile_center(tx, ty);
            let x = cx + rng.range(-jitter, jitter);
            let y = cy + rng.range(-jitter, jitter);
            return Some(Vec3::new(x, y, g.get(tx, ty).floor_z));
        }
    }
}

/// Agent body touches an item lying at `pos` and is low enough to grab it.
pub(crate) fn touches(world: &World, pos: &Vec3, reach_z: f64) -> bool {
    let a = &world.agent;
    pos.dist_xy(a.pose.x, a.pose.y) <= a.radius + 16.0 && a.pose.z - pos.z <= reach_z && pos.z - a.pose.z <= reach_z
}
