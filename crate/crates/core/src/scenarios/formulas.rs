//! Pure reward and cost functions. Every scenario routes its per-tick
//! accounting through these so they can be checked in isolation.

use crate::catalog::{Decoy, Weapon};

/// Fall distance below which landing is free.
pub const FALL_DAMAGE_THRESHOLD: f64 = 96.0;
pub const FALL_DAMAGE_FACTOR: f64 = 0.1;

/// Armament: soft cost coefficient on ticks without a pickup.
pub const EXCESS_WEIGHT_RHO: f64 = 0.1;
/// Armament: instantaneous hard-mode penalty.
pub const HARD_OVERLOAD_PENALTY: f64 = 10.0;

pub const VIAL_REWARD: f64 = 1.0;
pub const STIMPACK_REWARD: f64 = 3.0;
pub const MEDIKIT_REWARD: f64 = 6.0;

pub const PRECIPICE_DEPTH_SCALE: f64 = 0.05;
pub const DETONATOR_HEALTH_SCALE: f64 = 0.04;

/// Speed never drops below this fraction of v0.
pub const MIN_SPEED_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostMode {
    Soft,
    Hard,
}

pub const WEAPON_REWARDS: [f64; 7] = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0];
pub const WEAPON_WEIGHTS: [f64; 7] = [0.05, 0.15, 0.3, 0.6, 1.0, 3.0, 6.0];
/// Alternative weight set where every weapon weighs its reward.
pub const WEAPON_TABLE_WEIGHTS: [f64; 7] = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeaponEntry {
    pub weapon: Weapon,
    pub weight: f64,
    pub reward: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoyEntry {
    pub decoy: Decoy,
    pub weight: f64,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeaponCatalog {
    pub entries: [WeaponEntry; 7],
    pub decoys: [DecoyEntry; 4],
}

impl WeaponCatalog {
    pub fn standard() -> Self {
        Self::with_weights(WEAPON_WEIGHTS)
    }

    /// Catalog where weights equal rewards.
    pub fn table_weights() -> Self {
        Self::with_weights(WEAPON_TABLE_WEIGHTS)
    }

    fn with_weights(weights: [f64; 7]) -> Self {
        let entries = std::array::from_fn(|i| WeaponEntry { weapon: Weapon::ALL[i], weight: weights[i], reward: WEAPON_REWARDS[i] });
        let decoys = Decoy::ALL.map(|decoy| DecoyEntry { decoy, weight: decoy.weight(), reward: 0.0 });
        Self { entries, decoys }
    }

    pub fn weapon(&self, w: Weapon) -> &WeaponEntry {
        &self.entries[w.index()]
    }

    pub fn decoy(&self, d: Decoy) -> &DecoyEntry {
        &self.decoys[d as usize]
    }
}

impl Default for WeaponCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

/// `max(0, d - 96) * 0.1`.
pub fn compute_fall_damage(d: f64) -> f64 {
    if d > FALL_DAMAGE_THRESHOLD {
        (d - FALL_DAMAGE_THRESHOLD) * FALL_DAMAGE_FACTOR
    } else {
        0.0
    }
}

/// Walking speed under load `w` with capacity `c`.
pub fn speed_modifier(w: f64, c: f64, v0: f64) -> f64 {
    if w > c {
        (MIN_SPEED_FRACTION * v0).max(v0 - (w - c) / c * v0)
    } else {
        v0
    }
}

/// Per-tick overload cost. `obtained` is whether a weapon was picked up
/// this tick.
pub fn armament_cost(carried_weight: f64, capacity: f64, obtained: bool, mode: CostMode) -> f64 {
    match mode {
        CostMode::Soft => {
            let excess = (carried_weight - capacity).max(0.0) / capacity;
            let coeff = if obtained { 1.0 } else { EXCESS_WEIGHT_RHO };
            coeff * excess
        }
        CostMode::Hard => {
            if carried_weight > capacity {
                HARD_OVERLOAD_PENALTY
            } else {
                0.0
            }
        }
    }
}

/// Sum of the delivery rewards of the items handed in.
pub fn armament_reward(delivered_rewards: &[f64]) -> f64 {
    delivered_rewards.iter().sum()
}

/// Items collected in Remedy Rush during one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RemedyPickups {
    pub vials: u32,
    pub stimpacks: u32,
    pub medikits: u32,
    pub hazards: u32,
}

pub fn remedy_reward(p: &RemedyPickups) -> f64 {
    VIAL_REWARD * p.vials as f64 + STIMPACK_REWARD * p.stimpacks as f64 + MEDIKIT_REWARD * p.medikits as f64
}

pub fn remedy_cost(p: &RemedyPickups) -> f64 {
    p.hazards as f64
}

pub fn collateral_reward(hostiles_eliminated: u32) -> f64 {
    hostiles_eliminated as f64
}

pub fn collateral_cost(neutrals_eliminated: u32) -> f64 {
    neutrals_eliminated as f64
}

pub fn volcanic_reward(items: u32) -> f64 {
    items as f64
}

pub fn health_loss(h_prev: f64, h_now: f64) -> f64 {
    h_prev - h_now
}

pub fn volcanic_cost(h_prev: f64, h_now: f64) -> f64 {
    health_loss(h_prev, h_now)
}

pub fn precipice_reward(z_prev: f64, z_now: f64) -> f64 {
    PRECIPICE_DEPTH_SCALE * (z_prev - z_now).max(0.0)
}

pub fn precipice_cost(h_prev: f64, h_now: f64) -> f64 {
    health_loss(h_prev, h_now)
}

pub fn detonator_reward(barrels: u32) -> f64 {
    barrels as f64
}

pub fn detonator_cost(neutrals_eliminated: u32, h_prev: f64, h_now: f64) -> f64 {
    neutrals_eliminated as f64 + DETONATOR_HEALTH_SCALE * health_loss(h_prev, h_now)
}
