//! Everything an entity can be, with the per-kind constants the rules and
//! the renderer need.

/// Weapons in catalog order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weapon {
    Pistol,
    Shotgun,
    SuperShotgun,
    Chaingun,
    RocketLauncher,
    PlasmaRifle,
    Bfg9000,
}

impl Weapon {
    pub const ALL: [Weapon; 7] = [
        Weapon::Pistol,
        Weapon::Shotgun,
        Weapon::SuperShotgun,
        Weapon::Chaingun,
        Weapon::RocketLauncher,
        Weapon::PlasmaRifle,
        Weapon::Bfg9000,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Weapon::Pistol => "Pistol",
            Weapon::Shotgun => "Shotgun",
            Weapon::SuperShotgun => "SuperShotgun",
            Weapon::Chaingun => "Chaingun",
            Weapon::RocketLauncher => "RocketLauncher",
            Weapon::PlasmaRifle => "PlasmaRifle",
            Weapon::Bfg9000 => "BFG9000",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Load-only items that pay nothing on delivery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decoy {
    BlurSphere,
    Allmap,
    Backpack,
    RadSuit,
}

impl Decoy {
    pub const ALL: [Decoy; 4] = [Decoy::BlurSphere, Decoy::Allmap, Decoy::Backpack, Decoy::RadSuit];

    pub fn weight(self) -> f64 {
        match self {
            Decoy::BlurSphere => 0.25,
            Decoy::Allmap => 0.5,
            Decoy::Backpack => 0.75,
            Decoy::RadSuit => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Decoy::BlurSphere => "BlurSphere",
            Decoy::Allmap => "Allmap",
            Decoy::Backpack => "Backpack",
            Decoy::RadSuit => "RadSuit",
        }
    }
}

/// Floor pickups of the item-collection scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pickup {
    HealthBonus,
    Stimpack,
    Medikit,
    ArmorBonus,
    RocketAmmo,
    Shell,
    Cell,
    /// Night vision goggles.
    Infrared,
}

impl Pickup {
    /// Penalty items of Remedy Rush.
    pub const HAZARDS: [Pickup; 4] = [Pickup::ArmorBonus, Pickup::RocketAmmo, Pickup::Shell, Pickup::Cell];

    pub fn is_hazard(self) -> bool {
        Self::HAZARDS.contains(&self)
    }

    pub fn is_health(self) -> bool {
        matches!(self, Pickup::HealthBonus | Pickup::Stimpack | Pickup::Medikit)
    }
}

/// Creatures, ordered by resilience.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Creature {
    LostSoul,
    ZombieMan,
    ShotgunGuy,
    ChaingunGuy,
    DoomImp,
    Demon,
    Revenant,
    Cacodemon,
}

impl Creature {
    /// Spawn health in hit points.
    pub fn base_hp(self) -> f64 {
        match self {
            Creature::LostSoul => 10.0,
            Creature::ZombieMan => 25.0,
            Creature::ShotgunGuy => 40.0,
            Creature::ChaingunGuy => 55.0,
            Creature::DoomImp => 70.0,
            Creature::Demon => 85.0,
            Creature::Revenant => 100.0,
            Creature::Cacodemon => 100.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Creature::LostSoul => "LostSoul",
            Creature::ZombieMan => "ZombieMan",
            Creature::ShotgunGuy => "ShotgunGuy",
            Creature::ChaingunGuy => "ChaingunGuy",
            Creature::DoomImp => "DoomImp",
            Creature::Demon => "Demon",
            Creature::Revenant => "Revenant",
            Creature::Cacodemon => "Cacodemon",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Allegiance {
    Hostile,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Weapon(Weapon),
    Decoy(Decoy),
    Pickup(Pickup),
    Unit(Creature, Allegiance),
    Barrel,
    Rocket,
}

/// Label buffer ids. 0 is level geometry, 1 the HUD strip.
pub mod label {
    pub const BACKGROUND: u8 = 0;
    pub const HUD: u8 = 1;
    pub const WEAPON: u8 = 10;
    pub const DECOY: u8 = 11;
    pub const HEALTH_ITEM: u8 = 20;
    pub const HAZARD_ITEM: u8 = 21;
    pub const GOGGLES: u8 = 22;
    pub const HOSTILE: u8 = 30;
    pub const NEUTRAL: u8 = 31;
    pub const BARREL: u8 = 40;
    pub const PROJECTILE: u8 = 50;
}

/// Billboard geometry and flat color for rendering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Appearance {
    pub width: f64,
    pub height: f64,
    pub color: [u8; 3],
    pub label: u8,
    /// Still visible when the level lights are off.
    pub emissive: bool,
}

impl EntityKind {
    pub fn is_destructible(self) -> bool {
        matches!(self, EntityKind::Unit(..) | EntityKind::Barrel)
    }

    /// Collision radius in world units.
    pub fn radius(self) -> f64 {
        match self {
            EntityKind::Unit(Creature::Cacodemon, _) => 31.0,
            EntityKind::Unit(..) => 20.0,
            EntityKind::Barrel => 10.0,
            EntityKind::Rocket => 4.0,
            _ => 16.0,
        }
    }

    pub fn appearance(self) -> Appearance {
        let (width, height, color, label, emissive) = match self {
            EntityKind::Weapon(w) => {
                let shade = 120 + 18 * w.index() as u8;
                (24.0, 16.0, [shade, shade, 40], label::WEAPON, false)
            }
            EntityKind::Decoy(_) => (24.0, 16.0, [150, 60, 200], label::DECOY, false),
            EntityKind::Pickup(Pickup::Infrared) => (20.0, 12.0, [60, 255, 60], label::GOGGLES, true),
            EntityKind::Pickup(p) if p.is_health() => (16.0, 16.0, [40, 90, 255], label::HEALTH_ITEM, false),
            EntityKind::Pickup(_) => (16.0, 12.0, [230, 120, 20], label::HAZARD_ITEM, false),
            EntityKind::Unit(c, Allegiance::Hostile) => {
                let w = 2.0 * EntityKind::Unit(c, Allegiance::Hostile).radius();
                (w, 56.0, [220, 30, 30], label::HOSTILE, false)
            }
            EntityKind::Unit(..) => (40.0, 56.0, [90, 160, 90], label::NEUTRAL, false),
            EntityKind::Barrel => (20.0, 32.0, [90, 110, 60], label::BARREL, false),
            EntityKind::Rocket => (8.0, 8.0, [255, 240, 200], label::PROJECTILE, true),
        };
        Appearance { width, height, color, label, emissive }
    }
}
