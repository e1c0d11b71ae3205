use crate::scenarios::ScenarioKind;
use crate::world::ResolvedAction;
use std::fmt;
use std::str::FromStr;

/// Game buttons, named as the engine's input bindings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Button {
    MoveForward,
    MoveBackward,
    MoveRight,
    MoveLeft,
    TurnLeft,
    TurnRight,
    LookUp,
    LookDown,
    SelectNextWeapon,
    SelectPrevWeapon,
    Attack,
    Speed,
    Jump,
    Use,
    Crouch,
    Turn180,
}

impl Button {
    pub const ALL: [Button; 16] = [
        Button::MoveForward,
        Button::MoveBackward,
        Button::MoveRight,
        Button::MoveLeft,
        Button::TurnLeft,
        Button::TurnRight,
        Button::LookUp,
        Button::LookDown,
        Button::SelectNextWeapon,
        Button::SelectPrevWeapon,
        Button::Attack,
        Button::Speed,
        Button::Jump,
        Button::Use,
        Button::Crouch,
        Button::Turn180,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Button::MoveForward => "MOVE_FORWARD",
            Button::MoveBackward => "MOVE_BACKWARD",
            Button::MoveRight => "MOVE_RIGHT",
            Button::MoveLeft => "MOVE_LEFT",
            Button::TurnLeft => "TURN_LEFT",
            Button::TurnRight => "TURN_RIGHT",
            Button::LookUp => "LOOK_UP",
            Button::LookDown => "LOOK_DOWN",
            Button::SelectNextWeapon => "SELECT_NEXT_WEAPON",
            Button::SelectPrevWeapon => "SELECT_PREV_WEAPON",
            Button::Attack => "ATTACK",
            Button::Speed => "SPEED",
            Button::Jump => "JUMP",
            Button::Use => "USE",
            Button::Crouch => "CROUCH",
            Button::Turn180 => "TURN180",
        }
    }

    fn apply(self, a: &mut ResolvedAction) {
        match self {
            Button::MoveForward => a.forward = 1.0,
            Button::MoveBackward => a.forward = -1.0,
            Button::MoveRight => a.strafe = 1.0,
            Button::MoveLeft => a.strafe = -1.0,
            Button::TurnLeft => a.turn = 1.0,
            Button::TurnRight => a.turn = -1.0,
            Button::LookUp => a.look = 1.0,
            Button::LookDown => a.look = -1.0,
            // Every scenario arms the agent with a single weapon.
            Button::SelectNextWeapon | Button::SelectPrevWeapon => {}
            Button::Attack => a.attack = true,
            Button::Speed => a.speed = true,
            Button::Jump => a.jump = true,
            Button::Use => a.use_ = true,
            Button::Crouch => a.crouch = true,
            Button::Turn180 => a.turn180 = true,
        }
    }
}

impl fmt::Display for Button {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownButton(pub String);

impl FromStr for Button {
    type Err = UnknownButton;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Button::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| UnknownButton(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ActionMode {
    #[default]
    Simplified,
    FullDiscrete,
}

impl ActionMode {
    pub fn name(self) -> &'static str {
        match self {
            ActionMode::Simplified => "simplified",
            ActionMode::FullDiscrete => "full",
        }
    }
}

impl FromStr for ActionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simplified" => Ok(ActionMode::Simplified),
            "full" => Ok(ActionMode::FullDiscrete),
            _ => Err(format!("unknown action mode `{s}` (expected simplified or full)")),
        }
    }
}

/// Mutually exclusive button sets. Option 0 of every group is NO-OP and
/// option `i > 0` presses `group[i - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionEncoding {
    groups: Vec<Vec<Button>>,
}

impl ActionEncoding {
    pub fn new(groups: Vec<Vec<Button>>) -> Self {
        Self { groups }
    }

    pub fn for_scenario(kind: ScenarioKind, mode: ActionMode) -> Self {
        use Button::*;
        let groups: Vec<Vec<Button>> = match mode {
            ActionMode::Simplified => match kind {
                ScenarioKind::ArmamentBurden => vec![vec![MoveForward], vec![TurnLeft, TurnRight], vec![Use], vec![Jump]],
                ScenarioKind::RemedyRush | ScenarioKind::VolcanicVenture => {
                    vec![vec![MoveForward], vec![TurnLeft, TurnRight], vec![Jump], vec![Speed]]
                }
                ScenarioKind::CollateralDamage => vec![vec![Attack], vec![TurnLeft, TurnRight]],
                ScenarioKind::PrecipicePlunge => {
                    vec![vec![MoveForward, MoveBackward], vec![TurnLeft, TurnRight], vec![LookUp, LookDown], vec![Jump]]
                }
                ScenarioKind::DetonatorsDilemma => {
                    vec![vec![MoveForward], vec![TurnLeft, TurnRight], vec![Jump], vec![Speed], vec![Attack]]
                }
            },
            // 3 * 3 * 3 * 2^5 = 864 button combinations, times the
            // discretized turn and look groups that stand in for mouse deltas.
            ActionMode::FullDiscrete => vec![
                vec![MoveForward, MoveBackward],
                vec![MoveRight, MoveLeft],
                vec![SelectNextWeapon, SelectPrevWeapon],
                vec![Attack],
                vec![Speed],
                vec![Jump],
                vec![Use],
                vec![Crouch],
                vec![TurnLeft, TurnRight, Turn180],
                vec![LookUp, LookDown],
            ],
        };
        Self { groups }
    }

    pub fn groups(&self) -> &[Vec<Button>] {
        &self.groups
    }

    /// Options per group, NO-OP included.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len() + 1).collect()
    }

    /// Size of the flat action space.
    pub fn size(&self) -> usize {
        self.groups.iter().map(|g| g.len() + 1).product()
    }

    /// Flat index of per-group choices; the last group varies fastest.
    pub fn encode(&self, choices: &[usize]) -> Option<usize> {
        if choices.len() != self.groups.len() {
            return None;
        }
        let mut flat = 0;
        for (c, g) in choices.iter().zip(&self.groups) {
            if *c > g.len() {
                return None;
            }
            flat = flat * (g.len() + 1) + c;
        }
        Some(flat)
    }

    pub fn decode(&self, mut flat: usize) -> Option<Vec<usize>> {
        if flat >= self.size() {
            return None;
        }
        let mut out = vec![0; self.groups.len()];
        for (slot, g) in out.iter_mut().zip(&self.groups).rev() {
            let n = g.len() + 1;
            *slot = flat % n;
            flat /= n;
        }
        Some(out)
    }

    /// Buttons held by a per-group choice vector. Assumes valid choices.
    pub fn buttons(&self, choices: &[usize]) -> Vec<Button> {
        choices.iter().zip(&self.groups).filter(|(c, _)| **c > 0).map(|(c, g)| g[c - 1]).collect()
    }

    pub fn resolve(&self, choices: &[usize]) -> ResolvedAction {
        let mut a = ResolvedAction::NOOP;
        for b in self.buttons(choices) {
            b.apply(&mut a);
        }
        a
    }

    /// Maps a set of held buttons onto the groups. Buttons outside every
    /// group are ignored; within a group the earliest listed option wins.
    pub fn from_buttons(&self, held: &[Button]) -> Vec<usize> {
        self.groups
            .iter()
            .map(|g| g.iter().position(|b| held.contains(b)).map_or(0, |i| i + 1))
            .collect()
    }
}
