use super::action::ActionMode;
use super::EnvError;
use crate::scenarios::{ScenarioId, ScenarioKind, ScenarioOptions, EPISODE_STEPS};
use std::fmt;
use std::str::FromStr;

/// Default episodic cost budget per scenario under soft constraints.
pub fn default_budget(kind: ScenarioKind) -> f64 {
    match kind {
        ScenarioKind::ArmamentBurden => 50.0,
        ScenarioKind::VolcanicVenture => 50.0,
        ScenarioKind::RemedyRush => 5.0,
        ScenarioKind::CollateralDamage => 5.0,
        ScenarioKind::PrecipicePlunge => 50.0,
        ScenarioKind::DetonatorsDilemma => 5.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    /// Cost is tolerated up to the budget.
    Soft(f64),
    /// Zero budget: the first costly step ends the episode.
    Hard,
}

impl Constraint {
    pub fn budget(self) -> f64 {
        match self {
            Constraint::Soft(b) => b,
            Constraint::Hard => 0.0,
        }
    }

    pub fn is_hard(self) -> bool {
        matches!(self, Constraint::Hard)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Channels {
    pub rgb: bool,
    pub depth: bool,
    pub labels: bool,
}

impl Channels {
    pub const RGB: Channels = Channels { rgb: true, depth: false, labels: false };

    fn parse(s: &str) -> Result<Self, EnvError> {
        let mut c = Channels { rgb: false, depth: false, labels: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "rgb" => c.rgb = true,
                "depth" => c.depth = true,
                "labels" => c.labels = true,
                other => return Err(EnvError::Config(format!("unknown channel `{other}` (expected rgb, depth, labels)"))),
            }
        }
        if !(c.rgb || c.depth || c.labels) {
            return Err(EnvError::Config("at least one pixel channel is required".into()));
        }
        Ok(c)
    }

    /// Bytes per pixel.
    pub fn count(self) -> usize {
        self.rgb as usize * 3 + self.depth as usize + self.labels as usize
    }
}

impl fmt::Display for Channels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.rgb, "rgb"), (self.depth, "depth"), (self.labels, "labels")]
            .into_iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| n)
            .collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObsMode {
    Features,
    Pixels { width: usize, height: usize, channels: Channels },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub scenario: ScenarioId,
    pub constraint: Constraint,
    pub obs: ObsMode,
    pub action_mode: ActionMode,
    pub max_steps: u32,
    pub seed: u64,
    pub options: ScenarioOptions,
}

impl EnvSpec {
    /// Soft constraint at the default budget, feature observations.
    pub fn new(scenario: ScenarioId) -> Self {
        Self {
            scenario,
            constraint: Constraint::Soft(default_budget(scenario.kind)),
            obs: ObsMode::Features,
            action_mode: ActionMode::Simplified,
            max_steps: EPISODE_STEPS,
            seed: 0,
            options: ScenarioOptions::default(),
        }
    }

    pub fn budget(&self) -> f64 {
        self.constraint.budget()
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if let Constraint::Soft(b) = self.constraint {
            if !(b > 0.0) || !b.is_finite() {
                return Err(EnvError::Config(format!("soft budget must be positive, got {b}")));
            }
        }
        if self.max_steps == 0 {
            return Err(EnvError::Config("max_steps must be positive".into()));
        }
        if let ObsMode::Pixels { width, height, .. } = self.obs {
            if width < 8 || height < 8 {
                return Err(EnvError::Config(format!("pixel size {width}x{height} is too small")));
            }
        }
        if !(self.options.capacity > 0.0) {
            return Err(EnvError::Config(format!("capacity must be positive, got {}", self.options.capacity)));
        }
        Ok(())
    }

    /// Parses `key=value` pairs separated by newlines or whitespace. `#`
    /// starts a comment. `scenario` is required; everything else defaults.
    pub fn parse_kv(text: &str) -> Result<Self, EnvError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                let (k, v) = tok.split_once('=').ok_or_else(|| EnvError::Config(format!("expected key=value, got `{tok}`")))?;
                pairs.push((k.to_string(), v.to_string()));
            }
        }
        let get = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        for (k, _) in &pairs {
            if !SPEC_KEYS.contains(&k.as_str()) {
                return Err(EnvError::Config(format!("unknown key `{k}` (expected one of {})", SPEC_KEYS.join(", "))));
            }
        }

        let name = get("scenario").ok_or_else(|| EnvError::Config("missing `scenario`".into()))?;
        let scenario: ScenarioId = match get("level") {
            Some(l) => format!("{name}-{l}").parse()?,
            None if name.contains('-') => name.parse()?,
            None => format!("{name}-1").parse()?,
        };
        let mut spec = EnvSpec::new(scenario);

        let budget = get("budget").map(|b| parse_num::<f64>("budget", b)).transpose()?;
        spec.constraint = match get("constraint").unwrap_or("soft") {
            "soft" => Constraint::Soft(budget.unwrap_or_else(|| default_budget(scenario.kind))),
            "hard" => match budget {
                Some(b) if b != 0.0 => return Err(EnvError::Config(format!("hard constraints have budget 0, got {b}"))),
                _ => Constraint::Hard,
            },
            other => return Err(EnvError::Config(format!("unknown constraint `{other}` (expected soft or hard)"))),
        };

        spec.obs = match get("obs").unwrap_or("features") {
            "features" => ObsMode::Features,
            "pixels" => ObsMode::Pixels {
                width: get("width").map(|v| parse_num("width", v)).transpose()?.unwrap_or(128),
                height: get("height").map(|v| parse_num("height", v)).transpose()?.unwrap_or(72),
                channels: get("channels").map(Channels::parse).transpose()?.unwrap_or(Channels::RGB),
            },
            other => return Err(EnvError::Config(format!("unknown obs mode `{other}` (expected features or pixels)"))),
        };
        if let Some(a) = get("actions") {
            spec.action_mode = a.parse().map_err(EnvError::Config)?;
        }
        if let Some(v) = get("max_steps") {
            spec.max_steps = parse_num("max_steps", v)?;
        }
        if let Some(v) = get("seed") {
            spec.seed = parse_num("seed", v)?;
        }
        if let Some(v) = get("map") {
            let (w, h) = v.split_once('x').ok_or_else(|| EnvError::Config(format!("map must look like 12x12, got `{v}`")))?;
            spec.options.map_size = Some((parse_num("map", w)?, parse_num("map", h)?));
        }
        if let Some(v) = get("capacity") {
            spec.options.capacity = parse_num("capacity", v)?;
        }
        if let Some(v) = get("table_weights") {
            spec.options.table_weights = parse_num("table_weights", v)?;
        }
        if let Some(v) = get("pickup_bonus") {
            spec.options.pickup_bonus = parse_num("pickup_bonus", v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// One `key=value` per line, every key present.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        put("scenario", self.scenario.kind.name().to_string());
        put("level", self.scenario.level.to_string());
        match self.constraint {
            Constraint::Soft(b) => {
                put("constraint", "soft".into());
                put("budget", b.to_string());
            }
            Constraint::Hard => put("constraint", "hard".into()),
        }
        match self.obs {
            ObsMode::Features => put("obs", "features".into()),
            ObsMode::Pixels { width, height, channels } => {
                put("obs", "pixels".into());
                put("width", width.to_string());
                put("height", height.to_string());
                put("channels", channels.to_string());
            }
        }
        put("actions", self.action_mode.name().into());
        put("max_steps", self.max_steps.to_string());
        put("seed", self.seed.to_string());
        if let Some((w, h)) = self.options.map_size {
            put("map", format!("{w}x{h}"));
        }
        put("capacity", self.options.capacity.to_string());
        put("table_weights", self.options.table_weights.to_string());
        put("pickup_bonus", self.options.pickup_bonus.to_string());
        s
    }
}

/// Keys accepted by [`EnvSpec::parse_kv`].
pub const SPEC_KEYS: [&str; 15] = [
    "scenario",
    "level",
    "constraint",
    "budget",
    "obs",
    "width",
    "height",
    "channels",
    "actions",
    "max_steps",
    "seed",
    "map",
    "capacity",
    "table_weights",
    "pickup_bonus",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, EnvError> {
    v.parse().map_err(|_| EnvError::Config(format!("bad value `{v}` for `{key}`")))
}

impl FromStr for EnvSpec {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvSpec::parse_kv(s)
    }
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let spec: EnvSpec = "scenario=remedy_rush level=1 constraint=soft budget=5 obs=features seed=7".parse().unwrap();
        assert_eq!(spec.scenario.to_string(), "remedy_rush-1");
        assert_eq!(spec.constraint, Constraint::Soft(5.0));
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.obs, ObsMode::Features);
    }

    #[test]
    fn round_trip_through_text() {
        let mut spec = EnvSpec::new("precipice_plunge-3".parse().unwrap());
        spec.constraint = Constraint::Hard;
        spec.obs = ObsMode::Pixels { width: 64, height: 48, channels: Channels { rgb: true, depth: true, labels: false } };
        spec.action_mode = ActionMode::FullDiscrete;
        spec.options.map_size = Some((10, 9));
        spec.seed = 99;
        let back: EnvSpec = spec.to_kv().parse().unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn defaults_and_errors() {
        let spec: EnvSpec = "scenario=volcanic_venture\nlevel=2\n".parse().unwrap();
        assert_eq!(spec.budget(), 50.0);
        let hard: EnvSpec = "scenario=volcanic_venture constraint=hard".parse().unwrap();
        assert_eq!(hard.budget(), 0.0);
        assert!(matches!("scenario=doom".parse::<EnvSpec>(), Err(EnvError::Config(_))));
        assert!(matches!("scenario=remedy_rush level=9".parse::<EnvSpec>(), Err(EnvError::Config(_))));
        assert!(matches!("scenario=remedy_rush budget=0".parse::<EnvSpec>(), Err(EnvError::Config(_))));
        assert!(matches!("scenario=remedy_rush colour=red".parse::<EnvSpec>(), Err(EnvError::Config(_))));
        assert!(matches!("scenario=remedy_rush constraint=hard budget=3".parse::<EnvSpec>(), Err(EnvError::Config(_))));
    }
}
