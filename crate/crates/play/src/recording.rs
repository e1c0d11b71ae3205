//! Line-oriented episode recordings and deterministic replay.
//!
//! ```text
//! HASARD-REC 1
//! env scenario=remedy_rush-1 constraint=soft ...
//! seed 42
//! start 1700000000
//! step 1 1 0 0 2
//! hash 100 3f2a...
//! end 12 3
//! ```
//! The footer is `end <R> <C>` for finished episodes and `aborted <R> <C>`
//! for episodes cut short by a disconnect.

use hasard_core::env::{Env, EnvError, EnvSpec};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;
/// Steps between recorded state hashes.
pub const HASH_EVERY: u32 = 100;

#[derive(Debug, Error)]
pub enum RecordingError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("recording does not fit the environment: {0}")]
    EnvMismatch(String),
    #[error("state diverged from the recording at step {step}")]
    DivergenceDetected { step: u32 },
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footer {
    pub reward: f64,
    pub cost: f64,
    pub aborted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecording {
    /// Environment settings in `key=value` form, seed excluded.
    pub env: String,
    pub seed: u64,
    /// Unix seconds.
    pub start: u64,
    /// Per-group choices of every step, in order.
    pub rows: Vec<Vec<usize>>,
    pub hashes: Vec<(u32, [u8; 32])>,
    pub footer: Option<Footer>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn unhex(s: &str) -> Option<[u8; 32]> {
    if s.len() != 64 || !s.is_ascii() {
        return None;
    }
    let mut out = [0u8; 32];
    for (i, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok()?;
    }
    Some(out)
}

fn spec_line(spec: &EnvSpec) -> String {
    spec.to_kv().lines().filter(|l| !l.starts_with("seed=")).collect::<Vec<_>>().join(" ")
}

impl EpisodeRecording {
    pub fn spec(&self) -> Result<EnvSpec, EnvError> {
        let mut spec = EnvSpec::parse_kv(&self.env)?;
        spec.seed = self.seed;
        Ok(spec)
    }

    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("HASARD-REC {FORMAT_VERSION}\nenv {}\nseed {}\nstart {}\n", self.env, self.seed, self.start);
        let mut hashes = self.hashes.iter().peekable();
        for (i, row) in self.rows.iter().enumerate() {
            let step = i as u32 + 1;
            s.push_str("step ");
            s.push_str(&step.to_string());
            for c in row {
                let _ = write!(s, " {c}");
            }
            s.push('\n');
            while let Some((_, h)) = hashes.next_if(|(at, _)| *at == step) {
                let _ = writeln!(s, "hash {step} {}", hex(h));
            }
        }
        for (at, h) in hashes {
            let _ = writeln!(s, "hash {at} {}", hex(h));
        }
        if let Some(f) = self.footer {
            let _ = writeln!(s, "{} {} {}", if f.aborted { "aborted" } else { "end" }, f.reward, f.cost);
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), RecordingError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RecordingError> {
        std::fs::read_to_string(path)?.parse()
    }

    /// Re-executes the episode, checking every recorded hash, and returns
    /// the final (R, C).
    pub fn replay(&self) -> Result<(f64, f64), ReplayError> {
        let spec = self.spec().map_err(|e| ReplayError::EnvMismatch(e.to_string()))?;
        let (mut env, _) = Env::new(spec)?;
        let sizes = env.encoding().group_sizes();
        let mut hashes = self.hashes.iter().peekable();
        while let Some((_, h)) = hashes.next_if(|(at, _)| *at == 0) {
            if *h != env.state_hash() {
                return Err(ReplayError::DivergenceDetected { step: 0 });
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != sizes.len() || row.iter().zip(&sizes).any(|(c, s)| c >= s) {
                return Err(ReplayError::EnvMismatch(format!("step {} has choices {row:?} for groups {sizes:?}", i + 1)));
            }
            match env.step_choices(row) {
                Ok(_) => {}
                Err(EnvError::EpisodeFinished) => {
                    return Err(ReplayError::EnvMismatch(format!("episode ended before step {}", i + 1)));
                }
                Err(e) => return Err(e.into()),
            }
            let step = env.steps();
            while let Some((_, h)) = hashes.next_if(|(at, _)| *at == step) {
                if *h != env.state_hash() {
                    return Err(ReplayError::DivergenceDetected { step });
                }
            }
        }
        if let Some((at, _)) = hashes.next() {
            return Err(ReplayError::EnvMismatch(format!("hash recorded for step {at} beyond the last action")));
        }
        let info = env.info();
        Ok((info.episode_return, info.episode_cost))
    }
}

impl FromStr for EpisodeRecording {
    type Err = RecordingError;

    fn from_str(text: &str) -> Result<Self, RecordingError> {
        let err = |line: usize, msg: &str| RecordingError::Parse { line: line + 1, msg: msg.to_string() };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == format!("HASARD-REC {FORMAT_VERSION}") => {}
            _ => return Err(err(0, "missing HASARD-REC header")),
        }
        let mut field = |name: &str| -> Result<String, RecordingError> {
            let (i, l) = lines.next().ok_or_else(|| err(0, &format!("missing {name}")))?;
            l.strip_prefix(name).and_then(|r| r.strip_prefix(' ')).map(str::to_string).ok_or_else(|| err(i, &format!("expected {name}")))
        };
        let env = field("env")?;
        let seed = field("seed")?.trim().parse().map_err(|_| err(2, "bad seed"))?;
        let start = field("start")?.trim().parse().map_err(|_| err(3, "bad start"))?;
        let mut rec = EpisodeRecording { env, seed, start, rows: Vec::new(), hashes: Vec::new(), footer: None };
        for (i, line) in lines {
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                [] => {}
                ["step", n, rest @ ..] => {
                    let n: usize = n.parse().map_err(|_| err(i, "bad step number"))?;
                    if n != rec.rows.len() + 1 {
                        return Err(err(i, "steps out of order"));
                    }
                    let row = rest.iter().map(|c| c.parse()).collect::<Result<_, _>>().map_err(|_| err(i, "bad action"))?;
                    rec.rows.push(row);
                }
                ["hash", n, h] => {
                    let n = n.parse().map_err(|_| err(i, "bad hash step"))?;
                    rec.hashes.push((n, unhex(h).ok_or_else(|| err(i, "bad hash"))?));
                }
                [kind @ ("end" | "aborted"), r, c] => {
                    let reward = r.parse().map_err(|_| err(i, "bad reward"))?;
                    let cost = c.parse().map_err(|_| err(i, "bad cost"))?;
                    rec.footer = Some(Footer { reward, cost, aborted: *kind == "aborted" });
                }
                _ => return Err(err(i, "unrecognized line")),
            }
        }
        Ok(rec)
    }
}

/// Wraps an environment and logs every step of the current episode.
pub struct Recorder {
    rec: EpisodeRecording,
}

impl Recorder {
    /// Starts a recording for `env`'s current (fresh) episode.
    pub fn start(env: &Env, start: u64) -> Self {
        let rec = EpisodeRecording {
            env: spec_line(env.spec()),
            seed: env.seed(),
            start,
            rows: Vec::new(),
            hashes: vec![(0, env.state_hash())],
            footer: None,
        };
        Self { rec }
    }

    /// Records a step already applied to `env`.
    pub fn record(&mut self, env: &Env, choices: &[usize]) {
        self.rec.rows.push(choices.to_vec());
        let step = env.steps();
        if step % HASH_EVERY == 0 || env.is_finished() {
            self.rec.hashes.push((step, env.state_hash()));
        }
    }

    pub fn recording(&self) -> &EpisodeRecording {
        &self.rec
    }

    pub fn finish(mut self, env: &Env) -> EpisodeRecording {
        let info = env.info();
        let step = env.steps();
        if self.rec.hashes.last().map(|(s, _)| *s) != Some(step) {
            self.rec.hashes.push((step, env.state_hash()));
        }
        self.rec.footer = Some(Footer { reward: info.episode_return, cost: info.episode_cost, aborted: !env.is_finished() });
        self.rec
    }
}
