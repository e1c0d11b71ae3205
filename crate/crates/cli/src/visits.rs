//! Per-episode tile visit logs and their PGM rendering.

use crate::CliError;
use hasard_core::env::{Env, Heatmap};
use std::fmt::Write as _;

const MAGIC: &str = "HASARD-VISITS 1";

#[derive(Clone, Debug, PartialEq)]
pub struct VisitLog {
    pub width: usize,
    pub height: usize,
    /// Row-major, `true` for wall tiles.
    pub walls: Vec<bool>,
    /// Oldest first.
    pub episodes: Vec<Vec<u32>>,
}

impl VisitLog {
    pub fn from_heatmap(env: &Env, heatmap: &Heatmap) -> Self {
        let (width, height) = env.grid_size();
        let walls = env.world().grid.tiles().iter().map(|t| t.is_wall()).collect();
        Self { width, height, walls, episodes: heatmap.episode_counts().map(<[u32]>::to_vec).collect() }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MAGIC}\nsize {} {}\n", self.width, self.height);
        for row in self.walls.chunks(self.width.max(1)) {
            s.extend(row.iter().map(|&w| if w { '#' } else { '.' }));
            s.push('\n');
        }
        for ep in &self.episodes {
            s.push_str("ep");
            for c in ep {
                write!(s, " {c}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |m: &str| CliError::Config(format!("visit log: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing header"));
        }
        let size = lines.next().and_then(|l| l.strip_prefix("size ")).ok_or_else(|| bad("missing size"))?;
        let dims: Vec<usize> = size.split_whitespace().map(|v| v.parse().map_err(|_| bad("bad size"))).collect::<Result<_, _>>()?;
        let [width, height] = dims[..] else { return Err(bad("bad size")) };
        let mut walls = Vec::with_capacity(width * height);
        for _ in 0..height {
            let row = lines.next().ok_or_else(|| bad("truncated wall rows"))?;
            if row.len() != width {
                return Err(bad("wall row has the wrong width"));
            }
            for ch in row.chars() {
                walls.push(match ch {
                    '#' => true,
                    '.' => false,
                    _ => return Err(bad("bad wall character")),
                });
            }
        }
        let mut episodes = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let rest = line.strip_prefix("ep").ok_or_else(|| bad("expected an `ep` line"))?;
            let counts: Vec<u32> = rest.split_whitespace().map(|v| v.parse().map_err(|_| bad("bad count"))).collect::<Result<_, _>>()?;
            if counts.len() != width * height {
                return Err(bad("episode has the wrong number of tiles"));
            }
            episodes.push(counts);
        }
        Ok(Self { width, height, walls, episodes })
    }

    /// Sum over the last `window` episodes (all of them if fewer).
    pub fn aggregate(&self, window: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.width * self.height];
        for ep in &self.episodes[self.episodes.len().saturating_sub(window)..] {
            for (o, &c) in out.iter_mut().zip(ep) {
                *o += c as u64;
            }
        }
        out
    }

    /// Binary PGM: walls 255, floor scaled to 0..=254 by the largest count.
    pub fn to_pgm(&self, counts: &[u64]) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(pgm_pixels(&self.walls, counts));
        out
    }
}

pub fn pgm_pixels(walls: &[bool], counts: &[u64]) -> Vec<u8> {
    let max = walls.iter().zip(counts).filter(|(w, _)| !**w).map(|(_, &c)| c).max().unwrap_or(0);
    walls
        .iter()
        .zip(counts)
        .map(|(&w, &c)| {
            if w {
                255
            } else if max == 0 {
                0
            } else {
                (254.0 * c as f64 / max as f64).round() as u8
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_and_pgm() {
        let log = VisitLog {
            width: 3,
            height: 2,
            walls: vec![true, false, false, false, false, true],
            episodes: vec![vec![0, 1, 2, 0, 0, 0], vec![0, 3, 0, 4, 0, 0]],
        };
        assert_eq!(VisitLog::parse(&log.to_text()).unwrap(), log);
        assert_eq!(log.aggregate(1), vec![0, 3, 0, 4, 0, 0]);
        let counts = log.aggregate(10);
        assert_eq!(counts, vec![0, 4, 2, 4, 0, 0]);
        let pgm = log.to_pgm(&counts);
        assert_eq!(&pgm[pgm.len() - 6..], &[255, 254, 127, 254, 0, 255]);
    }

    #[test]
    fn rejects_malformed_logs() {
        assert!(VisitLog::parse("nope").is_err());
        assert!(VisitLog::parse("HASARD-VISITS 1\nsize 2 1\n..\nep 1\n").is_err());
        assert!(VisitLog::parse("HASARD-VISITS 1\nsize 2 1\n.x\n").is_err());
    }
}
