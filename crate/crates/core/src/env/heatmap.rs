use std::collections::VecDeque;

/// Episodes kept in the visit window.
pub const HEATMAP_EPISODES: usize = 1000;

/// Tile visit counts over the most recent episodes. The aggregate is kept
/// incrementally: episodes entering the window are added, the evicted one
/// subtracted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    capacity: usize,
    episodes: VecDeque<Vec<u32>>,
    current: Vec<u32>,
    total: Vec<u64>,
}

impl Heatmap {
    pub fn new(width: usize, height: usize) -> Self {
        Self::with_capacity(width, height, HEATMAP_EPISODES)
    }

    pub fn with_capacity(width: usize, height: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "heatmap window must hold at least one episode");
        Self {
            width,
            height,
            capacity,
            episodes: VecDeque::with_capacity(capacity.min(1024)),
            current: vec![0; width * height],
            total: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Completed episodes currently in the window.
    pub fn episodes(&self) -> usize {
        self.episodes.len()
    }

    /// Counts one visit to tile `(x, y)` in the open episode. Off-map
    /// positions are ignored.
    pub fn record_visit(&mut self, x: usize, y: usize) {
        if x < self.width && y < self.height {
            self.current[y * self.width + x] += 1;
        }
    }

    /// Closes the open episode and pushes it into the window.
    pub fn end_episode(&mut self) {
        let ep = std::mem::replace(&mut self.current, vec![0; self.width * self.height]);
        self.push_episode(ep);
    }

    /// Adds a finished episode's counts directly.
    pub fn push_episode(&mut self, counts: Vec<u32>) {
        assert_eq!(counts.len(), self.width * self.height, "episode grid has the wrong size");
        if self.episodes.len() == self.capacity {
            let old = self.episodes.pop_front().expect("window is full");
            for (t, c) in self.total.iter_mut().zip(&old) {
                *t -= *c as u64;
            }
        }
        for (t, c) in self.total.iter_mut().zip(&counts) {
            *t += *c as u64;
        }
        self.episodes.push_back(counts);
    }

    /// Visit counts summed over the window, row-major.
    pub fn aggregate(&self) -> &[u64] {
        &self.total
    }

    /// The last `n` episodes only; uses every episode if fewer are stored.
    pub fn aggregate_recent(&self, n: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.width * self.height];
        let skip = self.episodes.len().saturating_sub(n);
        for ep in self.episodes.iter().skip(skip) {
            for (o, c) in out.iter_mut().zip(ep) {
                *o += *c as u64;
            }
        }
        out
    }

    /// Per-episode counts in the window, oldest first.
    pub fn episode_counts(&self) -> impl Iterator<Item = &[u32]> {
        self.episodes.iter().map(Vec::as_slice)
    }

    /// Counts of the open episode.
    pub fn current(&self) -> &[u32] {
        &self.current
    }
}
