use hasard_core::env::{ActionEncoding, Button};
use std::sync::atomic::{AtomicU32, Ordering};

/// Known buttons among `names`; anything else is dropped.
pub fn parse_buttons<S: AsRef<str>>(names: &[S]) -> Vec<Button> {
    names.iter().filter_map(|n| n.as_ref().parse().ok()).collect()
}

/// Per-group choices for a held key set.
pub fn resolve_keys<S: AsRef<str>>(encoding: &ActionEncoding, names: &[S]) -> Vec<usize> {
    encoding.from_buttons(&parse_buttons(names))
}

fn bit(b: Button) -> u32 {
    1 << Button::ALL.iter().position(|&x| x == b).expect("listed button")
}

/// Latest held buttons, written by the network reader and read by the
/// session thread once per tick.
#[derive(Debug, Default)]
pub struct KeySnapshot(AtomicU32);

impl KeySnapshot {
    pub fn store(&self, held: &[Button]) {
        self.0.store(held.iter().fold(0, |m, &b| m | bit(b)), Ordering::Release);
    }

    pub fn load(&self) -> Vec<Button> {
        let m = self.0.load(Ordering::Acquire);
        Button::ALL.into_iter().filter(|&b| m & bit(b) != 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hasard_core::env::ActionMode;
    use hasard_core::scenarios::ScenarioKind;

    #[test]
    fn remedy_forward_left() {
        let enc = ActionEncoding::for_scenario(ScenarioKind::RemedyRush, ActionMode::Simplified);
        // Groups: forward, turn (left, right), jump, speed.
        assert_eq!(resolve_keys(&enc, &["MOVE_FORWARD", "TURN_LEFT"]), vec![1, 1, 0, 0]);
        assert_eq!(resolve_keys(&enc, &["BOGUS", "JUMP"]), vec![0, 0, 1, 0]);
        assert_eq!(resolve_keys::<&str>(&enc, &[]), vec![0; 4]);
    }

    #[test]
    fn snapshot_round_trip() {
        let s = KeySnapshot::default();
        assert!(s.load().is_empty());
        s.store(&[Button::Jump, Button::MoveForward]);
        assert_eq!(s.load(), vec![Button::MoveForward, Button::Jump]);
    }
}
