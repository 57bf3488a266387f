//! Per-level look-back bookkeeping: conflict sets, solution counters and
//! backjump levels.

use serde::Serialize;

use crate::csp::{PartialSolution, VarId};
use crate::levels::LevelSet;
use crate::search::{Lookback, Mode};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum JumpKind {
    /// Destination taken from the conflict set.
    Jump,
    /// Retreat by one level.
    Chrono,
    /// A jump whose level exceeded the cap, forced back to one level.
    Capped,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Cause {
    ValuesExhausted,
    /// The last value tried wiped out this variable's domain.
    Wipeout(VarId),
    SolutionsFound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackjumpEvent {
    pub from: u32,
    /// 0 is the root: the search ends.
    pub destination: u32,
    /// Backjump level: 1 from a plain dead end, else one more than the deepest
    /// level of the retreats that reached `from`.
    pub level: u32,
    pub kind: JumpKind,
    pub cause: Cause,
    /// The assignment at the destination, when events are recorded by a search.
    pub destination_node: Option<PartialSolution>,
}

#[derive(Clone, Debug, Default)]
struct LevelInfo {
    conflict: LevelSet,
    solutions_at_entry: u64,
    max_incoming: u32,
}

/// Look-back state for the instantiated levels `1..=depth`.
#[derive(Clone, Debug, Default)]
pub struct SearchState {
    levels: Vec<LevelInfo>,
    /// Solutions found so far.
    pub solutions: u64,
}

impl SearchState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Opens the next level with an empty conflict set; returns its number.
    pub fn push_level(&mut self) -> u32 {
        self.levels.push(LevelInfo { solutions_at_entry: self.solutions, ..LevelInfo::default() });
        self.depth()
    }

    /// Forgets every level deeper than `level`.
    pub fn truncate(&mut self, level: u32) {
        self.levels.truncate(level as usize);
    }

    pub fn conflict(&self, level: u32) -> &LevelSet {
        &self.levels[level as usize - 1].conflict
    }

    /// Adds the levels of `set` shallower than `level` to its conflict set.
    pub fn add_conflict(&mut self, level: u32, set: &LevelSet) {
        let c = &mut self.levels[level as usize - 1].conflict;
        let mut s = set.clone();
        s.truncate_from(level);
        c.union_with(&s);
    }

    pub fn add_conflict_level(&mut self, level: u32, other: u32) {
        if other >= 1 && other < level {
            self.levels[level as usize - 1].conflict.insert(other);
        }
    }

    pub fn max_incoming(&self, level: u32) -> u32 {
        self.levels[level as usize - 1].max_incoming
    }

    /// Backjump level of a retreat out of `level`.
    pub fn outgoing_level(&self, level: u32) -> u32 {
        match self.max_incoming(level) {
            0 => 1,
            m => m + 1,
        }
    }

    /// Where to retreat from the dead end at `from`. Merges the conflict set of
    /// `from` into the destination whenever the destination came from it.
    pub fn lookback_destination(&mut self, from: u32, lookback: Lookback, mode: Mode, cause: Cause) -> BackjumpEvent {
        let level = self.outgoing_level(from);
        let chrono = |cause| BackjumpEvent {
            from,
            destination: from - 1,
            level,
            kind: JumpKind::Chrono,
            cause,
            destination_node: None,
        };
        if lookback == Lookback::Chrono {
            return chrono(cause);
        }
        let info = &self.levels[from as usize - 1];
        if mode != Mode::First && self.solutions != info.solutions_at_entry {
            return chrono(Cause::SolutionsFound);
        }
        let mut destination = info.conflict.max().unwrap_or(0);
        let mut kind = JumpKind::Jump;
        if let Lookback::Bj(cap) = lookback {
            if level > cap && destination + 1 < from {
                destination = from - 1;
                kind = JumpKind::Capped;
            }
        }
        if destination >= 1 {
            let mut merged = info.conflict.clone();
            merged.remove(destination);
            self.add_conflict(destination, &merged);
        }
        BackjumpEvent { from, destination, level, kind, cause, destination_node: None }
    }

    /// Registers the event's level at its destination.
    pub fn record_incoming(&mut self, event: &BackjumpEvent) {
        if event.destination >= 1 {
            let m = &mut self.levels[event.destination as usize - 1].max_incoming;
            *m = (*m).max(event.level);
        }
    }
}
