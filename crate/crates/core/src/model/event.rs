use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;

use super::{AgentId, GlobalState};

/// A set of points, stored as a bitset over the host system's point indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    bits: FixedBitSet,
}

impl Event {
    pub fn empty(universe: usize) -> Self {
        Event {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Event { bits }
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Event::empty(universe);
        for i in indices {
            e.insert(i);
        }
        e
    }

    /// Number of points in the host system.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    pub fn insert(&mut self, idx: usize) {
        self.bits.insert(idx);
    }

    pub fn set(&mut self, idx: usize, on: bool) {
        self.bits.set(idx, on);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn union(&self, other: &Event) -> Event {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Event { bits }
    }

    pub fn intersection(&self, other: &Event) -> Event {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Event { bits }
    }

    pub fn difference(&self, other: &Event) -> Event {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Event { bits }
    }

    pub fn complement(&self) -> Event {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Event { bits }
    }

    pub fn union_with(&mut self, other: &Event) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &Event) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Any member in the index range.
    pub fn any_in(&self, range: std::ops::Range<usize>) -> bool {
        self.bits.contains_any_in_range(range)
    }

    pub fn all_in(&self, range: std::ops::Range<usize>) -> bool {
        self.bits.contains_all_in_range(range)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.ones()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventClassification {
    pub is_state_event: bool,
    /// Global states inside the event, present iff it is a state event.
    pub global_state_set: Option<Vec<GlobalState>>,
    /// For each agent, its local-state labels occurring inside the event when
    /// the event is local to that agent.
    pub local_to: BTreeMap<AgentId, Option<BTreeSet<String>>>,
}
