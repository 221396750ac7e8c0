//! Reachability classes of the union of a group's indistinguishability
//! relations.

use petgraph::unionfind::UnionFind;

use crate::error::Result;
use crate::logic::Group;
use crate::model::{Event, InterpretedSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityPartition {
    pub group: Group,
    /// Classes ordered by their smallest point index.
    pub classes: Vec<Event>,
    class_of: Vec<usize>,
}

impl ReachabilityPartition {
    pub fn class_of(&self, idx: usize) -> usize {
        self.class_of[idx]
    }

    pub fn class_containing(&self, idx: usize) -> &Event {
        &self.classes[self.class_of[idx]]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Union-find closure of `∪_{i∈G} ~_i` over all points.
pub fn reachability_partition(
    sys: &InterpretedSystem,
    group: &Group,
) -> Result<ReachabilityPartition> {
    let agents = group
        .iter()
        .map(|a| sys.agent_index(a))
        .collect::<Result<Vec<_>>>()?;
    let n = sys.num_points();
    let mut uf = UnionFind::<usize>::new(n);
    for &i in &agents {
        for l in 0..sys.num_labels(i) {
            let members = sys.label_members(i, l as u32);
            for w in members.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }
    let labels = uf.into_labeling();
    // renumber roots by first occurrence so the result does not depend on
    // union order
    let mut root_to_class = vec![usize::MAX; n];
    let mut class_of = vec![0; n];
    let mut classes: Vec<Event> = Vec::new();
    for idx in 0..n {
        let root = labels[idx];
        if root_to_class[root] == usize::MAX {
            root_to_class[root] = classes.len();
            classes.push(Event::empty(n));
        }
        let c = root_to_class[root];
        class_of[idx] = c;
        classes[c].insert(idx);
    }
    Ok(ReachabilityPartition {
        group: group.clone(),
        classes,
        class_of,
    })
}
