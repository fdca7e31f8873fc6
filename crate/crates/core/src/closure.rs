//! Composition closure of size-change graphs, idempotent graphs, and loop
//! classes (idempotent graphs grouped by the base graphs that produced them).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::scg::{concat, GraphId, SizeChangeGraph};
use crate::syntax::PredId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("graph set is not closed under concatenation")]
    NotClosed,
}

/// Graphs deduplicated by structure, in insertion order.
#[derive(Clone, Debug, Default)]
pub struct GraphSet {
    graphs: Vec<SizeChangeGraph>,
    index: HashMap<SizeChangeGraph, usize>,
    closed: bool,
}

/// Orders identifier sets by size, then lexicographically.
fn preferred(a: &BTreeSet<GraphId>, b: &BTreeSet<GraphId>) -> bool {
    (a.len(), a) < (b.len(), b)
}

impl GraphSet {
    /// An unclosed set holding `graphs` (structural duplicates merged).
    pub fn from_graphs(graphs: impl IntoIterator<Item = SizeChangeGraph>) -> Self {
        let mut s = GraphSet::default();
        for g in graphs {
            s.insert(g);
        }
        s
    }

    /// Inserts `g`, or replaces the stored identifier set when `g` carries a
    /// preferred one. Returns the slot when anything changed.
    fn insert(&mut self, g: SizeChangeGraph) -> Option<usize> {
        match self.index.get(&g) {
            Some(&i) => {
                if preferred(g.idset(), self.graphs[i].idset()) {
                    let idset = g.idset().clone();
                    self.graphs[i] = self.graphs[i].clone().with_idset(idset);
                    Some(i)
                } else {
                    None
                }
            }
            None => {
                let i = self.graphs.len();
                self.index.insert(g.clone(), i);
                self.graphs.push(g);
                Some(i)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn iter(&self) -> impl Iterator<Item = &SizeChangeGraph> {
        self.graphs.iter()
    }

    pub fn graphs(&self) -> &[SizeChangeGraph] {
        &self.graphs
    }

    /// Structural membership; returns the stored graph.
    pub fn get(&self, g: &SizeChangeGraph) -> Option<&SizeChangeGraph> {
        self.index.get(g).map(|&i| &self.graphs[i])
    }

    pub fn contains(&self, g: &SizeChangeGraph) -> bool {
        self.index.contains_key(g)
    }
}

/// Least set containing `init` and closed under concatenation.
///
/// Worklist over insertion order: a dequeued graph is composed with every
/// stored graph on both sides. On a structural collision the smaller
/// identifier set (then the lexicographically least) is kept and the graph
/// is requeued so its compositions pick up the new set.
pub fn close(init: impl IntoIterator<Item = SizeChangeGraph>) -> GraphSet {
    let mut set = GraphSet::default();
    let mut queue = VecDeque::new();
    let mut queued: Vec<bool> = Vec::new();
    fn enqueue(i: usize, queue: &mut VecDeque<usize>, queued: &mut Vec<bool>) {
        if queued.len() <= i {
            queued.resize(i + 1, false);
        }
        if !queued[i] {
            queued[i] = true;
            queue.push_back(i);
        }
    }
    for g in init {
        if let Some(i) = set.insert(g) {
            enqueue(i, &mut queue, &mut queued);
        }
    }
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        let g = set.graphs[i].clone();
        let mut j = 0;
        while j < set.graphs.len() {
            let h = set.graphs[j].clone();
            if g.target() == h.source() {
                if let Some(k) = set.insert(concat(&g, &h).expect("compatible")) {
                    enqueue(k, &mut queue, &mut queued);
                }
            }
            if h.target() == g.source() && i != j {
                if let Some(k) = set.insert(concat(&h, &g).expect("compatible")) {
                    enqueue(k, &mut queue, &mut queued);
                }
            }
            j += 1;
        }
    }
    set.closed = true;
    set
}

pub fn is_idempotent(g: &SizeChangeGraph) -> bool {
    g.is_self_loop() && concat(g, g).map(|gg| gg == *g).unwrap_or(false)
}

/// The graphs `G` of a closed set with `G • G = G`, in insertion order.
pub fn idempotents(s: &GraphSet) -> Result<Vec<SizeChangeGraph>, ClosureError> {
    if !s.closed {
        return Err(ClosureError::NotClosed);
    }
    Ok(s.graphs.iter().filter(|g| is_idempotent(g)).cloned().collect())
}

/// Idempotent graphs sharing one identifier set.
#[derive(Clone, Debug)]
pub struct LoopClass {
    pub idset: BTreeSet<GraphId>,
    pub members: Vec<SizeChangeGraph>,
    pub predicates: BTreeSet<PredId>,
}

impl LoopClass {
    pub fn idset_string(&self) -> String {
        let ids: Vec<String> = self.idset.iter().map(|g| g.to_string()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

/// Partitions idempotent graphs by identifier set, ordered by least
/// identifier (then lexicographically).
pub fn loop_classes(idem: &[SizeChangeGraph]) -> Vec<LoopClass> {
    let mut groups: BTreeMap<BTreeSet<GraphId>, Vec<SizeChangeGraph>> = BTreeMap::new();
    for g in idem {
        groups.entry(g.idset().clone()).or_default().push(g.clone());
    }
    groups
        .into_iter()
        .map(|(idset, members)| LoopClass {
            predicates: members.iter().map(|g| g.source().clone()).collect(),
            idset,
            members,
        })
        .collect()
}
