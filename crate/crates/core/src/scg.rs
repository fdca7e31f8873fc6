//! Size-change graphs: construction from clauses (plain, and strengthened by
//! inter-argument relations of completely unfoldable atoms) and
//! concatenation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use log::warn;
use thiserror::Error;

use crate::lincons::{instantiate, ConstraintStore, LinConstraint, LinError, RelationTable, Solver};
use crate::norm::{compare, norm_of, CompareResult, NormSpec, SizeExpr};
use crate::syntax::{PredId, Program};

/// Edge label. `Strict` orders above `NonStrict`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NonStrict,
    Strict,
}

impl Label {
    pub fn symbol(self) -> &'static str {
        match self {
            Label::Strict => ">",
            Label::NonStrict => ">=",
        }
    }
}

/// Identifier of a base graph, numbered in clause order then body order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphId(pub u32);

impl fmt::Display for GraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScgError {
    #[error("argument index {index} out of range for {pred}")]
    IndexOutOfRange { pred: PredId, index: usize },
    #[error("cannot concatenate: {left} does not match {right}")]
    Mismatch { left: PredId, right: PredId },
    #[error("relations given for {given} but the program uses {used}")]
    RelationArity { given: PredId, used: PredId },
    #[error(transparent)]
    Relation(#[from] LinError),
}

/// A bipartite graph between the argument positions (1-based) of a caller
/// and a callee. Equality and hashing ignore `idset`.
#[derive(Clone, Debug)]
pub struct SizeChangeGraph {
    source: PredId,
    target: PredId,
    edges: BTreeMap<(usize, usize), Label>,
    idset: BTreeSet<GraphId>,
}

impl PartialEq for SizeChangeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.edges == other.edges
    }
}

impl Eq for SizeChangeGraph {}

impl Hash for SizeChangeGraph {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.source.hash(state);
        self.target.hash(state);
        self.edges.hash(state);
    }
}

impl SizeChangeGraph {
    pub fn new(source: PredId, target: PredId) -> Self {
        SizeChangeGraph {
            source,
            target,
            edges: BTreeMap::new(),
            idset: BTreeSet::new(),
        }
    }

    pub fn with_id(mut self, id: GraphId) -> Self {
        self.idset = BTreeSet::from([id]);
        self
    }

    pub fn with_idset(mut self, idset: BTreeSet<GraphId>) -> Self {
        self.idset = idset;
        self
    }

    /// Adds an edge; when one already exists the stronger label is kept.
    pub fn add_edge(&mut self, from: usize, to: usize, label: Label) -> Result<(), ScgError> {
        if from == 0 || from > self.source.arity {
            return Err(ScgError::IndexOutOfRange {
                pred: self.source.clone(),
                index: from,
            });
        }
        if to == 0 || to > self.target.arity {
            return Err(ScgError::IndexOutOfRange {
                pred: self.target.clone(),
                index: to,
            });
        }
        let e = self.edges.entry((from, to)).or_insert(label);
        *e = (*e).max(label);
        Ok(())
    }

    pub fn source(&self) -> &PredId {
        &self.source
    }

    pub fn target(&self) -> &PredId {
        &self.target
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Label)> + '_ {
        self.edges.iter().map(|(&(i, j), &l)| (i, j, l))
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<Label> {
        self.edges.get(&(from, to)).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn idset(&self) -> &BTreeSet<GraphId> {
        &self.idset
    }

    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }

    /// Equality including the identifier set.
    pub fn same_labeled(&self, other: &Self) -> bool {
        self == other && self.idset == other.idset
    }

    pub fn idset_string(&self) -> String {
        let ids: Vec<String> = self.idset.iter().map(|g| g.to_string()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

impl fmt::Display for SizeChangeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} -> {} [", self.idset_string(), self.source, self.target)?;
        for (n, (i, j, l)) in self.edges().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}{}{j}", l.symbol())?;
        }
        write!(f, "]")
    }
}

/// `g • h`: an edge `i → k` exists when some `j` links `i → j` in `g` and
/// `j → k` in `h`; it is strict when any such witness path has a strict edge.
pub fn concat(g: &SizeChangeGraph, h: &SizeChangeGraph) -> Result<SizeChangeGraph, ScgError> {
    if g.target != h.source {
        return Err(ScgError::Mismatch {
            left: g.target.clone(),
            right: h.source.clone(),
        });
    }
    let mut out = SizeChangeGraph::new(g.source.clone(), h.target.clone())
        .with_idset(g.idset.union(&h.idset).copied().collect());
    for (&(i, j), &l1) in &g.edges {
        for (&(_, k), &l2) in h.edges.range((j, 0)..=(j, usize::MAX)) {
            let label = l1.max(l2);
            let e = out.edges.entry((i, k)).or_insert(label);
            *e = (*e).max(label);
        }
    }
    Ok(out)
}

fn label_of(c: CompareResult) -> Option<Label> {
    match c {
        CompareResult::Strict => Some(Label::Strict),
        CompareResult::NonStrict => Some(Label::NonStrict),
        CompareResult::Unknown => None,
    }
}

/// One graph per (head, body atom) pair, labelled by the induced orders.
pub fn build_graphs(p: &Program, n: &NormSpec) -> Vec<SizeChangeGraph> {
    let mut out = Vec::new();
    let mut next = 0u32;
    for c in p.clauses() {
        let head: Vec<SizeExpr> = c.head().args().iter().map(|a| norm_of(a, n)).collect();
        for b in c.body() {
            next += 1;
            let mut g = SizeChangeGraph::new(c.head_pred(), b.functor().expect("atom"))
                .with_id(GraphId(next));
            for (k, arg) in b.args().iter().enumerate() {
                let bk = norm_of(arg, n);
                for (j, hj) in head.iter().enumerate() {
                    if let Some(l) = label_of(compare(hj, &bk)) {
                        g.add_edge(j + 1, k + 1, l).expect("in range");
                    }
                }
            }
            out.push(g);
        }
    }
    out
}

/// Graphs built with right-propagated size relations, plus any warnings
/// raised while building them.
#[derive(Clone, Debug, Default)]
pub struct RpGraphs {
    pub graphs: Vec<SizeChangeGraph>,
    pub warnings: Vec<String>,
}

/// Like [`build_graphs`], but the graph for body atom `B_i` may use the
/// success relations of every completely unfoldable atom `B_j` with `j < i`.
pub fn build_graphs_rp(
    p: &Program,
    n: &NormSpec,
    unfoldable: &BTreeSet<PredId>,
    rels: &RelationTable,
) -> Result<RpGraphs, ScgError> {
    build_graphs_rp_with(p, n, unfoldable, rels, &Solver::default())
}

pub fn build_graphs_rp_with(
    p: &Program,
    n: &NormSpec,
    unfoldable: &BTreeSet<PredId>,
    rels: &RelationTable,
    solver: &Solver,
) -> Result<RpGraphs, ScgError> {
    for (given, _) in rels.iter() {
        if !p.predicates().contains(given) {
            if let Some(used) = p.predicates().iter().find(|q| q.name == given.name) {
                return Err(ScgError::RelationArity {
                    given: given.clone(),
                    used: used.clone(),
                });
            }
        }
    }
    let mut out = RpGraphs::default();
    for q in unfoldable {
        if rels.get(q).is_none() {
            out.warnings.push(format!(
                "{q} is declared unfoldable but has no size relation; using the empty one"
            ));
        }
    }

    let mut next = 0u32;
    for (ci, c) in p.clauses().iter().enumerate() {
        let head: Vec<SizeExpr> = c.head().args().iter().map(|a| norm_of(a, n)).collect();
        let mut context = ConstraintStore::new();
        for (bi, b) in c.body().iter().enumerate() {
            next += 1;
            let id = GraphId(next);
            let mut g = SizeChangeGraph::new(c.head_pred(), b.functor().expect("atom")).with_id(id);
            let body: Vec<SizeExpr> = b.args().iter().map(|a| norm_of(a, n)).collect();

            let mode = if context.is_empty() {
                Context::Plain
            } else {
                match solver.satisfiable(&context) {
                    Ok(true) => Context::Constrained,
                    Ok(false) => {
                        let msg = format!(
                            "clause {} atom {}: propagated context {} is unsatisfiable; \
                             {id} gets every edge as strict",
                            ci + 1,
                            bi + 1,
                            context
                        );
                        warn!("{msg}");
                        out.warnings.push(msg);
                        Context::Vacuous
                    }
                    Err(e) => {
                        out.warnings.push(format!(
                            "clause {} atom {}: {e}; falling back to plain comparison",
                            ci + 1,
                            bi + 1
                        ));
                        Context::Plain
                    }
                }
            };

            for (k, bk) in body.iter().enumerate() {
                for (j, hj) in head.iter().enumerate() {
                    let plain = label_of(compare(hj, bk));
                    let label = match mode {
                        Context::Plain => plain,
                        Context::Vacuous => Some(Label::Strict),
                        Context::Constrained => {
                            let d = hj.minus(bk);
                            let strict = solver.entails(&context, &LinConstraint::gt(d.clone()));
                            let weak = || solver.entails(&context, &LinConstraint::ge(d.clone()));
                            let derived = match strict {
                                Ok(true) => Some(Label::Strict),
                                Ok(false) => match weak() {
                                    Ok(true) => Some(Label::NonStrict),
                                    _ => None,
                                },
                                Err(_) => None,
                            };
                            plain.max(derived)
                        }
                    };
                    if let Some(l) = label {
                        g.add_edge(j + 1, k + 1, l).expect("in range");
                    }
                }
            }
            out.graphs.push(g);

            let pred = b.functor().expect("atom");
            if unfoldable.contains(&pred) {
                if let Some(store) = rels.get(&pred) {
                    context.extend(&instantiate(store, b, n)?);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Context {
    Plain,
    Constrained,
    Vacuous,
}
