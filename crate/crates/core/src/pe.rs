//! Offline partial evaluation driven by unfold/memo marks, and a plain SLD
//! interpreter used to check that specialization preserves answers.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use log::{debug, trace};
use thiserror::Error;

use crate::bta::{Annotation, Division, Mark};
use crate::norm::{mgg_with, NormSpec};
use crate::syntax::{match_term, unify, Clause, PredId, Program, Substitution, Term, VarGen};

mod sld;

pub const DEFAULT_BUDGET: usize = 100_000;
/// Term nodes a local tree may build per allowed step. Runaway unfolding
/// usually grows terms, and would run out of memory long before the step
/// count is reached.
pub const WORK_PER_STEP: usize = 16;
pub const DEFAULT_MAX_ENTRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeError {
    #[error("unfolding budget of {budget} steps exhausted below {root}")]
    BudgetExhausted { root: String, budget: usize },
    #[error("predicate {0} has no division entry")]
    UnknownPredicate(PredId),
    #[error("static argument {index} of {atom} is not ground")]
    NonGroundStatic { atom: String, index: usize },
    #[error("global set exceeded {0} entries")]
    GlobalLimit(usize),
    #[error("`{0}` is not an atom")]
    NotAnAtom(String),
}

fn pred_of(a: &Term) -> Result<PredId, PeError> {
    a.functor().ok_or_else(|| PeError::NotAnAtom(a.to_string()))
}

/// Abstracts `a` for the global level: dynamic arguments become fresh
/// variables, static ones are generalized with `mgg` when `use_mgg` holds.
/// The result is in canonical form (variables `F1`, `F2`, ...), so two
/// generalizations are variants exactly when they are equal.
pub fn generalize(a: &Term, d: &Division, n: &NormSpec, use_mgg: bool) -> Result<Term, PeError> {
    let p = pred_of(a)?;
    let bts = d.get(&p).ok_or_else(|| PeError::UnknownPredicate(p.clone()))?;
    let mut gen = VarGen::avoiding([a]);
    let args = a
        .args()
        .iter()
        .zip(bts)
        .map(|(t, b)| {
            if !b.is_static() {
                gen.fresh()
            } else if use_mgg {
                mgg_with(t, n, &mut gen)
            } else {
                t.clone()
            }
        })
        .collect();
    Ok(Term::app(p.name, args).canonical("F"))
}

/// One branch of a partial SLD tree: `head` is the root instantiated by
/// `bindings`, `leaves` the memo atoms left in the goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resultant {
    pub head: Term,
    pub leaves: Vec<Term>,
    pub bindings: Substitution,
}

impl Resultant {
    pub fn to_clause(&self) -> Clause {
        Clause::new(self.head.clone(), self.leaves.clone()).expect("atoms")
    }
}

/// Unfolds `root` following the marks: the leftmost unfold-marked atom of
/// each goal is resolved, and goals with none are leaves.
///
/// Fails once more than `budget` atoms are resolved or more than
/// `budget * WORK_PER_STEP` term nodes are built.
pub fn unfold_tree(
    root: &Term,
    p: &Program,
    ann: &Annotation,
    budget: usize,
) -> Result<Vec<Resultant>, PeError> {
    unfold_from(root, p, ann, budget, false)
}

/// As [`unfold_tree`], but `force_root` resolves the root itself whatever
/// its mark.
fn unfold_from(
    root: &Term,
    p: &Program,
    ann: &Annotation,
    budget: usize,
    force_root: bool,
) -> Result<Vec<Resultant>, PeError> {
    pred_of(root)?;
    let mut gen = VarGen::avoiding([root]);
    let mut out = Vec::new();
    let mut steps = 0usize;
    let mut work = 0usize;
    // (instantiated root, goal, root forced)
    let mut stack: Vec<(Term, Vec<Term>, bool)> = vec![(root.clone(), vec![root.clone()], force_root)];
    while let Some((head, goal, forced)) = stack.pop() {
        let sel = if forced {
            Some(0)
        } else {
            goal.iter()
                .position(|a| a.functor().is_some_and(|q| ann.mark(&q) == Mark::Unfold))
        };
        let Some(sel) = sel else {
            let bindings = match_term(root, &head).expect("head instantiates root");
            out.push(Resultant {
                head,
                leaves: goal,
                bindings,
            });
            continue;
        };
        steps += 1;
        if steps > budget || work > budget.saturating_mul(WORK_PER_STEP) {
            return Err(PeError::BudgetExhausted {
                root: root.to_string(),
                budget,
            });
        }
        let atom = &goal[sel];
        let q = atom.functor().expect("atom");
        let mut children = Vec::new();
        for c in p.clauses_for(&q) {
            let c = gen.rename_clause(c);
            let Some(theta) = unify(atom, c.head()) else {
                continue;
            };
            let mut next: Vec<Term> = Vec::with_capacity(goal.len() - 1 + c.body().len());
            next.extend(goal[..sel].iter().map(|t| theta.apply(t)));
            next.extend(c.body().iter().map(|t| theta.apply(t)));
            next.extend(goal[sel + 1..].iter().map(|t| theta.apply(t)));
            let head = theta.apply(&head);
            work += head.size() + next.iter().map(Term::size).sum::<usize>();
            children.push((head, next, false));
        }
        // Reverse so the first clause is explored first.
        stack.extend(children.into_iter().rev());
    }
    trace!("unfolded {root} in {steps} step(s), {} resultant(s)", out.len());
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SpecializeOptions {
    pub budget: usize,
    /// Use mgg at the global level even when the norm is bounded.
    pub force_mgg: bool,
    pub max_entries: usize,
}

impl Default for SpecializeOptions {
    fn default() -> Self {
        SpecializeOptions {
            budget: DEFAULT_BUDGET,
            force_mgg: false,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

/// Generalized atoms specialized so far, with the predicate name each one
/// is renamed to. Entries are canonical, so variants compare equal.
#[derive(Clone, Debug, Default)]
pub struct GlobalSet {
    entries: Vec<(Term, String)>,
    index: HashMap<Term, usize>,
}

impl GlobalSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &str)> {
        self.entries.iter().map(|(t, s)| (t, s.as_str()))
    }

    /// The renamed predicate of a canonical generalized atom.
    pub fn lookup(&self, gen: &Term) -> Option<&str> {
        self.index.get(gen).map(|&i| self.entries[i].1.as_str())
    }

    fn insert(&mut self, gen: Term, taken: &BTreeSet<String>) -> (usize, bool) {
        if let Some(&i) = self.index.get(&gen) {
            return (i, false);
        }
        let base = gen.functor().expect("atom").name;
        let mut name = format!("{base}_{}", self.entries.len());
        while taken.contains(&name) {
            name.push('_');
        }
        let i = self.entries.len();
        self.index.insert(gen.clone(), i);
        self.entries.push((gen, name));
        (i, true)
    }
}

/// A residual program together with its renaming table.
#[derive(Clone, Debug)]
pub struct Specialized {
    pub program: Program,
    pub global: GlobalSet,
    /// The entry atom renamed; query this against `program`.
    pub entry: Term,
    pub use_mgg: bool,
    pub resultants: usize,
}

impl fmt::Display for Specialized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (gen, name) in self.global.iter() {
            writeln!(f, "% {name} = {gen}")?;
        }
        write!(f, "{}", self.program)
    }
}

fn rename(a: &Term, name: &str) -> Term {
    Term::app(name, a.args().to_vec())
}

/// Specializes `p` for calls to `entry`.
///
/// Each global atom is unfolded (its own predicate always, then by the
/// marks); every memo leaf is generalized, added to the global set unless
/// a variant is already there, and replaced by a call to its renamed
/// predicate.
pub fn specialize(
    p: &Program,
    ann: &Annotation,
    n: &NormSpec,
    entry: &Term,
    opts: &SpecializeOptions,
) -> Result<Specialized, PeError> {
    let d = &ann.division;
    let ep = pred_of(entry)?;
    let bts = d.get(&ep).ok_or_else(|| PeError::UnknownPredicate(ep.clone()))?;
    for (i, (a, b)) in entry.args().iter().zip(bts).enumerate() {
        if b.is_static() && !a.is_ground() {
            return Err(PeError::NonGroundStatic {
                atom: entry.to_string(),
                index: i + 1,
            });
        }
    }
    let use_mgg = ann.requires_mgg || opts.force_mgg;
    let taken: BTreeSet<String> = p.predicates().iter().map(|q| q.name.clone()).collect();
    let mut global = GlobalSet::default();
    let (first, _) = global.insert(generalize(entry, d, n, use_mgg)?, &taken);
    let mut clauses = Vec::new();
    let mut resultants = 0;
    let mut next = first;
    while next < global.len() {
        let (atom, name) = global.entries[next].clone();
        next += 1;
        let rs = unfold_from(&atom, p, ann, opts.budget, true)?;
        resultants += rs.len();
        for r in rs {
            let mut body = Vec::with_capacity(r.leaves.len());
            for leaf in &r.leaves {
                let g = generalize(leaf, d, n, use_mgg)?;
                let (i, fresh) = global.insert(g, &taken);
                if fresh && global.len() > opts.max_entries {
                    return Err(PeError::GlobalLimit(opts.max_entries));
                }
                body.push(rename(leaf, &global.entries[i].1));
            }
            let c = Clause::new(rename(&r.head, &name), body).expect("atoms");
            clauses.push(c.canonical());
        }
    }
    debug!("specialized {entry}: {} global atom(s), {} clause(s)", global.len(), clauses.len());
    let entry_name = global.entries[first].1.clone();
    Ok(Specialized {
        program: Program::new(clauses),
        entry: rename(entry, &entry_name),
        global,
        use_mgg,
        resultants,
    })
}

/// Answers of a query, and whether some branch hit the depth bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryResult {
    pub answers: Vec<Substitution>,
    pub cutoff: bool,
}

/// All computed answers of `goal` under leftmost selection and clause
/// order, exploring branches of at most `depth` resolution steps.
pub fn run_query(p: &Program, goal: &[Term], depth: usize) -> QueryResult {
    run_query_with(p, goal, depth, usize::MAX)
}

/// As [`run_query`], also giving up (with `cutoff` set) once resolution
/// steps plus answer term nodes exceed `max_steps`.
pub fn run_query_with(p: &Program, goal: &[Term], depth: usize, max_steps: usize) -> QueryResult {
    let (answers, cutoff) = sld::solve(p, goal, depth, max_steps);
    QueryResult { answers, cutoff }
}
