//! Depth-first SLD resolution with destructive bindings and a trail, so a
//! branch costs memory proportional to its length and choice points share
//! structure instead of copying goals.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::syntax::{Program, Substitution, Term};

enum Cell {
    Var(usize),
    App(Rc<str>, Vec<Node>),
}

type Node = Rc<Cell>;

struct Template {
    head: Node,
    body: Vec<Node>,
    vars: usize,
}

/// Compiles `t`, numbering its variables through `names`.
fn compile(t: &Term, names: &mut HashMap<String, usize>) -> Node {
    match t {
        Term::Var(v) => {
            let next = names.len();
            Rc::new(Cell::Var(*names.entry(v.clone()).or_insert(next)))
        }
        Term::Struct(f, args) => Rc::new(Cell::App(
            Rc::from(f.as_str()),
            args.iter().map(|a| compile(a, names)).collect(),
        )),
    }
}

/// A template term with its variables shifted by `base`.
fn instantiate(t: &Node, base: usize) -> Node {
    match &**t {
        Cell::Var(i) => Rc::new(Cell::Var(base + i)),
        Cell::App(_, args) if args.is_empty() => t.clone(),
        Cell::App(f, args) => Rc::new(Cell::App(
            f.clone(),
            args.iter().map(|a| instantiate(a, base)).collect(),
        )),
    }
}

struct Goals {
    atom: Node,
    next: Option<Rc<Goals>>,
}

struct Choice {
    goals: Option<Rc<Goals>>,
    clause: usize,
    trail: usize,
    vars: usize,
    depth: usize,
}

struct Store {
    bindings: Vec<Option<Node>>,
    trail: Vec<usize>,
}

impl Store {
    fn deref(&self, t: &Node) -> Node {
        let mut t = t.clone();
        while let Cell::Var(v) = &*t {
            match &self.bindings[*v] {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &Node) -> bool {
        // Bound terms are DAGs; visiting each shared node once keeps this
        // linear in the DAG rather than in its tree expansion.
        let mut seen: HashSet<*const Cell> = HashSet::new();
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            let t = self.deref(&t);
            match &*t {
                Cell::Var(w) => {
                    if *w == v {
                        return true;
                    }
                }
                Cell::App(_, args) => {
                    if !args.is_empty() && seen.insert(Rc::as_ptr(&t)) {
                        stack.extend(args.iter().cloned());
                    }
                }
            }
        }
        false
    }

    fn bind(&mut self, v: usize, t: Node) {
        self.bindings[v] = Some(t);
        self.trail.push(v);
    }

    /// Unifies goal-side `a` with head-side `b`, whose variables are all
    /// at least `base`. Until a goal variable is bound, goal terms cannot
    /// contain head variables, so binding a head variable to one needs no
    /// occurs check; this keeps deep goal arguments from costing a full
    /// traversal per step.
    fn unify(&mut self, a: &Node, b: &Node, base: usize) -> bool {
        let mut goal_bound = false;
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = stack.pop() {
            let (a, b) = (self.deref(&a), self.deref(&b));
            match (&*a, &*b) {
                (Cell::Var(x), Cell::Var(y)) if x == y => {}
                (_, Cell::Var(y)) if *y >= base && !goal_bound => self.bind(*y, a.clone()),
                (Cell::Var(x), _) => {
                    if self.occurs(*x, &b) {
                        return false;
                    }
                    goal_bound |= *x < base;
                    self.bind(*x, b.clone());
                }
                (_, Cell::Var(y)) => {
                    if self.occurs(*y, &a) {
                        return false;
                    }
                    goal_bound |= *y < base;
                    self.bind(*y, a.clone());
                }
                (Cell::App(f, fa), Cell::App(g, ga)) => {
                    if f != g || fa.len() != ga.len() {
                        return false;
                    }
                    stack.extend(fa.iter().cloned().zip(ga.iter().cloned()));
                }
            }
        }
        true
    }

    fn undo(&mut self, trail: usize, vars: usize) {
        for v in self.trail.drain(trail..) {
            self.bindings[v] = None;
        }
        self.bindings.truncate(vars);
    }

    /// The tree of `t`, or `None` once more than `*budget` nodes are built.
    fn resolve(&self, t: &Node, budget: &mut usize) -> Option<Term> {
        *budget = budget.checked_sub(1)?;
        Some(match &*self.deref(t) {
            Cell::Var(v) => Term::var(format!("_#{v}")),
            Cell::App(f, args) => Term::app(
                f.to_string(),
                args.iter()
                    .map(|a| self.resolve(a, budget))
                    .collect::<Option<_>>()?,
            ),
        })
    }
}

/// Answers, restricted to the variables of `goal` with identity bindings
/// dropped, and whether a branch was cut off. `max_steps` bounds the
/// resolution steps plus the nodes of all answers built.
pub(super) fn solve(
    p: &Program,
    goal: &[Term],
    depth: usize,
    max_steps: usize,
) -> (Vec<Substitution>, bool) {
    let mut table: HashMap<(Rc<str>, usize), Vec<Template>> = HashMap::new();
    for c in p.clauses() {
        let mut names = HashMap::new();
        let head = compile(c.head(), &mut names);
        let body = c.body().iter().map(|b| compile(b, &mut names)).collect();
        let f = c.head().functor().expect("clause head is an atom");
        table.entry((Rc::from(f.name.as_str()), f.arity)).or_default().push(Template {
            head,
            body,
            vars: names.len(),
        });
    }

    let mut names = HashMap::new();
    let atoms: Vec<Node> = goal.iter().map(|a| compile(a, &mut names)).collect();
    let mut query: Vec<(String, usize)> = names.into_iter().collect();
    query.sort_by_key(|(_, i)| *i);
    let mut store = Store {
        bindings: vec![None; query.len()],
        trail: Vec::new(),
    };
    let goals = atoms
        .into_iter()
        .rev()
        .fold(None, |next, atom| Some(Rc::new(Goals { atom, next })));

    let mut answers = Vec::new();
    let mut cutoff = false;
    let mut steps = 0usize;
    let mut stack = vec![Choice {
        goals,
        clause: 0,
        trail: 0,
        vars: store.bindings.len(),
        depth: 0,
    }];
    while let Some(cp) = stack.pop() {
        store.undo(cp.trail, cp.vars);
        let Some(g) = &cp.goals else {
            let mut budget = max_steps - steps;
            let mut pairs = Vec::with_capacity(query.len());
            for (v, i) in &query {
                match store.resolve(&Rc::new(Cell::Var(*i)), &mut budget) {
                    Some(t) if t != Term::Var(v.clone()) => pairs.push((v.clone(), t)),
                    Some(_) => {}
                    None => return (answers, true),
                }
            }
            steps = max_steps - budget;
            answers.push(Substitution::from_pairs(pairs).expect("answer bindings are a substitution"));
            continue;
        };
        if cp.depth >= depth {
            cutoff = true;
            continue;
        }
        let atom = store.deref(&g.atom);
        let Cell::App(f, args) = &*atom else { continue };
        let Some(clauses) = table.get(&(f.clone(), args.len())) else { continue };
        for (i, c) in clauses.iter().enumerate().skip(cp.clause) {
            if steps == max_steps {
                return (answers, true);
            }
            steps += 1;
            let base = store.bindings.len();
            store.bindings.resize(base + c.vars, None);
            if store.unify(&atom, &instantiate(&c.head, base), base) {
                if i + 1 < clauses.len() {
                    stack.push(Choice {
                        clause: i + 1,
                        goals: cp.goals.clone(),
                        ..cp
                    });
                }
                let goals = c
                    .body
                    .iter()
                    .rev()
                    .fold(g.next.clone(), |next, b| {
                        Some(Rc::new(Goals {
                            atom: instantiate(b, base),
                            next,
                        }))
                    });
                stack.push(Choice {
                    goals,
                    clause: 0,
                    trail: store.trail.len(),
                    vars: store.bindings.len(),
                    depth: cp.depth + 1,
                });
                break;
            }
            store.undo(cp.trail, cp.vars);
        }
    }
    (answers, cutoff)
}
